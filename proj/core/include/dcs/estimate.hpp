#pragma once

#include "dcs/deriv.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <vector>

namespace dcs {

struct ScoringOptions {
  double delta = 1e-6;          // relative step tolerance
  int max_iter = 200;
  int max_halvings = 30;
  double nu_min = 0.5;
  double nu_max = 1000.0;
  double max_condition = 1e12;
  bool enforce_invertibility = false;
  double invertibility_margin = 1e-4;
  std::optional<Vector> mu_init;
  /// Parameters held at their starting value (packed order). Empty means all free.
  std::vector<bool> fixed;
};

struct IterationRecord {
  double relative_step = 0.0;
  double loglik = 0.0;
  int halvings = 0;
};

struct EstimationResult {
  PackedTheta theta_hat;
  bool gaussian = false;
  double loglik = 0.0;
  Matrix info;
  Vector std_err;
  int iterations = 0;
  bool converged = false;
  bool info_positive_definite = false;
  int step_halvings = 0;
  Eigen::Index length = 0;
  std::vector<IterationRecord> trace;

  [[nodiscard]] ModelParams params() const { return unpack(theta_hat, gaussian); }
  /// Number of estimated parameters (nu excluded in Gaussian mode).
  [[nodiscard]] Eigen::Index free_parameters() const;
};

/// Thrown when the free block of the information matrix is singular or
/// ill-conditioned; carries the iterate reached so far.
class SingularInformation : public std::runtime_error {
 public:
  SingularInformation(const std::string& what, PackedTheta iterate, double condition)
      : std::runtime_error(what), iterate_(std::move(iterate)), condition_(condition) {}
  [[nodiscard]] const PackedTheta& iterate() const { return iterate_; }
  [[nodiscard]] double condition() const { return condition_; }

 private:
  PackedTheta iterate_;
  double condition_;
};

/**
 * Fisher scoring theta += I^{-1} s over the free parameters.
 *
 * Each proposal is halved (up to max_halvings) until it is admissible
 * (nu within [nu_min, nu_max], Omega PD, rho(Phi) < 1, optionally the
 * empirical invertibility constraint) with finite loglik no lower than the
 * current one by more than 1e-8. A nu proposal beyond the bounds is clamped
 * to the bound; when nu sits on a bound and the step points outward it is
 * held fixed for that iteration. Returns the best-loglik iterate.
 */
[[nodiscard]] EstimationResult fisher_scoring(const Matrix& y, const PackedTheta& theta0, bool gaussian,
                                              const ScoringOptions& options = {});

/// Gaussian quasi-ML fit; moment starts (mean, covariance, 0.8 I, 0.5 I) if scoring fails.
[[nodiscard]] ModelParams init_gaussian_qml(const Matrix& y, const ScoringOptions& options = {});

/// Moment starting values used by init_gaussian_qml.
[[nodiscard]] ModelParams moment_start(const Matrix& y);

/// nu from the average marginal excess kurtosis k: (4k + 6)/k in [4.5, 200]; k <= 0 gives 100.
[[nodiscard]] double init_nu(const Matrix& std_resid);
[[nodiscard]] double nu_from_kurtosis(double excess_kurtosis);

/**
 * Default pipeline: Gaussian QML, kurtosis-based nu, Omega start rescaled to
 * (nu - 2)/nu times the QML covariance (the t scale with matching covariance),
 * then Fisher scoring. In Gaussian mode the QML fit is refined directly.
 */
[[nodiscard]] EstimationResult estimate(const Matrix& y, bool gaussian, const ScoringOptions& options = {});

/// sqrt(diag(info^{-1})); in Gaussian mode the nu entry is NaN and the nu row is dropped before inverting.
[[nodiscard]] Vector standard_errors(const Matrix& info, bool gaussian = false);

struct InvertibilityCheck {
  double value = 0.0;
  bool feasible = false;
};

/// (1/T) sum_t ln||Phi + K C_t|| along the filtered path (spectral norm); feasible iff value < -margin.
[[nodiscard]] InvertibilityCheck empirical_invertibility(const ModelParams& params, const Matrix& y,
                                                         double margin,
                                                         const std::optional<Vector>& mu_init = std::nullopt);

/// Structured theta, std_err, loglik, aic, bic and the convergence trace.
[[nodiscard]] nlohmann::json to_json(const EstimationResult& result);

}  // namespace dcs

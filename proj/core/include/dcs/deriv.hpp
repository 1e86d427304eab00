#pragma once

#include "dcs/filter.hpp"

#include <optional>
#include <vector>

namespace dcs {

/**
 * Direct partial derivatives of one log-likelihood contribution:
 *   alpha = d ell / d nu,
 *   beta  = d ell / d vech(Omega),
 *   sigma = d ell / d mu = ((nu+N)/nu) (1/w) Omega^{-1} v.
 * In Gaussian mode alpha is 0 and sigma = Omega^{-1} v.
 */
struct ScorePartials {
  double alpha = 0.0;
  Vector beta;
  Vector sigma;
};

[[nodiscard]] ScorePartials score_partials(const Vector& v, const ScaleFactor& scale, double nu, double w,
                                           double b);
[[nodiscard]] ScorePartials score_partials(const Vector& v, const Matrix& omega_scale, double nu, double w,
                                           double b);

/**
 * First-order building blocks of the derivative recursions at one time step.
 *
 *   a   = du/dnu                       (N)
 *   B   = du/dvech(Omega)'             (N x N(N+1)/2)
 *   C   = du/dmu'                      (N x N)  = 2(1-b)^2/nu v v'Omega^{-1} - (1-b) I
 *   Cst = d(Phi(mu-omega))/domega' + I = I - Phi
 *   D   = (mu - omega)' kron I_N       (N x N^2)
 *   E   = u' kron I_N                  (N x N^2)
 */
struct UJacobians {
  Vector a;
  Matrix B;
  Matrix C;
  Matrix Cst;
  Matrix D;
  Matrix E;
};

[[nodiscard]] UJacobians u_jacobians(const Vector& v, const Matrix& omega_inv, double nu, double w, double b,
                                     const Vector& mu, const Vector& omega, const Matrix& phi,
                                     const Vector& u);

/// One step of the location Jacobian recursion: J_{t+1} = (Phi + K C_t) J_t + forcing_t.
[[nodiscard]] Matrix propagate_jacobian(const UJacobians& jac, const ModelParams& params, const Matrix& j_t);

/// d mu_{1|0} / d theta: identity in the omega columns when mu_{1|0} = omega, zero for a fixed start.
[[nodiscard]] Matrix initial_jacobian(Eigen::Index n, bool start_at_mean);

/**
 * Location Jacobians dmu_{t|t-1}/dtheta' (N x p each, columns in packed theta
 * order) for t = 1..T+1.
 *
 * For nu, vech Omega, vec Phi and vec K these equal d(mu_{t|t-1} - omega)/d.;
 * the omega block is dmu_{t|t-1}/domega' = I + d(mu_{t|t-1} - omega)/domega',
 * which is the quantity driven by the I - Phi forcing.
 */
class DerivPaths {
 public:
  DerivPaths() = default;
  DerivPaths(Eigen::Index n, std::vector<Matrix> jacobians);

  [[nodiscard]] Eigen::Index length() const { return static_cast<Eigen::Index>(jac_.size()); }
  [[nodiscard]] const Matrix& jacobian(Eigen::Index t) const { return jac_.at(static_cast<std::size_t>(t)); }

  [[nodiscard]] Vector dnu(Eigen::Index t) const;
  [[nodiscard]] Matrix dscale(Eigen::Index t) const;
  [[nodiscard]] Matrix dmean(Eigen::Index t) const;
  [[nodiscard]] Matrix dar(Eigen::Index t) const;
  [[nodiscard]] Matrix dgain(Eigen::Index t) const;

 private:
  ThetaLayout layout_{};
  std::vector<Matrix> jac_;
};

struct FilterDerivatives {
  FilterOutput filter;
  DerivPaths paths;
};

[[nodiscard]] FilterDerivatives filter_with_derivatives(const ModelParams& params, const Matrix& y,
                                                        const std::optional<Vector>& mu_init = std::nullopt);

/**
 * Score, conditional information and log-likelihood from one pass.
 * In Gaussian mode the nu row/column is identically zero.
 */
struct ScoreInformation {
  double loglik = 0.0;
  Vector score;                 // sum_t s_t
  Matrix information;           // sum_t I_t, symmetrized
  Matrix contributions;         // T x p matrix of s_t' (filled only on request)
  Eigen::Index length = 0;
};

[[nodiscard]] ScoreInformation score_and_information(const ModelParams& params, const Matrix& y,
                                                     const std::optional<Vector>& mu_init = std::nullopt,
                                                     bool keep_contributions = false);

[[nodiscard]] Vector analytic_score(const ModelParams& params, const Matrix& y,
                                    const std::optional<Vector>& mu_init = std::nullopt);

[[nodiscard]] Matrix conditional_information(const ModelParams& params, const Matrix& y,
                                             const std::optional<Vector>& mu_init = std::nullopt);

/// Outer product of gradients sum_t s_t s_t'.
[[nodiscard]] Matrix outer_product_of_gradients(const ModelParams& params, const Matrix& y,
                                                const std::optional<Vector>& mu_init = std::nullopt);

/**
 * Time-invariant part of I_t: the (nu, vech Omega) blocks embedded in a p x p
 * matrix. The location part is J' ((nu+N)/(nu+N+2)) Omega^{-1} J.
 */
[[nodiscard]] Matrix static_information(double nu, const Matrix& omega_inv);

/// ((nu+N)/(nu+N+2)) Omega^{-1}, or Omega^{-1} in the Gaussian limit.
[[nodiscard]] Matrix location_information_kernel(double nu, const Matrix& omega_inv);

}  // namespace dcs

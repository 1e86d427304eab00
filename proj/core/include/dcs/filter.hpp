#pragma once

#include "dcs/params.hpp"

#include <iosfwd>
#include <optional>

namespace dcs {

/// Winsorized score u = v / w, weight w = 1 + v'Omega^{-1}v / nu, and b = 1 - 1/w.
struct ScoreTriple {
  Vector u;
  double w = 1.0;
  double b = 0.0;
};

/**
 * Score weight for one innovation. nu = +infinity is the Gaussian limit and
 * returns (u = v, w = 1, b = 0).
 *
 * For finite nu the score is bounded: ||u|| <= sqrt(nu * lambda_max(Omega)) / 2.
 */
[[nodiscard]] ScoreTriple score_weight(const Vector& v, const Matrix& omega_inv, double nu);

/**
 * Output of one forward pass. Row k of `mu` is mu_{k+1|k} (0-based), so row 0
 * is the initial location and row T is the one-step-ahead forecast
 * mu_{T+1|T}. The other per-time arrays have T rows.
 */
struct FilterOutput {
  Matrix mu;          // (T+1) x N
  Matrix v;           // T x N innovations y_t - mu_{t|t-1}
  Matrix u;           // T x N winsorized scores
  Vector w;           // T
  Vector b;           // T
  Vector ell;         // T log-likelihood contributions
  Matrix std_resid;   // T x N, L^{-1} v_t with L the lower Cholesky factor of Omega
  double loglik = 0.0;

  [[nodiscard]] Eigen::Index length() const { return v.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return v.cols(); }
};

/**
 * Runs the location recursion over y (T x N, one row per time).
 *
 * The starting value mu_{1|0} defaults to omega. Only nu > 0 and a positive
 * definite Omega are required here; stationarity and det K != 0 are checked
 * by the estimator, since degenerate recursions (K = 0, unit roots) are
 * legitimate things to filter.
 */
[[nodiscard]] FilterOutput filter_pass(const ModelParams& params, const Matrix& y,
                                       const std::optional<Vector>& mu_init = std::nullopt);

/// Same recursion with u_t = v_t and Gaussian log-density, whatever params.dof() is.
[[nodiscard]] FilterOutput gaussian_filter_pass(const ModelParams& params, const Matrix& y,
                                                const std::optional<Vector>& mu_init = std::nullopt);

/// Log of the multivariate t density (or normal, nu = inf) at innovation v.
[[nodiscard]] double loglik_obs(const Vector& v, const Matrix& omega_scale, double nu);
[[nodiscard]] double loglik_obs(const Vector& v, const ScaleFactor& scale, double nu);

/// ln Gamma((nu+N)/2) - ln Gamma(nu/2), stable for large nu.
[[nodiscard]] double log_gamma_ratio(double nu, Eigen::Index n);

/**
 * E||u||^{2s} for Omega = c I_N:
 * (nu c)^s B((N+2s)/2, (nu+2s)/2) / B(N/2, nu/2).
 */
[[nodiscard]] double u_moment(double nu, Eigen::Index n, double c, int s);

/// Cov(u) = nu^2 / ((nu+N)(nu+N+2)) Omega.
[[nodiscard]] Matrix u_covariance(double nu, const Matrix& omega_scale);

/// Columns t, mu_1..mu_N, v_1..v_N, u_1..u_N, w, b, ell.
void write_filter_csv(std::ostream& os, const FilterOutput& out);

}  // namespace dcs

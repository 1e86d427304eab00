#pragma once

#include "dcs/deriv.hpp"

#include <optional>
#include <vector>

namespace dcs {

/**
 * Second partials of u_t and ell_t at one time step, in the local coordinates
 * x = (nu, vech Omega, mu_{t|t-1}) of size L = 1 + N(N+1)/2 + N.
 *
 * `u[i]` is the L x L Hessian of the i-th component of u_t, `ell` the L x L
 * Hessian of the log-likelihood contribution. The named accessors return
 * the individual blocks.
 */
struct UJacobians2 {
  Eigen::Index n = 0;
  std::vector<Matrix> u;
  Matrix ell;

  [[nodiscard]] Eigen::Index local_size() const { return 1 + vech_size(n) + n; }
  [[nodiscard]] Eigen::Index mu_begin() const { return 1 + vech_size(n); }

  /// d^2 u / d nu^2 (N).
  [[nodiscard]] Vector a_prime() const;
  /// d^2 u_i / d vech d vech' (nvech x nvech).
  [[nodiscard]] Matrix B_prime(Eigen::Index i) const;
  /// d^2 u_i / d mu d mu' (N x N).
  [[nodiscard]] Matrix C_prime(Eigen::Index i) const;
  /// d^2 u / d nu d vech' (N x nvech).
  [[nodiscard]] Matrix aB_prime() const;
  /// d^2 u / d nu d mu' (N x N).
  [[nodiscard]] Matrix aC_prime() const;
  /// d^2 u_i / d vech d mu' (nvech x N).
  [[nodiscard]] Matrix BC_prime(Eigen::Index i) const;
};

/// nu = +infinity gives the Gaussian limit: u = v, so every u block is zero.
[[nodiscard]] UJacobians2 second_u_jacobians(const Vector& v, const Matrix& omega_inv, double nu);

/**
 * Second-derivative location paths d^2 mu_{t|t-1} / d theta d theta' for
 * t = 1..T+1, one p x p matrix per location component, stored densely.
 * Since omega enters mu linearly these also equal d^2(mu - omega).
 */
class Deriv2Paths {
 public:
  Deriv2Paths() = default;
  Deriv2Paths(Eigen::Index n, std::vector<std::vector<Matrix>> second);

  [[nodiscard]] Eigen::Index length() const { return static_cast<Eigen::Index>(h_.size()); }
  [[nodiscard]] Eigen::Index dim() const { return n_; }
  /// p x p Hessian of component i of mu at time index t (0-based, t = 0 is mu_{1|0}).
  [[nodiscard]] const Matrix& second(Eigen::Index t, Eigen::Index i) const;

 private:
  Eigen::Index n_ = 0;
  std::vector<std::vector<Matrix>> h_;
};

struct SecondOrderFilter {
  FilterOutput filter;
  DerivPaths paths;
  Deriv2Paths paths2;
  Matrix hessian;  // observed Hessian of the log-likelihood, symmetrized
};

[[nodiscard]] SecondOrderFilter filter_with_second_derivatives(const ModelParams& params, const Matrix& y,
                                                               const std::optional<Vector>& mu_init = std::nullopt);

/// Observed Hessian sum_t d^2 ell_t / d theta d theta' (nu row/column zero in Gaussian mode).
[[nodiscard]] Matrix observed_hessian(const ModelParams& params, const Matrix& y,
                                      const std::optional<Vector>& mu_init = std::nullopt);

}  // namespace dcs

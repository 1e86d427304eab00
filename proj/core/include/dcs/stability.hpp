#pragma once

#include "dcs/params.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dcs {

struct ContractionEstimate {
  double estimate = 0.0;       // MC mean of ln ||X_1|| (spectral norm)
  double se = 0.0;
  double frobenius = 0.0;      // same with the Frobenius norm
  double frobenius_se = 0.0;
  long draws = 0;
};

/**
 * MC estimate of E ln||Phi0 + K0/w (2 S e e' S^{-1} / (nu0 w) - I)|| with
 * e ~ t_nu0(0, I), w = 1 + e'e/nu0 and S the symmetric square root of
 * Omega0. Exact (zero SE) when K0 = 0.
 */
[[nodiscard]] ContractionEstimate contraction_mc(const Matrix& phi0, const Matrix& k0, const Matrix& omega0,
                                                 double nu0, long n_draws, std::uint64_t seed);

/// How a target pair (a, b) = (||Phi0||, ||K0||) is turned into matrices.
enum class Realization {
  /// Phi0 = a I, K0 = -b I. For Omega0 = I this attains the bound
  /// ||Phi0 + K0 M|| <= a + b ||M||, i.e. the worst case over all matrices
  /// with those norms.
  Adversarial,
  /// Phi0 = a I, K0 = b I.
  Scalar,
};

struct RegionCell {
  double phi_norm = 0.0;
  double k_norm = 0.0;
  ContractionEstimate value;
  bool invertible = false;  // estimate + 2 se < 0
};

struct RegionScan {
  int resolution = 0;
  double nu0 = 0.0;
  Realization realization = Realization::Adversarial;
  /// Row-major over (phi index, k index); grid points are (i + 0.5) / resolution.
  std::vector<RegionCell> cells;

  [[nodiscard]] const RegionCell& at(int phi_index, int k_index) const {
    return cells.at(static_cast<std::size_t>(phi_index * resolution + k_index));
  }
};

struct RegionOptions {
  Realization realization = Realization::Adversarial;
  int threads = 1;
};

/// Per-cell RNG seed = splitmix64(seed ^ cell index).
[[nodiscard]] RegionScan region_scan(double nu0, const Matrix& omega0, int resolution, long n_draws,
                                     std::uint64_t seed, const RegionOptions& options = {});

/// Columns phi_norm,k_norm,estimate,se,invertible,frobenius.
void write_region_csv(std::ostream& os, const RegionScan& scan);

struct StartDivergence {
  std::vector<double> distance;  // ||mu_a - mu_b|| for t = 1..T+1
  double rate = 0.0;             // exp(slope) of the log-linear fit
  double r_squared = 0.0;
  Eigen::Index fitted_points = 0;
};

/**
 * Filters y from two starting locations and fits ln||mu_a - mu_b|| = c + t ln rate
 * over the steps where the distance is above `floor` (relative to the initial distance).
 */
[[nodiscard]] StartDivergence two_start_divergence(const ModelParams& params, const Matrix& y, const Vector& mu_a,
                                                   const Vector& mu_b, double floor = 1e-12);

}  // namespace dcs

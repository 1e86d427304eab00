#include "dcs/stability.hpp"

#include "dcs/filter.hpp"
#include "dcs/simulate.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace dcs {

ContractionEstimate contraction_mc(const Matrix& phi0, const Matrix& k0, const Matrix& omega0, double nu0,
                                   long n_draws, std::uint64_t seed) {
  const auto n = phi0.rows();
  if (phi0.cols() != n || k0.rows() != n || k0.cols() != n || omega0.rows() != n || omega0.cols() != n) {
    throw InvalidInput("contraction_mc: dimension mismatch");
  }
  if (!(nu0 > 0.0)) throw InvalidInput("contraction_mc: nu0 must be positive");
  if (n_draws < 1000) throw InvalidInput("contraction_mc needs at least 1000 draws");

  ContractionEstimate out;
  out.draws = n_draws;
  if (k0.isZero(0.0)) {
    out.estimate = std::log(spectral_norm(phi0));
    out.frobenius = std::log(phi0.norm());
    return out;
  }
  const Matrix root = symmetric_sqrt(omega0);
  const Matrix root_inv = root.inverse();
  const Matrix eye = Matrix::Identity(n, n);
  const bool gaussian = std::isinf(nu0);
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0, fsum = 0.0, fsum_sq = 0.0;
  for (long d = 0; d < n_draws; ++d) {
    const Vector e = draw_standard_t(nu0, n, rng);
    Matrix x = phi0 - k0;
    if (!gaussian) {
      const double w = 1.0 + e.squaredNorm() / nu0;
      const Vector se = root * e;
      const Vector sie = root_inv.transpose() * e;
      x = phi0 + (k0 / w) * ((2.0 / (nu0 * w)) * se * sie.transpose() - eye);
    }
    const double a = std::log(spectral_norm(x));
    const double b = std::log(x.norm());
    sum += a;
    sum_sq += a * a;
    fsum += b;
    fsum_sq += b * b;
  }
  const double dn = static_cast<double>(n_draws);
  auto se_of = [dn](double s, double ss) {
    const double mean = s / dn;
    return std::sqrt(std::max(0.0, (ss / dn - mean * mean) * dn / (dn - 1.0)) / dn);
  };
  out.estimate = sum / dn;
  out.se = se_of(sum, sum_sq);
  out.frobenius = fsum / dn;
  out.frobenius_se = se_of(fsum, fsum_sq);
  return out;
}

RegionScan region_scan(double nu0, const Matrix& omega0, int resolution, long n_draws, std::uint64_t seed,
                       const RegionOptions& options) {
  if (resolution < 5) throw InvalidInput("region scan resolution must be at least 5");
  const auto n = omega0.rows();
  const Matrix eye = Matrix::Identity(n, n);
  RegionScan scan;
  scan.resolution = resolution;
  scan.nu0 = nu0;
  scan.realization = options.realization;
  const auto cells = static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
  scan.cells.resize(cells);
  const double sign = options.realization == Realization::Adversarial ? -1.0 : 1.0;
  parallel_for(cells, options.threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / resolution;
    const int j = static_cast<int>(idx) % resolution;
    RegionCell& cell = scan.cells[idx];
    cell.phi_norm = (i + 0.5) / resolution;
    cell.k_norm = (j + 0.5) / resolution;
    cell.value = contraction_mc(cell.phi_norm * eye, sign * cell.k_norm * eye, omega0, nu0, n_draws,
                                splitmix64(seed ^ static_cast<std::uint64_t>(idx)));
    cell.invertible = cell.value.estimate + 2.0 * cell.value.se < 0.0;
  });
  return scan;
}

void write_region_csv(std::ostream& os, const RegionScan& scan) {
  os << "phi_norm,k_norm,estimate,se,invertible,frobenius\n";
  os.precision(17);
  for (const auto& c : scan.cells) {
    os << c.phi_norm << ',' << c.k_norm << ',' << c.value.estimate << ',' << c.value.se << ','
       << (c.invertible ? 1 : 0) << ',' << c.value.frobenius << '\n';
  }
}

StartDivergence two_start_divergence(const ModelParams& params, const Matrix& y, const Vector& mu_a,
                                     const Vector& mu_b, double floor) {
  const FilterOutput fa = filter_pass(params, y, mu_a);
  const FilterOutput fb = filter_pass(params, y, mu_b);
  StartDivergence out;
  const auto rows = fa.mu.rows();
  out.distance.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index t = 0; t < rows; ++t) {
    out.distance[static_cast<std::size_t>(t)] = (fa.mu.row(t) - fb.mu.row(t)).norm();
  }
  const double d0 = out.distance.front();
  if (!(d0 > 0.0)) throw InvalidInput("two_start_divergence: starting points coincide");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  Eigen::Index m = 0;
  for (Eigen::Index t = 0; t < rows; ++t) {
    const double d = out.distance[static_cast<std::size_t>(t)];
    if (!(d > floor * d0)) break;
    const double x = static_cast<double>(t);
    const double ly = std::log(d);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
    syy += ly * ly;
    ++m;
  }
  out.fitted_points = m;
  if (m < 3) {
    out.rate = 0.0;
    out.r_squared = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double dm = static_cast<double>(m);
  const double cxx = sxx - sx * sx / dm;
  const double cxy = sxy - sx * sy / dm;
  const double cyy = syy - sy * sy / dm;
  const double slope = cxy / cxx;
  out.rate = std::exp(slope);
  out.r_squared = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
  return out;
}

}  // namespace dcs

#include "dcs/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace dcs {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Vector draw_standard_t(double nu, Eigen::Index n, Rng& rng) {
  if (!(nu > 0.0)) throw InvalidInput("draw_standard_t: nu must be positive");
  std::normal_distribution<double> normal;
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  if (std::isinf(nu)) return z;
  std::gamma_distribution<double> chi2(0.5 * nu, 2.0);
  return z * std::sqrt(nu / chi2(rng));
}

ModelParams bivariate_design(double nu0) {
  Vector mean(2);
  mean << -3.0, 5.0;
  Matrix ar(2, 2);
  ar << 0.85, 0.0, 0.0, 0.80;
  Matrix gain(2, 2);
  gain << 0.95, 0.05, 0.05, 0.90;
  const Matrix scale = Matrix::Identity(2, 2);
  if (std::isinf(nu0)) return ModelParams::gaussian(mean, scale, ar, gain);
  return ModelParams(nu0, mean, scale, ar, gain);
}

SimOutput simulate(const ModelParams& params0, Eigen::Index T, int burn_in, std::uint64_t seed) {
  if (T < 1 || burn_in < 0) throw InvalidInput("simulate needs T >= 1 and burn_in >= 0");
  const AdmissibilityReport rep = validate(params0);
  if (!rep.nu_positive || !rep.scale_positive_definite) throw InvalidInput("simulate: parameters not admissible");
  if (!rep.stationary) throw InvalidInput("simulate: spectral radius of Phi must be below 1");
  const auto n = params0.dim();
  const ScaleFactor sf = factor_scale(params0.scale());
  const double nu = params0.dof();
  const Vector& omega = params0.mean();

  SimOutput out;
  out.y.resize(T, n);
  out.mu_true.resize(T, n);
  out.seed = seed;
  out.burn_in = burn_in;
  Rng rng(seed);
  Vector mu = omega;
  const Eigen::Index total = T + burn_in;
  for (Eigen::Index s = 0; s < total; ++s) {
    const Vector v = sf.lower * draw_standard_t(nu, n, rng);
    if (s >= burn_in) {
      out.mu_true.row(s - burn_in) = mu.transpose();
      out.y.row(s - burn_in) = (mu + v).transpose();
    }
    const double w = std::isinf(nu) ? 1.0 : 1.0 + v.dot(sf.inverse * v) / nu;
    mu = omega + params0.ar() * (mu - omega) + params0.gain() * (v / w);
  }
  return out;
}

void write_sim_csv(std::ostream& os, const SimOutput& sim) {
  const auto n = sim.y.cols();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",y_" << (i + 1);
  for (Eigen::Index i = 0; i < n; ++i) os << ",mu_" << (i + 1);
  os << '\n';
  os.precision(17);
  for (Eigen::Index t = 0; t < sim.y.rows(); ++t) {
    os << (t + 1);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << sim.y(t, i);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << sim.mu_true(t, i);
    os << '\n';
  }
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < std::min(workers, count); ++k) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct RepResult {
  bool ok = false;
  bool converged = false;
  int iterations = 0;
  Vector theta;
};

}  // namespace

McReport mc_study(const ModelParams& params0, const std::vector<Eigen::Index>& T_list, int M,
                  std::uint64_t base_seed, const McOptions& options) {
  if (T_list.empty() || M < 1) throw InvalidInput("mc_study needs at least one T and M >= 1");
  const AdmissibilityReport rep = validate(params0);
  if (!rep.nu_positive || !rep.scale_positive_definite || !rep.stationary) {
    throw InvalidInput("mc_study: true parameters not admissible");
  }
  const bool gaussian = params0.is_gaussian();
  const Eigen::Index t_max = *std::max_element(T_list.begin(), T_list.end());
  const std::size_t nT = T_list.size();
  const auto reps = static_cast<std::size_t>(M);

  std::vector<RepResult> results(reps * nT);
  parallel_for(reps, options.threads, [&](std::size_t m) {
    const SimOutput sim = simulate(params0, t_max, options.burn_in, base_seed + m);
    for (std::size_t k = 0; k < nT; ++k) {
      RepResult& r = results[m * nT + k];
      try {
        const EstimationResult fit = estimate(sim.y.topRows(T_list[k]), gaussian, options.scoring);
        r.ok = fit.theta_hat.values.allFinite();
        r.converged = fit.converged;
        r.iterations = fit.iterations;
        r.theta = fit.theta_hat.values;
      } catch (const std::exception&) {
        r.ok = false;
      }
    }
  });

  McReport report;
  const ThetaLayout lay{params0.dim()};
  report.names = lay.names();
  report.truth = pack(params0).values;
  report.gaussian = gaussian;
  report.replications = M;
  report.base_seed = base_seed;
  const auto p = lay.size();
  for (std::size_t k = 0; k < nT; ++k) {
    McCell cell;
    cell.T = T_list[k];
    std::vector<const RepResult*> ok;
    std::vector<int> iters;
    for (std::size_t m = 0; m < reps; ++m) {
      const RepResult& r = results[m * nT + k];
      if (r.ok) {
        ok.push_back(&r);
        iters.push_back(r.iterations);
        if (r.converged) ++cell.converged;
      } else {
        ++cell.failures;
      }
    }
    cell.successes = static_cast<int>(ok.size());
    cell.draws.resize(cell.successes, p);
    for (std::size_t i = 0; i < ok.size(); ++i) cell.draws.row(static_cast<Eigen::Index>(i)) = ok[i]->theta.transpose();
    if (cell.successes > 0) {
      const double s = cell.successes;
      cell.estimate = cell.draws.colwise().mean().transpose();
      cell.bias = cell.estimate - report.truth;
      const Matrix err = cell.draws.rowwise() - report.truth.transpose();
      cell.rmse = (err.colwise().squaredNorm().transpose() / s).cwiseSqrt();
      const Matrix dev = cell.draws.rowwise() - cell.estimate.transpose();
      cell.bias_se = s > 1 ? Vector((dev.colwise().squaredNorm().transpose() / (s - 1.0) / s).cwiseSqrt())
                           : Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
      std::sort(iters.begin(), iters.end());
      const std::size_t mid = iters.size() / 2;
      cell.median_iterations = iters.size() % 2 ? iters[mid] : 0.5 * (iters[mid - 1] + iters[mid]);
    } else {
      const Vector nan = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
      cell.estimate = cell.bias = cell.rmse = cell.bias_se = nan;
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

void write_mc_csv(std::ostream& os, const McReport& report) {
  os << "T,parameter,truth,estimate,bias,rmse,bias_se,successes,failures\n";
  os.precision(17);
  for (const auto& c : report.cells) {
    for (std::size_t i = 0; i < report.names.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (report.gaussian && k == ThetaLayout::nu()) continue;
      os << c.T << ',' << report.names[i] << ',' << report.truth(k) << ',' << c.estimate(k) << ',' << c.bias(k)
         << ',' << c.rmse(k) << ',' << c.bias_se(k) << ',' << c.successes << ',' << c.failures << '\n';
    }
  }
}

std::string format_mc_table(const McReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << std::left << std::setw(10) << "" << std::right << std::setw(9) << "truth";
  for (const auto& c : report.cells) os << " | " << std::setw(26) << ("T = " + std::to_string(c.T));
  os << '\n' << std::left << std::setw(10) << "" << std::right << std::setw(9) << "";
  for (std::size_t k = 0; k < report.cells.size(); ++k) {
    os << " | " << std::setw(8) << "Estimate" << ' ' << std::setw(8) << "Bias" << ' ' << std::setw(8) << "RMSE";
  }
  os << '\n';
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (report.gaussian && k == ThetaLayout::nu()) continue;
    os << std::left << std::setw(10) << report.names[i] << std::right << std::setw(9) << report.truth(k);
    for (const auto& c : report.cells) {
      os << " | " << std::setw(8) << c.estimate(k) << ' ' << std::setw(8) << c.bias(k) << ' ' << std::setw(8)
         << c.rmse(k);
    }
    os << '\n';
  }
  os << std::left << std::setw(19) << "failures";
  for (const auto& c : report.cells) os << " | " << std::right << std::setw(26) << c.failures;
  os << '\n';
  return os.str();
}

}  // namespace dcs

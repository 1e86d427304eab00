#pragma once

#include "dcs/estimate.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace dcs {

using Rng = std::mt19937_64;

/// splitmix64 finalizer, used to derive independent substream seeds.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x);

/// z * sqrt(nu / chi2_nu) with z ~ N(0, I_N); nu = +infinity returns z.
[[nodiscard]] Vector draw_standard_t(double nu, Eigen::Index n, Rng& rng);

struct SimOutput {
  Matrix y;        // T x N
  Matrix mu_true;  // T x N, mu_{t|t-1} used to generate y_t
  std::uint64_t seed = 0;
  int burn_in = 0;
};

/**
 * Bivariate Monte-Carlo design: Omega = I, omega = (-3, 5),
 * Phi = diag(0.85, 0.80), K = [0.95 0.05; 0.05 0.90]. nu0 = +infinity gives
 * the Gaussian-mode model.
 */
[[nodiscard]] ModelParams bivariate_design(double nu0);

/// burn_in + T steps from mu = omega; the first burn_in are discarded.
[[nodiscard]] SimOutput simulate(const ModelParams& params0, Eigen::Index T, int burn_in, std::uint64_t seed);

/// Columns t, y_1..y_N, mu_1..mu_N.
void write_sim_csv(std::ostream& os, const SimOutput& sim);

struct McOptions {
  int threads = 1;
  int burn_in = 1000;
  ScoringOptions scoring;
};

struct McCell {
  Eigen::Index T = 0;
  Vector estimate;  // MC mean of theta_hat
  Vector bias;
  Vector rmse;
  Vector bias_se;   // sd(theta_hat) / sqrt(successes)
  int successes = 0;
  int failures = 0;
  int converged = 0;
  double median_iterations = 0.0;
  /// Per-replication estimates (successes x p) in replication order.
  Matrix draws;
};

struct McReport {
  std::vector<std::string> names;
  Vector truth;
  bool gaussian = false;
  int replications = 0;
  std::uint64_t base_seed = 0;
  std::vector<McCell> cells;
};

/**
 * For each replication m the series is simulated once with seed base_seed + m
 * at the longest T; shorter T use its prefix. Each (T, m) task runs
 * estimate(); failures (exceptions) are counted and excluded. Results are
 * reduced in replication order, so the report does not depend on `threads`.
 */
[[nodiscard]] McReport mc_study(const ModelParams& params0, const std::vector<Eigen::Index>& T_list, int M,
                                std::uint64_t base_seed, const McOptions& options = {});

/// Long format: T,parameter,truth,estimate,bias,rmse,bias_se,successes,failures.
void write_mc_csv(std::ostream& os, const McReport& report);
/// Aligned text: one row per parameter, Estimate/Bias/RMSE under each T.
[[nodiscard]] std::string format_mc_table(const McReport& report);

/// Runs fn(i) for i in [0, count) on `threads` workers; fn must write only to slot i.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace dcs

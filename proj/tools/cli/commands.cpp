#include "commands.hpp"

#include "dcs/diagnostics.hpp"
#include "dcs/estimate.hpp"
#include "dcs/io.hpp"
#include "dcs/simulate.hpp"
#include "dcs/stability.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

namespace dcs::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

class Artifacts {
 public:
  Artifacts(const RunConfig& config, std::ostream& log) : config_(config), log_(log), dir_(config.out_dir) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os(dir_ / name);
    if (!os) throw std::runtime_error("cannot write '" + (dir_ / name).string() + "'");
    names_.push_back(name);
    log_ << "wrote " << (dir_ / name).string() << '\n';
    return os;
  }

  /// JSON artifacts carry the config hash and seed.
  void json(const std::string& name, nlohmann::json j) {
    j["config_hash"] = config_hash(config_);
    j["seed"] = config_.seed;
    open(name) << j.dump(2) << '\n';
  }

  void manifest() {
    nlohmann::json m;
    m["command"] = config_.command;
    m["config"] = to_json(config_);
    m["config_hash"] = config_hash(config_);
    m["seed"] = config_.seed;
    m["version"] = kVersion;
    m["artifacts"] = names_;
    std::ofstream os(dir_ / "manifest.json");
    os << m.dump(2) << '\n';
  }

 private:
  const RunConfig& config_;
  std::ostream& log_;
  fs::path dir_;
  std::vector<std::string> names_;
};

ScoringOptions scoring_options(const RunConfig& c) {
  ScoringOptions opt;
  opt.delta = c.delta;
  opt.max_iter = c.max_iter;
  opt.enforce_invertibility = c.enforce_invertibility;
  return opt;
}

ModelParams design_params(const RunConfig& c) {
  if (!c.params.empty()) {
    ModelParams p = load_params(c.params);
    if (c.gaussian) return p.as_gaussian();
    if (c.nu0) return p.with_dof(*c.nu0);
    return p;
  }
  return bivariate_design(c.gaussian ? std::numeric_limits<double>::infinity() : effective_nu0(c));
}

Matrix load_series(const RunConfig& c) { return load_csv(c.input, c.columns).values; }

/// Parameters from --params, or a fresh fit of the input series.
ModelParams params_or_fit(const RunConfig& c, const Matrix& y, std::ostream& log) {
  if (!c.params.empty()) {
    ModelParams p = load_params(c.params);
    return c.gaussian ? p.as_gaussian() : p;
  }
  log << "no --params given; estimating from the input series\n";
  return estimate(y, c.gaussian, scoring_options(c)).params();
}

nlohmann::json portmanteau_json(const Matrix& resid, int max_lag) {
  nlohmann::json rows = nlohmann::json::array();
  for (int m = 1; m <= max_lag; ++m) {
    const PortmanteauResult r = portmanteau(resid, m);
    rows.push_back({{"lag", m}, {"Q", r.q}, {"df", r.df}, {"p_value", r.p_value}});
  }
  return rows;
}

nlohmann::json criteria_row(const std::string& model, const EstimationResult& fit) {
  const InformationCriteria ic = information_criteria(fit.loglik, fit.free_parameters(), fit.length);
  return {{"model", model},
          {"loglik", fit.loglik},
          {"n_params", fit.free_parameters()},
          {"aic", ic.aic},
          {"bic", ic.bic},
          {"converged", fit.converged}};
}

// The omega rows of the information against every other block vanish only
// asymptotically; report how far from zero they are in this sample, on the
// correlation scale I_ij / sqrt(I_ii I_jj).
nlohmann::json omega_cross_json(const Matrix& info, Eigen::Index n) {
  const ThetaLayout lay{n};
  auto max_corr = [&](Eigen::Index c0, Eigen::Index c1) {
    double m = 0.0;
    for (Eigen::Index i = lay.mean_begin(); i < lay.ar_begin(); ++i) {
      for (Eigen::Index j = c0; j < c1; ++j) {
        const double d = info(i, i) * info(j, j);
        if (d > 0.0) m = std::max(m, std::abs(info(i, j)) / std::sqrt(d));
      }
    }
    return m;
  };
  return {{"nu_vech", max_corr(0, lay.mean_begin())}, {"Phi_K", max_corr(lay.ar_begin(), lay.size())}};
}

void cmd_simulate(const RunConfig& c, Artifacts& out) {
  const ModelParams p = design_params(c);
  const SimOutput sim = simulate(p, c.T, c.burn_in, c.seed);
  auto os = out.open("sim.csv");
  write_sim_csv(os, sim);
  out.json("params.json", {{"params", to_json(p)}, {"T", c.T}, {"burn_in", c.burn_in}});
}

void cmd_estimate(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const Matrix y = load_series(c);
  const ScoringOptions opt = scoring_options(c);
  const EstimationResult fit = estimate(y, c.gaussian, opt);
  log << "loglik " << fit.loglik << " after " << fit.iterations << " iterations"
      << (fit.converged ? "" : " (not converged)") << '\n';
  const ModelParams p = fit.params();
  const FilterOutput f = filter_pass(p, y, opt.mu_init);
  out.json("estimate.json", to_json(fit));
  {
    auto os = out.open("filter.csv");
    write_filter_csv(os, f);
  }

  // Diagnostics read the fit; they never feed back into it.
  nlohmann::json diag;
  diag["portmanteau"] = {{"u", portmanteau_json(f.u, c.pm_lags)},
                         {"v", portmanteau_json(f.v, c.pm_lags)},
                         {"standardized", portmanteau_json(f.std_resid, c.pm_lags)}};
  nlohmann::json criteria = nlohmann::json::array();
  criteria.push_back(criteria_row(c.gaussian ? "Gaussian" : "DCS-t", fit));
  if (!c.gaussian) {
    try {
      criteria.push_back(criteria_row("Gaussian", estimate(y, true, opt)));
    } catch (const std::exception& e) {
      criteria.push_back({{"model", "Gaussian"}, {"error", e.what()}});
    }
  }
  diag["information_criteria"] = criteria;
  const InvertibilityCheck inv = empirical_invertibility(p, y, 1e-4, opt.mu_init);
  diag["empirical_invertibility"] = {{"value", inv.value}, {"feasible", inv.feasible}};
  diag["spectral_radius_Phi"] = spectral_radius(p.ar());
  diag["omega_cross_information"] = omega_cross_json(fit.info, p.dim());
  out.json("diagnostics.json", diag);
}

void cmd_filter(const RunConfig& c, Artifacts& out) {
  const Matrix y = load_series(c);
  ModelParams p = load_params(c.params);
  if (c.gaussian) p = p.as_gaussian();
  const FilterOutput f = filter_pass(p, y);
  {
    auto os = out.open("filter.csv");
    write_filter_csv(os, f);
  }
  out.json("filter.json", {{"loglik", f.loglik}, {"T", f.length()}, {"params", to_json(p)}});
}

void cmd_forecast(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const Matrix y = load_series(c);
  const ModelParams p = params_or_fit(c, y, log);
  const FilterOutput f = filter_pass(p, y);
  const Matrix path = forecast(p, f.mu.row(f.length()).transpose(), c.horizon);
  auto os = out.open("forecast.csv");
  write_forecast_csv(os, path);
  out.json("forecast.json", {{"params", to_json(p)}, {"horizon", c.horizon}});
}

void cmd_irf(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const Matrix y = load_series(c);
  const ModelParams p = params_or_fit(c, y, log);
  const FilterOutput f = filter_pass(p, y);
  const IrfResult irf = local_projection_irf(f, c.horizon, {}, c.shock_scale);
  auto os = out.open("irf.csv");
  write_irf_csv(os, irf);
  out.json("irf.json", {{"params", to_json(p)}, {"horizon", c.horizon}, {"shock_scale", c.shock_scale}});
}

void cmd_invertibility(const RunConfig& c, Artifacts& out) {
  RegionOptions opt;
  opt.realization = c.realization == "scalar" ? Realization::Scalar : Realization::Adversarial;
  opt.threads = effective_threads(c);
  const double nu0 = c.gaussian ? std::numeric_limits<double>::infinity() : effective_nu0(c);
  const RegionScan scan = region_scan(nu0, Matrix::Identity(2, 2), c.grid, c.draws, c.seed, opt);
  {
    auto os = out.open("region.csv");
    write_region_csv(os, scan);
  }
  int inside = 0;
  for (const auto& cell : scan.cells) inside += cell.invertible ? 1 : 0;
  out.json("region.json", {{"nu0", c.gaussian ? nlohmann::json(nullptr) : nlohmann::json(nu0)},
                           {"resolution", c.grid},
                           {"draws", c.draws},
                           {"realization", c.realization},
                           {"invertible_cells", inside},
                           {"total_cells", scan.cells.size()}});
}

void cmd_mc_study(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const ModelParams p = design_params(c);
  McOptions opt;
  opt.threads = effective_threads(c);
  opt.burn_in = c.burn_in;
  opt.scoring = scoring_options(c);
  std::vector<Eigen::Index> lengths(c.T_list.begin(), c.T_list.end());
  const McReport report = mc_study(p, lengths, c.M, c.seed, opt);
  {
    auto os = out.open("mc.csv");
    write_mc_csv(os, report);
  }
  const std::string table = format_mc_table(report);
  out.open("mc_table.txt") << table;
  log << table;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    cells.push_back({{"T", cell.T},
                     {"successes", cell.successes},
                     {"failures", cell.failures},
                     {"converged", cell.converged},
                     {"median_iterations", cell.median_iterations}});
  }
  out.json("mc.json", {{"params", to_json(p)}, {"M", c.M}, {"cells", cells}});
}

}  // namespace

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open parameter file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("theta")) return params_from_json(j.at("theta"));
  return params_from_json(j);
}

void run(const RunConfig& c, std::ostream& log) {
  validate(c);
  log << "command " << c.command << ", config hash " << config_hash(c) << ", seed " << c.seed << '\n';
  Artifacts out(c, log);
  if (c.command == "simulate") {
    cmd_simulate(c, out);
  } else if (c.command == "estimate") {
    cmd_estimate(c, out, log);
  } else if (c.command == "filter") {
    cmd_filter(c, out);
  } else if (c.command == "forecast") {
    cmd_forecast(c, out, log);
  } else if (c.command == "irf") {
    cmd_irf(c, out, log);
  } else if (c.command == "invertibility") {
    cmd_invertibility(c, out);
  } else if (c.command == "mc-study") {
    cmd_mc_study(c, out, log);
  }
  out.manifest();
}

int run_guarded(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::string type;
  std::string message;
  int code = 0;
  try {
    run(c, err);
    return 0;
  } catch (const InvalidInput& e) {
    type = "invalid_input";
    message = e.what();
    code = 2;
  } catch (const nlohmann::json::exception& e) {
    type = "invalid_input";
    message = e.what();
    code = 2;
  } catch (const SingularInformation& e) {
    type = "singular_information";
    message = e.what();
    code = 3;
  } catch (const NotPositiveDefinite& e) {
    type = "not_positive_definite";
    message = e.what();
    code = 3;
  } catch (const std::exception& e) {
    type = "error";
    message = e.what();
    code = 1;
  }
  if (c.json_errors) {
    out << nlohmann::json{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
  } else {
    err << "error: " << message << '\n';
  }
  return code;
}

}  // namespace dcs::cli

#include "commands.hpp"
#include "run_config.hpp"

#include "dcs/linalg.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>

namespace {

using dcs::cli::RunConfig;

// Binds CLI options to a scratch RunConfig; only options given on the
// command line are copied over the config file values.
class Flags {
 public:
  Flags(CLI::App* app, std::set<std::string> wanted) : app_(app), wanted_(std::move(wanted)) {}

  template <class T>
  void add(const std::string& name, T RunConfig::*field, const std::string& help, bool list = false) {
    if (!wanted_.count(name)) return;
    CLI::Option* opt = app_->add_option("--" + name, values_.*field, help);
    if (list) opt->delimiter(',');
    bind(opt, [this, field](RunConfig& c) { c.*field = values_.*field; });
  }

  void flag(const std::string& name, bool RunConfig::*field, const std::string& help) {
    if (!wanted_.count(name)) return;
    bind(app_->add_flag("--" + name, values_.*field, help), [this, field](RunConfig& c) { c.*field = values_.*field; });
  }

  void nu0() {
    if (!wanted_.count("nu0")) return;
    CLI::Option* opt = app_->add_option("--nu0", nu0_, "Degrees of freedom")->check(CLI::PositiveNumber);
    bind(opt, [this](RunConfig& c) { c.nu0 = nu0_; });
  }

  void apply(RunConfig& c) const {
    for (const auto& [opt, fn] : bindings_) {
      if (opt->count() > 0) fn(c);
    }
  }

 private:
  void bind(CLI::Option* opt, std::function<void(RunConfig&)> fn) { bindings_.emplace_back(opt, std::move(fn)); }

  CLI::App* app_;
  std::set<std::string> wanted_;
  RunConfig values_;
  double nu0_ = 0.0;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> bindings_;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::unique_ptr<Flags> flags;
  std::string config_path;
};

RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dcs::InvalidInput("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw dcs::InvalidInput("config '" + path + "' is not valid JSON: " + std::string(e.what()));
  }
  return dcs::cli::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score-driven multivariate location filter: estimation, filtering and diagnostics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  const std::set<std::string> common{"out-dir", "json-errors"};
  const std::set<std::string> scoring{"delta", "max-iter", "enforce-invertibility", "gaussian"};
  auto make = [&](std::initializer_list<std::string> names, bool with_scoring) {
    std::set<std::string> s = common;
    s.insert(names);
    if (with_scoring) s.insert(scoring.begin(), scoring.end());
    return s;
  };
  const std::vector<std::tuple<std::string, std::string, std::set<std::string>>> specs{
      {"simulate", "Simulate a series from a parameter file or the bivariate design",
       make({"params", "nu0", "gaussian", "T", "burn-in", "seed"}, false)},
      {"estimate", "Fit the model by Fisher scoring and write diagnostics",
       make({"input", "columns", "pm-lags"}, true)},
      {"filter", "Run the filter at given parameters", make({"input", "columns", "params", "gaussian"}, false)},
      {"forecast", "Multi-step location forecasts", make({"input", "columns", "params", "horizon"}, true)},
      {"irf", "Local-projection impulse responses",
       make({"input", "columns", "params", "horizon", "shock-scale"}, true)},
      {"invertibility", "Monte-Carlo invertibility region scan",
       make({"nu0", "gaussian", "grid", "draws", "seed", "threads", "realization"}, false)},
      {"mc-study", "Monte-Carlo bias/RMSE study",
       make({"params", "nu0", "T-list", "M", "seed", "threads", "burn-in"}, true)},
  };

  std::vector<Command> commands;
  for (const auto& [name, blurb, wanted] : specs) {
    Command cmd;
    cmd.name = name;
    cmd.app = app.add_subcommand(name, blurb);
    cmd.flags = std::make_unique<Flags>(cmd.app, wanted);
    commands.push_back(std::move(cmd));
  }
  for (auto& cmd : commands) {
    Flags& f = *cmd.flags;
    cmd.app->add_option("--config", cmd.config_path, "JSON run configuration; flags override it");
    f.add("input", &RunConfig::input, "CSV file with a header row");
    f.add("columns", &RunConfig::columns, "Comma-separated columns to use (default: all)", true);
    f.add("params", &RunConfig::params, "Parameter JSON (or an estimate.json)");
    f.nu0();
    f.flag("gaussian", &RunConfig::gaussian, "Gaussian-mode model (nu = infinity)");
    f.add("delta", &RunConfig::delta, "Relative step tolerance for Fisher scoring");
    f.add("max-iter", &RunConfig::max_iter, "Maximum scoring iterations");
    f.flag("enforce-invertibility", &RunConfig::enforce_invertibility,
           "Reject scoring steps that violate the empirical invertibility condition");
    f.add("seed", &RunConfig::seed, "RNG seed");
    f.add("horizon", &RunConfig::horizon, "Forecast or IRF horizon");
    f.add("pm-lags", &RunConfig::pm_lags, "Largest portmanteau lag");
    f.add("grid", &RunConfig::grid, "Region-scan grid points per axis");
    f.add("draws", &RunConfig::draws, "Monte-Carlo draws per grid cell");
    f.add("T", &RunConfig::T, "Series length");
    f.add("burn-in", &RunConfig::burn_in, "Discarded simulation steps");
    f.add("M", &RunConfig::M, "Monte-Carlo replications");
    f.add("T-list", &RunConfig::T_list, "Comma-separated series lengths", true);
    f.add("realization", &RunConfig::realization, "Grid realization: adversarial or scalar");
    f.add("shock-scale", &RunConfig::shock_scale, "Shock size for impulse responses");
    f.add("threads", &RunConfig::threads, "Worker threads (0 = all cores)");
    f.add("out-dir", &RunConfig::out_dir, "Directory for artifacts");
    f.flag("json-errors", &RunConfig::json_errors, "Print errors as JSON on stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    RunConfig config;
    try {
      if (!cmd.config_path.empty()) config = read_config_file(cmd.config_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
    if (!config.command.empty() && config.command != cmd.name) {
      std::cerr << "error: config is for '" << config.command << "', not '" << cmd.name << "'\n";
      return 2;
    }
    cmd.flags->apply(config);
    config.command = cmd.name;
    return dcs::cli::run_guarded(config, std::cout, std::cerr);
  }
  return 1;
}

#include "run_config.hpp"

#include "dcs/linalg.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

namespace dcs::cli {

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands{"simulate", "estimate",      "filter",  "forecast",
                                                 "irf",      "invertibility", "mc-study"};
  return commands;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["input"] = c.input;
  j["columns"] = c.columns;
  j["params"] = c.params;
  j["nu0"] = c.nu0 ? nlohmann::json(*c.nu0) : nlohmann::json(nullptr);
  j["gaussian"] = c.gaussian;
  j["enforce_invertibility"] = c.enforce_invertibility;
  j["delta"] = c.delta;
  j["max_iter"] = c.max_iter;
  j["seed"] = c.seed;
  j["horizon"] = c.horizon;
  j["pm_lags"] = c.pm_lags;
  j["grid"] = c.grid;
  j["draws"] = c.draws;
  j["T"] = c.T;
  j["burn_in"] = c.burn_in;
  j["M"] = c.M;
  j["T_list"] = c.T_list;
  j["realization"] = c.realization;
  j["shock_scale"] = c.shock_scale;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir;
  j["json_errors"] = c.json_errors;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  RunConfig c;
  const nlohmann::json defaults = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw InvalidInput("unknown config key '" + key + "'");
  }
  auto get = [&j](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw InvalidInput(std::string("config key '") + key + "' has the wrong type");
    }
  };
  get("command", c.command);
  get("input", c.input);
  get("columns", c.columns);
  get("params", c.params);
  if (j.contains("nu0") && !j.at("nu0").is_null()) {
    double nu = 0.0;
    get("nu0", nu);
    c.nu0 = nu;
  }
  get("gaussian", c.gaussian);
  get("enforce_invertibility", c.enforce_invertibility);
  get("delta", c.delta);
  get("max_iter", c.max_iter);
  get("seed", c.seed);
  get("horizon", c.horizon);
  get("pm_lags", c.pm_lags);
  get("grid", c.grid);
  get("draws", c.draws);
  get("T", c.T);
  get("burn_in", c.burn_in);
  get("M", c.M);
  get("T_list", c.T_list);
  get("realization", c.realization);
  get("shock_scale", c.shock_scale);
  get("threads", c.threads);
  get("out_dir", c.out_dir);
  get("json_errors", c.json_errors);
  return c;
}

void validate(const RunConfig& c) {
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end()) {
    throw InvalidInput("unknown command '" + c.command + "'");
  }
  const bool needs_input = c.command == "estimate" || c.command == "filter" || c.command == "forecast" ||
                           c.command == "irf";
  if (needs_input && c.input.empty()) throw InvalidInput(c.command + " requires --input");
  if (c.command == "filter" && c.params.empty()) throw InvalidInput("filter requires --params");
  if (c.nu0 && !(*c.nu0 > 0.0)) throw InvalidInput("nu0 must be positive");
  if (c.gaussian && c.nu0) throw InvalidInput("--gaussian and --nu0 are mutually exclusive");
  if (!(c.delta > 0.0)) throw InvalidInput("delta must be positive");
  if (c.max_iter < 1) throw InvalidInput("max_iter must be at least 1");
  if (c.horizon < (c.command == "irf" ? 0 : 1)) throw InvalidInput("horizon is out of range");
  if (c.pm_lags < 1) throw InvalidInput("pm_lags must be at least 1");
  if (c.grid < 5) throw InvalidInput("grid must be at least 5");
  if (c.draws < 1000) throw InvalidInput("draws must be at least 1000");
  if (c.T < 1) throw InvalidInput("T must be at least 1");
  if (c.burn_in < 0) throw InvalidInput("burn_in must be non-negative");
  if (c.M < 1) throw InvalidInput("M must be at least 1");
  if (c.T_list.empty() || std::any_of(c.T_list.begin(), c.T_list.end(), [](long t) { return t < 1; })) {
    throw InvalidInput("T_list must be a non-empty list of positive lengths");
  }
  if (c.realization != "adversarial" && c.realization != "scalar") {
    throw InvalidInput("realization must be 'adversarial' or 'scalar'");
  }
  if (c.threads < 0) throw InvalidInput("threads must be non-negative");
  if (c.out_dir.empty()) throw InvalidInput("out_dir must not be empty");
}

double effective_nu0(const RunConfig& c) {
  if (c.nu0) return *c.nu0;
  return c.command == "invertibility" ? 7.0 : 5.0;
}

int effective_threads(const RunConfig& c) {
  if (c.threads > 0) return c.threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string config_hash(const RunConfig& c) {
  nlohmann::json j = to_json(c);
  j.erase("out_dir");
  j.erase("threads");
  j.erase("json_errors");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dcs::cli

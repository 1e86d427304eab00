#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcs::cli {

struct RunConfig {
  std::string command;
  std::string input;
  std::vector<std::string> columns;
  std::string params;  // path to a parameter JSON (or an estimate.json)
  std::optional<double> nu0;
  bool gaussian = false;
  bool enforce_invertibility = false;
  double delta = 1e-6;
  int max_iter = 200;
  std::uint64_t seed = 42;
  int horizon = 10;
  int pm_lags = 4;
  int grid = 20;
  long draws = 10000;
  long T = 1000;
  int burn_in = 1000;
  int M = 100;
  std::vector<long> T_list{250, 500, 1000};
  std::string realization = "adversarial";
  double shock_scale = 1.0;
  int threads = 0;  // 0: hardware concurrency
  std::string out_dir = ".";
  bool json_errors = false;
};

[[nodiscard]] const std::vector<std::string>& known_commands();

/// Rejects unknown keys and wrongly typed values.
[[nodiscard]] RunConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

/// Throws dcs::InvalidInput naming the first offending field.
void validate(const RunConfig& config);

/// nu0 when given, otherwise the command's default (7 for invertibility, 5 elsewhere).
[[nodiscard]] double effective_nu0(const RunConfig& config);
[[nodiscard]] int effective_threads(const RunConfig& config);

/// FNV-1a over the canonical JSON of the fields that affect numeric output
/// (out_dir, threads and json_errors excluded), as 16 hex digits.
[[nodiscard]] std::string config_hash(const RunConfig& config);

}  // namespace dcs::cli

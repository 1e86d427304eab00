#pragma once

#include "run_config.hpp"

#include "dcs/params.hpp"

#include <iosfwd>
#include <string>

namespace dcs::cli {

/// Executes a validated config, writing artifacts under config.out_dir. Throws on failure.
void run(const RunConfig& config, std::ostream& log);

/**
 * Validates and runs, mapping failures to exit codes: 2 bad input,
 * 3 numerical failure, 1 anything else. With json_errors the error is
 * printed to `out` as {"error": {"type", "message"}}, otherwise to `err`.
 */
int run_guarded(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parameter JSON, or the "theta" member of an estimate.json.
[[nodiscard]] ModelParams load_params(const std::string& path);

}  // namespace dcs::cli

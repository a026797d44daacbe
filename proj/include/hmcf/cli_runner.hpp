#pragma once

#include "hmcf/run_config.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hmcf {

/// Command-line overrides, `key -> value` with config-file syntax for values.
using Overrides = std::map<std::string, std::string>;

RunConfig resolve_config(const std::string& config_path, const Overrides& overrides);

// Exit codes:
//   check:      0 pass, 5 warnings only, 4 malformed config
//   flow:       0 Converged, 1 MaxTimeReached, 2 InvariantViolation (also
//               inadmissible initial data), 3 BlowUp, 4 malformed config,
//               5 refused under strict_conditions
//   stationary: 0 solved, 6 solver failure, 4 malformed config
//   plot:       0 ok, 4 malformed or missing diagnostics
//   sweep:      max over the individual flow exit codes
int cmd_check(const std::string& config_path, const Overrides& overrides, std::ostream& out);
int cmd_flow(const std::string& config_path, const Overrides& overrides, std::ostream& out);
int cmd_stationary(const std::string& config_path, const Overrides& overrides,
                   const std::string& guess, std::ostream& out);
int cmd_plot(const std::string& diagnostics_path, std::ostream& out);
int cmd_sweep(const std::vector<std::string>& config_paths, std::ostream& out);

}  // namespace hmcf

#pragma once

#include "hmcf/flow_engine.hpp"

#include <iosfwd>
#include <string>

namespace hmcf {

struct ConfigError : std::runtime_error {
  ConfigError(std::string msg, int line_number)
      : std::runtime_error(std::move(msg)), line(line_number) {}
  int line;  // 1-based; 0 when not tied to a line
};

/// Flat key-value run description. Every key is typed; unknown keys are
/// rejected so typos cannot silently change a run.
struct RunConfig {
  int dim = 0;
  int resolution = 0;
  std::string f_text;
  double R1 = 0.0, R2 = 0.0;

  enum class InitialKind { Auto, Radius, Path };
  InitialKind initial_kind = InitialKind::Auto;
  double initial_radius = 0.0;
  std::string initial_path;

  double dt = 0.0;
  DtPolicy dt_policy = DtPolicy::Fixed;
  double t_max = 0.0;
  double stationarity_tol = 0.0;  // 0 = dimension default
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int snapshot_every = 100;
  bool strict_conditions = false;
};

/// Accepted lines: blank, '#' comments, and `key = value`. Strings are
/// double-quoted; `initial` also accepts the bare word auto or a number.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

/// Structural validation (ranges, parity, the dt hard cap). F is validated
/// separately when the expression is parsed.
void validate_run_config(const RunConfig& config);

/// Field files: header "dim resolution", then one node value per line.
/// Values are printed with enough digits to round-trip bit-exactly.
void write_support_field(std::ostream& out, const SupportField& u);
void write_support_field_file(const std::string& path, const SupportField& u);
SupportField read_support_field(std::istream& in);
SupportField read_support_field_file(const std::string& path);

}  // namespace hmcf

#include "hmcf/run_config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hmcf {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct RawEntry {
  std::string value;
  int line;
};

double parse_double(const std::string& key, const RawEntry& e) {
  try {
    std::size_t used = 0;
    double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + e.value + "'", e.line);
  }
}

long parse_int(const std::string& key, const RawEntry& e) {
  try {
    std::size_t used = 0;
    long v = std::stol(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + e.value + "'", e.line);
  }
}

bool parse_bool(const std::string& key, const RawEntry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + e.value + "'", e.line);
}

std::string parse_quoted(const std::string& key, const RawEntry& e) {
  if (e.value.size() < 2 || e.value.front() != '"' || e.value.back() != '"')
    throw ConfigError("key '" + key + "' expects a double-quoted string", e.line);
  return e.value.substr(1, e.value.size() - 2);
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  static const std::set<std::string> known = {
      "dim",  "resolution", "F",    "R1",   "R2",   "initial",          "dt",
      "dt_policy", "t_max", "stationarity_tol", "seed", "output_dir",
      "snapshot_every", "strict_conditions"};
  static const std::set<std::string> required = {"dim", "resolution", "F",  "R1",
                                                 "R2",  "initial",    "dt", "t_max"};

  std::map<std::string, RawEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got '" + s + "'", line_no);
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "'", line_no);
    if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line_no);
    entries[key] = RawEntry{value, line_no};
  }
  for (const auto& key : required)
    if (!entries.count(key)) throw ConfigError("missing required key '" + key + "'", 0);

  RunConfig cfg;
  cfg.dim = static_cast<int>(parse_int("dim", entries.at("dim")));
  cfg.resolution = static_cast<int>(parse_int("resolution", entries.at("resolution")));
  cfg.f_text = parse_quoted("F", entries.at("F"));
  cfg.R1 = parse_double("R1", entries.at("R1"));
  cfg.R2 = parse_double("R2", entries.at("R2"));
  cfg.dt = parse_double("dt", entries.at("dt"));
  cfg.t_max = parse_double("t_max", entries.at("t_max"));

  const RawEntry& init = entries.at("initial");
  if (init.value == "auto") {
    cfg.initial_kind = RunConfig::InitialKind::Auto;
  } else if (init.value.front() == '"') {
    cfg.initial_kind = RunConfig::InitialKind::Path;
    cfg.initial_path = parse_quoted("initial", init);
  } else {
    cfg.initial_kind = RunConfig::InitialKind::Radius;
    cfg.initial_radius = parse_double("initial", init);
  }

  if (entries.count("dt_policy")) {
    const RawEntry& e = entries.at("dt_policy");
    if (e.value == "fixed") cfg.dt_policy = DtPolicy::Fixed;
    else if (e.value == "adaptive") cfg.dt_policy = DtPolicy::Adaptive;
    else throw ConfigError("dt_policy must be fixed or adaptive, got '" + e.value + "'", e.line);
  }
  if (entries.count("stationarity_tol"))
    cfg.stationarity_tol = parse_double("stationarity_tol", entries.at("stationarity_tol"));
  if (entries.count("seed"))
    cfg.seed = static_cast<std::uint64_t>(parse_int("seed", entries.at("seed")));
  if (entries.count("output_dir"))
    cfg.output_dir = parse_quoted("output_dir", entries.at("output_dir"));
  if (entries.count("snapshot_every"))
    cfg.snapshot_every = static_cast<int>(parse_int("snapshot_every", entries.at("snapshot_every")));
  if (entries.count("strict_conditions"))
    cfg.strict_conditions = parse_bool("strict_conditions", entries.at("strict_conditions"));
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  return parse_run_config(in);
}

void validate_run_config(const RunConfig& c) {
  if (c.dim != 1 && c.dim != 2)
    throw ConfigError("dim must be 1 or 2, got " + std::to_string(c.dim), 0);
  if (c.resolution < 8)
    throw ConfigError("resolution must be at least 8, got " + std::to_string(c.resolution), 0);
  if (c.dim == 1 && c.resolution % 2 != 0)
    throw ConfigError("resolution must be even for dim 1", 0);
  if (!(c.R1 > 0.0) || !(c.R2 > c.R1))
    throw ConfigError("annulus requires 0 < R1 < R2", 0);
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive", 0);
  if (c.dt > dt_hard_cap(c.dim))
    throw ConfigError("dt exceeds the hard cap 1/(2n) = " + std::to_string(dt_hard_cap(c.dim)),
                      0);
  if (!(c.t_max > 0.0)) throw ConfigError("t_max must be positive", 0);
  if (c.stationarity_tol < 0.0) throw ConfigError("stationarity_tol must be >= 0", 0);
  if (c.snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1", 0);
  if (c.initial_kind == RunConfig::InitialKind::Radius &&
      !(c.initial_radius > 0.0))
    throw ConfigError("initial radius must be positive", 0);
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty", 0);
}

void write_support_field(std::ostream& out, const SupportField& u) {
  out << u.domain()->dim() << " " << u.domain()->resolution() << "\n";
  char buf[40];
  for (int i = 0; i < u.values().size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", u.values()[i]);
    out << buf;
  }
}

void write_support_field_file(const std::string& path, const SupportField& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_support_field(out, u);
}

SupportField read_support_field(std::istream& in) {
  int dim = 0, resolution = 0;
  if (!(in >> dim >> resolution))
    throw std::runtime_error("field file: malformed header (expected 'dim resolution')");
  DomainPtr domain = build_domain(dim, resolution);
  VectorXd values(domain->node_count());
  for (int i = 0; i < values.size(); ++i) {
    if (!(in >> values[i]))
      throw std::runtime_error("field file: expected " + std::to_string(values.size()) +
                               " values, got " + std::to_string(i));
  }
  return SupportField(ScalarField{domain, std::move(values)});
}

SupportField read_support_field_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field file '" + path + "'");
  return read_support_field(in);
}

}  // namespace hmcf

#include "hmcf/cli_runner.hpp"

#include "hmcf/stationary_solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace hmcf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json to_json(const ConditionReport& rep) {
  json j;
  j["a"] = {{"strict_pass", rep.a.strict_pass},
            {"weak_pass", rep.a.weak_pass},
            {"outer_margin", rep.a.outer_margin},
            {"inner_margin", rep.a.inner_margin},
            {"samples_per_sphere", rep.a.samples_per_sphere}};
  auto chord = [](const Chord& c) {
    return json{{"p", {c.p[0], c.p[1], c.p[2]}},
                {"q", {c.q[0], c.q[1], c.q[2]}},
                {"violation", c.violation}};
  };
  j["b"] = {{"concave_pass", rep.b.concave_pass},
            {"convex_pass", rep.b.convex_pass},
            {"worst_concavity_violation", rep.b.worst_concavity_violation},
            {"worst_convexity_violation", rep.b.worst_convexity_violation},
            {"concavity_witness", chord(rep.b.concavity_witness)},
            {"convexity_witness", chord(rep.b.convexity_witness)},
            {"accepted_chords", rep.b.accepted_chords},
            {"seed", rep.b.seed}};
  j["positivity"] = {{"pass", rep.positivity.pass},
                     {"min_value", rep.positivity.min_value},
                     {"argmin", {rep.positivity.argmin[0], rep.positivity.argmin[1],
                                 rep.positivity.argmin[2]}},
                     {"samples", rep.positivity.samples},
                     {"seed", rep.positivity.seed}};
  return j;
}

json to_json(const AdmissibilityReport& rep) {
  return json{{"pass", rep.pass},
              {"convexity_margin", rep.convexity_margin},
              {"g_min", rep.g_min},
              {"radial_inner_slack", rep.radial_inner_slack},
              {"radial_outer_slack", rep.radial_outer_slack}};
}

/// Warnings gate the strict mode and turn exit 0 into 5. The concavity/
/// convexity verdicts of the prescribed function are reported but do not
/// warn: strict concavity on a full annulus is incompatible with the barrier
/// inequalities, so gating on it would make success unreachable.
std::vector<std::string> condition_warnings(const ConditionReport& conditions,
                                            const AdmissibilityReport& admissibility) {
  std::vector<std::string> w;
  if (!conditions.a.strict_pass) {
    std::string detail = " (outer margin " + fmt(conditions.a.outer_margin) +
                         ", inner margin " + fmt(conditions.a.inner_margin) + ")";
    if (conditions.a.weak_pass)
      w.push_back("barrier inequalities hold only non-strictly" + detail);
    else
      w.push_back("barrier inequalities fail on the annulus boundary" + detail);
  }
  if (!conditions.positivity.pass)
    w.push_back("F is not positive on the annulus (min " +
                fmt(conditions.positivity.min_value) + ")");
  if (!admissibility.pass)
    w.push_back("initial data fails admissibility (margin " +
                fmt(admissibility.convexity_margin) + ", min G " + fmt(admissibility.g_min) +
                ", radial slacks " + fmt(admissibility.radial_inner_slack) + "/" +
                fmt(admissibility.radial_outer_slack) + ")");
  return w;
}

struct PreparedRun {
  RunConfig raw;
  DomainPtr domain;
  CurvatureSpec spec;
  SupportField u0;
  std::string initial_description;
  ConditionReport conditions;
  AdmissibilityReport admissibility;
  std::vector<std::string> warnings;
};

PreparedRun prepare(const RunConfig& raw) {
  PreparedRun p;
  p.raw = raw;
  p.domain = build_domain(raw.dim, raw.resolution);
  p.spec = CurvatureSpec(raw.f_text, raw.R1, raw.R2, raw.dim);

  switch (raw.initial_kind) {
    case RunConfig::InitialKind::Auto: {
      double r = suggest_initial_radius(p.spec);
      p.u0 = constant_support(p.domain, r);
      p.initial_description = "auto-selected constant radius " + fmt(r);
      break;
    }
    case RunConfig::InitialKind::Radius:
      p.u0 = constant_support(p.domain, raw.initial_radius);
      p.initial_description = "constant radius " + fmt(raw.initial_radius);
      break;
    case RunConfig::InitialKind::Path: {
      p.u0 = read_support_field_file(raw.initial_path);
      p.initial_description = "field file " + raw.initial_path;
      if (p.u0.domain()->dim() != raw.dim || p.u0.domain()->resolution() != raw.resolution)
        throw ConfigError("initial field file '" + raw.initial_path +
                              "' does not match dim/resolution of the config",
                          0);
      break;
    }
  }
  p.conditions = vet_curvature_spec(p.spec, 2000, raw.seed);
  p.admissibility = check_initial_admissibility(p.u0, p.spec);
  p.warnings = condition_warnings(p.conditions, p.admissibility);
  return p;
}

FlowConfig to_flow_config(const PreparedRun& p) {
  FlowConfig fc;
  fc.domain = p.domain;
  fc.spec = p.spec;
  fc.initial_field = p.u0;
  fc.dt_initial = p.raw.dt;
  fc.dt_policy = p.raw.dt_policy;
  fc.t_max = p.raw.t_max;
  fc.stationarity_tol = p.raw.stationarity_tol;
  fc.seed = p.raw.seed;
  fc.snapshot_every = p.raw.snapshot_every;
  return fc;
}

int emit_config_error(std::ostream& out, const std::string& command, const std::string& what,
                      int line = 0, std::size_t pos = std::string::npos) {
  json j{{"command", command}, {"exit_code", 4}, {"error", what}};
  if (line > 0) j["line"] = line;
  if (pos != std::string::npos) j["position"] = pos;
  out << j.dump(2) << "\n";
  return 4;
}

void print_condition_summary(std::ostream& out, const PreparedRun& p) {
  out << "initial data: " << p.initial_description << "\n";
  out << "condition (a): outer margin " << fmt(p.conditions.a.outer_margin) << ", inner margin "
      << fmt(p.conditions.a.inner_margin) << " -> "
      << (p.conditions.a.strict_pass ? "pass"
                                     : (p.conditions.a.weak_pass ? "weak only" : "fail"))
      << "\n";
  out << "condition (b): concavity "
      << (p.conditions.b.concave_pass ? "pass" : "fail (worst violation " +
                                                     fmt(p.conditions.b.worst_concavity_violation) +
                                                     ")")
      << "; convexity "
      << (p.conditions.b.convex_pass ? "pass" : "fail (worst violation " +
                                                    fmt(p.conditions.b.worst_convexity_violation) +
                                                    ")")
      << " [reported, not gated]\n";
  out << "positivity: min F = " << fmt(p.conditions.positivity.min_value) << " -> "
      << (p.conditions.positivity.pass ? "pass" : "fail") << "\n";
  out << "admissibility: convexity margin " << fmt(p.admissibility.convexity_margin)
      << ", min G " << fmt(p.admissibility.g_min) << ", radial slacks "
      << fmt(p.admissibility.radial_inner_slack) << " / "
      << fmt(p.admissibility.radial_outer_slack) << " -> "
      << (p.admissibility.pass ? "pass" : "fail") << "\n";
}

// ---------------------------------------------------------------------------
// Minimal deterministic SVG line charts.

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x, y;
};

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<Series>& series, bool log_y) {
  const int W = 860, H = 520, ML = 70, MR = 170, MT = 40, MB = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
  auto py = [&](double y) { return H - MB - (ty(y) - ymin) / (ymax - ymin) * (H - MT - MB); };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << ML << "\" y=\"24\" font-family=\"monospace\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
      << "\" stroke=\"black\"/>\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"11\">%g</text>",
                ML - 4, H - MB + 16, xmin);
  out << buf << "\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"11\">%g</text>",
                W - MR - 20, H - MB + 16, xmax);
  out << buf << "\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"4\" y=\"%d\" font-family=\"monospace\" font-size=\"11\">%s%g</text>",
                H - MB, log_y ? "1e" : "", ymin);
  out << buf << "\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"4\" y=\"%d\" font-family=\"monospace\" font-size=\"11\">%s%g</text>",
                MT + 4, log_y ? "1e" : "", ymax);
  out << buf << "\n";

  int legend_y = MT + 10;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      out << buf;
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - MR + 10 << "\" y=\"" << legend_y << "\" fill=\"" << s.color
        << "\" font-family=\"monospace\" font-size=\"12\">" << s.label << "</text>\n";
    legend_y += 18;
  }
  out << "</svg>\n";
}

void write_series_dat(const std::string& path, const std::vector<Series>& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "# t";
  for (const auto& s : series) out << " " << s.label;
  out << "\n";
  if (series.empty()) return;
  for (std::size_t i = 0; i < series[0].x.size(); ++i) {
    out << fmt(series[0].x[i]);
    for (const auto& s : series) out << " " << fmt(s.y[i]);
    out << "\n";
  }
}

void write_curve_svg(const std::string& path, const std::vector<double>& X1,
                     const std::vector<double>& X2, double R2) {
  const int W = 520, H = 520;
  double scale = (W / 2 - 20) / R2;
  auto px = [&](double x) { return W / 2 + scale * x; };
  auto py = [&](double y) { return H / 2 - scale * y; };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[96];
  out << "<polygon fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.6\" points=\"";
  for (std::size_t i = 0; i < X1.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(X1[i]), py(X2[i]));
    out << buf;
  }
  out << "\"/>\n</svg>\n";
}

struct DiagnosticsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::runtime_error("diagnostics: missing column " + name);
    std::size_t c = it - columns.begin();
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }
};

DiagnosticsTable read_diagnostics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open diagnostics file '" + path + "'");
  DiagnosticsTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("diagnostics file is empty");
  std::stringstream header(line);
  std::string col;
  while (std::getline(header, col, ',')) t.columns.push_back(col);
  if (t.columns.empty()) throw std::runtime_error("diagnostics header has no columns");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != t.columns.size())
      throw std::runtime_error("diagnostics row has wrong column count");
    t.rows.push_back(std::move(vals));
  }
  if (t.rows.empty()) throw std::runtime_error("diagnostics file has no data rows");
  return t;
}

}  // namespace

RunConfig resolve_config(const std::string& config_path, const Overrides& overrides) {
  std::stringstream merged;
  {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file '" + config_path + "'", 0);
    merged << in.rdbuf();
  }
  // Overrides reuse the config grammar: appending would collide with the
  // duplicate-key check, so rewrite the file content line by line.
  if (!overrides.empty()) {
    std::stringstream rewritten;
    std::string line;
    std::stringstream src(merged.str());
    std::map<std::string, bool> applied;
    while (std::getline(src, line)) {
      std::string trimmed = line;
      trimmed.erase(0, trimmed.find_first_not_of(" \t"));
      auto eq = trimmed.find('=');
      bool replaced = false;
      if (eq != std::string::npos && !trimmed.empty() && trimmed[0] != '#') {
        std::string key = trimmed.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        auto it = overrides.find(key);
        if (it != overrides.end()) {
          rewritten << key << " = " << it->second << "\n";
          applied[key] = true;
          replaced = true;
        }
      }
      if (!replaced) rewritten << line << "\n";
    }
    for (const auto& [key, value] : overrides)
      if (!applied.count(key)) rewritten << key << " = " << value << "\n";
    merged = std::move(rewritten);
  }
  RunConfig cfg = parse_run_config(merged);
  validate_run_config(cfg);
  return cfg;
}

int cmd_check(const std::string& config_path, const Overrides& overrides, std::ostream& out) {
  RunConfig raw;
  PreparedRun p;
  try {
    raw = resolve_config(config_path, overrides);
    p = prepare(raw);
  } catch (const ConfigError& e) {
    return emit_config_error(out, "check", e.what(), e.line);
  } catch (const ParseError& e) {
    return emit_config_error(out, "check", std::string("F: ") + e.what(), 0, e.pos);
  } catch (const std::exception& e) {
    return emit_config_error(out, "check", e.what());
  }

  print_condition_summary(out, p);
  int code = p.warnings.empty() ? 0 : 5;
  json j{{"command", "check"},
         {"exit_code", code},
         {"conditions", to_json(p.conditions)},
         {"admissibility", to_json(p.admissibility)},
         {"warnings", p.warnings}};
  out << j.dump(2) << "\n";
  return code;
}

int cmd_flow(const std::string& config_path, const Overrides& overrides, std::ostream& out) {
  RunConfig raw;
  PreparedRun p;
  try {
    raw = resolve_config(config_path, overrides);
    p = prepare(raw);
  } catch (const ConfigError& e) {
    return emit_config_error(out, "flow", e.what(), e.line);
  } catch (const ParseError& e) {
    return emit_config_error(out, "flow", std::string("F: ") + e.what(), 0, e.pos);
  } catch (const std::exception& e) {
    return emit_config_error(out, "flow", e.what());
  }

  fs::create_directories(raw.output_dir);
  json report{{"command", "flow"}, {"conditions", to_json(p.conditions)},
              {"admissibility", to_json(p.admissibility)}, {"warnings", p.warnings}};
  auto write_report = [&](int code) {
    report["exit_code"] = code;
    std::ofstream rep(fs::path(raw.output_dir) / "report.json");
    rep << report.dump(2) << "\n";
    return code;
  };

  if (raw.strict_conditions && !p.warnings.empty()) {
    for (const auto& w : p.warnings) out << "warning: " << w << "\n";
    out << "strict_conditions is set; refusing to run\n";
    report["exit_state"] = "RefusedStrictConditions";
    return write_report(5);
  }
  if (!p.admissibility.pass) {
    out << "initial data fails admissibility; not running\n";
    report["exit_state"] = "InadmissibleInitialData";
    return write_report(2);
  }

  FlowConfig fc = to_flow_config(p);
  std::vector<std::string> artifacts;
  auto hook = [&](const FlowState& s) {
    char name[48];
    std::snprintf(name, sizeof(name), "snapshot_%08ld.txt", s.step_index);
    fs::path path = fs::path(raw.output_dir) / name;
    std::ofstream snap(path);
    write_geometry_snapshot(snap, s.u);
    artifacts.push_back(path.string());
  };

  FlowResult result = run(fc, hook);

  fs::path diag_path = fs::path(raw.output_dir) / "diagnostics.csv";
  {
    std::ofstream diag(diag_path);
    diag << "step,t,dt,residual_sup,G_min,convexity_margin,radial_min,radial_max,"
            "energy_accum\n";
    for (const auto& d : result.history) {
      diag << d.step << "," << fmt(d.t) << "," << fmt(d.dt) << "," << fmt(d.residual_sup) << ","
           << fmt(d.g_min) << "," << fmt(d.convexity_margin) << "," << fmt(d.radial_min) << ","
           << fmt(d.radial_max) << "," << fmt(d.energy_accumulator) << "\n";
    }
  }
  fs::path final_path = fs::path(raw.output_dir) / "final_u.txt";
  write_support_field_file(final_path.string(), result.final_u);

  double min_margin = 1e300, min_g = 1e300, rmin = 1e300, rmax = -1e300;
  for (const auto& d : result.history) {
    min_margin = std::min(min_margin, d.convexity_margin);
    min_g = std::min(min_g, d.g_min);
    rmin = std::min(rmin, d.radial_min);
    rmax = std::max(rmax, d.radial_max);
  }

  int code = 0;
  switch (result.exit) {
    case ExitState::Converged: code = 0; break;
    case ExitState::MaxTimeReached: code = 1; break;
    case ExitState::InvariantViolation: code = 2; break;
    case ExitState::BlowUp: code = 3; break;
  }

  out << "exit: " << to_string(result.exit) << " after " << result.history.back().step
      << " steps, t = " << fmt(result.history.back().t) << ", residual "
      << fmt(result.final_residual) << " (" << fmt(result.wall_seconds) << " s)\n";
  out << "invariants over the run: min margin " << fmt(min_margin) << ", min G " << fmt(min_g)
      << ", radial range [" << fmt(rmin) << ", " << fmt(rmax) << "], energy "
      << fmt(result.history.back().energy_accumulator) << " (bound " << fmt(result.energy_bound)
      << ")\n";
  for (const auto& w : result.warnings) out << "warning: " << w << "\n";

  report["exit_state"] = to_string(result.exit);
  report["certified"] = result.certified;
  report["under_resolved"] = result.under_resolved;
  report["final_residual"] = result.final_residual;
  report["steps"] = result.history.back().step;
  report["t_final"] = result.history.back().t;
  report["invariant_summary"] = {{"min_convexity_margin", min_margin},
                                 {"min_G", min_g},
                                 {"radial_min", rmin},
                                 {"radial_max", rmax},
                                 {"energy", result.history.back().energy_accumulator},
                                 {"energy_bound", result.energy_bound}};
  if (result.violation) {
    report["violation"] = {{"monitor", result.violation->monitor},
                           {"t", result.violation->t},
                           {"value", result.violation->value}};
    out << "invariant violation: " << result.violation->monitor << " = "
        << fmt(result.violation->value) << " at t = " << fmt(result.violation->t) << "\n";
  }
  if (!result.detail.empty()) report["detail"] = result.detail;
  artifacts.push_back(diag_path.string());
  artifacts.push_back(final_path.string());
  report["artifacts"] = artifacts;
  report["run_warnings"] = result.warnings;
  return write_report(code);
}

int cmd_stationary(const std::string& config_path, const Overrides& overrides,
                   const std::string& guess, std::ostream& out) {
  RunConfig raw;
  PreparedRun p;
  try {
    raw = resolve_config(config_path, overrides);
    p = prepare(raw);
  } catch (const ConfigError& e) {
    return emit_config_error(out, "stationary", e.what(), e.line);
  } catch (const ParseError& e) {
    return emit_config_error(out, "stationary", std::string("F: ") + e.what(), 0, e.pos);
  } catch (const std::exception& e) {
    return emit_config_error(out, "stationary", e.what());
  }

  NewtonConfig nc;
  try {
    if (guess.empty()) {
      nc.initial_guess = p.u0;
    } else {
      char* end = nullptr;
      double radius = std::strtod(guess.c_str(), &end);
      if (end && *end == '\0') {
        nc.initial_guess = constant_support(p.domain, radius);
      } else {
        nc.initial_guess = read_support_field_file(guess);
        if (nc.initial_guess.domain()->dim() != raw.dim ||
            nc.initial_guess.domain()->resolution() != raw.resolution)
          throw ConfigError("guess field file does not match dim/resolution", 0);
      }
    }
  } catch (const std::exception& e) {
    return emit_config_error(out, "stationary", e.what());
  }

  auto [solution, rep] = solve_stationary(nc, p.spec);

  fs::create_directories(raw.output_dir);
  fs::path field_path = fs::path(raw.output_dir) / "stationary_u.txt";
  write_support_field_file(field_path.string(), solution);

  auto range = radial_range(solution);
  double guess_distance =
      (solution.values() - nc.initial_guess.values()).cwiseAbs().maxCoeff();
  out << (rep.converged ? "solved" : "failed") << ": residual " << fmt(rep.final_residual)
      << " after " << rep.iterations << " iterations, convexity margin "
      << fmt(rep.convexity_margin) << ", radial range [" << fmt(range.first) << ", "
      << fmt(range.second) << "]\n";
  out << "sup-distance to the initial guess: " << fmt(guess_distance) << "\n";
  if (!rep.message.empty()) out << rep.message << "\n";

  int code = rep.converged ? 0 : 6;
  json report{{"command", "stationary"},
              {"exit_code", code},
              {"converged", rep.converged},
              {"iterations", rep.iterations},
              {"final_residual", rep.final_residual},
              {"convexity_margin", rep.convexity_margin},
              {"radial_range", {range.first, range.second}},
              {"distance_to_guess", guess_distance},
              {"message", rep.message},
              {"residual_history", rep.residual_history},
              {"artifacts", {field_path.string()}}};
  std::ofstream repfile(fs::path(raw.output_dir) / "report.json");
  repfile << report.dump(2) << "\n";
  return code;
}

int cmd_plot(const std::string& diagnostics_path, std::ostream& out) {
  DiagnosticsTable table;
  try {
    table = read_diagnostics(diagnostics_path);
  } catch (const std::exception& e) {
    return emit_config_error(out, "plot", e.what());
  }

  fs::path dir = fs::path(diagnostics_path).parent_path();
  if (dir.empty()) dir = ".";
  std::vector<std::string> written;

  try {
    auto t = table.column("t");
    Series residual{"residual_sup", "#d62728", t, table.column("residual_sup")};
    write_svg_chart((dir / "residual_vs_t.svg").string(), "stationarity residual vs t",
                    {residual}, true);
    write_series_dat((dir / "residual_vs_t.dat").string(), {residual});
    written.push_back((dir / "residual_vs_t.svg").string());
    written.push_back((dir / "residual_vs_t.dat").string());

    std::vector<Series> margins{
        {"convexity_margin", "#1f77b4", t, table.column("convexity_margin")},
        {"G_min", "#2ca02c", t, table.column("G_min")},
        {"radial_min", "#9467bd", t, table.column("radial_min")},
        {"radial_max", "#8c564b", t, table.column("radial_max")}};
    write_svg_chart((dir / "margins_vs_t.svg").string(), "invariant margins vs t", margins,
                    false);
    write_series_dat((dir / "margins_vs_t.dat").string(), margins);
    written.push_back((dir / "margins_vs_t.svg").string());
    written.push_back((dir / "margins_vs_t.dat").string());

    // Snapshot geometry: closed curves for the plane, point clouds in space.
    std::vector<fs::path> snapshots;
    for (const auto& entry : fs::directory_iterator(dir)) {
      std::string name = entry.path().filename().string();
      if (name.rfind("snapshot_", 0) == 0 && name.size() > 4 &&
          name.substr(name.size() - 4) == ".txt")
        snapshots.push_back(entry.path());
    }
    std::sort(snapshots.begin(), snapshots.end());
    for (const auto& snap : snapshots) {
      std::ifstream in(snap);
      std::string header;
      std::getline(in, header);
      int cols = 1 + static_cast<int>(std::count(header.begin(), header.end(), ' '));
      std::vector<std::vector<double>> data;
      double v;
      std::vector<double> row;
      while (in >> v) {
        row.push_back(v);
        if (static_cast<int>(row.size()) == cols) {
          data.push_back(row);
          row.clear();
        }
      }
      std::string stem = snap.stem().string();
      if (cols == 7) {
        std::vector<double> X1, X2;
        double r2max = 0;
        for (const auto& d : data) {
          X1.push_back(d[2]);
          X2.push_back(d[3]);
          r2max = std::max(r2max, d[2] * d[2] + d[3] * d[3]);
        }
        fs::path svg = dir / ("curve_" + stem.substr(9) + ".svg");
        write_curve_svg(svg.string(), X1, X2, std::sqrt(r2max) * 1.05);
        written.push_back(svg.string());
      } else if (cols == 9) {
        fs::path cloud = dir / ("cloud_" + stem.substr(9) + ".dat");
        std::ofstream cf(cloud);
        cf << "# X1 X2 X3\n";
        for (const auto& d : data)
          cf << fmt(d[3]) << " " << fmt(d[4]) << " " << fmt(d[5]) << "\n";
        written.push_back(cloud.string());
      }
    }
  } catch (const std::exception& e) {
    return emit_config_error(out, "plot", e.what());
  }

  for (const auto& w : written) out << w << "\n";
  return 0;
}

int cmd_sweep(const std::vector<std::string>& config_paths, std::ostream& out) {
  std::vector<int> codes(config_paths.size(), 0);
  std::vector<std::string> outputs(config_paths.size());
  std::vector<std::thread> workers;
  workers.reserve(config_paths.size());
  for (std::size_t i = 0; i < config_paths.size(); ++i) {
    workers.emplace_back([&, i] {
      std::ostringstream local;
      codes[i] = cmd_flow(config_paths[i], {}, local);
      outputs[i] = local.str();
    });
  }
  for (auto& w : workers) w.join();

  int worst = 0;
  for (std::size_t i = 0; i < config_paths.size(); ++i) {
    out << "=== " << config_paths[i] << " (exit " << codes[i] << ") ===\n" << outputs[i];
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

}  // namespace hmcf

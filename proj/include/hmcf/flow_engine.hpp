#pragma once

#include "hmcf/curvature_spec.hpp"
#include "hmcf/support_geometry.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hmcf {

/// G(u) = Delta u + n u - F(X(u)), evaluated pointwise at the nodes.
/// This is simultaneously the velocity du/dt of the support-function flow
/// and the residual of the stationary prescribed-curvature equation; the
/// flow engine and the Newton solver share this code path.
ScalarField flow_rhs(const SupportField& u, const CurvatureSpec& spec);

struct DiagnosticsRecord {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  double residual_sup = 0.0;  // sup |G|, equal to sup |du/dt|
  double g_min = 0.0;
  double convexity_margin = 0.0;
  double radial_min = 0.0;
  double radial_max = 0.0;
  double energy_accumulator = 0.0;  // running integral of (du/dt)^2 dx dt
  bool bartnik_pass = false;
};

struct AdmissibilityReport {
  bool pass = false;
  double convexity_margin = 0.0;   // must be > 0
  double g_min = 0.0;              // must be >= -1e-10
  double radial_inner_slack = 0.0; // radial_min - R1^2, must be > 0
  double radial_outer_slack = 0.0; // R2^2 - radial_max, must be > 0
};

/// Pointwise quantities derived from the current field, cached so that one
/// spectral evaluation per accepted step suffices.
struct StepCache {
  SphereDomain::Jet jet;
  MatrixXd positions;  // embedding X
  VectorXd F;          // F(X) per node
  VectorXd G;          // laplace + n u - F
};

struct FlowState {
  SupportField u;
  VectorXd coeffs;  // spectral coefficients of u
  double t = 0.0;
  double dt = 0.0;
  long step_index = 0;
  double energy_accumulator = 0.0;
  DiagnosticsRecord diagnostics;
  std::shared_ptr<const StepCache> cache;  // derived data, recomputed on demand
};

enum class ExitState { Converged, MaxTimeReached, InvariantViolation, BlowUp };
const char* to_string(ExitState s);

enum class DtPolicy { Fixed, Adaptive };

struct FlowConfig {
  DomainPtr domain;
  CurvatureSpec spec;
  // Exactly one of the two initial data forms must be set.
  std::optional<double> initial_radius;
  std::optional<SupportField> initial_field;

  double dt_initial = 1e-3;
  DtPolicy dt_policy = DtPolicy::Fixed;
  double t_max = 50.0;
  double stationarity_tol = 0.0;  // 0 -> 1e-8 (S^1) or 1e-6 (S^2)

  // Monitor tolerances. g_min_tol is the band below zero tolerated before a
  // certified run trips; radial_band widens the closed annulus interval.
  double g_min_tol = 1e-7;
  double radial_band = 0.0;

  // Adaptive stepping: grow 1.2x while the per-step change stays below a
  // quarter of target_change, halve when a monitored slack falls below 10%
  // of its initial value.
  double target_change = 0.0;  // 0 -> 0.005 (R2 - R1)
  double dt_floor = 0.0;       // 0 -> dt_initial * 1e-3
  double dt_cap = 0.0;         // 0 -> hard cap 1/(2n)

  long max_steps = 2000000;
  int snapshot_every = 100;
  std::uint64_t seed = 0;
  int condition_samples = 2000;
  bool allow_inadmissible = false;
};

/// Three consecutive states at a fixed dt, stored at the snapshot cadence;
/// input to g_evolution_residual.
struct GWindow {
  double t_mid = 0.0;
  double dt = 0.0;
  SupportField u_prev, u_mid, u_next;
};

struct ViolationInfo {
  std::string monitor;
  double t = 0.0;
  double value = 0.0;
};

struct FlowResult {
  ExitState exit = ExitState::MaxTimeReached;
  std::optional<ViolationInfo> violation;
  std::string detail;
  SupportField final_u;
  double final_residual = 0.0;
  std::vector<DiagnosticsRecord> history;  // one record per step, step 0 included
  std::vector<GWindow> windows;
  ConditionReport conditions;
  AdmissibilityReport admissibility;
  bool certified = false;      // condition (a) + positivity + admissibility all hold
  bool under_resolved = false; // spectral-decay watchdog tripped
  std::vector<std::string> warnings;
  double energy_bound = 0.0;   // (n+2) R2^2 vol(S^n)
  double wall_seconds = 0.0;
};

/// Uniform upper bound on admissible time steps: the implicit factor
/// 1 - dt (n - l(l+n-1)) is smallest on constants (l = 0), so dt must stay
/// below 1/(2n) to keep the solve well conditioned.
double dt_hard_cap(int dim);

AdmissibilityReport check_initial_admissibility(const SupportField& u0,
                                                const CurvatureSpec& spec);

/// Smallest constant radius in (R1, R2) whose round sphere passes all three
/// admissibility margins with slack >= eps (radial slack measured in radius
/// units). Throws std::runtime_error when no such radius exists.
double suggest_initial_radius(const CurvatureSpec& spec, double eps = 0.05,
                              int scan_points = 2048);

/// One semi-implicit step: solve (I - dt (Delta + n)) u_new = u_old - dt F(X(u_old)).
/// The linear solve is diagonal in the spectral basis. Refreshes diagnostics
/// and the energy accumulator.
FlowState step(const FlowState& state, const CurvatureSpec& spec);

FlowState make_initial_state(const SupportField& u0, const CurvatureSpec& spec, double dt);

/// Recompute the full diagnostics record for a state (pure; run() refreshes
/// the same record incrementally).
DiagnosticsRecord monitor_invariants(const FlowState& state, const CurvatureSpec& spec);

/// Discrete consistency check of the evolution equation satisfied by G:
/// dG/dt = Delta G + n G - grad F . (G x + grad G). The time derivative uses
/// central differences across the window; grad F uses central differences
/// with step fd_eps. Returns the sup-norm discrepancy, expected O(dt + h^p).
double g_evolution_residual(const SupportField& u_prev, const SupportField& u_mid,
                            const SupportField& u_next, double dt,
                            const CurvatureSpec& spec, double fd_eps = 1e-6);
double g_evolution_residual(const GWindow& window, const CurvatureSpec& spec,
                            double fd_eps = 1e-6);

/// Fraction of spectral energy carried by degrees above 90% of the band
/// limit; above 1e-3 the field is considered under-resolved.
double spectral_tail_fraction(const SphereDomain& domain, const VectorXd& coeffs);

FlowResult run(const FlowConfig& config,
               const std::function<void(const FlowState&)>& snapshot_hook = {});

}  // namespace hmcf

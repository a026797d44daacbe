#include "hmcf/flow_engine.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

namespace hmcf {

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const StepCache> build_cache(const SupportField& u, const VectorXd& coeffs,
                                             const CurvatureSpec& spec) {
  const SphereDomain& dom = *u.domain();
  auto cache = std::make_shared<StepCache>();
  cache->jet = dom.evaluate_jet(coeffs);

  MatrixXd X = cache->jet.u.asDiagonal() * dom.nodes();
  X += cache->jet.grad.col(0).asDiagonal() * dom.frame1();
  if (dom.dim() == 2) X += cache->jet.grad.col(1).asDiagonal() * dom.frame2();
  cache->positions = std::move(X);

  if (cache->jet.u.minCoeff() <= 0.0)
    throw NonPositiveSupport("flow: support function lost positivity");
  cache->F = spec.evaluate_rows(cache->positions);
  cache->G = cache->jet.laplace + dom.dim() * cache->jet.u - cache->F;
  return cache;
}

const StepCache& ensure_cache(FlowState& state, const CurvatureSpec& spec) {
  if (!state.cache) state.cache = build_cache(state.u, state.coeffs, spec);
  return *state.cache;
}

DiagnosticsRecord diagnostics_from_cache(const FlowState& state, const StepCache& cache) {
  const SphereDomain& dom = *state.u.domain();
  DiagnosticsRecord d;
  d.step = state.step_index;
  d.t = state.t;
  d.dt = state.dt;
  d.residual_sup = cache.G.cwiseAbs().maxCoeff();
  d.g_min = cache.G.minCoeff();
  d.energy_accumulator = state.energy_accumulator;

  SymmetricTensorField h{state.u.domain(), cache.jet.hess};
  if (dom.dim() == 1) {
    h.components.col(0) += cache.jet.u;
  } else {
    h.components.col(0) += cache.jet.u;
    h.components.col(2) += cache.jet.u;
  }
  MatrixXd ev = tensor_eigenvalues(h);
  d.convexity_margin = ev.col(0).minCoeff();

  VectorXd r2 = cache.jet.u.array().square() + cache.jet.grad.rowwise().squaredNorm().array();
  d.radial_min = r2.minCoeff();
  d.radial_max = r2.maxCoeff();

  // Farthest/nearest-point test at the grid extrema, tolerance tied to the
  // grid spacing as for extremal_point_check.
  if (d.convexity_margin > 0.0) {
    double tol = 5.0 * dom.grid_spacing();
    int imax, imin;
    r2.maxCoeff(&imax);
    r2.minCoeff(&imin);
    double rmax = std::sqrt(r2[imax]), rmin = std::sqrt(r2[imin]);
    double kmin_at_max = 1.0 / ev(imax, dom.dim() - 1);
    double kmax_at_min = 1.0 / ev(imin, 0);
    d.bartnik_pass = cache.jet.grad.row(imax).norm() < tol * rmax &&
                     kmin_at_max >= 1.0 / rmax - tol &&
                     cache.jet.grad.row(imin).norm() < tol * rmin &&
                     kmax_at_min <= 1.0 / rmin + tol;
  } else {
    d.bartnik_pass = false;
  }
  return d;
}

}  // namespace

const char* to_string(ExitState s) {
  switch (s) {
    case ExitState::Converged: return "Converged";
    case ExitState::MaxTimeReached: return "MaxTimeReached";
    case ExitState::InvariantViolation: return "InvariantViolation";
    case ExitState::BlowUp: return "BlowUp";
  }
  return "?";
}

double dt_hard_cap(int dim) { return 1.0 / (2.0 * dim); }

ScalarField flow_rhs(const SupportField& u, const CurvatureSpec& spec) {
  const SphereDomain& dom = *u.domain();
  VectorXd coeffs = dom.analyze(u.values());
  auto cache = build_cache(u, coeffs, spec);
  return ScalarField{u.domain(), cache->G};
}

AdmissibilityReport check_initial_admissibility(const SupportField& u0,
                                                const CurvatureSpec& spec) {
  AdmissibilityReport rep;
  ShapeDiagnostics d = compute_shape_diagnostics(u0);
  rep.convexity_margin = d.convexity_margin;
  rep.radial_inner_slack = d.radial_min - spec.R1 * spec.R1;
  rep.radial_outer_slack = spec.R2 * spec.R2 - d.radial_max;
  rep.g_min = flow_rhs(u0, spec).values.minCoeff();
  rep.pass = rep.convexity_margin > 0.0 && rep.g_min >= -1e-10 &&
             rep.radial_inner_slack > 0.0 && rep.radial_outer_slack > 0.0;
  return rep;
}

double suggest_initial_radius(const CurvatureSpec& spec, double eps, int scan_points) {
  // For a round sphere of radius r: convexity margin r, |X| = r, and
  // G(x) = n r - F(r x); only the last needs sampling.
  const int sphere_samples_count = spec.dim == 1 ? 1024 : 2048;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  auto g_min_for = [&](double r) {
    double gmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sphere_samples_count; ++i) {
      Vector3d p;
      if (spec.dim == 1) {
        double th = 2.0 * kPi * i / sphere_samples_count;
        p = {r * std::cos(th), r * std::sin(th), 0.0};
      } else {
        double z = 1.0 - 2.0 * (i + 0.5) / sphere_samples_count;
        double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        double ph = golden * i;
        p = {r * rho * std::cos(ph), r * rho * std::sin(ph), r * z};
      }
      gmin = std::min(gmin, spec.dim * r - spec(p));
    }
    return gmin;
  };

  for (int i = 1; i < scan_points; ++i) {
    double r = spec.R1 + (spec.R2 - spec.R1) * i / scan_points;
    if (r - spec.R1 < eps || spec.R2 - r < eps) continue;
    if (r < eps) continue;
    if (g_min_for(r) < eps) continue;
    return r;
  }
  throw std::runtime_error(
      "suggest_initial_radius: no admissible constant initial radius in (R1, R2) with slack " +
      std::to_string(eps));
}

FlowState make_initial_state(const SupportField& u0, const CurvatureSpec& spec, double dt) {
  FlowState s;
  s.u = u0;
  s.coeffs = u0.domain()->analyze(u0.values());
  s.dt = dt;
  s.cache = build_cache(s.u, s.coeffs, spec);
  s.diagnostics = diagnostics_from_cache(s, *s.cache);
  return s;
}

FlowState step(const FlowState& state, const CurvatureSpec& spec) {
  if (!(state.dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const SphereDomain& dom = *state.u.domain();
  const int n = dom.dim();
  if (state.dt > dt_hard_cap(n))
    throw std::invalid_argument("step: dt exceeds the hard cap 1/(2n)");

  FlowState current = state;
  const StepCache& cache = ensure_cache(current, spec);

  // rhs = u_old - dt F(X(u_old)) projected onto the basis, then the diagonal
  // solve (1 - dt (n - l(l+n-1))) a_new = rhs_hat.
  VectorXd rhs_hat = current.coeffs - state.dt * dom.analyze(cache.F);
  VectorXd a_new(rhs_hat.size());
  const VectorXd& deg = dom.coeff_degree();
  for (int i = 0; i < rhs_hat.size(); ++i) {
    double mu = n - deg[i] * (deg[i] + n - 1);
    a_new[i] = rhs_hat[i] / (1.0 - state.dt * mu);
  }

  FlowState next;
  next.coeffs = std::move(a_new);
  VectorXd u_new = dom.synthesize(next.coeffs);
  if (!u_new.allFinite())
    throw std::runtime_error("flow: non-finite support function after step (blow-up)");
  next.u = SupportField(ScalarField{state.u.domain(), u_new});
  next.t = state.t + state.dt;
  next.dt = state.dt;
  next.step_index = state.step_index + 1;

  VectorXd rate = (u_new - cache.jet.u) / state.dt;
  next.energy_accumulator =
      state.energy_accumulator +
      state.dt * dom.quadrature_weights().dot(rate.cwiseAbs2());

  next.cache = build_cache(next.u, next.coeffs, spec);
  next.diagnostics = diagnostics_from_cache(next, *next.cache);
  return next;
}

DiagnosticsRecord monitor_invariants(const FlowState& state, const CurvatureSpec& spec) {
  FlowState copy = state;
  const StepCache& cache = ensure_cache(copy, spec);
  return diagnostics_from_cache(copy, cache);
}

double spectral_tail_fraction(const SphereDomain& domain, const VectorXd& coeffs) {
  double total = coeffs.squaredNorm();
  if (total == 0.0) return 0.0;
  double cut = 0.9 * domain.max_degree();
  double tail = 0.0;
  for (int i = 0; i < coeffs.size(); ++i)
    if (domain.coeff_degree()[i] > cut) tail += coeffs[i] * coeffs[i];
  return tail / total;
}

double g_evolution_residual(const SupportField& u_prev, const SupportField& u_mid,
                            const SupportField& u_next, double dt,
                            const CurvatureSpec& spec, double fd_eps) {
  const SphereDomain& dom = *u_mid.domain();
  const int n = dom.dim();
  VectorXd g_prev = flow_rhs(u_prev, spec).values;
  VectorXd g_next = flow_rhs(u_next, spec).values;
  VectorXd lhs = (g_next - g_prev) / (2.0 * dt);

  ScalarField g_mid = flow_rhs(u_mid, spec);
  VectorXd a = dom.analyze(g_mid.values);
  VectorXd lap_g = dom.synthesize_laplacian(a);
  MatrixXd grad_g = dom.synthesize_gradient(a);

  // Ambient tangential gradient of G: sum_i (grad G)_i e_i.
  MatrixXd grad_amb = grad_g.col(0).asDiagonal() * dom.frame1();
  if (n == 2) grad_amb += grad_g.col(1).asDiagonal() * dom.frame2();

  EmbeddedHypersurface surf = embed(u_mid);
  const int amb = n + 1;
  VectorXd rhs = lap_g + n * g_mid.values;
  for (int i = 0; i < dom.node_count(); ++i) {
    Vector3d X = Vector3d::Zero();
    for (int c = 0; c < amb; ++c) X[c] = surf.positions(i, c);
    double eps = fd_eps * (1.0 + X.norm());
    for (int c = 0; c < amb; ++c) {
      Vector3d xp = X, xm = X;
      xp[c] += eps;
      xm[c] -= eps;
      double fj = (spec(xp) - spec(xm)) / (2.0 * eps);
      rhs[i] -= fj * (g_mid.values[i] * dom.nodes()(i, c) + grad_amb(i, c));
    }
  }
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double g_evolution_residual(const GWindow& w, const CurvatureSpec& spec, double fd_eps) {
  return g_evolution_residual(w.u_prev, w.u_mid, w.u_next, w.dt, spec, fd_eps);
}

FlowResult run(const FlowConfig& config, const std::function<void(const FlowState&)>& hook) {
  auto t_start = std::chrono::steady_clock::now();
  if (!config.domain) throw std::invalid_argument("run: config.domain is null");
  const SphereDomain& dom = *config.domain;
  const int n = dom.dim();
  if (n != config.spec.dim)
    throw std::invalid_argument("run: domain dimension does not match curvature spec");
  if (config.initial_radius.has_value() == config.initial_field.has_value())
    throw std::invalid_argument("run: exactly one of initial_radius/initial_field required");
  if (!(config.dt_initial > 0.0) || config.dt_initial > dt_hard_cap(n))
    throw std::invalid_argument("run: dt_initial must lie in (0, 1/(2n)]");
  double tol = config.stationarity_tol > 0.0 ? config.stationarity_tol
                                             : (n == 1 ? 1e-8 : 1e-6);

  FlowResult result;
  result.energy_bound = (n + 2) * config.spec.R2 * config.spec.R2 * sphere_volume(n);
  result.conditions = vet_curvature_spec(config.spec, config.condition_samples, config.seed);

  SupportField u0 = config.initial_field ? *config.initial_field
                                         : constant_support(config.domain, *config.initial_radius);
  if (u0.domain().get() != config.domain.get())
    throw DomainMismatch("run: initial field lives on a different domain");

  result.admissibility = check_initial_admissibility(u0, config.spec);
  if (!result.admissibility.pass && !config.allow_inadmissible) {
    throw std::runtime_error("run: initial data fails admissibility (override to proceed)");
  }
  result.certified = result.conditions.a.strict_pass && result.conditions.positivity.pass &&
                     result.admissibility.pass;

  const double R1sq = config.spec.R1 * config.spec.R1;
  const double R2sq = config.spec.R2 * config.spec.R2;
  const double radial_band = config.radial_band;
  const double target_change =
      config.target_change > 0.0 ? config.target_change
                                 : 0.005 * (config.spec.R2 - config.spec.R1);
  const double dt_floor =
      config.dt_floor > 0.0 ? config.dt_floor : config.dt_initial * 1e-3;
  const double dt_cap = std::min(config.dt_cap > 0.0 ? config.dt_cap : dt_hard_cap(n),
                                 dt_hard_cap(n));

  FlowState state = make_initial_state(u0, config.spec, config.dt_initial);
  result.history.push_back(state.diagnostics);
  if (hook) hook(state);

  const double init_margin = state.diagnostics.convexity_margin;
  const double init_inner = state.diagnostics.radial_min - R1sq;
  const double init_outer = R2sq - state.diagnostics.radial_max;

  bool warned_g = false, warned_proximity = false;

  FlowState prev1 = state;
  auto finish = [&](ExitState exit, FlowState& final_state) {
    result.exit = exit;
    result.final_u = final_state.u;
    result.final_residual = final_state.diagnostics.residual_sup;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
  };

  while (true) {
    if (state.diagnostics.residual_sup < tol) return finish(ExitState::Converged, state);
    if (state.t >= config.t_max || state.step_index >= config.max_steps)
      return finish(ExitState::MaxTimeReached, state);

    FlowState next;
    try {
      next = step(state, config.spec);
    } catch (const NonPositiveSupport& e) {
      result.detail = e.what();
      return finish(ExitState::BlowUp, state);
    } catch (const EvalError& e) {
      result.detail = std::string("F evaluation failed: ") + e.what();
      return finish(ExitState::BlowUp, state);
    } catch (const std::runtime_error& e) {
      result.detail = e.what();
      return finish(ExitState::BlowUp, state);
    }

    const DiagnosticsRecord& d = next.diagnostics;
    result.history.push_back(d);

    if (spectral_tail_fraction(dom, next.coeffs) > 1e-3 && !result.under_resolved) {
      result.under_resolved = true;
      result.warnings.push_back("spectral tail above 1e-3 of total energy at step " +
                                std::to_string(d.step) + "; invariant verdicts uncertified");
    }

    // Monitors. Certified runs trip; others only warn or diagnose blow-up.
    bool certified_now = result.certified && !result.under_resolved;
    if (certified_now) {
      auto trip = [&](const std::string& monitor, double value) {
        result.violation = ViolationInfo{monitor, d.t, value};
        return finish(ExitState::InvariantViolation, next);
      };
      if (d.convexity_margin <= 0.0) return trip("convexity_margin", d.convexity_margin);
      if (d.g_min < -config.g_min_tol) return trip("g_min", d.g_min);
      if (d.radial_min <= R1sq - radial_band) return trip("radial_min", d.radial_min);
      if (d.radial_max >= R2sq + radial_band) return trip("radial_max", d.radial_max);
      if (d.energy_accumulator > result.energy_bound)
        return trip("energy_accumulator", d.energy_accumulator);
      if (d.g_min < 0.0 && !warned_g) {
        warned_g = true;
        result.warnings.push_back("G dipped to " + std::to_string(d.g_min) +
                                  " at t=" + std::to_string(d.t) + " (within tolerance band)");
      }
    } else {
      if (d.radial_max >= R2sq || d.radial_min <= R1sq) {
        result.detail = "surface left the annulus (radial range [" +
                        std::to_string(d.radial_min) + ", " + std::to_string(d.radial_max) +
                        "])";
        return finish(ExitState::BlowUp, next);
      }
    }

    // Snapshot cadence: emit the state and, when the two most recent steps
    // share one dt, a window for the G-equation consistency check.
    if (config.snapshot_every > 0 && next.step_index % config.snapshot_every == 0) {
      if (hook) hook(next);
      if (next.step_index >= 2 && prev1.dt == next.dt) {
        result.windows.push_back(GWindow{state.t, next.dt, prev1.u, state.u, next.u});
      }
    }
    prev1 = state;

    // Time-step control.
    double dt_next = next.dt;
    if (config.dt_policy == DtPolicy::Adaptive) {
      double change = (next.u.values() - state.u.values()).cwiseAbs().maxCoeff();
      bool proximity =
          (init_margin > 0 && d.convexity_margin < 0.1 * init_margin) ||
          (init_inner > 0 && d.radial_min - R1sq < 0.1 * init_inner) ||
          (init_outer > 0 && R2sq - d.radial_max < 0.1 * init_outer);
      if (proximity) {
        dt_next = std::max(dt_floor, 0.5 * next.dt);
        if (!warned_proximity) {
          warned_proximity = true;
          result.warnings.push_back("monitor proximity at t=" + std::to_string(d.t) +
                                    "; time step halved");
        }
      } else if (change < 0.25 * target_change) {
        dt_next = std::min(dt_cap, 1.2 * next.dt);
      }
    }
    next.dt = dt_next;
    state = std::move(next);
  }
}

}  // namespace hmcf

#pragma once

#include "hmcf/flow_engine.hpp"

namespace hmcf {

struct NewtonConfig {
  SupportField initial_guess;
  double residual_tol = 1e-10;  // grid sup-norm of Delta u + n u - F(X(u))
  int max_iterations = 50;
  double damping_initial = 1.0;
  double backtrack_ratio = 0.5;
  double min_step_fraction = 1e-4;
  double fd_epsilon = 1e-6;  // directional-derivative step for F

  // Inner Krylov solve.
  int gmres_max_iterations = 200;
  int gmres_restart = 80;
  double gmres_tol = 1e-12;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;   // grid sup-norm
  double convexity_margin = 0.0; // of the returned field
  std::string message;
  std::vector<double> residual_history;  // sup-norm per accepted iterate
};

/// Residual of the stationary prescribed-curvature equation; identical code
/// path to the flow velocity G.
ScalarField residual(const SupportField& u, const CurvatureSpec& spec);

/// Damped Newton on the spectral Galerkin system, matrix-free: Jacobian
/// actions by central finite differences of the residual, inner solves by
/// preconditioned GMRES. Steps are backtracked both on residual decrease and
/// on keeping the iterate uniformly convex.
std::pair<SupportField, NewtonReport> solve_stationary(const NewtonConfig& config,
                                                       const CurvatureSpec& spec);

}  // namespace hmcf

#include "hmcf/stationary_solver.hpp"

#include <cmath>

namespace hmcf {

namespace {

// Right-preconditioned restarted GMRES for x in A x = b, with A and the
// preconditioner application given as callables. Returns the attained
// relative residual.
template <typename Op, typename Prec>
double gmres(const Op& A, const Prec& M_inv, const VectorXd& b, VectorXd& x, int restart,
             int max_iter, double rel_tol) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(b.size());
    return 0.0;
  }
  x = VectorXd::Zero(b.size());
  double res = 1.0;
  int total = 0;

  while (total < max_iter && res > rel_tol) {
    VectorXd r = b - A(x);
    double beta = r.norm();
    res = beta / bnorm;
    if (res <= rel_tol) break;

    int m = std::min(restart, max_iter - total);
    MatrixXd V(b.size(), m + 1);
    MatrixXd H = MatrixXd::Zero(m + 1, m);
    VectorXd cs = VectorXd::Zero(m), sn = VectorXd::Zero(m);
    VectorXd g = VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g[0] = beta;

    int k = 0;
    for (; k < m; ++k) {
      VectorXd w = A(M_inv(V.col(k)));
      for (int i = 0; i <= k; ++i) {
        H(i, k) = V.col(i).dot(w);
        w -= H(i, k) * V.col(i);
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) > 1e-300) V.col(k + 1) = w / H(k + 1, k);

      for (int i = 0; i < k; ++i) {
        double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / denom;
      sn[k] = H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] *= cs[k];

      ++total;
      res = std::abs(g[k + 1]) / bnorm;
      if (res <= rel_tol) {
        ++k;
        break;
      }
    }
    // Back substitution and update.
    VectorXd y = VectorXd::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    VectorXd z = VectorXd::Zero(b.size());
    for (int i = 0; i < k; ++i) z += y[i] * V.col(i);
    x += M_inv(z);
  }
  return res;
}

}  // namespace

ScalarField residual(const SupportField& u, const CurvatureSpec& spec) {
  return flow_rhs(u, spec);
}

std::pair<SupportField, NewtonReport> solve_stationary(const NewtonConfig& config,
                                                       const CurvatureSpec& spec) {
  NewtonReport report;
  const SupportField& guess = config.initial_guess;
  if (!guess.domain()) throw std::invalid_argument("solve_stationary: no initial guess");
  const SphereDomain& dom = *guess.domain();
  const int n = dom.dim();
  if (n != spec.dim)
    throw std::invalid_argument("solve_stationary: domain/spec dimension mismatch");

  if (guess.values().minCoeff() <= 0.0) {
    report.message = "initial guess is not positive";
    return {guess, report};
  }
  {
    double margin = convexity_margin(guess);
    report.convexity_margin = margin;
    if (margin <= 0.0) {
      report.message = "initial guess is not uniformly convex (margin " +
                       std::to_string(margin) + ")";
      return {guess, report};
    }
  }

  const VectorXd& deg = dom.coeff_degree();
  VectorXd mu(deg.size());
  for (int i = 0; i < deg.size(); ++i) mu[i] = n - deg[i] * (deg[i] + n - 1);

  // Residual of the Galerkin system in coefficient space. The node-space
  // sup-norm reported to callers comes from the shared flow_rhs path.
  auto coeff_residual = [&](const VectorXd& a) -> VectorXd {
    auto jet = dom.evaluate_jet(a);
    if (jet.u.minCoeff() <= 0.0)
      throw NonPositiveSupport("solve_stationary: iterate lost positivity");
    MatrixXd X = jet.u.asDiagonal() * dom.nodes();
    X += jet.grad.col(0).asDiagonal() * dom.frame1();
    if (n == 2) X += jet.grad.col(1).asDiagonal() * dom.frame2();
    return mu.cwiseProduct(a) - dom.analyze(spec.evaluate_rows(X));
  };

  auto grid_residual_sup = [&](const VectorXd& a) {
    SupportField u(ScalarField{guess.domain(), dom.synthesize(a)});
    return flow_rhs(u, spec).values.cwiseAbs().maxCoeff();
  };

  auto margin_of = [&](const VectorXd& a) {
    SupportField u(ScalarField{guess.domain(), dom.synthesize(a)});
    return convexity_margin(u);
  };

  // Radial slope of F, used to shift the diagonal preconditioner so the
  // l = 0, 1 blocks stay well conditioned.
  auto radial_slope = [&](const VectorXd& a) {
    auto jet = dom.evaluate_jet(a);
    double s = 0.0;
    int count = 0;
    for (int i = 0; i < dom.node_count(); i += std::max(1, dom.node_count() / 16)) {
      Vector3d X = Vector3d::Zero();
      for (int c = 0; c <= n; ++c) X[c] = jet.u[i] * dom.nodes()(i, c);
      double r = X.norm();
      double h = 1e-5 * (1.0 + r);
      Vector3d xp = X * ((r + h) / r), xm = X * ((r - h) / r);
      s += (spec(xp) - spec(xm)) / (2.0 * h);
      ++count;
    }
    return s / count;
  };

  VectorXd a = dom.analyze(guess.values());
  VectorXd R = coeff_residual(a);
  double grid_res = grid_residual_sup(a);
  report.residual_history.push_back(grid_res);

  for (int it = 0; it < config.max_iterations; ++it) {
    if (grid_res < config.residual_tol) {
      report.converged = true;
      break;
    }

    double sigma = radial_slope(a);
    VectorXd prec(mu.size());
    for (int i = 0; i < mu.size(); ++i) {
      double d = mu[i] - sigma;
      if (std::abs(d) < 0.3) d = d < 0 ? -0.3 : 0.3;
      prec[i] = 1.0 / d;
    }
    auto M_inv = [&](const VectorXd& v) -> VectorXd { return prec.cwiseProduct(v); };

    double anorm = a.cwiseAbs().maxCoeff();
    auto J = [&](const VectorXd& v) -> VectorXd {
      double vnorm = v.cwiseAbs().maxCoeff();
      if (vnorm == 0.0) return VectorXd::Zero(v.size());
      double eps = config.fd_epsilon * (1.0 + anorm) / vnorm;
      return (coeff_residual(a + eps * v) - coeff_residual(a - eps * v)) / (2.0 * eps);
    };

    VectorXd delta;
    gmres(J, M_inv, VectorXd(-R), delta, config.gmres_restart, config.gmres_max_iterations,
          config.gmres_tol);

    // Backtracking: require residual decrease and a convex, positive iterate.
    double r0 = R.norm();
    double alpha = config.damping_initial;
    bool accepted = false;
    while (alpha >= config.min_step_fraction) {
      VectorXd a_try = a + alpha * delta;
      try {
        VectorXd R_try = coeff_residual(a_try);
        if (R_try.norm() <= (1.0 - 0.25 * alpha) * r0 && margin_of(a_try) > 0.0) {
          a = a_try;
          R = R_try;
          accepted = true;
          break;
        }
      } catch (const NonPositiveSupport&) {
        // shrink and retry
      } catch (const EvalError&) {
        // F undefined at the trial embedding; shrink and retry
      }
      alpha *= config.backtrack_ratio;
    }
    if (!accepted) {
      report.message = "line search failed at iteration " + std::to_string(it);
      break;
    }
    ++report.iterations;
    grid_res = grid_residual_sup(a);
    report.residual_history.push_back(grid_res);
  }

  if (!report.converged && grid_res < config.residual_tol) report.converged = true;
  if (!report.converged && report.message.empty())
    report.message = "maximum iterations reached";

  SupportField solution(ScalarField{guess.domain(), dom.synthesize(a)});
  report.final_residual = grid_res;
  report.convexity_margin = convexity_margin(solution);
  if (report.converged && report.convexity_margin <= 0.0) {
    report.converged = false;
    report.message = "converged residual but convexity lost at the returned point";
  }
  return {solution, report};
}

}  // namespace hmcf

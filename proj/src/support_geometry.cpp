#include "hmcf/support_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace hmcf {

SupportField::SupportField(ScalarField field) : f(std::move(field)) {
  if (!f.domain) throw std::invalid_argument("SupportField: null domain");
  if (!f.values.allFinite()) throw std::invalid_argument("SupportField: non-finite values");
}

SupportField constant_support(const DomainPtr& domain, double radius) {
  return SupportField(constant_field(domain, radius));
}

namespace {

void require_positive(const SupportField& u, const char* what) {
  double umin = u.values().minCoeff();
  if (umin <= 0.0) {
    throw NonPositiveSupport(std::string(what) +
                             ": support function is not positive (min " +
                             std::to_string(umin) + "); origin is not enclosed");
  }
}

}  // namespace

EmbeddedHypersurface embed(const SupportField& u) {
  require_positive(u, "embed");
  const SphereDomain& dom = *u.domain();
  MatrixXd grad = dom.synthesize_gradient(dom.analyze(u.values()));

  MatrixXd X = u.values().asDiagonal() * dom.nodes();
  X += grad.col(0).asDiagonal() * dom.frame1();
  if (dom.dim() == 2) X += grad.col(1).asDiagonal() * dom.frame2();
  return EmbeddedHypersurface{u.domain(), std::move(X)};
}

SymmetricTensorField second_fundamental_form(const SupportField& u) {
  const SphereDomain& dom = *u.domain();
  SymmetricTensorField h = covariant_hessian(dom, u.f);
  if (dom.dim() == 1) {
    h.components.col(0) += u.values();
  } else {
    h.components.col(0) += u.values();
    h.components.col(2) += u.values();
  }
  return h;
}

ScalarField inverse_harmonic_mean(const SupportField& u) {
  const SphereDomain& dom = *u.domain();
  ScalarField lap = laplace_beltrami(dom, u.f);
  lap.values += dom.dim() * u.values();
  return lap;
}

double convexity_margin(const SupportField& u) {
  SymmetricTensorField h = second_fundamental_form(u);
  return tensor_eigenvalues(h).col(0).minCoeff();
}

MatrixXd principal_curvatures(const SupportField& u) {
  SymmetricTensorField h = second_fundamental_form(u);
  MatrixXd ev = tensor_eigenvalues(h);
  double margin = ev.col(0).minCoeff();
  if (margin <= 0.0) {
    throw NonConvexError("principal_curvatures: convexity margin " + std::to_string(margin) +
                         " <= 0; curvatures are undefined");
  }
  // Eigenvalues of h are the curvature radii; reciprocals sorted ascending.
  MatrixXd k(ev.rows(), ev.cols());
  const int d = ev.cols();
  for (int i = 0; i < ev.rows(); ++i)
    for (int c = 0; c < d; ++c) k(i, c) = 1.0 / ev(i, d - 1 - c);
  return k;
}

std::pair<double, double> radial_range(const SupportField& u) {
  const SphereDomain& dom = *u.domain();
  MatrixXd grad = dom.synthesize_gradient(dom.analyze(u.values()));
  VectorXd r2 = u.values().array().square() + grad.rowwise().squaredNorm().array();
  return {r2.minCoeff(), r2.maxCoeff()};
}

ShapeDiagnostics compute_shape_diagnostics(const SupportField& u) {
  const SphereDomain& dom = *u.domain();
  auto jet = dom.evaluate_jet(dom.analyze(u.values()));

  ShapeDiagnostics d;
  d.h = SymmetricTensorField{u.domain(), jet.hess};
  if (dom.dim() == 1) {
    d.h.components.col(0) += u.values();
  } else {
    d.h.components.col(0) += u.values();
    d.h.components.col(2) += u.values();
  }
  d.curvature_radius_sum = ScalarField{u.domain(), jet.laplace + dom.dim() * u.values()};
  d.convexity_margin = tensor_eigenvalues(d.h).col(0).minCoeff();
  VectorXd r2 = u.values().array().square() + jet.grad.rowwise().squaredNorm().array();
  d.radial_min = r2.minCoeff();
  d.radial_max = r2.maxCoeff();
  return d;
}

ExtremalPointReport extremal_point_check(const SupportField& u, double tol) {
  double margin = convexity_margin(u);
  if (margin <= 0.0)
    throw NonConvexError("extremal_point_check requires a uniformly convex field");

  const SphereDomain& dom = *u.domain();
  MatrixXd grad = dom.synthesize_gradient(dom.analyze(u.values()));
  VectorXd r2 = u.values().array().square() + grad.rowwise().squaredNorm().array();
  MatrixXd k = principal_curvatures(u);

  ExtremalPointReport rep;
  rep.tol = tol;

  int imax, imin;
  r2.maxCoeff(&imax);
  r2.minCoeff(&imin);

  rep.max_end.node = imax;
  rep.max_end.radius = std::sqrt(r2[imax]);
  rep.max_end.grad_norm = grad.row(imax).norm();
  rep.max_end.curvature_slack = k(imax, 0) - 1.0 / rep.max_end.radius;

  rep.min_end.node = imin;
  rep.min_end.radius = std::sqrt(r2[imin]);
  rep.min_end.grad_norm = grad.row(imin).norm();
  rep.min_end.curvature_slack = 1.0 / rep.min_end.radius - k(imin, dom.dim() - 1);

  rep.pass = rep.max_end.grad_norm < tol * rep.max_end.radius &&
             rep.max_end.curvature_slack > -tol &&
             rep.min_end.grad_norm < tol * rep.min_end.radius &&
             rep.min_end.curvature_slack > -tol;
  return rep;
}

void write_geometry_snapshot(std::ostream& out, const SupportField& u) {
  const SphereDomain& dom = *u.domain();
  EmbeddedHypersurface surf = embed(u);
  ShapeDiagnostics d = compute_shape_diagnostics(u);
  VectorXd hmin = tensor_eigenvalues(d.h).col(0);

  const int amb = dom.dim() + 1;
  if (dom.dim() == 1) {
    out << "x1 x2 X1 X2 u H h_min\n";
  } else {
    out << "x1 x2 x3 X1 X2 X3 u H h_min\n";
  }
  char buf[128];
  for (int i = 0; i < dom.node_count(); ++i) {
    for (int c = 0; c < amb; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g ", dom.nodes()(i, c));
      out << buf;
    }
    for (int c = 0; c < amb; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g ", surf.positions(i, c));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", u.values()[i],
                  d.curvature_radius_sum.values[i], hmin[i]);
    out << buf;
  }
}

}  // namespace hmcf

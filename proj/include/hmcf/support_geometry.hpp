#pragma once

#include "hmcf/sphere_domain.hpp"

#include <iosfwd>

namespace hmcf {

struct NonConvexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonPositiveSupport : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Support function of a star-shaped body, sampled on a SphereDomain.
/// u(x) = <x, X(x)> where x is the outer unit normal of the encoded
/// hypersurface at the point X(x).
struct SupportField {
  ScalarField f;

  SupportField() = default;
  explicit SupportField(ScalarField field);

  const DomainPtr& domain() const { return f.domain; }
  const VectorXd& values() const { return f.values; }
};

SupportField constant_support(const DomainPtr& domain, double radius);

/// Positions X(x) of the encoded hypersurface; the outer normal at row i is
/// the domain node i.
struct EmbeddedHypersurface {
  DomainPtr domain;
  MatrixXd positions;  // node_count x (dim+1)
};

struct ShapeDiagnostics {
  double convexity_margin = 0.0;
  double radial_min = 0.0;
  double radial_max = 0.0;
  SymmetricTensorField h;
  ScalarField curvature_radius_sum;  // Delta u + n u
};

/// X = u x + sum_i (grad_i u) e_i. Requires u > 0 everywhere (the body
/// encloses the origin); otherwise the output would not embed.
EmbeddedHypersurface embed(const SupportField& u);

/// h = Hessian(u) + u I; positive definite iff the body is uniformly convex.
SymmetricTensorField second_fundamental_form(const SupportField& u);

/// Delta u + n u: the sum of the curvature radii 1/k_i (trace of h) wherever
/// the body is convex.
ScalarField inverse_harmonic_mean(const SupportField& u);

/// Principal curvatures 1/lambda_i(h), sorted ascending per node.
/// Throws NonConvexError when convexity_margin(u) <= 0.
MatrixXd principal_curvatures(const SupportField& u);

/// Min over nodes of the smallest eigenvalue of h; positive values certify
/// uniform convexity at grid resolution.
double convexity_margin(const SupportField& u);

/// (min, max) over nodes of u^2 + |grad u|^2 = |X|^2.
std::pair<double, double> radial_range(const SupportField& u);

ShapeDiagnostics compute_shape_diagnostics(const SupportField& u);

/// Farthest/nearest-point test: where |X| attains its grid maximum R the
/// position must be radial (|grad u| < tol*R) and every principal curvature
/// at least 1/R - tol; at the grid minimum r, radial and at most 1/r + tol.
struct ExtremalPointReport {
  bool pass = false;
  double tol = 0.0;
  struct End {
    int node = -1;
    double radius = 0.0;
    double grad_norm = 0.0;       // measured |grad u| at the node
    double curvature_slack = 0.0; // k_min - 1/R (max end) or 1/r - k_max (min end)
  } max_end, min_end;
};
ExtremalPointReport extremal_point_check(const SupportField& u, double tol);

/// Per-node rows "normal components, position components, u, H, min-eig(h)"
/// preceded by a one-line header.
void write_geometry_snapshot(std::ostream& out, const SupportField& u);

}  // namespace hmcf

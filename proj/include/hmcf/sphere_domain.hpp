#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <vector>

namespace hmcf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DomainMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class SphereDomain;
using DomainPtr = std::shared_ptr<const SphereDomain>;

/// Scalar samples on the nodes of a SphereDomain.
struct ScalarField {
  DomainPtr domain;
  VectorXd values;
};

/// Tangential components in the domain's per-node orthonormal frame
/// (one column on S^1, two on S^2: e1 = d/dtheta, e2 = d/dphi / sin(theta)).
struct TangentField {
  DomainPtr domain;
  MatrixXd components;  // node_count x dim
};

/// Symmetric 2-tensor in the same frame.
/// Columns: (h11) on S^1, (h11, h12, h22) on S^2.
struct SymmetricTensorField {
  DomainPtr domain;
  MatrixXd components;
};

/// Discretization of S^n, n in {1, 2}, together with the spectral
/// differentiation machinery every operator is built from.
///
/// S^1: uniform periodic grid, trigonometric (Fourier) basis up to
///      degree resolution/2 - 1, transform-based differentiation.
/// S^2: Gauss-Legendre colatitudes x uniform longitudes (no nodes at
///      the poles), spherical-harmonic basis up to degree resolution-1.
///
/// Immutable after construction; safe to share across threads.
class SphereDomain : public std::enable_shared_from_this<SphereDomain> {
 public:
  static DomainPtr build(int dim, int resolution);

  int dim() const { return dim_; }
  int resolution() const { return resolution_; }
  int node_count() const { return static_cast<int>(weights_.size()); }
  /// Highest fully resolved basis degree.
  int max_degree() const { return max_degree_; }
  int coeff_count() const { return coeff_count_; }

  /// Unit vectors in R^{dim+1}, one row per node.
  const MatrixXd& nodes() const { return nodes_; }
  const VectorXd& quadrature_weights() const { return weights_; }
  /// Frame vector e1 (and e2 for S^2) in ambient coordinates, one row per node.
  const MatrixXd& frame1() const { return frame1_; }
  const MatrixXd& frame2() const { return frame2_; }

  /// Colatitude (S^2) or angle (S^1) of every node.
  const VectorXd& thetas() const { return theta_of_node_; }

  /// Largest gap between adjacent grid angles; the natural length scale
  /// for "grid accurate" statements about extremal nodes.
  double grid_spacing() const { return grid_spacing_; }

  // Spectral transforms. Coefficient vectors have coeff_count() entries;
  // analyze() is exact on fields band-limited to max_degree(), and
  // synthesize(analyze(f)) projects f onto that band.
  VectorXd analyze(const VectorXd& node_values) const;
  VectorXd synthesize(const VectorXd& coeffs) const;

  /// Degree l of each coefficient slot (eigenvalue bookkeeping).
  const VectorXd& coeff_degree() const { return coeff_degree_; }

  /// All node-space quantities derived from one coefficient vector that the
  /// geometry and flow layers consume. Components are frame components.
  struct Jet {
    VectorXd u;
    MatrixXd grad;     // node_count x dim
    MatrixXd hess;     // node_count x 1 (S^1) or x 3 (S^2)
    VectorXd laplace;  // trace of hess, synthesized spectrally
  };
  Jet evaluate_jet(const VectorXd& coeffs) const;

  VectorXd synthesize_laplacian(const VectorXd& coeffs) const;
  MatrixXd synthesize_gradient(const VectorXd& coeffs) const;

 private:
  SphereDomain() = default;

  void build_circle(int resolution);
  void build_sphere(int resolution);

  int dim_ = 0;
  int resolution_ = 0;
  int max_degree_ = 0;
  int coeff_count_ = 0;
  double grid_spacing_ = 0.0;

  MatrixXd nodes_;
  VectorXd weights_;
  MatrixXd frame1_, frame2_;
  VectorXd theta_of_node_;
  VectorXd coeff_degree_;

  // S^1 tables: basis values and their theta-derivatives at the nodes.
  MatrixXd basis_, basis_dt_, basis_dtt_;
  MatrixXd analysis_;  // coeff_count x node_count, weights folded in

  // S^2 tables, one block per azimuthal order m.
  struct LegendreBlock {
    MatrixXd P;   // (max_degree+1-m) x n_theta, orthonormal on [0,pi]
    MatrixXd dP;  // d/dtheta of the same
  };
  std::vector<LegendreBlock> legendre_;
  MatrixXd fourier_c_, fourier_s_;            // n_phi x (L+1), basis values
  MatrixXd fourier_c_w_, fourier_s_w_;        // same with phi quadrature folded in
  VectorXd theta_, theta_weights_;            // Gauss-Legendre colatitudes
  VectorXd sin_theta_, cot_theta_;
  int n_theta_ = 0, n_phi_ = 0;

  int coeff_offset(int m) const;  // S^2 layout: m=0 cos block, then per-m cos+sin
};

DomainPtr build_domain(int dim, int resolution);

ScalarField make_field(const DomainPtr& domain, VectorXd values);
ScalarField constant_field(const DomainPtr& domain, double value);

void require_same_domain(const SphereDomain& domain, const ScalarField& field);

ScalarField laplace_beltrami(const SphereDomain& domain, const ScalarField& field);
TangentField gradient(const SphereDomain& domain, const ScalarField& field);
SymmetricTensorField covariant_hessian(const SphereDomain& domain, const ScalarField& field);
double integrate(const SphereDomain& domain, const ScalarField& field);

/// Quadrature inner product and derived L2 norm.
double inner_product(const SphereDomain& domain, const ScalarField& a, const ScalarField& b);

double sphere_volume(int dim);  // 2*pi or 4*pi

/// Pointwise trace of a symmetric tensor field.
VectorXd tensor_trace(const SymmetricTensorField& t);

/// Pointwise eigenvalues, sorted ascending; node_count x dim.
MatrixXd tensor_eigenvalues(const SymmetricTensorField& t);

}  // namespace hmcf

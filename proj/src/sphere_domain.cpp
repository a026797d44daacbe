#include "hmcf/sphere_domain.hpp"

#include <cmath>
#include <numbers>

namespace hmcf {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [-1, 1], Newton on the three-term
// recurrence. Nodes returned in descending order (colatitude ascending).
void gauss_legendre(int n, VectorXd& x, VectorXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double xi = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p_prime = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int l = 2; l <= n; ++l) {
        double p2 = ((2.0 * l - 1.0) * xi * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      p_prime = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / p_prime;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[i] = xi;
    w[i] = 2.0 / ((1.0 - xi * xi) * p_prime * p_prime);
  }
}

}  // namespace

double sphere_volume(int dim) { return dim == 1 ? 2.0 * kPi : 4.0 * kPi; }

DomainPtr SphereDomain::build(int dim, int resolution) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("SphereDomain: unsupported dim " + std::to_string(dim) +
                                " (expected 1 or 2)");
  }
  if (resolution < 8) {
    throw std::invalid_argument("SphereDomain: resolution " + std::to_string(resolution) +
                                " below minimum 8");
  }
  if (dim == 1 && resolution % 2 != 0) {
    throw std::invalid_argument("SphereDomain: S^1 grid requires even resolution, got " +
                                std::to_string(resolution));
  }
  auto domain = std::shared_ptr<SphereDomain>(new SphereDomain());
  domain->dim_ = dim;
  domain->resolution_ = resolution;
  if (dim == 1) {
    domain->build_circle(resolution);
  } else {
    domain->build_sphere(resolution);
  }
  return domain;
}

DomainPtr build_domain(int dim, int resolution) { return SphereDomain::build(dim, resolution); }

void SphereDomain::build_circle(int n) {
  max_degree_ = n / 2 - 1;
  coeff_count_ = 2 * max_degree_ + 1;
  n_theta_ = n;

  nodes_.resize(n, 2);
  frame1_.resize(n, 2);
  weights_ = VectorXd::Constant(n, 2.0 * kPi / n);
  theta_of_node_.resize(n);
  grid_spacing_ = 2.0 * kPi / n;

  for (int j = 0; j < n; ++j) {
    double th = 2.0 * kPi * j / n;
    theta_of_node_[j] = th;
    nodes_(j, 0) = std::cos(th);
    nodes_(j, 1) = std::sin(th);
    frame1_(j, 0) = -std::sin(th);
    frame1_(j, 1) = std::cos(th);
  }

  // Basis columns: [1/sqrt(2pi), cos(l th)/sqrt(pi), sin(l th)/sqrt(pi), ...].
  basis_.resize(n, coeff_count_);
  basis_dt_.resize(n, coeff_count_);
  basis_dtt_.resize(n, coeff_count_);
  coeff_degree_.resize(coeff_count_);

  const double c0 = 1.0 / std::sqrt(2.0 * kPi);
  const double c = 1.0 / std::sqrt(kPi);
  basis_.col(0).setConstant(c0);
  basis_dt_.col(0).setZero();
  basis_dtt_.col(0).setZero();
  coeff_degree_[0] = 0.0;
  for (int l = 1; l <= max_degree_; ++l) {
    int ic = 2 * l - 1, is = 2 * l;
    coeff_degree_[ic] = coeff_degree_[is] = l;
    for (int j = 0; j < n; ++j) {
      double th = theta_of_node_[j];
      double cv = std::cos(l * th), sv = std::sin(l * th);
      basis_(j, ic) = c * cv;
      basis_(j, is) = c * sv;
      basis_dt_(j, ic) = -c * l * sv;
      basis_dt_(j, is) = c * l * cv;
      basis_dtt_(j, ic) = -c * l * l * cv;
      basis_dtt_(j, is) = -c * l * l * sv;
    }
  }
  analysis_ = (2.0 * kPi / n) * basis_.transpose();
}

int SphereDomain::coeff_offset(int m) const {
  // m = 0 stores L+1 cos coefficients; each m >= 1 stores (L+1-m) cos then
  // (L+1-m) sin coefficients.
  int L = max_degree_;
  if (m == 0) return 0;
  return (L + 1) + (m - 1) * (2 * (L + 1)) - (m - 1) * m;  // sum of 2(L+1-m')
}

void SphereDomain::build_sphere(int n_theta) {
  n_theta_ = n_theta;
  n_phi_ = 2 * n_theta;
  max_degree_ = n_theta - 1;
  const int L = max_degree_;
  coeff_count_ = (L + 1) * (L + 1);

  VectorXd x;
  gauss_legendre(n_theta, x, theta_weights_);
  theta_.resize(n_theta);
  sin_theta_.resize(n_theta);
  cot_theta_.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    theta_[j] = std::acos(x[j]);
    sin_theta_[j] = std::sin(theta_[j]);
    cot_theta_[j] = x[j] / sin_theta_[j];
  }
  grid_spacing_ = 0.0;
  for (int j = 0; j + 1 < n_theta; ++j)
    grid_spacing_ = std::max(grid_spacing_, theta_[j + 1] - theta_[j]);
  grid_spacing_ = std::max({grid_spacing_, theta_[0] + theta_[0],
                            2.0 * kPi / n_phi_});

  const int n = n_theta * n_phi_;
  nodes_.resize(n, 3);
  frame1_.resize(n, 3);
  frame2_.resize(n, 3);
  weights_.resize(n);
  theta_of_node_.resize(n);

  for (int j = 0; j < n_theta; ++j) {
    double st = sin_theta_[j], ct = x[j];
    double w = theta_weights_[j] * (2.0 * kPi / n_phi_);
    for (int k = 0; k < n_phi_; ++k) {
      double ph = 2.0 * kPi * k / n_phi_;
      double cp = std::cos(ph), sp = std::sin(ph);
      int idx = j * n_phi_ + k;
      nodes_(idx, 0) = st * cp;
      nodes_(idx, 1) = st * sp;
      nodes_(idx, 2) = ct;
      frame1_(idx, 0) = ct * cp;
      frame1_(idx, 1) = ct * sp;
      frame1_(idx, 2) = -st;
      frame2_(idx, 0) = -sp;
      frame2_(idx, 1) = cp;
      frame2_(idx, 2) = 0.0;
      weights_[idx] = w;
      theta_of_node_[idx] = theta_[j];
    }
  }

  // Orthonormal associated Legendre tables P̄_lm(theta_j) with
  // int_0^pi P̄^2 sin = 1, and their theta-derivatives.
  legendre_.resize(L + 1);
  VectorXd pmm = VectorXd::Constant(n_theta, std::sqrt(0.5));
  for (int m = 0; m <= L; ++m) {
    if (m > 0) {
      double f = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      pmm = f * sin_theta_.cwiseProduct(pmm);
    }
    auto& blk = legendre_[m];
    blk.P.resize(L + 1 - m, n_theta);
    blk.dP.resize(L + 1 - m, n_theta);
    blk.P.row(0) = pmm.transpose();
    if (m + 1 <= L) {
      double f = std::sqrt(2.0 * m + 3.0);
      for (int j = 0; j < n_theta; ++j) blk.P(1, j) = f * x[j] * pmm[j];
    }
    for (int l = m + 2; l <= L; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      double b = std::sqrt((2.0 * l + 1.0) / (2.0 * l - 3.0) *
                           (double(l - 1) * (l - 1) - double(m) * m) /
                           (double(l) * l - double(m) * m));
      for (int j = 0; j < n_theta; ++j)
        blk.P(l - m, j) = a * x[j] * blk.P(l - 1 - m, j) - b * blk.P(l - 2 - m, j);
    }
    // dP̄_lm/dtheta = (l cos P̄_lm - c_lm P̄_{l-1,m}) / sin.
    for (int l = m; l <= L; ++l) {
      double clm = l > m ? std::sqrt((double(l) * l - double(m) * m) * (2.0 * l + 1.0) /
                                     (2.0 * l - 1.0))
                         : 0.0;
      for (int j = 0; j < n_theta; ++j) {
        double prev = l > m ? blk.P(l - 1 - m, j) : 0.0;
        blk.dP(l - m, j) = (l * x[j] * blk.P(l - m, j) - clm * prev) / sin_theta_[j];
      }
    }
  }

  // Longitude basis: 1/sqrt(2pi) for m=0, cos/sin(m phi)/sqrt(pi) otherwise.
  fourier_c_.resize(n_phi_, L + 1);
  fourier_s_.resize(n_phi_, L + 1);
  for (int k = 0; k < n_phi_; ++k) {
    double ph = 2.0 * kPi * k / n_phi_;
    fourier_c_(k, 0) = 1.0 / std::sqrt(2.0 * kPi);
    fourier_s_(k, 0) = 0.0;
    for (int m = 1; m <= L; ++m) {
      fourier_c_(k, m) = std::cos(m * ph) / std::sqrt(kPi);
      fourier_s_(k, m) = std::sin(m * ph) / std::sqrt(kPi);
    }
  }
  fourier_c_w_ = fourier_c_ * (2.0 * kPi / n_phi_);
  fourier_s_w_ = fourier_s_ * (2.0 * kPi / n_phi_);

  coeff_degree_.resize(coeff_count_);
  for (int m = 0; m <= L; ++m) {
    int off = coeff_offset(m);
    int cnt = L + 1 - m;
    for (int l = m; l <= L; ++l) {
      coeff_degree_[off + (l - m)] = l;
      if (m > 0) coeff_degree_[off + cnt + (l - m)] = l;
    }
  }
}

VectorXd SphereDomain::analyze(const VectorXd& f) const {
  if (dim_ == 1) return analysis_ * f;

  const int L = max_degree_;
  Eigen::Map<const MatrixXd> F(f.data(), n_phi_, n_theta_);  // column j = latitude ring
  MatrixXd Gc = (F.transpose() * fourier_c_w_);              // n_theta x (L+1)
  MatrixXd Gs = (F.transpose() * fourier_s_w_);
  VectorXd a(coeff_count_);
  for (int m = 0; m <= L; ++m) {
    int off = coeff_offset(m);
    int cnt = L + 1 - m;
    VectorXd gc = theta_weights_.cwiseProduct(Gc.col(m));
    a.segment(off, cnt) = legendre_[m].P * gc;
    if (m > 0) {
      VectorXd gs = theta_weights_.cwiseProduct(Gs.col(m));
      a.segment(off + cnt, cnt) = legendre_[m].P * gs;
    }
  }
  return a;
}

VectorXd SphereDomain::synthesize(const VectorXd& a) const {
  if (dim_ == 1) return basis_ * a;

  const int L = max_degree_;
  MatrixXd Hc = MatrixXd::Zero(n_theta_, L + 1);
  MatrixXd Hs = MatrixXd::Zero(n_theta_, L + 1);
  for (int m = 0; m <= L; ++m) {
    int off = coeff_offset(m);
    int cnt = L + 1 - m;
    Hc.col(m) = legendre_[m].P.transpose() * a.segment(off, cnt);
    if (m > 0) Hs.col(m) = legendre_[m].P.transpose() * a.segment(off + cnt, cnt);
  }
  MatrixXd F = fourier_c_ * Hc.transpose() + fourier_s_ * Hs.transpose();  // n_phi x n_theta
  return Eigen::Map<const VectorXd>(F.data(), node_count());
}

VectorXd SphereDomain::synthesize_laplacian(const VectorXd& a) const {
  VectorXd scaled(a.size());
  for (int i = 0; i < a.size(); ++i) {
    double l = coeff_degree_[i];
    scaled[i] = -l * (l + dim_ - 1) * a[i];
  }
  return synthesize(scaled);
}

MatrixXd SphereDomain::synthesize_gradient(const VectorXd& a) const {
  if (dim_ == 1) return basis_dt_ * a;

  const int L = max_degree_;
  MatrixXd dHc = MatrixXd::Zero(n_theta_, L + 1), dHs = MatrixXd::Zero(n_theta_, L + 1);
  MatrixXd Hc = MatrixXd::Zero(n_theta_, L + 1), Hs = MatrixXd::Zero(n_theta_, L + 1);
  for (int m = 0; m <= L; ++m) {
    int off = coeff_offset(m);
    int cnt = L + 1 - m;
    dHc.col(m) = legendre_[m].dP.transpose() * a.segment(off, cnt);
    if (m > 0) {
      Hc.col(m) = legendre_[m].P.transpose() * a.segment(off, cnt);
      dHs.col(m) = legendre_[m].dP.transpose() * a.segment(off + cnt, cnt);
      Hs.col(m) = legendre_[m].P.transpose() * a.segment(off + cnt, cnt);
    }
  }
  // d/dphi swaps cos <-> sin with factors +-m; e2 component carries 1/sin.
  MatrixXd mHc = Hc, mHs = Hs;
  for (int m = 0; m <= L; ++m) {
    mHc.col(m) *= m;
    mHs.col(m) *= m;
  }
  MatrixXd Ut = fourier_c_ * dHc.transpose() + fourier_s_ * dHs.transpose();
  MatrixXd Up = fourier_c_ * mHs.transpose() - fourier_s_ * mHc.transpose();

  MatrixXd g(node_count(), 2);
  for (int j = 0; j < n_theta_; ++j) {
    double inv_sin = 1.0 / sin_theta_[j];
    for (int k = 0; k < n_phi_; ++k) {
      int idx = j * n_phi_ + k;
      g(idx, 0) = Ut(k, j);
      g(idx, 1) = Up(k, j) * inv_sin;
    }
  }
  return g;
}

SphereDomain::Jet SphereDomain::evaluate_jet(const VectorXd& a) const {
  Jet jet;
  if (dim_ == 1) {
    jet.u = basis_ * a;
    jet.grad = basis_dt_ * a;
    jet.hess = basis_dtt_ * a;
    jet.laplace = jet.hess.col(0);
    return jet;
  }

  const int L = max_degree_;
  // Per-m colatitude profiles of u, du/dtheta, and the A_lm l(l+1)-scaled sum.
  MatrixXd Hc = MatrixXd::Zero(n_theta_, L + 1), Hs = MatrixXd::Zero(n_theta_, L + 1);
  MatrixXd dHc = MatrixXd::Zero(n_theta_, L + 1), dHs = MatrixXd::Zero(n_theta_, L + 1);
  MatrixXd lHc = MatrixXd::Zero(n_theta_, L + 1), lHs = MatrixXd::Zero(n_theta_, L + 1);
  for (int m = 0; m <= L; ++m) {
    int off = coeff_offset(m);
    int cnt = L + 1 - m;
    VectorXd ac = a.segment(off, cnt);
    VectorXd lac(cnt);
    for (int l = m; l <= L; ++l) lac[l - m] = double(l) * (l + 1) * ac[l - m];
    Hc.col(m) = legendre_[m].P.transpose() * ac;
    dHc.col(m) = legendre_[m].dP.transpose() * ac;
    lHc.col(m) = legendre_[m].P.transpose() * lac;
    if (m > 0) {
      VectorXd as = a.segment(off + cnt, cnt);
      VectorXd las(cnt);
      for (int l = m; l <= L; ++l) las[l - m] = double(l) * (l + 1) * as[l - m];
      Hs.col(m) = legendre_[m].P.transpose() * as;
      dHs.col(m) = legendre_[m].dP.transpose() * as;
      lHs.col(m) = legendre_[m].P.transpose() * las;
    }
  }

  // Second colatitude derivative from the associated Legendre ODE:
  // P'' = -cot(th) P' + (m^2/sin^2(th) - l(l+1)) P.
  MatrixXd ttHc(n_theta_, L + 1), ttHs(n_theta_, L + 1);
  for (int m = 0; m <= L; ++m) {
    for (int j = 0; j < n_theta_; ++j) {
      double msin2 = double(m) * m / (sin_theta_[j] * sin_theta_[j]);
      ttHc(j, m) = -cot_theta_[j] * dHc(j, m) + msin2 * Hc(j, m) - lHc(j, m);
      ttHs(j, m) = -cot_theta_[j] * dHs(j, m) + msin2 * Hs(j, m) - lHs(j, m);
    }
  }

  MatrixXd mHc = Hc, mHs = Hs, mdHc = dHc, mdHs = dHs, m2Hc = Hc, m2Hs = Hs;
  for (int m = 0; m <= L; ++m) {
    mHc.col(m) *= m;
    mHs.col(m) *= m;
    mdHc.col(m) *= m;
    mdHs.col(m) *= m;
    m2Hc.col(m) *= double(m) * m;
    m2Hs.col(m) *= double(m) * m;
  }

  MatrixXd U = fourier_c_ * Hc.transpose() + fourier_s_ * Hs.transpose();
  MatrixXd Ut = fourier_c_ * dHc.transpose() + fourier_s_ * dHs.transpose();
  MatrixXd Up = fourier_c_ * mHs.transpose() - fourier_s_ * mHc.transpose();
  MatrixXd Utt = fourier_c_ * ttHc.transpose() + fourier_s_ * ttHs.transpose();
  MatrixXd Utp = fourier_c_ * mdHs.transpose() - fourier_s_ * mdHc.transpose();
  MatrixXd Upp = -(fourier_c_ * m2Hc.transpose() + fourier_s_ * m2Hs.transpose());
  MatrixXd Lap = -(fourier_c_ * lHc.transpose() + fourier_s_ * lHs.transpose());

  const int n = node_count();
  jet.u.resize(n);
  jet.laplace.resize(n);
  jet.grad.resize(n, 2);
  jet.hess.resize(n, 3);
  for (int j = 0; j < n_theta_; ++j) {
    double inv_sin = 1.0 / sin_theta_[j];
    double cot = cot_theta_[j];
    for (int k = 0; k < n_phi_; ++k) {
      int idx = j * n_phi_ + k;
      jet.u[idx] = U(k, j);
      jet.laplace[idx] = Lap(k, j);
      jet.grad(idx, 0) = Ut(k, j);
      jet.grad(idx, 1) = Up(k, j) * inv_sin;
      // Covariant Hessian in the orthonormal frame; Christoffel terms of the
      // round metric enter through cot(theta).
      jet.hess(idx, 0) = Utt(k, j);
      jet.hess(idx, 1) = (Utp(k, j) - cot * Up(k, j)) * inv_sin;
      jet.hess(idx, 2) = Upp(k, j) * inv_sin * inv_sin + cot * Ut(k, j);
    }
  }
  return jet;
}

ScalarField make_field(const DomainPtr& domain, VectorXd values) {
  if (!domain) throw std::invalid_argument("make_field: null domain");
  if (values.size() != domain->node_count())
    throw std::invalid_argument("make_field: value count does not match node count");
  if (!values.allFinite()) throw std::invalid_argument("make_field: non-finite values");
  return ScalarField{domain, std::move(values)};
}

ScalarField constant_field(const DomainPtr& domain, double value) {
  return make_field(domain, VectorXd::Constant(domain->node_count(), value));
}

void require_same_domain(const SphereDomain& domain, const ScalarField& field) {
  if (field.domain.get() != &domain)
    throw DomainMismatch("field does not live on the given domain");
}

ScalarField laplace_beltrami(const SphereDomain& domain, const ScalarField& field) {
  require_same_domain(domain, field);
  return ScalarField{field.domain, domain.synthesize_laplacian(domain.analyze(field.values))};
}

TangentField gradient(const SphereDomain& domain, const ScalarField& field) {
  require_same_domain(domain, field);
  return TangentField{field.domain, domain.synthesize_gradient(domain.analyze(field.values))};
}

SymmetricTensorField covariant_hessian(const SphereDomain& domain, const ScalarField& field) {
  require_same_domain(domain, field);
  auto jet = domain.evaluate_jet(domain.analyze(field.values));
  return SymmetricTensorField{field.domain, std::move(jet.hess)};
}

double integrate(const SphereDomain& domain, const ScalarField& field) {
  require_same_domain(domain, field);
  return domain.quadrature_weights().dot(field.values);
}

double inner_product(const SphereDomain& domain, const ScalarField& a, const ScalarField& b) {
  require_same_domain(domain, a);
  require_same_domain(domain, b);
  return a.values.dot(domain.quadrature_weights().cwiseProduct(b.values));
}

VectorXd tensor_trace(const SymmetricTensorField& t) {
  if (t.domain->dim() == 1) return t.components.col(0);
  return t.components.col(0) + t.components.col(2);
}

MatrixXd tensor_eigenvalues(const SymmetricTensorField& t) {
  const int n = t.components.rows();
  if (t.domain->dim() == 1) return t.components;
  MatrixXd ev(n, 2);
  for (int i = 0; i < n; ++i) {
    double h11 = t.components(i, 0), h12 = t.components(i, 1), h22 = t.components(i, 2);
    double mean = 0.5 * (h11 + h22);
    double disc = std::hypot(0.5 * (h11 - h22), h12);
    ev(i, 0) = mean - disc;
    ev(i, 1) = mean + disc;
  }
  return ev;
}

}  // namespace hmcf

#include "orlicz/elliptic.hpp"

#include "orlicz/error.hpp"
#include "orlicz/generators.hpp"
#include "orlicz/oscillation.hpp"
#include "orlicz/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>

namespace orlicz {

namespace {

constexpr double kPi = std::numbers::pi;

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double monomial(const Eigen::Vector3d& z, const MultiIndex& a) { return ipow(z[0], a[0]) * ipow(z[1], a[1]) * ipow(z[2], a[2]); }

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

double binomial(const MultiIndex& a, const MultiIndex& b) {
  double r = 1.0;
  for (int d = 0; d < 3; ++d) r *= factorial(a[d]) / (factorial(b[d]) * factorial(a[d] - b[d]));
  return r;
}

std::string describe(const MultiIndex& a) {
  return "(" + std::to_string(a[0]) + "," + std::to_string(a[1]) + "," + std::to_string(a[2]) + ")";
}

GridFunction modulated(const Grid& grid, double eps, double lambda) {
  if (!(lambda > 0.0)) throw Error(Errc::invalid_argument, "coefficient wavelength must be positive");
  return GridFunction::sample(grid, [&](const Eigen::Vector3d& x) {
    return 1.0 + eps * std::sin(2.0 * kPi * (x[0] - grid.origin()[0]) / lambda);
  });
}

bool is_constant(const GridFunction& f) {
  const Eigen::ArrayXXd& v = f.values();
  for (Eigen::Index i = 1; i < v.rows(); ++i) {
    if ((v.row(i) != v.row(0)).any()) return false;
  }
  return true;
}

// Nearest-neighbour resample of a scalar field onto at most `cap` points per axis.
GridFunction coarse(const GridFunction& f, int cap) {
  const Grid& g = f.grid();
  if (g.n() <= cap) return f;
  const Grid c(g.dim(), cap, g.side(), g.topology(), g.origin());
  Eigen::ArrayXd v(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    Index3 idx = c.index(i);
    for (int d = 0; d < g.dim(); ++d) {
      const double x = c.point(i)[d] - g.origin()[d];
      idx[d] = std::clamp(static_cast<int>(std::floor(x / g.h())), 0, g.n() - 1);
    }
    v[i] = f(g.flat(idx));
  }
  return GridFunction(c, v);
}

}  // namespace

EllipticSystem::EllipticSystem(Grid grid, int m, int b, std::vector<CoefficientField> coefficients, int sphere_samples)
    : grid_(std::move(grid)), m_(m), b_(b), coefficients_(std::move(coefficients)) {
  if (m < 1 || m > 3) throw Error(Errc::invalid_argument, "system size must be 1..3");
  if (b < 1 || b > 2) throw Error(Errc::invalid_argument, "half-order b must be 1 or 2");
  if (coefficients_.empty()) throw Error(Errc::invalid_argument, "system without coefficients");
  for (const auto& c : coefficients_) {
    if (order(c.alpha) != 2 * b) throw Error(Errc::invalid_argument, "coefficient " + describe(c.alpha) + " is not of order 2b");
    for (int d = grid_.dim(); d < 3; ++d) {
      if (c.alpha[d] != 0) throw Error(Errc::invalid_argument, "multi-index exceeds the grid dimension");
    }
    if (!(c.A.grid() == grid_)) throw Error(Errc::invalid_argument, "coefficient field on a different grid");
    if (c.A.components() != m * m) throw Error(Errc::invalid_argument, "coefficient field needs m*m components");
    coeff_sup_ = std::max(coeff_sup_, c.A.values().abs().maxCoeff());
  }
  delta_ = ellipticity_constant(*this, sphere_samples);

  const GridFunction probe = coarse(coefficients_.front().A.component(0), 64);
  const double H = probe.grid().h();
  std::vector<double> R_grid;
  for (double R = 2.0 * H; R <= 0.25 * grid_.side() + 1e-12; R *= 2.0) R_grid.push_back(R);
  for (double R : R_grid) coeff_vmo_.emplace_back(R, 0.0);
  for (const auto& c : coefficients_) {
    for (int e = 0; e < m * m; ++e) {
      const GridFunction entry = c.A.component(e);
      if (is_constant(entry)) continue;
      const auto gam = vmo_modulus(coarse(entry, 64), R_grid);
      for (std::size_t k = 0; k < gam.size(); ++k) coeff_vmo_[k].second = std::max(coeff_vmo_[k].second, gam[k].second);
    }
  }
}

double EllipticSystem::coeff_gamma(double r) const {
  for (const auto& [R, g] : coeff_vmo_) {
    if (R >= r) return g;
  }
  return coeff_vmo_.empty() ? 0.0 : coeff_vmo_.back().second;
}

Eigen::MatrixXd EllipticSystem::symbol(Eigen::Index i, const Eigen::Vector3d& zeta) const {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m_, m_);
  for (const auto& c : coefficients_) {
    const double z = monomial(zeta, c.alpha);
    for (int j = 0; j < m_; ++j) {
      for (int k = 0; k < m_; ++k) l(j, k) += c.A(i, j * m_ + k) * z;
    }
  }
  return l;
}

EllipticSystem EllipticSystem::laplacian(const Grid& grid, double eps, double lambda) {
  return scalar_second_order(grid, Eigen::Matrix3d::Identity(), eps, lambda);
}

EllipticSystem EllipticSystem::scalar_second_order(const Grid& grid, const Eigen::Matrix3d& A, double eps, double lambda) {
  const GridFunction a = modulated(grid, eps, lambda);
  std::vector<CoefficientField> coeffs;
  for (int i = 0; i < grid.dim(); ++i) {
    for (int j = i; j < grid.dim(); ++j) {
      const double c = i == j ? A(i, i) : A(i, j) + A(j, i);
      if (c == 0.0) continue;
      MultiIndex alpha{0, 0, 0};
      ++alpha[i];
      ++alpha[j];
      coeffs.push_back({alpha, a * c});
    }
  }
  return EllipticSystem(grid, 1, 1, std::move(coeffs));
}

EllipticSystem EllipticSystem::polyharmonic(const Grid& grid, int b, double eps, double lambda) {
  const GridFunction a = modulated(grid, eps, lambda);
  std::vector<CoefficientField> coeffs;
  for (const auto& alpha : multi_indices(grid.dim(), 2 * b)) {
    if (alpha[0] % 2 || alpha[1] % 2 || alpha[2] % 2) continue;
    const double c = factorial(b) / (factorial(alpha[0] / 2) * factorial(alpha[1] / 2) * factorial(alpha[2] / 2));
    coeffs.push_back({alpha, a * c});
  }
  return EllipticSystem(grid, 1, b, std::move(coeffs));
}

EllipticSystem EllipticSystem::decoupled(const Grid& grid, const Eigen::Matrix3d& A1, const Eigen::Matrix3d& A2) {
  std::vector<CoefficientField> coeffs;
  for (int i = 0; i < grid.dim(); ++i) {
    for (int j = i; j < grid.dim(); ++j) {
      const double c1 = i == j ? A1(i, i) : A1(i, j) + A1(j, i);
      const double c2 = i == j ? A2(i, i) : A2(i, j) + A2(j, i);
      if (c1 == 0.0 && c2 == 0.0) continue;
      MultiIndex alpha{0, 0, 0};
      ++alpha[i];
      ++alpha[j];
      Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(grid.size(), 4);
      v.col(0).setConstant(c1);
      v.col(3).setConstant(c2);
      coeffs.push_back({alpha, GridFunction(grid, std::move(v))});
    }
  }
  return EllipticSystem(grid, 2, 1, std::move(coeffs));
}

EllipticSystem EllipticSystem::coupled(const Grid& grid, double c) {
  std::vector<CoefficientField> coeffs;
  for (int i = 0; i < grid.dim(); ++i) {
    MultiIndex alpha{0, 0, 0};
    alpha[i] = 2;
    Eigen::ArrayXXd v(grid.size(), 4);
    v.col(0).setConstant(1.0);
    v.col(1).setConstant(c);
    v.col(2).setConstant(c);
    v.col(3).setConstant(1.0);
    coeffs.push_back({alpha, GridFunction(grid, std::move(v))});
  }
  return EllipticSystem(grid, 2, 1, std::move(coeffs));
}

EllipticSystem EllipticSystem::by_name(const std::string& family, const Grid& grid, const Params& params) {
  auto get = [&](const char* key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  const double eps = get("eps", 0.0), lambda = get("lambda", 1.0);
  if (family == "laplacian") return laplacian(grid, eps, lambda);
  if (family == "anisotropic") {
    const Eigen::Matrix3d A = Eigen::Vector3d(get("a11", 1.0), get("a22", 4.0), get("a33", 1.0)).asDiagonal();
    return scalar_second_order(grid, A, eps, lambda);
  }
  if (family == "biharmonic") return polyharmonic(grid, 2, eps, lambda);
  if (family == "decoupled") {
    const Eigen::Matrix3d A2 = Eigen::Vector3d(get("a11", 1.0), get("a22", 4.0), get("a33", 1.0)).asDiagonal();
    return decoupled(grid, Eigen::Matrix3d::Identity(), A2);
  }
  if (family == "coupled") return coupled(grid, get("c", 0.5));
  throw Error(Errc::unsupported_family, "unknown system family '" + family + "'");
}

std::vector<std::string> EllipticSystem::catalog() { return {"laplacian", "anisotropic", "biharmonic", "decoupled", "coupled"}; }

double ellipticity_constant(const EllipticSystem& sys, int sphere_samples) {
  const Grid& g = sys.grid();
  const int m = sys.m();
  if (g.dim() >= 2 && sphere_samples < 8) throw Error(Errc::invalid_argument, "too few sphere samples");
  const auto dirs = sphere_directions(g.dim(), sphere_samples);
  const auto& coeffs = sys.coefficients();
  std::vector<double> powers(dirs.size() * coeffs.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    for (std::size_t c = 0; c < coeffs.size(); ++c) powers[d * coeffs.size() + c] = monomial(dirs[d], coeffs[c].alpha);
  }
  bool constant = true;
  for (const auto& c : coeffs) constant = constant && is_constant(c.A);
  const Eigen::Index points = constant ? 1 : g.size();

  double delta = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd l(m, m);
  for (Eigen::Index i = 0; i < points; ++i) {
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      double det;
      if (m == 1) {
        det = 0.0;
        for (std::size_t c = 0; c < coeffs.size(); ++c) det += coeffs[c].A(i) * powers[d * coeffs.size() + c];
      } else {
        l.setZero();
        for (std::size_t c = 0; c < coeffs.size(); ++c) {
          const double z = powers[d * coeffs.size() + c];
          for (int j = 0; j < m; ++j) {
            for (int k = 0; k < m; ++k) l(j, k) += coeffs[c].A(i, j * m + k) * z;
          }
        }
        det = l.determinant();
      }
      delta = std::min(delta, det);
    }
  }
  if (!(delta > 0.0)) {
    throw Error(Errc::not_elliptic, "det l(x, zeta) reaches " + std::to_string(delta) + " on the sampled sphere");
  }
  return delta;
}

FrozenOperator::FrozenOperator(int dim, int m, int b, Eigen::Vector3d x0, std::vector<std::pair<MultiIndex, Eigen::MatrixXd>> A)
    : dim_(dim), m_(m), b_(b), x0_(std::move(x0)), A_(std::move(A)) {}

Eigen::MatrixXd FrozenOperator::symbol(const Eigen::Vector3d& zeta) const {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m_, m_);
  for (const auto& [alpha, M] : A_) l += M * monomial(zeta, alpha);
  return l;
}

double FrozenOperator::scalar_symbol(const Eigen::Vector3d& zeta) const { return symbol(zeta).determinant(); }

Eigen::MatrixXd FrozenOperator::cofactors(const Eigen::Vector3d& zeta) const {
  const Eigen::MatrixXd l = symbol(zeta);
  if (m_ == 1) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd C(m_, m_);
  for (int j = 0; j < m_; ++j) {
    for (int k = 0; k < m_; ++k) {
      Eigen::MatrixXd minor(m_ - 1, m_ - 1);
      for (int r = 0, rr = 0; r < m_; ++r) {
        if (r == j) continue;
        for (int c = 0, cc = 0; c < m_; ++c) {
          if (c == k) continue;
          minor(rr, cc++) = l(r, c);
        }
        ++rr;
      }
      C(j, k) = ((j + k) % 2 ? -1.0 : 1.0) * minor.determinant();
    }
  }
  return C;
}

double FrozenOperator::cofactor_identity_error(int samples, std::uint64_t seed) const {
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::Vector3d z = Eigen::Vector3d::Zero();
    for (int d = 0; d < dim_; ++d) z[d] = rng.normal();
    const Eigen::MatrixXd l = symbol(z), C = cofactors(z);
    const double det = l.determinant();
    const Eigen::MatrixXd E = l * C.transpose() - det * Eigen::MatrixXd::Identity(m_, m_);
    const double scale = std::abs(det) + l.norm() * C.norm();
    worst = std::max(worst, scale > 0.0 ? E.cwiseAbs().maxCoeff() / scale : 0.0);
  }
  return worst;
}

FrozenOperator freeze(const EllipticSystem& sys, Eigen::Index i) {
  if (i < 0 || i >= sys.grid().size()) throw Error(Errc::invalid_argument, "base point is not a grid point");
  const int m = sys.m();
  std::vector<std::pair<MultiIndex, Eigen::MatrixXd>> A;
  for (const auto& c : sys.coefficients()) {
    Eigen::MatrixXd M(m, m);
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) M(j, k) = c.A(i, j * m + k);
    }
    A.emplace_back(c.alpha, M);
  }
  FrozenOperator op(sys.dim(), m, sys.b(), sys.grid().point(i), std::move(A));
  for (const auto& z : sphere_directions(sys.dim(), 720)) {
    const double det = op.scalar_symbol(z);
    if (!(det > 0.0)) throw Error(Errc::not_elliptic, "frozen symbol vanishes at a sampled direction");
  }
  if (op.cofactor_identity_error() > 1e-10) throw Error(Errc::not_elliptic, "cofactor identity fails");
  return op;
}

GammaExpression::GammaExpression(int dim, Eigen::Matrix3d B, std::vector<GammaTerm> terms)
    : dim_(dim), B_(std::move(B)), terms_(std::move(terms)) {}

double GammaExpression::operator()(const Eigen::Vector3d& x) const {
  const double Q = x.head(dim_).dot(B_.topLeftCorner(dim_, dim_) * x.head(dim_));
  const double L = std::log(Q);
  double s = 0.0;
  for (const auto& t : terms_) s += t.c * monomial(x, t.beta) * std::pow(Q, t.p) * ipow(L, t.q);
  return s;
}

GammaExpression GammaExpression::derivative(int axis) const {
  std::map<std::tuple<int, int, int, double, int>, double> acc;
  auto add = [&](const MultiIndex& beta, double p, int q, double c) {
    if (c != 0.0) acc[{beta[0], beta[1], beta[2], p, q}] += c;
  };
  for (const auto& t : terms_) {
    if (t.beta[axis] > 0) {
      MultiIndex b = t.beta;
      --b[axis];
      add(b, t.p, t.q, t.c * t.beta[axis]);
    }
    for (int k = 0; k < dim_; ++k) {
      if (B_(axis, k) == 0.0) continue;
      MultiIndex b = t.beta;
      ++b[k];
      if (t.p != 0.0) add(b, t.p - 1.0, t.q, 2.0 * t.p * B_(axis, k) * t.c);
      if (t.q > 0) add(b, t.p - 1.0, t.q - 1, 2.0 * t.q * B_(axis, k) * t.c);
    }
  }
  std::vector<GammaTerm> out;
  for (const auto& [key, c] : acc) {
    if (c == 0.0) continue;
    const auto& [b0, b1, b2, p, q] = key;
    out.push_back({{b0, b1, b2}, p, q, c});
  }
  return GammaExpression(dim_, B_, std::move(out));
}

GammaExpression GammaExpression::derivative(const MultiIndex& alpha) const {
  GammaExpression e = *this;
  for (int d = 0; d < 3; ++d) {
    for (int k = 0; k < alpha[d]; ++k) e = e.derivative(d);
  }
  return e;
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::scalar_second_order: return "scalar-second-order";
    case KernelFamily::polyharmonic: return "polyharmonic";
    case KernelFamily::decoupled: return "decoupled";
  }
  return "unknown";
}

Eigen::MatrixXd FundamentalKernel::operator()(const Eigen::Vector3d& x) const {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) G(j, j) = gamma[j](x);
  return G;
}

const DerivativeKernel& FundamentalKernel::derivative(const MultiIndex& alpha, int component) const {
  for (const auto& d : derivative_kernels) {
    if (d.alpha == alpha && d.component == component) return d;
  }
  throw Error(Errc::invalid_argument, "no derivative kernel for " + describe(alpha));
}

namespace {

double coefficient_of(const FrozenOperator& op, const MultiIndex& alpha, int j, int k) {
  for (const auto& [a, M] : op.matrices()) {
    if (a == alpha) return M(j, k);
  }
  return 0.0;
}

// Gamma for the scalar operator sum_alpha c_alpha D^alpha held in entry (j, j).
std::pair<KernelFamily, GammaExpression> scalar_gamma(const FrozenOperator& op, int j) {
  const int n = op.dim();
  if (op.b() == 1) {
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        MultiIndex alpha{0, 0, 0};
        ++alpha[r];
        ++alpha[c];
        A(r, c) = r == c ? coefficient_of(op, alpha, j, j) : 0.5 * coefficient_of(op, alpha, j, j);
      }
    }
    const Eigen::MatrixXd An = A.topLeftCorner(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(An);
    if (llt.info() != Eigen::Success) throw Error(Errc::not_elliptic, "second-order part is not positive definite");
    Eigen::Matrix3d B = Eigen::Matrix3d::Identity();
    B.topLeftCorner(n, n) = An.inverse();
    const double s = 1.0 / std::sqrt(An.determinant());
    GammaTerm t;
    if (n == 1) {
      t = {{0, 0, 0}, 0.5, 0, 0.5 * s};
    } else if (n == 2) {
      t = {{0, 0, 0}, 0.0, 1, s / (4.0 * kPi)};
    } else {
      t = {{0, 0, 0}, -0.5, 0, -s / (4.0 * kPi)};
    }
    return {KernelFamily::scalar_second_order, GammaExpression(n, B, {t})};
  }
  // b = 2: only c |zeta|^4.
  MultiIndex a4{0, 0, 0};
  a4[0] = 4;
  const double c = coefficient_of(op, a4, j, j);
  if (!(c > 0.0)) throw Error(Errc::unsupported_family, "fourth-order symbol is not a multiple of |zeta|^4");
  for (const auto& alpha : multi_indices(n, 4)) {
    double expect = 0.0;
    if (alpha[0] % 2 == 0 && alpha[1] % 2 == 0 && alpha[2] % 2 == 0) {
      expect = c * 2.0 / (factorial(alpha[0] / 2) * factorial(alpha[1] / 2) * factorial(alpha[2] / 2));
    }
    if (std::abs(coefficient_of(op, alpha, j, j) - expect) > 1e-12 * c) {
      throw Error(Errc::unsupported_family, "fourth-order symbol is not a multiple of |zeta|^4");
    }
  }
  GammaTerm t;
  if (n == 1) {
    t = {{0, 0, 0}, 1.5, 0, 1.0 / (12.0 * c)};
  } else if (n == 2) {
    t = {{0, 0, 0}, 1.0, 1, 1.0 / (16.0 * kPi * c)};
  } else {
    t = {{0, 0, 0}, 0.5, 0, -1.0 / (8.0 * kPi * c)};
  }
  return {KernelFamily::polyharmonic, GammaExpression(n, Eigen::Matrix3d::Identity(), {t})};
}

}  // namespace

FundamentalKernel fundamental_kernel(const FrozenOperator& frozen) {
  FundamentalKernel fk;
  fk.dim = frozen.dim();
  fk.m = frozen.m();
  fk.b = frozen.b();
  fk.base_point = frozen.base_point();
  for (const auto& [alpha, M] : frozen.matrices()) {
    for (int j = 0; j < fk.m; ++j) {
      for (int k = 0; k < fk.m; ++k) {
        if (j != k && M(j, k) != 0.0) {
          throw Error(Errc::unsupported_family, "coupled systems have no closed-form fundamental matrix here");
        }
      }
    }
  }
  for (int j = 0; j < fk.m; ++j) {
    auto [family, expr] = scalar_gamma(frozen, j);
    fk.family = fk.m > 1 ? KernelFamily::decoupled : family;
    fk.gamma.push_back(std::move(expr));
  }

  const int n = fk.dim;
  const SphereRule rule = sphere_rule(n, n == 2 ? 512 : 128);
  for (int j = 0; j < fk.m; ++j) {
    for (const auto& alpha : multi_indices(n, 2 * fk.b)) {
      const GammaExpression d = fk.gamma[j].derivative(alpha);
      int s = 0;
      while (alpha[s] == 0) ++s;
      MultiIndex gam = alpha;
      --gam[s];
      const GammaExpression dg = fk.gamma[j].derivative(gam);
      const double term = rule.integrate([&](const Eigen::Vector3d& w) { return dg(w) * w[s]; });
      std::string name = "D" + describe(alpha) + "Gamma";
      if (fk.m > 1) name += "_" + std::to_string(j + 1);
      VCZKernel k(name, n, {{{}, [d](const Eigen::Vector3d& w) { return d(w); }}});
      fk.derivative_kernels.push_back({alpha, j, std::move(k), term});
    }
  }
  return fk;
}

GridFunction apply_operator(const EllipticSystem& sys, const GridFunction& u) {
  if (!(u.grid() == sys.grid())) throw Error(Errc::invalid_argument, "function lives on a different grid");
  const int m = sys.m();
  if (u.components() != m) throw Error(Errc::invalid_argument, "function needs m components");
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(u.grid().size(), m);
  for (const auto& c : sys.coefficients()) {
    const GridFunction D = finite_difference(u, c.alpha);
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) out.col(j) += c.A.values().col(j * m + k) * D.values().col(k);
    }
  }
  return GridFunction(u.grid(), std::move(out));
}

ConvolutionCheck convolution_check(const FundamentalKernel& gamma, const FrozenOperator& frozen, int n, double bump_radius) {
  if (gamma.dim != 3) throw Error(Errc::invalid_argument, "the convolution check runs in three dimensions");
  const Grid g(3, n, 1.0, Topology::rectangle);
  const GridFunction phi = generate("compact_bump", g, {{"radius", bump_radius}});

  std::vector<CoefficientField> coeffs;
  for (const auto& [alpha, M] : frozen.matrices()) {
    coeffs.push_back({alpha, GridFunction(g, Eigen::ArrayXd(Eigen::ArrayXd::Constant(g.size(), M(0, 0))))});
  }
  const EllipticSystem sys(g, 1, frozen.b(), std::move(coeffs));
  const GridFunction Lphi = apply_operator(sys, phi);

  const double h = g.h();
  const int M = 2 * n;
  std::vector<double> kernel(static_cast<std::size_t>(M) * M * M), data(kernel.size(), 0.0);
  const GammaExpression& G = gamma.gamma[0];
  const int deg = gamma.degree();
  const SphereRule rule = sphere_rule(3, 512);
  const double centre = rule.integrate([&](const Eigen::Vector3d& w) {
    const double rho = 0.5 * h / w.cwiseAbs().maxCoeff();
    return G(w) * std::pow(rho, deg + 3) / (deg + 3);
  }) / (h * h * h);
  auto off = [&](int i) { return (i < n ? i : i - M) * h; };
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < M; ++k) {
        const std::size_t f = (static_cast<std::size_t>(i) * M + j) * M + k;
        if (i == 0 && j == 0 && k == 0) {
          kernel[f] = centre;
        } else if (i == n || j == n || k == n) {
          kernel[f] = 0.0;
        } else {
          kernel[f] = G(Eigen::Vector3d(off(i), off(j), off(k)));
        }
      }
    }
  }
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    const Index3 idx = g.index(p);
    data[(static_cast<std::size_t>(idx[0]) * M + idx[1]) * M + idx[2]] = Lphi(p) * h * h * h;
  }
  const std::vector<double> conv = circular_convolve(kernel, data, 3, M);
  Eigen::ArrayXd u(g.size());
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    const Index3 idx = g.index(p);
    u[p] = conv[(static_cast<std::size_t>(idx[0]) * M + idx[1]) * M + idx[2]];
  }
  ConvolutionCheck out;
  out.n = n;
  out.rel_l2 = std::sqrt((u - phi.scalar()).square().sum() / phi.scalar().square().sum());
  return out;
}

RepresentationResidual representation_residual(const EllipticSystem& sys, const GridFunction& v, const MultiIndex& alpha,
                                               const YoungFunction& phi) {
  const Grid& g = sys.grid();
  if (!g.periodic()) throw Error(Errc::non_torus, "the representation check runs on a torus");
  if (sys.m() != 1) throw Error(Errc::unsupported_family, "the representation check handles scalar systems");
  if (order(alpha) != 2 * sys.b()) throw Error(Errc::invalid_argument, "|alpha| must equal 2b");
  if (!(v.grid() == g) || v.components() != 1) throw Error(Errc::invalid_argument, "v must be scalar on the system grid");

  const FrozenOperator frozen = freeze(sys, 0);
  const FundamentalKernel fk = fundamental_kernel(frozen);

  const auto& coeffs = sys.coefficients();
  std::size_t ref = 0;
  for (std::size_t c = 1; c < coeffs.size(); ++c) {
    if (std::abs(coeffs[c].A(0)) > std::abs(coeffs[ref].A(0))) ref = c;
  }
  const Eigen::ArrayXd a = coeffs[ref].A.scalar() / coeffs[ref].A(0);
  for (const auto& c : coeffs) {
    const double err = (c.A.scalar() - a * c.A(0)).abs().maxCoeff();
    if (err > 1e-12 * std::max(1.0, sys.coeff_sup())) {
      throw Error(Errc::unsupported_family, "coefficients are not a scalar multiple of a constant pattern");
    }
  }
  const Eigen::ArrayXd s = a.inverse();

  auto lookup = [g, s](const Eigen::Vector3d& x) {
    Index3 idx{0, 0, 0};
    for (int d = 0; d < g.dim(); ++d) idx[d] = static_cast<int>(std::lround((x[d] - g.origin()[d]) / g.h()));
    return s[g.wrap(idx)];
  };
  const DerivativeKernel& dk = fk.derivative(alpha);
  const VCZKernel K("K" + describe(alpha), g.dim(), {{lookup, dk.kernel.terms()[0].sphere}});
  const PvOperator op(K, g);

  const GridFunction Lv = apply_operator(sys, v);
  const GridFunction lhs = finite_difference(v, alpha);
  GridFunction rhs = op.apply(Lv) + Lv.times(GridFunction(g, s)) * dk.sphere_term;
  for (const auto& c : coeffs) rhs = rhs - op.commutator(c.A, finite_difference(v, c.alpha));

  const GridFunction res = lhs - rhs;
  RepresentationResidual out;
  out.l2 = lp_norm(res, 2.0);
  out.orlicz = luxemburg_norm(res, phi);
  out.lhs_l2 = lp_norm(lhs, 2.0);
  return out;
}

double outer_theta(double theta) { return theta * (3.0 - theta) / 2.0; }

GridFunction cutoff(const Grid& grid, const Eigen::Vector3d& center, double r, double theta, int smoothness) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error(Errc::invalid_argument, "theta must lie in (0, 1)");
  if (!(r > 0.0)) throw Error(Errc::invalid_argument, "cutoff radius must be positive");
  if (smoothness < 0 || smoothness > 8) throw Error(Errc::invalid_argument, "smoothness must be 0..8");
  const double tp = outer_theta(theta);
  const double width = (tp - theta) * r;
  if (width < 3.0 * grid.h()) {
    throw Error(Errc::annulus_too_thin, "transition annulus " + std::to_string(width) + " is thinner than 3h");
  }
  if (!Region::ball(center, tp * r).inside_domain(grid)) {
    throw Error(Errc::invalid_argument, "outer cutoff ball leaves the domain");
  }
  const int N = smoothness;
  std::vector<double> coef(N + 1);
  for (int j = 0; j <= N; ++j) {
    coef[j] = factorial(N + j) / (factorial(N) * factorial(j)) * factorial(2 * N + 1) /
              (factorial(N - j) * factorial(N + j + 1)) * (j % 2 ? -1.0 : 1.0);
  }
  auto step = [&](double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double s = 0.0;
    for (int j = N; j >= 0; --j) s = s * t + coef[j];
    return ipow(t, N + 1) * s;
  };
  return GridFunction::sample(grid, [&](const Eigen::Vector3d& x) {
    const double rho = grid.displacement(center, x).head(grid.dim()).norm();
    return 1.0 - step((rho - theta * r) / width);
  });
}

std::vector<double> cutoff_constants(const GridFunction& phi, double r, double theta, int smax) {
  if (smax < 0 || smax > 4) throw Error(Errc::invalid_argument, "cutoff derivative order must be 0..4");
  const double scale = theta * (1.0 - theta) * r;
  std::vector<double> out;
  for (int s = 0; s <= smax; ++s) {
    double sup = 0.0;
    for (const auto& beta : multi_indices(phi.grid().dim(), s)) {
      const GridFunction D = s == 0 ? phi : finite_difference(phi, beta);
      const auto mask = stencil_mask(phi.grid(), beta);
      for (Eigen::Index i = 0; i < phi.grid().size(); ++i) {
        if (mask[i]) sup = std::max(sup, std::abs(D(i)));
      }
    }
    out.push_back(sup * std::pow(scale, s));
  }
  return out;
}

double derivative_seminorm(const GridFunction& u, const YoungFunction& phi, int s, const Region& region) {
  if (s == 0) return luxemburg_norm(u, phi, region);
  double total = 0.0;
  for (const auto& beta : multi_indices(u.grid().dim(), s)) {
    require_stencil(u.grid(), beta, region);
    total += luxemburg_norm(finite_difference(u, beta), phi, region);
  }
  return total;
}

InterpolationReport interpolation_check(const GridFunction& u, const YoungFunction& phi, int b, const Eigen::Vector3d& center,
                                        double r, double theta, const std::vector<double>& mu_list) {
  if (b < 1 || b > 2) throw Error(Errc::invalid_argument, "half-order b must be 1 or 2");
  InterpolationReport rep;
  if (b == 1) return rep;
  const Region ball = Region::ball(center, theta * r);
  const double top = derivative_seminorm(u, phi, 2 * b, ball);
  const double low = derivative_seminorm(u, phi, 0, ball);
  for (int s = 1; s <= 2 * b - 1; ++s) {
    const double lhs = derivative_seminorm(u, phi, s, ball);
    double best = 0.0;
    for (double mu : mu_list) {
      if (!(mu > 0.0)) throw Error(Errc::invalid_argument, "mu must be positive");
      InterpolationRow row{s, mu, lhs, top, low, 0.0};
      if (low > 0.0) row.constant = std::max(0.0, lhs - mu * top) * std::pow(mu, double(s) / (2 * b - s)) / low;
      best = std::max(best, row.constant);
      rep.rows.push_back(row);
    }
    rep.constants.emplace_back(s, best);
  }
  return rep;
}

namespace {

void require_operator_stencil(const EllipticSystem& sys, const Region& region) {
  if (!region.inside_domain(sys.grid())) throw Error(Errc::invalid_argument, "region " + region.describe() + " leaves the domain");
  for (const auto& c : sys.coefficients()) require_stencil(sys.grid(), c.alpha, region);
}

}  // namespace

std::vector<EstimateReport> interior_estimate(const EllipticSystem& sys, const GridFunction& u, const YoungFunction& phi,
                                              const std::vector<Ball>& balls, const std::vector<double>& thetas) {
  if (!certify(phi).both()) throw Error(Errc::not_certified, phi.label() + " is not in Delta_2 and nabla_2");
  const GridFunction f = apply_operator(sys, u);
  const int b2 = 2 * sys.b();
  std::vector<EstimateReport> out;
  for (const auto& ball : balls) {
    const Region outer = Region::ball(ball), inner = Region::ball(ball.center, 0.5 * ball.radius);
    require_operator_stencil(sys, outer);
    EstimateReport rep;
    rep.center = ball.center;
    rep.r = ball.radius;
    rep.lhs = derivative_seminorm(u, phi, b2, inner);
    rep.rhs_f = luxemburg_norm(f, phi, outer);
    rep.rhs_u = std::pow(ball.radius, -b2) * luxemburg_norm(u, phi, outer);
    const double rhs = rep.rhs_f + rep.rhs_u;
    rep.vacuous = rhs == 0.0;
    rep.C_emp = rep.vacuous ? 0.0 : rep.lhs / rhs;
    for (int s = 0; s <= b2; ++s) {
      double best = 0.0;
      for (double th : thetas) {
        best = std::max(best, std::pow((1.0 - th) * ball.radius, s) *
                                  derivative_seminorm(u, phi, s, Region::ball(ball.center, th * ball.radius)));
      }
      rep.theta_seminorms.push_back(best);
    }
    rep.interpolation_constants =
        interpolation_check(u, phi, sys.b(), ball.center, ball.radius, 1.0, {0.01, 0.1, 1.0, 10.0}).constants;
    rep.gamma_coeff = sys.coeff_gamma(ball.radius);
    out.push_back(std::move(rep));
  }
  return out;
}

CoveringReport covering_estimate(const EllipticSystem& sys, const GridFunction& u, const YoungFunction& phi,
                                 const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, double r) {
  const int n = sys.dim();
  if (!(r > 0.0)) throw Error(Errc::invalid_argument, "covering radius must be positive");
  Eigen::Vector3d olo = lo, ohi = hi;
  std::array<int, 3> count{1, 1, 1};
  std::array<double, 3> step{0, 0, 0};
  for (int d = 0; d < n; ++d) {
    if (!(hi[d] > lo[d])) throw Error(Errc::invalid_argument, "empty covering box");
    olo[d] -= r;
    ohi[d] += r;
    count[d] = static_cast<int>(std::ceil((hi[d] - lo[d]) / (r / std::sqrt(double(n))) - 1e-12));
    step[d] = (hi[d] - lo[d]) / count[d];
  }
  CoveringReport rep;
  for (int i = 0; i < count[0]; ++i) {
    for (int j = 0; j < count[1]; ++j) {
      for (int k = 0; k < count[2]; ++k) {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        const std::array<int, 3> ijk{i, j, k};
        for (int d = 0; d < n; ++d) c[d] = lo[d] + (ijk[d] + 0.5) * step[d];
        rep.cover.push_back({c, r});
      }
    }
  }
  const Region inner = Region::box(lo, hi), outer = Region::box(olo, ohi);
  require_operator_stencil(sys, outer);
  for (const auto& e : interior_estimate(sys, u, phi, rep.cover)) rep.max_ball_constant = std::max(rep.max_ball_constant, e.C_emp);
  const GridFunction f = apply_operator(sys, u);
  rep.lhs = sobolev_orlicz_norm(u, phi, 2 * sys.b(), inner);
  rep.rhs_f = luxemburg_norm(f, phi, outer);
  rep.rhs_u = luxemburg_norm(u, phi, outer);
  const double rhs = rep.rhs_f + rep.rhs_u;
  rep.C_emp = rhs > 0.0 ? rep.lhs / rhs : 0.0;
  return rep;
}

LeibnizCheck leibniz_check(const EllipticSystem& sys, const GridFunction& phi, const GridFunction& u) {
  if (phi.components() != 1) throw Error(Errc::invalid_argument, "cutoff must be scalar");
  const Grid& g = sys.grid();
  const int m = sys.m();
  const GridFunction direct = apply_operator(sys, u.times(phi));
  Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(g.size(), m);
  Eigen::Array<bool, Eigen::Dynamic, 1> mask = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(g.size(), true);
  for (const auto& c : sys.coefficients()) {
    mask = mask && stencil_mask(g, c.alpha);
    Eigen::ArrayXXd Dprod = Eigen::ArrayXXd::Zero(g.size(), m);
    for (int b0 = 0; b0 <= c.alpha[0]; ++b0) {
      for (int b1 = 0; b1 <= c.alpha[1]; ++b1) {
        for (int b2 = 0; b2 <= c.alpha[2]; ++b2) {
          const MultiIndex beta{b0, b1, b2}, rest{c.alpha[0] - b0, c.alpha[1] - b1, c.alpha[2] - b2};
          const GridFunction Dphi = order(beta) == 0 ? phi : finite_difference(phi, beta);
          const GridFunction Du = order(rest) == 0 ? u : finite_difference(u, rest);
          const double w = binomial(c.alpha, beta);
          for (int k = 0; k < m; ++k) Dprod.col(k) += w * Dphi.values().col(0) * Du.values().col(k);
        }
      }
    }
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) sum.col(j) += c.A.values().col(j * m + k) * Dprod.col(k);
    }
  }
  LeibnizCheck out;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!mask[i]) continue;
    out.max_abs = std::max(out.max_abs, (direct.values().row(i) - sum.row(i)).abs().maxCoeff());
    out.scale = std::max(out.scale, direct.values().row(i).abs().maxCoeff());
  }
  return out;
}

}  // namespace orlicz

#include "orlicz/czop.hpp"

#include "orlicz/error.hpp"
#include "orlicz/gridfn.hpp"
#include "orlicz/oscillation.hpp"
#include "orlicz/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace orlicz {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d unit(const Eigen::Vector3d& v, int n) {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  w.head(n) = v.head(n) / v.head(n).norm();
  return w;
}

}  // namespace

VCZKernel::VCZKernel(std::string name, int dim, std::vector<KernelTerm> terms, int smoothness_order)
    : name_(std::move(name)), dim_(dim), terms_(std::move(terms)), smoothness_order_(smoothness_order) {
  if (dim < 1 || dim > 3) throw Error(Errc::invalid_argument, "kernel dimension must be 1..3");
  if (terms_.empty()) throw Error(Errc::invalid_argument, "kernel needs at least one term");
  for (const auto& t : terms_) {
    if (!t.sphere) throw Error(Errc::invalid_argument, "kernel term without sphere part");
  }
}

bool VCZKernel::frozen() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const KernelTerm& t) { return !t.coefficient; });
}

double VCZKernel::sphere_part(const Eigen::Vector3d& x, const Eigen::Vector3d& omega) const {
  double s = 0.0;
  for (const auto& t : terms_) s += (t.coefficient ? t.coefficient(x) : 1.0) * t.sphere(omega);
  return s;
}

double VCZKernel::operator()(const Eigen::Vector3d& x, const Eigen::Vector3d& xi) const {
  const double r = xi.head(dim_).norm();
  return sphere_part(x, unit(xi, dim_)) / std::pow(r, dim_);
}

VCZKernel VCZKernel::frozen_at(const Eigen::Vector3d& x0) const {
  std::vector<KernelTerm> t;
  for (const auto& term : terms_) {
    const double c = term.coefficient ? term.coefficient(x0) : 1.0;
    auto g = term.sphere;
    t.push_back({{}, [c, g](const Eigen::Vector3d& w) { return c * g(w); }});
  }
  return VCZKernel(name_ + "@frozen", dim_, std::move(t), smoothness_order_);
}

VCZKernel VCZKernel::hilbert() {
  return VCZKernel("hilbert", 1, {{{}, [](const Eigen::Vector3d& w) { return w[0] / kPi; }}});
}

VCZKernel VCZKernel::riesz(int dim, int j) {
  if (dim < 2 || dim > 3 || j < 0 || j >= dim) throw Error(Errc::invalid_argument, "riesz kernel needs dim 2..3, 0 <= j < dim");
  const double c = dim == 2 ? 1.0 / (2.0 * kPi) : 1.0 / (kPi * kPi);
  return VCZKernel("riesz_" + std::to_string(j + 1), dim, {{{}, [c, j](const Eigen::Vector3d& w) { return c * w[j]; }}});
}

VCZKernel VCZKernel::cos2theta() {
  return VCZKernel("cos2theta", 2, {{{}, [](const Eigen::Vector3d& w) { return w[0] * w[0] - w[1] * w[1]; }}});
}

VCZKernel VCZKernel::variable_cos2theta(double eps) {
  return VCZKernel("variable_cos2theta", 2,
                   {{[eps](const Eigen::Vector3d& x) { return 1.0 + eps * std::sin(2.0 * kPi * x[0]); },
                     [](const Eigen::Vector3d& w) { return w[0] * w[0] - w[1] * w[1]; }}});
}

VCZKernel VCZKernel::by_name(const std::string& name, const Params& params) {
  auto get = [&](const char* key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "hilbert") return hilbert();
  if (name == "cos2theta") return cos2theta();
  if (name == "variable_cos2theta") return variable_cos2theta(get("eps", 0.5));
  if (name.rfind("riesz", 0) == 0) {
    int j = static_cast<int>(get("j", 1));
    if (name.size() > 6 && name[5] == '_' && std::isdigit(static_cast<unsigned char>(name[6]))) j = name[6] - '0';
    return riesz(static_cast<int>(get("dim", 2)), j - 1);
  }
  throw Error(Errc::invalid_argument, "unknown kernel '" + name + "'");
}

std::vector<std::string> VCZKernel::catalog() { return {"hilbert", "riesz_j", "cos2theta", "variable_cos2theta"}; }

namespace {

// Unit vector at angle/tangent offset s from omega along tangent t.
Eigen::Vector3d along(const Eigen::Vector3d& w, const Eigen::Vector3d& t, double s) {
  return w * std::cos(s) + t * std::sin(s);
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> tangents(const Eigen::Vector3d& w, int dim) {
  if (dim == 2) return {Eigen::Vector3d(-w[1], w[0], 0.0), Eigen::Vector3d::Zero()};
  Eigen::Vector3d a = std::abs(w[0]) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  Eigen::Vector3d t1 = (a - a.dot(w) * w).normalized();
  return {t1, w.cross(t1)};
}

}  // namespace

KernelValidity validate_kernel(const VCZKernel& k, const std::vector<Eigen::Vector3d>& base_points, int sphere_order,
                               int hormander_samples, std::uint64_t seed) {
  const int n = k.dim();
  KernelValidity v;
  v.base_points = base_points;
  const SphereRule rule = sphere_rule(n, n == 2 ? std::max(sphere_order, 256) : std::max(sphere_order / 4, 32));
  for (const auto& x : base_points) {
    const double integral = rule.integrate([&](const Eigen::Vector3d& w) { return k.sphere_part(x, w); });
    const double mass = rule.integrate([&](const Eigen::Vector3d& w) { return std::abs(k.sphere_part(x, w)); });
    const double rel = mass > 0.0 ? std::abs(integral) / mass : 0.0;
    v.cancellation.push_back(rel);
    v.max_cancellation = std::max(v.max_cancellation, rel);
    if (rel > 1e-10) {
      throw Error(Errc::cancellation_violated,
                  k.name() + ": spherical mean " + std::to_string(integral) + " relative to mass " + std::to_string(mass));
    }
    const double ds = 1e-3;
    for (const auto& w : rule.nodes) {
      const double h0 = k.sphere_part(x, w);
      v.derivative_bounds[0] = std::max(v.derivative_bounds[0], std::abs(h0));
      if (n == 1) continue;
      const auto [t1, t2] = tangents(w, n);
      std::vector<Eigen::Vector3d> dirs{t1};
      if (n == 3) dirs.push_back(t2);
      for (const auto& t : dirs) {
        const double hp = k.sphere_part(x, along(w, t, ds)), hm = k.sphere_part(x, along(w, t, -ds));
        v.derivative_bounds[1] = std::max(v.derivative_bounds[1], std::abs(hp - hm) / (2 * ds));
        v.derivative_bounds[2] = std::max(v.derivative_bounds[2], std::abs(hp - 2 * h0 + hm) / (ds * ds));
      }
    }
  }
  for (double b : v.derivative_bounds) {
    if (!std::isfinite(b) || b > 1e8 * (1.0 + v.derivative_bounds[0])) {
      throw Error(Errc::unbounded_derivative, k.name() + ": sphere derivatives are not bounded");
    }
  }

  Rng rng(seed);
  for (int s = 0; s < hormander_samples; ++s) {
    Eigen::Vector3d x0 = Eigen::Vector3d::Zero(), dx = Eigen::Vector3d::Zero(), dir = Eigen::Vector3d::Zero();
    for (int d = 0; d < n; ++d) {
      x0[d] = rng.uniform();
      dx[d] = rng.normal();
      dir[d] = rng.normal();
    }
    const double rho = rng.uniform(0.01, 0.1);
    dx = dx / dx.norm() * rho * rng.uniform(0.05, 1.0);
    dir /= dir.norm();
    const Eigen::Vector3d x = x0 + dx;
    const Eigen::Vector3d y = x0 + dir * rng.uniform(2.0 * rho, 1.0);
    const double diff = std::abs(k(x, x - y) - k(x0, x0 - y));
    const double ratio = diff * std::pow((x0 - y).norm(), n + 1) / dx.norm();
    v.hormander_constant = std::max(v.hormander_constant, ratio);
  }
  v.hormander_samples = hormander_samples;
  return v;
}

namespace {

using SphereFn = std::function<double(const Eigen::Vector3d&)>;

double homogeneous(const SphereFn& g, const Eigen::Vector3d& z, int n) {
  const double r = z.head(n).norm();
  return g(unit(z, n)) / std::pow(r, n);
}

// sum over integer m in [-M, M]^n with |m|_inf >= 2 of k(c + m L), shell by shell.
double far_images(const SphereFn& g, const Eigen::Vector3d& c, int n, double L, int M) {
  double total = 0.0;
  for (int s = M; s >= 2; --s) {
    double shell = 0.0;
    const int ly = n >= 2 ? -s : 0, hy = n >= 2 ? s : 0, lz = n >= 3 ? -s : 0, hz = n >= 3 ? s : 0;
    for (int i = -s; i <= s; ++i) {
      for (int j = ly; j <= hy; ++j) {
        for (int l = lz; l <= hz; ++l) {
          if (std::max({std::abs(i), std::abs(j), std::abs(l)}) != s) continue;
          shell += homogeneous(g, c + L * Eigen::Vector3d(i, j, l), n);
        }
      }
    }
    total += shell;
  }
  return total;
}

// Images beyond the cube of half-size R = (M + 1/2) L, replaced by the
// integral of k over the exterior of the shifted cube.
double tail_correction(const SphereFn& g, const Eigen::Vector3d& d, int n, double L, int M) {
  const double R = (M + 0.5) * L;
  const GaussRule gt = gauss_legendre(6);
  const GaussRule gs = gauss_legendre(n == 3 ? 20 : 32);
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    if (d[a] == 0.0) continue;
    for (int sign : {-1, 1}) {
      double face = 0.0;
      for (std::size_t it = 0; it < gt.nodes.size(); ++it) {
        const double t = 0.5 * (gt.nodes[it] + 1.0), wt = 0.5 * gt.weights[it];
        const Eigen::Vector3d shift = t * d;
        if (n == 1) {
          face += wt * homogeneous(g, Eigen::Vector3d(sign * R, 0, 0) + shift, n);
          continue;
        }
        const int b = (a + 1) % n, c = (a + 2) % n;
        for (std::size_t i = 0; i < gs.nodes.size(); ++i) {
          const double wi = gs.weights[i] * R;
          if (n == 2) {
            Eigen::Vector3d z = Eigen::Vector3d::Zero();
            z[a] = sign * R;
            z[b] = gs.nodes[i] * R;
            face += wt * wi * homogeneous(g, z + shift, n);
          } else {
            for (std::size_t j = 0; j < gs.nodes.size(); ++j) {
              Eigen::Vector3d z = Eigen::Vector3d::Zero();
              z[a] = sign * R;
              z[b] = gs.nodes[i] * R;
              z[c] = gs.nodes[j] * R;
              face += wt * wi * gs.weights[j] * R * homogeneous(g, z + shift, n);
            }
          }
        }
      }
      total += sign * d[a] * face;
    }
  }
  return -total / std::pow(L, n);
}

// Barycentric Chebyshev (first kind) interpolation matrix from p nodes on
// [-L/2, L/2] to the points xs.
Eigen::MatrixXd chebyshev_matrix(const std::vector<double>& nodes, const std::vector<double>& xs) {
  const int p = static_cast<int>(nodes.size());
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), p);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    int hit = -1;
    for (int j = 0; j < p; ++j) {
      if (std::abs(xs[i] - nodes[j]) < 1e-15) hit = j;
    }
    if (hit >= 0) {
      E(i, hit) = 1.0;
      continue;
    }
    double den = 0.0;
    for (int j = 0; j < p; ++j) {
      const double w = ((j % 2) ? -1.0 : 1.0) * std::sin(kPi * (j + 0.5) / p) / (xs[i] - nodes[j]);
      E(i, j) = w;
      den += w;
    }
    E.row(i) /= den;
  }
  return E;
}

// out(i0, i1, i2) = sum_q E(i_axis, q) in(..., q, ...) with 3-axis shapes.
std::vector<double> apply_axis(const std::vector<double>& in, std::array<int, 3>& shape, int axis, const Eigen::MatrixXd& E) {
  std::array<int, 3> out_shape = shape;
  out_shape[axis] = static_cast<int>(E.rows());
  std::vector<double> out(static_cast<std::size_t>(out_shape[0]) * out_shape[1] * out_shape[2], 0.0);
  for (int i = 0; i < out_shape[0]; ++i) {
    for (int j = 0; j < out_shape[1]; ++j) {
      for (int l = 0; l < out_shape[2]; ++l) {
        std::array<int, 3> src{i, j, l};
        double acc = 0.0;
        for (int q = 0; q < shape[axis]; ++q) {
          src[axis] = q;
          acc += E(std::array<int, 3>{i, j, l}[axis], q) *
                 in[(static_cast<std::size_t>(src[0]) * shape[1] + src[1]) * shape[2] + src[2]];
        }
        out[(static_cast<std::size_t>(i) * out_shape[1] + j) * out_shape[2] + l] = acc;
      }
    }
  }
  shape = out_shape;
  return out;
}

}  // namespace

std::vector<double> periodized_table(const SphereFn& g, const Grid& grid) {
  if (!grid.periodic()) throw Error(Errc::non_torus, "periodised kernels need a torus grid");
  const int n = grid.dim(), N = grid.n();
  const double L = grid.side(), h = grid.h();
  const int p = n == 1 ? 16 : (n == 2 ? 12 : 8);
  const int M = n == 1 ? 4000 : (n == 2 ? 48 : 10);

  auto offset = [&](int i) { return (i <= N / 2 ? i : i - N) * h; };
  std::vector<double> table(static_cast<std::size_t>(grid.size()), 0.0);

  // Near images |m|_inf <= 1.
  for (Eigen::Index f = 0; f < grid.size(); ++f) {
    const Index3 idx = grid.index(f);
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    for (int a = 0; a < n; ++a) d[a] = offset(idx[a]);
    double s = 0.0;
    const int ly = n >= 2 ? -1 : 0, hy = n >= 2 ? 1 : 0, lz = n >= 3 ? -1 : 0, hz = n >= 3 ? 1 : 0;
    for (int i = -1; i <= 1; ++i) {
      for (int j = ly; j <= hy; ++j) {
        for (int l = lz; l <= hz; ++l) {
          const Eigen::Vector3d z = d + L * Eigen::Vector3d(i, j, l);
          if (z.head(n).squaredNorm() == 0.0) continue;
          s += homogeneous(g, z, n);
        }
      }
    }
    table[f] = s;
  }

  // Far images: smooth in the offset, tabulated on a Chebyshev tensor grid.
  std::vector<double> nodes(p);
  for (int j = 0; j < p; ++j) nodes[j] = 0.5 * L * std::cos(kPi * (j + 0.5) / p);
  std::array<int, 3> shape{p, n >= 2 ? p : 1, n >= 3 ? p : 1};
  std::vector<double> far(static_cast<std::size_t>(shape[0]) * shape[1] * shape[2]);
  for (int i = 0; i < shape[0]; ++i) {
    for (int j = 0; j < shape[1]; ++j) {
      for (int l = 0; l < shape[2]; ++l) {
        Eigen::Vector3d c(nodes[i], n >= 2 ? nodes[j] : 0.0, n >= 3 ? nodes[l] : 0.0);
        far[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + l] =
            far_images(g, c, n, L, M) + tail_correction(g, c, n, L, M);
      }
    }
  }
  std::vector<double> xs(N);
  for (int i = 0; i < N; ++i) xs[i] = offset(i);
  const Eigen::MatrixXd E = chebyshev_matrix(nodes, xs);
  for (int a = 0; a < n; ++a) far = apply_axis(far, shape, a, E);
  for (std::size_t f = 0; f < table.size(); ++f) table[f] += far[f];
  return table;
}

double lattice_correction(const SphereFn& g, int dim) {
  double kappa = 0.0;
  auto cube_log = [](const Eigen::Vector3d& w) { return std::log(1.0 / (2.0 * w.cwiseAbs().maxCoeff())); };
  if (dim == 1) {
    kappa = std::log(0.5) * (g(Eigen::Vector3d(1, 0, 0)) + g(Eigen::Vector3d(-1, 0, 0)));
  } else {
    const SphereRule rule = sphere_rule(dim, dim == 2 ? 8192 : 256);
    kappa = rule.integrate([&](const Eigen::Vector3d& w) { return g(w) * cube_log(w); });
  }
  auto partial = [&](int M) {
    std::vector<double> shells;
    for (int s = 1; s <= M; ++s) {
      double shell = 0.0;
      const int ly = dim >= 2 ? -s : 0, hy = dim >= 2 ? s : 0, lz = dim >= 3 ? -s : 0, hz = dim >= 3 ? s : 0;
      for (int i = -s; i <= s; ++i) {
        for (int j = ly; j <= hy; ++j) {
          for (int l = lz; l <= hz; ++l) {
            if (std::max({std::abs(i), std::abs(j), std::abs(l)}) != s) continue;
            shell += homogeneous(g, Eigen::Vector3d(i, j, l), dim);
          }
        }
      }
      shells.push_back(shell);
    }
    return pairwise_sum(shells);
  };
  const int M = dim == 1 ? 1000 : (dim == 2 ? 32 : 16);
  const double lambda = (4.0 * partial(2 * M) - partial(M)) / 3.0;
  return kappa - lambda;
}

PvOperator::PvOperator(VCZKernel kernel, Grid grid) : kernel_(std::move(kernel)), grid_(std::move(grid)) {
  if (!grid_.periodic()) throw Error(Errc::non_torus, "principal-value operators act on torus grids");
  if (kernel_.dim() != grid_.dim()) throw Error(Errc::invalid_argument, "kernel and grid dimensions differ");
  const double cell = grid_.cell_measure();
  for (const auto& term : kernel_.terms()) {
    tables_.push_back(periodized_table(term.sphere, grid_));
    cvec spec(tables_.back().begin(), tables_.back().end());
    for (auto& z : spec) z *= cell;
    fft_nd(spec, grid_.dim(), grid_.n());
    spectra_.push_back(std::move(spec));
    double delta = orlicz::lattice_correction(term.sphere, grid_.dim());
    if (std::abs(delta) < 1e-9) delta = 0.0;
    corrections_.push_back(delta);
    Eigen::ArrayXd c = Eigen::ArrayXd::Ones(grid_.size());
    if (term.coefficient) {
      for (Eigen::Index i = 0; i < grid_.size(); ++i) c[i] = term.coefficient(grid_.point(i));
    }
    coefficients_.push_back(std::move(c));
  }
}

Eigen::ArrayXd PvOperator::coefficient(int j) const { return coefficients_[j]; }

Eigen::ArrayXd PvOperator::apply_scalar(const Eigen::ArrayXd& f) const {
  cvec fh(f.data(), f.data() + f.size());
  fft_nd(fh, grid_.dim(), grid_.n());
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(f.size());
  cvec work(fh.size());
  for (std::size_t j = 0; j < spectra_.size(); ++j) {
    for (std::size_t i = 0; i < fh.size(); ++i) work[i] = spectra_[j][i] * fh[i];
    fft_nd(work, grid_.dim(), grid_.n(), true);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      out[i] += coefficients_[j][i] * (work[i].real() + corrections_[j] * f[i]);
    }
  }
  return out;
}

GridFunction PvOperator::apply(const GridFunction& f) const {
  if (!(f.grid() == grid_)) throw Error(Errc::invalid_argument, "grid function lives on a different grid");
  Eigen::ArrayXXd out(f.values().rows(), f.values().cols());
  for (int c = 0; c < f.components(); ++c) out.col(c) = apply_scalar(f.values().col(c));
  return GridFunction(grid_, std::move(out));
}

GridFunction PvOperator::commutator(const GridFunction& a, const GridFunction& f) const {
  if (a.components() != 1) throw Error(Errc::invalid_argument, "commutator symbol must be scalar");
  if ((a.values() == a(0)).all()) return GridFunction(grid_, Eigen::ArrayXXd(Eigen::ArrayXXd::Zero(f.values().rows(), f.values().cols())));
  return apply(f.times(a)) - apply(f).times(a);
}

GridFunction apply_pv(const VCZKernel& k, const GridFunction& f) { return PvOperator(k, f.grid()).apply(f); }

GridFunction apply_commutator(const VCZKernel& k, const GridFunction& a, const GridFunction& f) {
  return PvOperator(k, f.grid()).commutator(a, f);
}

TruncationPair truncate(const GridFunction& f, double t, double C, std::optional<double> a_norm) {
  if (!(t > 0.0) || !(C > 0.0)) throw Error(Errc::invalid_argument, "truncation needs t, C > 0");
  double thr = t / C;
  if (a_norm) {
    if (!(*a_norm > 0.0)) throw Error(Errc::invalid_argument, "BMO norm in the truncation must be positive");
    thr /= *a_norm;
  }
  const Eigen::ArrayXd mag = f.magnitude();
  Eigen::ArrayXXd low = f.values(), high = Eigen::ArrayXXd::Zero(low.rows(), low.cols());
  for (Eigen::Index i = 0; i < mag.size(); ++i) {
    if (mag[i] > thr) {
      high.row(i) = low.row(i);
      low.row(i).setZero();
    }
  }
  return {GridFunction(f.grid(), std::move(low)), GridFunction(f.grid(), std::move(high)), thr};
}

std::vector<TestFunction> test_family(const Grid& grid, std::uint64_t seed) {
  std::vector<TestFunction> fam;
  auto add = [&](std::string id, const std::string& gen, const Params& p) {
    fam.push_back({std::move(id), generate(gen, grid, p)});
  };
  const std::vector<std::pair<double, double>> boxes{{0.0, 0.5}, {0.25, 0.75}, {0.1, 0.2}, {0.3, 0.9}, {0.45, 0.55}, {0.6, 0.85}};
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    add("indicator_" + std::to_string(i), "indicator", {{"lo", boxes[i].first}, {"hi", boxes[i].second}});
  }
  const std::array<double, 3> sigmas{0.05, 0.1, 0.2}, radii{0.1, 0.2, 0.35};
  for (int b = 0; b < 3; ++b) {
    add("gauss_" + std::to_string(b), "gaussian_bump", {{"sigma", sigmas[b]}, {"center", 0.4 + 0.1 * b}});
  }
  for (int b = 0; b < 3; ++b) add("bump_" + std::to_string(b), "compact_bump", {{"radius", radii[b]}});
  for (int s = 0; s < 5; ++s) {
    for (double amp : {0.1, 1.0, 10.0}) {
      const std::uint64_t sd = seed * 1000 + static_cast<std::uint64_t>(s);
      char id[64];
      std::snprintf(id, sizeof id, "noise_%d_a%g", s, amp);
      add(id, "band_limited", {{"seed", static_cast<double>(sd)}, {"kmax", 3}, {"amplitude", amp}});
    }
  }
  for (int axis = 0; axis < grid.dim(); ++axis) {
    for (int k = 1; k <= 3; ++k) {
      add("wave_ax" + std::to_string(axis) + "_k" + std::to_string(k), "cos", {{"k", k}, {"axis", axis}});
    }
    add("wave_ax" + std::to_string(axis) + "_k1_a10", "cos", {{"k", 1}, {"axis", axis}, {"amplitude", 10}});
  }
  return fam;
}

double weak_type_ratio(const GridFunction& g, const GridFunction& f, double p) {
  const double fp = lp_norm(f, p);
  if (fp == 0.0) return 0.0;
  Eigen::ArrayXd v = g.magnitude();
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  const double cell = g.grid().cell_measure();
  double best = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k + 1 < v.size() && v[k + 1] == v[k]) continue;
    best = std::max(best, std::pow(v[k], p) * static_cast<double>(k + 1) * cell);
  }
  return best / std::pow(fp, p);
}

namespace {

// Least C > 0 with modular(C |f|) >= target, to relative 1e-10.
double modular_constant(const Eigen::ArrayXd& absf, const YoungFunction& phi, double cell, double target) {
  if (target <= 0.0) return 0.0;
  auto rho = [&](double C) {
    try {
      return modular(absf * C, phi, cell);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double lo = 1.0, hi = 1.0;
  double rlo = rho(1.0), rhi = rlo;
  if (rlo >= target) {
    do {
      hi = lo;
      rhi = rlo;
      lo /= 2.0;
      rlo = rho(lo);
    } while (rlo >= target && lo > 1e-300);
  } else {
    do {
      lo = hi;
      rlo = rhi;
      hi *= 2.0;
      rhi = rho(hi);
    } while (rhi < target);
  }
  const double lt = std::log(target);
  double slo = std::log(lo), shi = std::log(hi);
  double glo = rlo > 0 ? std::log(rlo) - lt : -1e3, ghi = std::isfinite(rhi) ? std::log(rhi) - lt : 1e3;
  int side = 0;
  while (shi - slo > 1e-10) {
    double s = slo - glo * (shi - slo) / (ghi - glo);
    if (!(s > slo && s < shi) || !std::isfinite(s)) s = 0.5 * (slo + shi);
    const double r = rho(std::exp(s));
    const double gs = r > 0 ? std::log(r) - lt : -1e3;
    if (gs >= 0.0) {
      shi = s;
      ghi = std::isfinite(gs) ? gs : 1e3;
      if (side == 1) glo *= 0.5;
      side = 1;
    } else {
      slo = s;
      glo = gs;
      if (side == -1) ghi *= 0.5;
      side = -1;
    }
    if (std::abs(gs) < 1e-14) {
      shi = s;
      break;
    }
  }
  return std::exp(shi);
}

double round_up_grid(double C) {
  if (C <= 0.0) return 0.0;
  const double k = std::ceil(std::log(C) / std::log(1.01) - 1e-9);
  return std::pow(1.01, k);
}

}  // namespace

OperatorNormReport empirical_orlicz_bound(const PvOperator& op, const YoungFunction& phi,
                                          const std::vector<TestFunction>& family, const GridFunction* a,
                                          const std::string& family_id, std::vector<double> weak_p) {
  const GrowthCertificate cert = certify(phi);
  if (!cert.both()) throw Error(Errc::not_certified, phi.label() + " is not in Delta_2 and nabla_2");

  OperatorNormReport rep;
  rep.family_id = family_id;
  rep.kernel = op.kernel().name();
  rep.phi = phi.label();
  rep.n = op.grid().n();
  rep.commutator = a != nullptr;
  const Grid& g = op.grid();
  if (a) {
    // Oscillation on a coarse resample keeps the Fenwick sweep cheap.
    const int m = std::min(g.n(), g.dim() == 1 ? 256 : 64);
    const Grid coarse = g.refined(m);
    const int step = g.n() / m;
    Eigen::ArrayXd av(coarse.size());
    for (Eigen::Index i = 0; i < coarse.size(); ++i) {
      Index3 idx = coarse.index(i);
      for (int d = 0; d < g.dim(); ++d) idx[d] *= step;
      av[i] = (*a)(g.flat(idx));
    }
    rep.a_bmo = bmo_seminorm(GridFunction(coarse, av));
  }

  if (weak_p.empty()) weak_p = {1.5, 2.0, 3.0};
  std::vector<double> ps = weak_p;
  if (cert.hardy) {
    ps.push_back(cert.hardy->r);
    ps.push_back(cert.hardy->p);
  }
  std::vector<double> kappa(ps.size(), 0.0);
  const double cell = g.cell_measure();
  for (const auto& tf : family) {
    const GridFunction Tf = a ? op.commutator(*a, tf.f) : op.apply(tf.f);
    const double nf = luxemburg_norm(tf.f, phi);
    const double ratio = nf > 0.0 ? luxemburg_norm(Tf, phi) / nf : 0.0;
    rep.ids.push_back(tf.id);
    rep.ratios.push_back(ratio);
    if (rep.a_bmo && *rep.a_bmo > 0.0) rep.normalized_ratios.push_back(ratio / *rep.a_bmo);
    if (ratio > rep.sup_ratio || rep.sup_id.empty()) {
      rep.sup_ratio = std::max(rep.sup_ratio, ratio);
      if (ratio >= rep.sup_ratio) rep.sup_id = tf.id;
    }
    const double target = modular(Tf, phi);
    rep.modular_constants.push_back(modular_constant(tf.f.magnitude(), phi, cell, target));
    for (std::size_t k = 0; k < ps.size(); ++k) kappa[k] = std::max(kappa[k], weak_type_ratio(Tf, tf.f, ps[k]));
  }
  double cmax = 0.0;
  for (double c : rep.modular_constants) cmax = std::max(cmax, c);
  rep.modular_constant = round_up_grid(cmax);
  for (std::size_t k = 0; k < weak_p.size(); ++k) rep.weak_constants.emplace_back(ps[k], kappa[k]);
  if (cert.hardy) {
    const auto& hc = *cert.hardy;
    const double kr = kappa[weak_p.size()], kp = kappa[weak_p.size() + 1];
    const double cr = std::pow(2.0, 1.0 + 1.0 / hc.r) * kr * std::pow(hc.C_r, 1.0 / hc.r);
    const double cp = std::pow(2.0, 1.0 + 1.0 / hc.p) * kp * std::pow(hc.C_p, 1.0 / hc.p);
    rep.theoretical_constant = std::max(cr, cp);
  }
  return rep;
}

}  // namespace orlicz

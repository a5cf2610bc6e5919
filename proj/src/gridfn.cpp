#include "orlicz/gridfn.hpp"

#include "orlicz/error.hpp"
#include "orlicz/quadrature.hpp"

#include <cmath>
#include <limits>

namespace orlicz {

double modular(const Eigen::ArrayXd& abs_values, const YoungFunction& phi, double cell) {
  std::vector<double> terms(abs_values.size());
  for (Eigen::Index i = 0; i < abs_values.size(); ++i) {
    const double v = phi(abs_values[i]);
    if (!std::isfinite(v)) throw Error(Errc::overflow, phi.label() + " overflows at |f| = " + std::to_string(abs_values[i]));
    terms[i] = v * cell;
  }
  return pairwise_sum(terms);
}

Eigen::ArrayXd region_values(const GridFunction& f, const Region& region) {
  const Eigen::ArrayXd mag = f.magnitude();
  const auto idx = region.indices(f.grid());
  Eigen::ArrayXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = mag[idx[k]];
  return out;
}

double modular(const GridFunction& f, const YoungFunction& phi, const Region& region) {
  return modular(region_values(f, region), phi, f.grid().cell_measure());
}

namespace {

// modular(v / lambda), with non-finite values treated as "> 1".
double scaled_modular(const Eigen::ArrayXd& v, const YoungFunction& phi, double cell, double lambda) {
  try {
    const double m = modular(v / lambda, phi, cell);
    return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
  } catch (const Error& e) {
    if (e.code() == Errc::overflow) return std::numeric_limits<double>::infinity();
    throw;
  }
}

}  // namespace

double luxemburg_norm(const Eigen::ArrayXd& v, const YoungFunction& phi, double cell) {
  const double vmax = v.size() ? v.maxCoeff() : 0.0;
  if (vmax == 0.0) return 0.0;
  auto rho = [&](double lam) { return scaled_modular(v, phi, cell, lam); };

  // Bracket lo < hi with rho(lo) > 1 >= rho(hi), stepping by 4 from max|f|.
  double lo = vmax, hi = vmax;
  double rlo = rho(lo), rhi = rlo;
  if (rlo > 1.0) {
    do {
      lo = hi;
      rlo = rhi;
      hi *= 4.0;
      rhi = rho(hi);
    } while (rhi > 1.0);
  } else {
    do {
      hi = lo;
      rhi = rlo;
      lo /= 4.0;
      rlo = rho(lo);
      if (lo < std::numeric_limits<double>::min() * 1e6) return hi;
    } while (rlo <= 1.0);
  }

  // Illinois iteration on g(s) = ln rho(e^s), decreasing in s, root at g = 0.
  auto g = [](double r) { return r > 0.0 ? std::log(r) : -std::numeric_limits<double>::infinity(); };
  double slo = std::log(lo), shi = std::log(hi);
  double glo = std::isfinite(rlo) ? g(rlo) : 1e3, ghi = g(rhi);
  int stale = 0;
  for (int iter = 0; iter < 200 && shi - slo > 1e-13; ++iter) {
    double s;
    if (std::isfinite(glo) && std::isfinite(ghi) && glo > ghi) {
      s = shi - ghi * (shi - slo) / (ghi - glo);
    } else {
      s = 0.5 * (slo + shi);
    }
    const double eps = 4e-14;
    if (!(s > slo + eps && s < shi - eps)) s = 0.5 * (slo + shi);
    // Probe both sides of the estimate so that a near-exact root closes the
    // bracket at once.
    for (double probe : {s - eps, s + eps}) {
      if (!(probe > slo && probe < shi)) continue;
      const double r = rho(std::exp(probe));
      if (r > 1.0) {
        slo = probe;
        glo = std::isfinite(r) ? g(r) : 1e3;
        if (stale == -1) ghi *= 0.5;
        stale = -1;
      } else {
        shi = probe;
        ghi = g(r);
        if (stale == 1) glo *= 0.5;
        stale = 1;
      }
    }
  }
  double lam = std::exp(shi);
  while (rho(lam) > 1.0) lam *= 1.0 + 1e-13;
  return lam;
}

double luxemburg_norm(const GridFunction& f, const YoungFunction& phi, const Region& region) {
  return luxemburg_norm(region_values(f, region), phi, f.grid().cell_measure());
}

double lp_norm(const GridFunction& f, double p, const Region& region) {
  const Eigen::ArrayXd v = region_values(f, region);
  std::vector<double> terms(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) terms[i] = std::pow(v[i], p);
  return std::pow(pairwise_sum(terms) * f.grid().cell_measure(), 1.0 / p);
}

int order(const MultiIndex& alpha) { return alpha[0] + alpha[1] + alpha[2]; }

std::vector<MultiIndex> multi_indices(int dim, int k) {
  std::vector<MultiIndex> out;
  if (dim == 1) {
    out.push_back({k, 0, 0});
  } else if (dim == 2) {
    for (int a = k; a >= 0; --a) out.push_back({a, k - a, 0});
  } else {
    for (int a = k; a >= 0; --a) {
      for (int b = k - a; b >= 0; --b) out.push_back({a, b, k - a - b});
    }
  }
  return out;
}

namespace {

int reach(int k) { return k == 0 ? 0 : (k <= 2 ? 1 : 2); }

// Stencil weights at offsets -2..2, before division by h^k.
std::array<double, 5> stencil(int k) {
  switch (k) {
    case 1: return {0.0, -0.5, 0.0, 0.5, 0.0};
    case 2: return {0.0, 1.0, -2.0, 1.0, 0.0};
    case 3: return {-0.5, 1.0, 0.0, -1.0, 0.5};
    case 4: return {1.0, -4.0, 6.0, -4.0, 1.0};
    default: throw Error(Errc::invalid_argument, "per-axis derivative order must be 1..4");
  }
}

}  // namespace

Eigen::Array<bool, Eigen::Dynamic, 1> stencil_mask(const Grid& grid, const MultiIndex& alpha) {
  Eigen::Array<bool, Eigen::Dynamic, 1> mask = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(grid.size(), true);
  if (grid.periodic()) return mask;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Index3 idx = grid.index(i);
    for (int d = 0; d < grid.dim(); ++d) {
      const int r = reach(alpha[d]);
      if (idx[d] < r || idx[d] >= grid.n() - r) mask[i] = false;
    }
  }
  return mask;
}

void require_stencil(const Grid& grid, const MultiIndex& alpha, const Region& region) {
  const auto mask = stencil_mask(grid, alpha);
  if (!mask.any()) throw Error(Errc::stencil_exceeds_domain, "grid too small for the requested derivative");
  for (Eigen::Index i : region.indices(grid)) {
    if (!mask[i]) {
      throw Error(Errc::stencil_exceeds_domain,
                  "region " + region.describe() + " reaches points where the stencil leaves the domain");
    }
  }
}

GridFunction finite_difference(const GridFunction& u, const MultiIndex& alpha) {
  const Grid& g = u.grid();
  for (int d = g.dim(); d < 3; ++d) {
    if (alpha[d] != 0) throw Error(Errc::invalid_argument, "multi-index exceeds the grid dimension");
  }
  const auto mask = stencil_mask(g, alpha);
  if (!mask.any()) throw Error(Errc::stencil_exceeds_domain, "grid too small for the requested derivative");

  Eigen::ArrayXXd cur = u.values();
  const int n = g.n();
  for (int d = 0; d < g.dim(); ++d) {
    const int k = alpha[d];
    if (k == 0) continue;
    const auto w = stencil(k);
    const double scale = std::pow(g.h(), -k);
    Eigen::Index stride = 1;
    for (int e = d + 1; e < g.dim(); ++e) stride *= n;
    Eigen::ArrayXXd next = Eigen::ArrayXXd::Zero(cur.rows(), cur.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const int pos = static_cast<int>((i / stride) % n);
      bool acc_valid = true;
      Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(cur.cols());
      for (int o = -2; o <= 2; ++o) {
        if (w[o + 2] == 0.0) continue;
        int q = pos + o;
        if (g.periodic()) {
          q = (q + n) % n;
        } else if (q < 0 || q >= n) {
          acc_valid = false;
          break;
        }
        acc += w[o + 2] * cur.row(i + static_cast<Eigen::Index>(q - pos) * stride).transpose();
      }
      if (acc_valid) next.row(i) = acc.transpose() * scale;
    }
    cur.swap(next);
  }
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!mask[i]) cur.row(i).setZero();
  }
  return GridFunction(g, std::move(cur));
}

double sobolev_orlicz_norm(const GridFunction& u, const YoungFunction& phi, int ord, const Region& region) {
  if (ord < 0 || ord > 4) throw Error(Errc::invalid_argument, "Sobolev order must be in 0..4");
  double total = luxemburg_norm(u, phi, region);
  for (int k = 1; k <= ord; ++k) {
    for (const auto& alpha : multi_indices(u.grid().dim(), k)) {
      require_stencil(u.grid(), alpha, region);
      total += luxemburg_norm(finite_difference(u, alpha), phi, region);
    }
  }
  return total;
}

JensenReport jensen_check(const GridFunction& f, const YoungFunction& phi, const Region& region) {
  const Eigen::ArrayXd v = region_values(f, region);
  std::vector<double> phis(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) phis[i] = phi(v[i]);
  const double n = static_cast<double>(v.size());
  JensenReport r;
  r.lhs = phi(pairwise_sum(v) / n);
  r.rhs = pairwise_sum(phis) / n;
  return r;
}

}  // namespace orlicz

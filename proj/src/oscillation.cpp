#include "orlicz/oscillation.hpp"

#include "orlicz/error.hpp"
#include "orlicz/gridfn.hpp"
#include "orlicz/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace orlicz {

std::vector<double> default_radii(const Grid& grid) {
  std::vector<double> r;
  for (int k = 1; k <= grid.n() / 2; ++k) r.push_back(k * grid.h());
  return r;
}

namespace {

struct Stencil {
  std::vector<Index3> offsets;      // sorted by distance
  std::vector<double> radii;        // radii[0] = 0: singleton ball
  std::vector<std::size_t> counts;  // offsets inside radii[k]
};

Stencil make_stencil(const Grid& g, std::vector<double> radii) {
  if (radii.empty()) radii = default_radii(g);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  for (double r : radii) {
    if (!(r >= 0.0)) throw Error(Errc::invalid_argument, "radii must be non-negative");
  }
  Stencil s;
  const double h = g.h();
  const double rmax = radii.empty() ? 0.0 : radii.back();
  int reach = static_cast<int>(std::floor(rmax / h + 1e-9));
  int lo = -reach, hi = reach;
  if (g.periodic()) {
    lo = std::max(lo, -(g.n() - 1) / 2);
    hi = std::min(hi, g.n() / 2);
  }
  std::vector<std::pair<long, Index3>> all;
  const int ly = g.dim() >= 2 ? lo : 0, hy = g.dim() >= 2 ? hi : 0;
  const int lz = g.dim() >= 3 ? lo : 0, hz = g.dim() >= 3 ? hi : 0;
  for (int i = lo; i <= hi; ++i) {
    for (int j = ly; j <= hy; ++j) {
      for (int k = lz; k <= hz; ++k) {
        const long d2 = static_cast<long>(i) * i + static_cast<long>(j) * j + static_cast<long>(k) * k;
        if (d2 * h * h <= rmax * rmax * (1 + 1e-12)) all.push_back({d2, {i, j, k}});
      }
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [d2, o] : all) s.offsets.push_back(o);
  s.radii.push_back(0.0);
  s.counts.push_back(1);
  for (double r : radii) {
    if (r < h * (1 - 1e-12)) continue;
    std::size_t c = 0;
    while (c < all.size() && static_cast<double>(all[c].first) * h * h <= r * r * (1 + 1e-12)) ++c;
    s.radii.push_back(r);
    s.counts.push_back(c);
  }
  return s;
}

// Flat index of centre + offset, or -1 outside a rectangle.
Eigen::Index neighbour(const Grid& g, const Index3& c, const Index3& o) {
  Index3 q{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
  if (g.periodic()) return g.wrap(q);
  return g.inside(q) ? g.flat(q) : -1;
}

// Ball of radius r around centre c lies inside the rectangle.
bool ball_inside(const Grid& g, const Index3& c, double r) {
  if (g.periodic()) return true;
  const double h = g.h();
  for (int d = 0; d < g.dim(); ++d) {
    if ((c[d] + 0.5) * h < r * (1 - 1e-12) || (g.n() - c[d] - 0.5) * h < r * (1 - 1e-12)) return false;
  }
  return true;
}

Eigen::ArrayXd maximal_of(const Grid& g, const Eigen::ArrayXd& v, const Stencil& s) {
  Eigen::ArrayXd out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Index3 c = g.index(i);
    double sum = 0.0, best = v[i];
    std::size_t inside = 0, next = 0;
    for (std::size_t k = 1; k < s.counts.size(); ++k) {
      for (; next < s.counts[k]; ++next) {
        const Eigen::Index q = neighbour(g, c, s.offsets[next]);
        if (q < 0) continue;
        sum += v[q];
        ++inside;
      }
      best = std::max(best, sum / static_cast<double>(inside));
    }
    out[i] = best;
  }
  return out;
}

// max_k v_k * #{values >= v_k} * cell, optionally with Phi applied to v_k.
double level_sup(Eigen::ArrayXd v, double cell, const YoungFunction* phi) {
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  double best = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k + 1 < v.size() && v[k + 1] == v[k]) continue;
    const double level = phi ? (*phi)(v[k]) : v[k];
    best = std::max(best, level * static_cast<double>(k + 1) * cell);
  }
  return best;
}

std::vector<Index3> centres(const Grid& g, int stride) {
  std::vector<Index3> out;
  if (stride < 1) stride = 1;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Index3 c = g.index(i);
    bool take = true;
    for (int d = 0; d < g.dim(); ++d) take = take && c[d] % stride == 0;
    if (take) out.push_back(c);
  }
  return out;
}

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : cnt_(n + 1, 0), sum_(n + 1, 0.0) {}
  void add(std::size_t pos, int dc, double dv) {
    for (std::size_t i = pos + 1; i < cnt_.size(); i += i & (~i + 1)) {
      cnt_[i] += dc;
      sum_[i] += dv;
    }
  }
  // count and sum over positions [0, pos)
  std::pair<long, double> prefix(std::size_t pos) const {
    long c = 0;
    double s = 0.0;
    for (std::size_t i = pos; i > 0; i -= i & (~i + 1)) {
      c += cnt_[i];
      s += sum_[i];
    }
    return {c, s};
  }

 private:
  std::vector<long> cnt_;
  std::vector<double> sum_;
};

}  // namespace

MaximalReport maximal(const GridFunction& f, std::vector<double> radii) {
  const Grid& g = f.grid();
  const Stencil s = make_stencil(g, std::move(radii));
  const Eigen::ArrayXd v = f.magnitude();
  const Eigen::ArrayXd M = maximal_of(g, v, s);
  MaximalReport r{GridFunction(g, M), s.radii, 0.0, 0.0};
  const double l1 = v.sum() * g.cell_measure();
  r.weak11_constant = l1 > 0.0 ? level_sup(M, g.cell_measure(), nullptr) / l1 : 0.0;
  const double l2 = std::sqrt(v.square().sum());
  r.strong_ratio = l2 > 0.0 ? std::sqrt(M.square().sum()) / l2 : 0.0;
  return r;
}

MaximalBounds maximal_bounds_check(const GridFunction& f, const YoungFunction& phi, double p,
                                   std::vector<double> radii, bool require_strong) {
  const Grid& g = f.grid();
  const MaximalReport rep = maximal(f, std::move(radii));
  MaximalBounds b;
  b.weak11 = rep.weak11_constant;
  const double fp = lp_norm(f, p);
  b.strong_p = fp > 0.0 ? lp_norm(rep.Mf, p) / fp : 0.0;
  const double rho = modular(f, phi);
  b.weak_orlicz = rho > 0.0 ? level_sup(rep.Mf.scalar(), g.cell_measure(), &phi) / rho : 0.0;
  if (certify_nabla2(phi)) {
    const double nf = luxemburg_norm(f, phi);
    b.strong_orlicz = nf > 0.0 ? luxemburg_norm(rep.Mf, phi) / nf : 0.0;
  } else if (require_strong) {
    throw Error(Errc::not_certified, phi.label() + " is not nabla_2; the strong Orlicz bound does not apply");
  }
  return b;
}

JensenMaximalReport jensen_maximal_check(const GridFunction& f, const YoungFunction& phi, std::vector<double> radii) {
  const Grid& g = f.grid();
  const Stencil s = make_stencil(g, std::move(radii));
  const Eigen::ArrayXd v = f.magnitude();
  Eigen::ArrayXd pv(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) pv[i] = phi(v[i]);
  const Eigen::ArrayXd Mf = maximal_of(g, v, s);
  const Eigen::ArrayXd Mphi = maximal_of(g, pv, s);
  JensenMaximalReport r;
  r.slack.resize(g.size());
  r.min_slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    r.slack[i] = Mphi[i] - phi(Mf[i]);
    r.min_slack = std::min(r.min_slack, r.slack[i]);
    if (r.slack[i] < -1e-12 * std::max(1.0, std::abs(Mphi[i]))) ++r.violations;
  }
  return r;
}

OscillationReport oscillation(const GridFunction& a, const OscillationOptions& opt) {
  const Grid& g = a.grid();
  const Stencil s = make_stencil(g, opt.radii);
  const Eigen::ArrayXd v = a.scalar();
  const std::size_t P = static_cast<std::size_t>(v.size());

  std::vector<std::size_t> order(P), rank(P);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> sorted(P);
  for (std::size_t k = 0; k < P; ++k) {
    rank[order[k]] = k;
    sorted[k] = v[order[k]];
  }

  OscillationReport rep;
  rep.radii.assign(s.radii.begin() + 1, s.radii.end());
  rep.sup_by_radius.assign(rep.radii.size(), 0.0);
  Fenwick tree(P);
  std::vector<Eigen::Index> inserted;
  for (const Index3& c : centres(g, opt.center_stride)) {
    inserted.clear();
    const Eigen::Index ci = g.flat(c);
    tree.add(rank[ci], 1, v[ci]);
    inserted.push_back(ci);
    double total = v[ci];
    std::size_t next = 1;
    for (std::size_t k = 1; k < s.counts.size(); ++k) {
      if (!ball_inside(g, c, s.radii[k])) break;
      for (; next < s.counts[k]; ++next) {
        const Eigen::Index q = neighbour(g, c, s.offsets[next]);
        tree.add(rank[q], 1, v[q]);
        inserted.push_back(q);
        total += v[q];
      }
      const double n = static_cast<double>(inserted.size());
      const double mean = total / n;
      const std::size_t cut = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), mean) - sorted.begin());
      const auto [cl, sl] = tree.prefix(cut);
      const double dev = (mean * cl - sl) + (total - sl - mean * (n - cl));
      rep.sup_by_radius[k - 1] = std::max(rep.sup_by_radius[k - 1], std::max(0.0, dev) / n);
    }
    for (Eigen::Index q : inserted) tree.add(rank[q], -1, -v[q]);
  }
  double running = 0.0;
  for (std::size_t k = 0; k < rep.radii.size(); ++k) {
    running = std::max(running, rep.sup_by_radius[k]);
    rep.vmo_modulus.emplace_back(rep.radii[k], running);
  }
  rep.bmo_seminorm = running;
  return rep;
}

double bmo_seminorm(const GridFunction& a, const OscillationOptions& opt) { return oscillation(a, opt).bmo_seminorm; }

std::vector<std::pair<double, double>> vmo_modulus(const GridFunction& a, const std::vector<double>& R_grid,
                                                   const OscillationOptions& opt) {
  const OscillationReport rep = oscillation(a, opt);
  std::vector<std::pair<double, double>> out;
  for (double R : R_grid) {
    double gamma = 0.0;
    for (const auto& [r, gm] : rep.vmo_modulus) {
      if (r <= R * (1 + 1e-12)) gamma = gm;
    }
    out.emplace_back(R, gamma);
  }
  return out;
}

std::vector<std::pair<double, double>> john_nirenberg_check(const GridFunction& a, const std::vector<double>& p_list,
                                                            const OscillationOptions& opt) {
  const Grid& g = a.grid();
  const Stencil s = make_stencil(g, opt.radii);
  const Eigen::ArrayXd v = a.scalar();
  std::vector<double> best(p_list.size(), 0.0);
  double best1 = 0.0;
  std::vector<double> vals;
  for (const Index3& c : centres(g, opt.center_stride)) {
    vals.clear();
    vals.push_back(v[g.flat(c)]);
    std::size_t next = 1;
    for (std::size_t k = 1; k < s.counts.size(); ++k) {
      if (!ball_inside(g, c, s.radii[k])) break;
      for (; next < s.counts[k]; ++next) vals.push_back(v[neighbour(g, c, s.offsets[next])]);
      const double n = static_cast<double>(vals.size());
      const double mean = pairwise_sum(vals) / n;
      std::vector<double> dev(vals.size());
      for (std::size_t i = 0; i < vals.size(); ++i) dev[i] = std::abs(vals[i] - mean);
      best1 = std::max(best1, pairwise_sum(dev) / n);
      for (std::size_t j = 0; j < p_list.size(); ++j) {
        const double p = p_list[j];
        std::vector<double> pw(dev.size());
        for (std::size_t i = 0; i < dev.size(); ++i) pw[i] = std::pow(dev[i], p);
        best[j] = std::max(best[j], std::pow(pairwise_sum(pw) / n, 1.0 / p));
      }
    }
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t j = 0; j < p_list.size(); ++j) {
    double ratio = 0.0;
    if (best1 > 0.0) ratio = best[j] / best1;
    out.emplace_back(p_list[j], ratio);
  }
  return out;
}

}  // namespace orlicz

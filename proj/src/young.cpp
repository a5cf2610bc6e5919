#include "orlicz/young.hpp"

#include "orlicz/error.hpp"
#include "orlicz/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace orlicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIndexMargin = 1e-3;
constexpr double kTrendFactor = 1.1;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

bool monotone(std::span<const double> q, bool increasing) {
  for (std::size_t k = 0; k + 1 < q.size(); ++k) {
    const double tol = 1e-12 * std::max(1.0, std::abs(q[k]));
    if (increasing ? q[k + 1] < q[k] - tol : q[k + 1] > q[k] + tol) return false;
  }
  return true;
}

struct Extremes {
  double inf = kInf;
  double sup = -kInf;
  bool sup_diverges = false;
};

// Extremes of q over the scan grid, widened by the end-point limits of q when
// the window reaches toward 0 (t_min <= 1e-3) or infinity (t_max >= 1e3) and
// q is monotone over the last two decades. Limits are extrapolated linearly in
// t near 0 and linearly in 1/ln t near infinity (the slowly varying
// corrections of logarithmic Young functions).
Extremes scan_extremes(std::span<const double> t, std::span<const double> q, const ScanRange& scan) {
  Extremes e;
  for (double v : q) {
    e.inf = std::min(e.inf, v);
    e.sup = std::max(e.sup, v);
  }
  const std::size_t n = t.size();

  std::size_t top = n;
  while (top > 0 && t[top - 1] >= scan.t_max / 100.0 * (1 - 1e-12)) --top;
  if (n - top >= 3) {
    const auto w = q.subspan(top);
    const bool inc = monotone(w, true);
    const bool dec = monotone(w, false);
    if (inc && w.back() > kTrendFactor * w.front()) {
      e.sup_diverges = true;
    } else if (scan.t_max >= 1e3 && (inc || dec)) {
      const double u0 = 1.0 / std::log(t[top]);
      const double u1 = 1.0 / std::log(t[n - 1]);
      const double limit = w.back() - u1 * (w.front() - w.back()) / (u0 - u1);
      e.inf = std::min(e.inf, limit);
      e.sup = std::max(e.sup, limit);
    }
  }

  std::size_t bottom = 0;
  while (bottom < n && t[bottom] <= scan.t_min * 100.0 * (1 + 1e-12)) ++bottom;
  if (bottom >= 3 && scan.t_min <= 1e-3) {
    const auto w = q.subspan(0, bottom);
    const bool inc = monotone(w, true);
    const bool dec = monotone(w, false);
    if (dec && w.front() > kTrendFactor * w.back()) {
      e.sup_diverges = true;
    } else if (inc || dec) {
      const double t0 = t[0], t1 = t[bottom - 1];
      const double limit = w.front() - t0 * (w.back() - w.front()) / (t1 - t0);
      e.inf = std::min(e.inf, limit);
      e.sup = std::max(e.sup, limit);
    }
  }
  if (e.sup_diverges) e.sup = kInf;
  return e;
}

// Smallest l with Phi(l t) >= 2 l Phi(t) at every t of `ts`: geometric
// candidates 1.01^k up to 2^20, then bisection inside the winning step. The
// admissible set is an up-set because Phi(c t) >= c Phi(t) for c >= 1.
std::optional<double> nabla2_requirement(const YoungFunction& phi, std::span<const double> ts) {
  if (ts.empty()) return std::nullopt;
  std::vector<double> base(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) base[i] = phi(ts[i]);
  auto ok = [&](double l) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (phi(l * ts[i]) < 2.0 * l * base[i] * (1.0 - 1e-12)) return false;
    }
    return true;
  };
  const double ratio = 1.01;
  const int kmax = static_cast<int>(std::floor(20.0 * std::log(2.0) / std::log(ratio)));
  auto cand = [&](int k) { return std::pow(ratio, k); };
  if (!ok(cand(kmax))) return std::nullopt;
  int lo = 0, hi = kmax;  // ok(cand(hi)); cand(0) = 1 never admissible
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (ok(cand(mid)) ? hi : lo) = mid;
  }
  double a = cand(lo), b = cand(hi);
  while ((b - a) > 1e-12 * b) {
    const double m = 0.5 * (a + b);
    (ok(m) ? b : a) = m;
  }
  return b;
}

std::vector<double> scan_values(const std::vector<double>& t, const std::function<double(double)>& q) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = q(t[i]);
  return out;
}

}  // namespace

std::vector<double> ScanRange::grid() const {
  const double decades = std::log10(t_max / t_min);
  const int count = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
  return sample(count);
}

std::vector<double> ScanRange::sample(int count) const {
  std::vector<double> out(count);
  const double lmin = std::log(t_min), lmax = std::log(t_max);
  for (int i = 0; i < count; ++i) {
    out[i] = count == 1 ? t_min : std::exp(lmin + (lmax - lmin) * i / (count - 1));
  }
  out.front() = t_min;
  out.back() = t_max;
  return out;
}

YoungFunction::YoungFunction(std::string label, Map value, std::optional<Map> density, ScanRange scan)
    : label_(std::move(label)), value_(std::move(value)), density_(std::move(density)), scan_(scan) {
  if (!(scan_.t_min > 0.0) || !(scan_.t_max > scan_.t_min) || scan_.points_per_decade < 1) {
    throw Error(Errc::invalid_argument, "scan range must satisfy 0 < t_min < t_max");
  }
}

double YoungFunction::density(double t) const {
  if (density_) return (*density_)(t);
  const double d = 1e-6;
  return (value_(t * (1 + d)) - value_(t * (1 - d))) / (2 * d * t);
}

YoungFunction YoungFunction::with_scan(ScanRange scan) const {
  return YoungFunction(label_, value_, density_, scan);
}

YoungFunction YoungFunction::power(double p, double scale) {
  if (!(p >= 1.0)) throw Error(Errc::invalid_argument, "power Young function needs p >= 1");
  std::string label = "t^" + fmt(p);
  if (scale != 1.0) label = fmt(scale) + "*" + label;
  return YoungFunction(
      label, [p, scale](double t) { return scale * std::pow(t, p); },
      [p, scale](double t) { return scale * p * std::pow(t, p - 1.0); });
}

YoungFunction YoungFunction::exp_minus_one() {
  return YoungFunction(
      "exp(t)-1", [](double t) { return std::expm1(t); }, [](double t) { return std::exp(t); },
      ScanRange{1.0, 300.0, 200});
}

YoungFunction YoungFunction::t_log() {
  return YoungFunction(
      "t*ln(1+t)", [](double t) { return t * std::log1p(t); },
      [](double t) { return std::log1p(t) + t / (1.0 + t); });
}

YoungFunction YoungFunction::power_log(double p) {
  if (!(p >= 1.0)) throw Error(Errc::invalid_argument, "power_log Young function needs p >= 1");
  return YoungFunction(
      "t^" + fmt(p) + "*ln(1+t)", [p](double t) { return std::pow(t, p) * std::log1p(t); },
      [p](double t) { return p * std::pow(t, p - 1.0) * std::log1p(t) + std::pow(t, p) / (1.0 + t); });
}

void validate(const YoungFunction& phi) {
  const auto& L = phi.label();
  if (phi(0.0) != 0.0) throw Error(Errc::invalid_young, L + ": Phi(0) != 0");
  const auto t = phi.scan().grid();
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    v[i] = phi(t[i]);
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw Error(Errc::invalid_young, L + ": non-finite or negative value at t=" + fmt(t[i]));
    }
  }
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (!(v[i + 1] > v[i])) throw Error(Errc::invalid_young, L + ": not strictly increasing near t=" + fmt(t[i]));
    if (v[i + 1] / t[i + 1] < v[i] / t[i] * (1 - 1e-10)) {
      throw Error(Errc::invalid_young, L + ": Phi(t)/t decreases near t=" + fmt(t[i]));
    }
  }
  for (std::size_t i = 0; i + 2 < t.size(); ++i) {
    const double w = (t[i + 1] - t[i]) / (t[i + 2] - t[i]);
    const double chord = (1 - w) * v[i] + w * v[i + 2];
    if (v[i + 1] > chord * (1 + 1e-10)) throw Error(Errc::invalid_young, L + ": not convex near t=" + fmt(t[i + 1]));
  }
  if (phi.has_density()) {
    const GaussRule g = gauss_legendre(10);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const double a = t[i], b = t[i + 1];
      double integral = 0.0;
      for (int k = 0; k < 10; ++k) {
        integral += 0.5 * (b - a) * g.weights[k] * phi.density(0.5 * (a + b) + 0.5 * (b - a) * g.nodes[k]);
      }
      if (std::abs(v[i + 1] - v[i] - integral) > 1e-8 * v[i + 1]) {
        throw Error(Errc::invalid_young, L + ": density inconsistent with evaluator near t=" + fmt(a));
      }
    }
  }
}

std::optional<double> certify_delta2(const YoungFunction& phi) {
  validate(phi);
  const auto t = phi.scan().grid();
  const auto q = scan_values(t, [&](double s) { return phi(2 * s) / phi(s); });
  const Extremes e = scan_extremes(t, q, phi.scan());
  if (e.sup_diverges || !std::isfinite(e.sup)) return std::nullopt;
  return e.sup;
}

std::optional<double> certify_nabla2(const YoungFunction& phi) {
  validate(phi);
  const auto& scan = phi.scan();
  const auto t = scan.grid();
  const auto full = nabla2_requirement(phi, t);
  if (!full) return std::nullopt;

  std::vector<double> below_top, above_bottom;
  for (double s : t) {
    if (s <= scan.t_max / 100.0) below_top.push_back(s);
    if (s >= scan.t_min * 100.0) above_bottom.push_back(s);
  }
  if (scan.t_max >= 1e3) {
    const auto top = nabla2_requirement(phi, below_top);
    if (top && *full > kTrendFactor * *top) return std::nullopt;
  }
  if (scan.t_min <= 1e-3) {
    const auto bottom = nabla2_requirement(phi, above_bottom);
    if (bottom && *full > kTrendFactor * *bottom) return std::nullopt;
  }
  return full;
}

Indices simonenko_indices(const YoungFunction& phi) {
  const auto t = phi.scan().grid();
  std::vector<double> q;
  if (phi.has_density()) {
    q = scan_values(t, [&](double s) { return s * phi.density(s) / phi(s); });
  } else {
    const double d = 1e-4;
    q = scan_values(t, [&](double s) {
      return (std::log(phi(s * std::exp(d))) - std::log(phi(s * std::exp(-d)))) / (2 * d);
    });
  }
  const Extremes e = scan_extremes(t, q, phi.scan());
  return Indices{e.inf, e.sup_diverges ? kInf : e.sup};
}

double dilation_constant(const YoungFunction& phi, double lambda) {
  if (!(lambda > 1.0)) throw Error(Errc::invalid_argument, "dilation factor must exceed 1");
  if (!certify_delta2(phi)) throw Error(Errc::not_certified, phi.label() + " is not doubling");
  double sup = 0.0;
  for (double s : phi.scan().grid()) sup = std::max(sup, phi(lambda * s) / phi(s));
  return sup;
}

double hardy_lower_integral(const YoungFunction& phi, double r, double t) {
  if (phi.has_density()) {
    // s = t e^{-u}:  int_0^inf phi(s) s^{1-r} du
    auto g = [&](double u) {
      const double s = t * std::exp(-u);
      return phi.density(s) * std::pow(s, 1.0 - r);
    };
    const double g0 = std::abs(g(0.0));
    const double width = 0.5;
    std::vector<double> pieces;
    for (double u = 0.0; u < 4000.0; u += width) {
      pieces.push_back(integrate(g, u, u + width, 10, 1));
      if (std::abs(g(u + width)) < 1e-14 * g0 && u > 4.0) break;
    }
    return pairwise_sum(pieces);
  }
  const auto grid = phi.scan().grid();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size() && grid[k + 1] <= t * (1 + 1e-12); ++k) {
    acc += (phi(grid[k + 1]) - phi(grid[k])) * std::pow(std::sqrt(grid[k] * grid[k + 1]), -r);
  }
  return acc;
}

double hardy_upper_integral(const YoungFunction& phi, double p, double t) {
  if (phi.has_density()) {
    auto g = [&](double u) {
      const double s = t * std::exp(u);
      return phi.density(s) * std::pow(s, 1.0 - p);
    };
    const double g0 = std::abs(g(0.0));
    const double width = 0.5;
    std::vector<double> pieces;
    for (double u = 0.0; u < 4000.0; u += width) {
      pieces.push_back(integrate(g, u, u + width, 10, 1));
      if (std::abs(g(u + width)) < 1e-14 * g0 && u > 4.0) break;
    }
    return pairwise_sum(pieces);
  }
  const auto grid = phi.scan().grid();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (grid[k] < t * (1 - 1e-12)) continue;
    acc += (phi(grid[k + 1]) - phi(grid[k])) * std::pow(std::sqrt(grid[k] * grid[k + 1]), -p);
  }
  return acc;
}

double hardy_lower_worst(const YoungFunction& phi, double r) {
  double worst = 0.0;
  for (double t : phi.scan().sample(20)) {
    worst = std::max(worst, hardy_lower_integral(phi, r, t) * std::pow(t, r) / phi(t));
  }
  return worst;
}

double hardy_upper_worst(const YoungFunction& phi, double p) {
  double worst = 0.0;
  for (double t : phi.scan().sample(20)) {
    worst = std::max(worst, hardy_upper_integral(phi, p, t) * std::pow(t, p) / phi(t));
  }
  return worst;
}

HardyConstants hardy_constants(const YoungFunction& phi, const GrowthCertificate& cert) {
  if (!cert.both() || !cert.P || !cert.R) {
    throw Error(Errc::not_certified, phi.label() + " lacks a doubling or nabla_2 certificate");
  }
  HardyConstants h;
  const double R = *cert.R, P = *cert.P;
  h.r = 0.5 * (1.0 + R);
  h.p = 2.0 * P;
  // mu at dilation factor a_const; a_const = 1 here so the factor is exactly 1.
  const double mu_a = cert.a_const > 1.0 ? dilation_constant(phi, cert.a_const) : 1.0;
  h.C_r = 1.0 + h.r / (R - h.r) * cert.a_const * mu_a;
  h.C_p = 1.0 + h.p * cert.b_const / (h.p - P);
  for (double t : phi.scan().sample(20)) {
    HardySample s;
    s.t = t;
    s.lower_ratio = hardy_lower_integral(phi, h.r, t) * std::pow(t, h.r) / phi(t);
    s.upper_ratio = hardy_upper_integral(phi, h.p, t) * std::pow(t, h.p) / phi(t);
    if (!(s.lower_ratio <= h.C_r * (1 + 1e-9)) || !(s.upper_ratio <= h.C_p * (1 + 1e-9))) {
      throw Error(Errc::hardy_verification_failed,
                  phi.label() + " at t=" + fmt(t) + ": ratios " + fmt(s.lower_ratio) + ", " +
                      fmt(s.upper_ratio) + " vs C_r=" + fmt(h.C_r) + ", C_p=" + fmt(h.C_p));
    }
    h.samples.push_back(s);
  }
  return h;
}

GrowthCertificate certify(const YoungFunction& phi) {
  GrowthCertificate c;
  c.label = phi.label();
  c.scan = phi.scan();
  c.mu = certify_delta2(phi);
  c.ell = certify_nabla2(phi);
  const Indices idx = simonenko_indices(phi);
  c.index_lower = idx.lower;
  c.index_upper = idx.upper;
  if (std::isfinite(idx.upper)) {
    c.P = idx.upper * (1.0 + kIndexMargin);
    c.b_const = 1.0;
  }
  if (idx.lower * (1.0 - kIndexMargin) > 1.0) {
    c.R = idx.lower * (1.0 - kIndexMargin);
    c.a_const = 1.0;
    c.alpha = 1.0 / *c.R;
    c.d_const = std::pow(c.a_const, 1.0 / *c.R);
  }
  if (c.mu) {
    for (double lambda : {2.0, 4.0}) c.mu_lambda.emplace_back(lambda, dilation_constant(phi, lambda));
  }
  if (c.both() && c.P && c.R) c.hardy = hardy_constants(phi, c);
  return c;
}

LegendreValue legendre(const YoungFunction& phi, double y) {
  if (y < 0.0) throw Error(Errc::invalid_argument, "Legendre transform evaluated at negative y");
  if (y == 0.0) return {0.0, 0.0};
  const auto& scan = phi.scan();
  if (phi.has_density() && (y <= phi.density(scan.t_min) || y >= phi.density(scan.t_max))) {
    throw Error(Errc::maximizer_at_boundary, phi.label() + ": y=" + fmt(y) + " outside the density range of the scan");
  }
  auto obj = [&](double u) {
    const double x = std::exp(u);
    return x * y - phi(x);
  };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(scan.t_min), b = std::log(scan.t_max);
  const double a0 = a, b0 = b;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = obj(c), fd = obj(d);
  while (b - a > 1e-12) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = obj(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = obj(d);
    }
  }
  const double u = 0.5 * (a + b);
  if (u - a0 < 1e-9 * (b0 - a0) || b0 - u < 1e-9 * (b0 - a0)) {
    throw Error(Errc::maximizer_at_boundary, phi.label() + ": maximiser for y=" + fmt(y) + " at scan end");
  }
  return {std::max({obj(u), fc, fd}), std::exp(u)};
}

ComplementaryPair complementary(const YoungFunction& phi, std::span<const double> y_grid) {
  validate(phi);
  if (y_grid.empty()) throw Error(Errc::invalid_argument, "empty y grid");
  std::vector<double> ys(y_grid.begin(), y_grid.end());
  std::sort(ys.begin(), ys.end());
  if (!(ys.front() > 0.0)) throw Error(Errc::invalid_argument, "y grid must be positive");

  std::vector<double> values, argmax;
  for (double y : ys) {
    const auto lv = legendre(phi, y);
    values.push_back(lv.value);
    argmax.push_back(lv.argmax);
  }
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
    if (values[i + 1] < values[i] - 1e-12 * std::abs(values[i])) {
      throw Error(Errc::invalid_young, "complementary function decreases on its tabulation grid");
    }
  }
  for (std::size_t i = 0; i + 2 < ys.size(); ++i) {
    const double w = (ys[i + 1] - ys[i]) / (ys[i + 2] - ys[i]);
    const double chord = (1 - w) * values[i] + w * values[i + 2];
    if (values[i + 1] > chord + 1e-10 * std::abs(chord)) {
      throw Error(Errc::invalid_young, "complementary function not convex on its tabulation grid");
    }
  }

  YoungFunction psi(
      "conj(" + phi.label() + ")", [phi](double y) { return legendre(phi, y).value; },
      YoungFunction::Map([phi](double y) { return legendre(phi, y).argmax; }),
      ScanRange{ys.front(), ys.back(), phi.scan().points_per_decade});
  return ComplementaryPair{phi, std::move(psi), std::move(ys), std::move(values), std::move(argmax)};
}

double young_inequality_slack(const ComplementaryPair& pair, std::span<const double> x_grid,
                              std::span<const double> y_grid) {
  double worst = kInf;
  std::vector<double> psi(y_grid.size());
  for (std::size_t j = 0; j < y_grid.size(); ++j) psi[j] = pair.psi(y_grid[j]);
  for (double x : x_grid) {
    const double fx = pair.phi(x);
    for (std::size_t j = 0; j < y_grid.size(); ++j) {
      const double rhs = fx + psi[j];
      if (rhs <= 0.0) continue;
      worst = std::min(worst, (rhs - x * y_grid[j]) / rhs);
    }
  }
  return worst;
}

std::string certificate_csv_header() { return "label,mu,ell,i,I,P,R,r,C_r,p,C_p,scan_range"; }

std::string to_csv_row(const GrowthCertificate& c) {
  std::ostringstream os;
  os << c.label << ',' << fmt(c.mu) << ',' << fmt(c.ell) << ',' << fmt(c.index_lower) << ','
     << fmt(c.index_upper) << ',' << fmt(c.P) << ',' << fmt(c.R) << ',';
  if (c.hardy) {
    os << fmt(c.hardy->r) << ',' << fmt(c.hardy->C_r) << ',' << fmt(c.hardy->p) << ',' << fmt(c.hardy->C_p);
  } else {
    os << "NA,NA,NA,NA";
  }
  os << ",[" << fmt(c.scan.t_min) << ";" << fmt(c.scan.t_max) << "]";
  return os.str();
}

}  // namespace orlicz

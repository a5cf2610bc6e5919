// One line per acceptance criterion; exit status 1 when any fails.

#include "oracles.hpp"
#include "orlicz/config.hpp"
#include "orlicz/czop.hpp"
#include "orlicz/elliptic.hpp"
#include "orlicz/generators.hpp"
#include "orlicz/gridfn.hpp"
#include "orlicz/oscillation.hpp"
#include "orlicz/scenario.hpp"
#include "orlicz/young.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace orlicz;
namespace fs = std::filesystem;

namespace {

constexpr double tol_mu = 1e-9;
constexpr double tol_hardy = 1e-6;
constexpr double tol_legendre = 1e-6;
constexpr double tol_young_slack = -1e-9;
constexpr double tol_luxemburg = 1e-10;
constexpr double tol_hilbert = 0.02;
constexpr double tol_frozen = 0.02;
constexpr double tol_commutator = 1e-12;
constexpr double min_log_gamma = 0.05;
constexpr double vmo_fraction = 0.2;
constexpr double min_order = 0.9;
constexpr double two_pi = 2.0 * std::numbers::pi;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = lo * std::pow(hi / lo, i / (count - 1.0));
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("orlicz_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

Outcome run_suite(const std::string& file, const fs::path& out) {
  Outcome o;
  const Config cfg = load_config(std::string(ORLICZ_CONFIG_DIR) + "/" + file);
  for (const RunReport& r : run_config(cfg, out)) {
    for (const Assertion& a : r.assertions) o.require(a.passed, r.id + ":" + a.name + " " + a.detail);
  }
  if (o.ok) o.detail = std::to_string(cfg.scenarios.size()) + " scenarios passed";
  return o;
}

Outcome young_triad() {
  Outcome o;
  for (double p : {1.5, 2.0, 3.0}) {
    const GrowthCertificate c = certify(YoungFunction::power(p));
    o.require(c.both(), "t^" + num(p) + " not in both classes");
    if (c.mu) o.require(std::abs(*c.mu - std::pow(2.0, p)) <= tol_mu, "mu of t^" + num(p) + " = " + num(*c.mu));
  }
  const GrowthCertificate e = certify(YoungFunction::exp_minus_one());
  o.require(!e.doubling() && e.nabla2(), "exp(t)-1 misclassified");
  const GrowthCertificate l = certify(YoungFunction::t_log());
  o.require(l.doubling() && !l.nabla2(), "t ln(1+t) misclassified");
  if (o.ok) o.detail = "t^p yes/yes, exp(t)-1 no/yes, t ln(1+t) yes/no";
  return o;
}

Outcome hardy() {
  Outcome o;
  double worst = 0.0;
  for (double q : {1.5, 2.0, 3.0}) {
    const YoungFunction phi = YoungFunction::power(q);
    const GrowthCertificate c = certify(phi);
    if (!c.hardy) {
      o.require(false, "no Hardy constants for t^" + num(q));
      continue;
    }
    const HardyConstants& h = *c.hardy;
    const double lo = oracle::hardy_lower_power(q, h.r), up = oracle::hardy_upper_power(q, h.p);
    for (const HardySample& s : h.samples) {
      worst = std::max({worst, std::abs(s.lower_ratio / lo - 1.0), std::abs(s.upper_ratio / up - 1.0)});
      o.require(s.lower_ratio <= h.C_r && s.upper_ratio <= h.C_p, "ratio above C_r or C_p for t^" + num(q));
    }
    const double at_r = hardy_lower_worst(phi, h.r), at_p = hardy_upper_worst(phi, h.p);
    for (double f : {0.9, 0.8}) o.require(hardy_lower_worst(phi, f * h.r) <= at_r * (1 + 1e-9), "lower monotonicity");
    for (double f : {1.1, 1.25}) o.require(hardy_upper_worst(phi, f * h.p) <= at_p * (1 + 1e-9), "upper monotonicity");
  }
  o.require(worst <= tol_hardy, "closed-form error " + num(worst));
  if (o.ok) o.detail = "max rel error " + num(worst);
  return o;
}

Outcome legendre_round_trip() {
  Outcome o;
  const std::vector<double> y = log_grid(1e-2, 1e2, 100);
  double worst = 0.0, slack = INFINITY;
  for (double p : {1.5, 2.0, 3.0}) {
    const double q = p / (p - 1.0);
    const ComplementaryPair pair = complementary(YoungFunction::power(p, 1.0 / p), y);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double want = std::pow(y[i], q) / q;
      worst = std::max(worst, std::abs(pair.psi_values[i] / want - 1.0));
    }
    slack = std::min(slack, young_inequality_slack(pair, y, y));
  }
  o.require(worst <= tol_legendre, "Legendre error " + num(worst));
  o.require(slack >= tol_young_slack, "Young slack " + num(slack));
  if (o.ok) o.detail = "max rel error " + num(worst) + ", min slack " + num(slack);
  return o;
}

Outcome luxemburg() {
  Outcome o;
  const Grid g(2, 32);
  double worst = 0.0;
  for (int seed = 1; seed <= 50; ++seed) {
    const GridFunction f = generate("random_smooth(" + std::to_string(seed) + ")", g, {{"amplitude", 0.5 + seed % 7}});
    for (double p : {1.5, 2.0, 3.0}) {
      worst = std::max(worst, std::abs(luxemburg_norm(f, YoungFunction::power(p)) / lp_norm(f, p) - 1.0));
    }
  }
  const Grid gi(2, 64);
  const double c = 3.0;
  const GridFunction ind = generate("indicator", gi, {{"lo", 0.25}, {"hi", 0.75}, {"value", c}});
  const double E = (ind.values() != 0.0).count() * gi.cell_measure();
  for (double p : {1.5, 2.0, 3.0}) {
    worst = std::max(worst, std::abs(luxemburg_norm(ind, YoungFunction::power(p)) / (c * std::pow(E, 1.0 / p)) - 1.0));
  }
  worst = std::max(worst, std::abs(luxemburg_norm(ind, YoungFunction::exp_minus_one()) / (c / std::log1p(1.0 / E)) - 1.0));
  o.require(worst <= tol_luxemburg, "rel error " + num(worst));
  if (o.ok) o.detail = "max rel error " + num(worst);
  return o;
}

Outcome maximal_jensen() {
  Outcome o;
  const Grid g(2, 24);
  const std::vector<YoungFunction> phis{YoungFunction::power(1.5), YoungFunction::power(3.0), YoungFunction::t_log()};
  int violations = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const GridFunction f = generate("random_smooth(" + std::to_string(seed) + ")", g, {{"amplitude", 2.0}});
    for (const YoungFunction& phi : phis) violations += jensen_maximal_check(f, phi).violations;
  }
  o.require(violations == 0, std::to_string(violations) + " Jensen violations");
  const Grid h(1, 256);
  double weak11 = 0.0, weak_phi = 0.0;
  for (const TestFunction& t : test_family(h)) {
    o.require((maximal(t.f).Mf.scalar() >= t.f.magnitude()).all(), "Mf < |f| for " + t.id);
    for (const YoungFunction& phi : phis) {
      const MaximalBounds b = maximal_bounds_check(t.f, phi, 2.0);
      weak11 = std::max(weak11, b.weak11);
      weak_phi = std::max(weak_phi, b.weak_orlicz);
    }
  }
  o.require(std::isfinite(weak11) && std::isfinite(weak_phi), "weak constants not finite");
  if (o.ok) o.detail = "weak(1,1) " + num(weak11) + ", weak(Phi,Phi) " + num(weak_phi);
  return o;
}

Outcome oscillation_checks() {
  Outcome o;
  for (const Grid& g : {Grid(1, 256), Grid(2, 32), Grid(2, 32, 1.0, Topology::rectangle)}) {
    const std::vector<GridFunction> symbols{generate("sin", g), generate("cos", g, {{"k", 3}}),
                                            generate("indicator", g, {{"lo", 0.2}, {"hi", 0.6}}),
                                            generate("random_smooth(4)", g), generate("gaussian_bump", g)};
    for (const GridFunction& a : symbols) {
      o.require(bmo_seminorm(a) <= 2.0 * a.max_abs(), "BMO above 2 sup");
      std::vector<double> R;
      for (double r = 4.0 * g.h(); r <= 0.25 * (1 + 1e-12); r *= 2.0) R.push_back(r);
      const auto m = vmo_modulus(a, R);
      for (std::size_t k = 1; k < m.size(); ++k) o.require(m[k].second >= m[k - 1].second, "gamma not monotone");
    }
  }
  double log_min = INFINITY;
  for (int n : {256, 512}) {
    const Grid g(1, n);
    std::vector<double> R;
    for (double r = 4.0 * g.h(); r <= 0.25 * (1 + 1e-12); r *= 2.0) R.push_back(r);
    for (const auto& [r, gamma] : vmo_modulus(generate("log_singular", g), R)) log_min = std::min(log_min, gamma);
  }
  o.require(log_min >= min_log_gamma, "log gamma drops to " + num(log_min));
  const Grid g(1, 512);
  const auto s = vmo_modulus(generate("sin", g), {4.0 * g.h(), 0.25});
  o.require(s[0].second <= vmo_fraction * s[1].second, "sin gamma(4h)/gamma(1/4) = " + num(s[0].second / s[1].second));
  if (o.ok) o.detail = "log min gamma " + num(log_min) + ", sin ratio " + num(s[0].second / s[1].second);
  return o;
}

Outcome singular_oracle() {
  Outcome o;
  std::vector<double> err;
  for (int n : {256, 512}) {
    const Grid g(1, n);
    const GridFunction f = generate("cos", g), want = generate("sin", g);
    err.push_back(oracle::rel_l2(apply_pv(VCZKernel::hilbert(), f), want));
  }
  o.require(err[0] <= tol_hilbert, "Hilbert error " + num(err[0]));
  o.require(err[1] <= err[0], "Hilbert error grows to " + num(err[1]));

  const Eigen::Vector3d x0(0.3, 0.5, 0.0);
  const double c0 = 1.0 + 0.5 * std::sin(two_pi * x0[0]);
  const Grid g2(2, 256);
  const GridFunction f2 = generate("band_limited(3)", g2, {{"kmax", 3}});
  const auto m = oracle::planar_multiplier([c0](double t) { return c0 * std::cos(2.0 * t); });
  const GridFunction want2 =
      oracle::apply_multiplier(f2, [&](const Eigen::Vector3d& k) { return m(std::atan2(k[1], k[0])); });
  const double frozen = oracle::rel_l2(apply_pv(VCZKernel::variable_cos2theta(0.5).frozen_at(x0), f2), want2);
  o.require(frozen <= tol_frozen, "frozen kernel error " + num(frozen));

  const Grid g3(2, 32);
  const PvOperator op(VCZKernel::variable_cos2theta(0.5), g3);
  const GridFunction a = generate("sin", g3), f3 = generate("random_smooth(9)", g3);
  const GridFunction slow = oracle::commutator_brute(op, a, f3);
  const double diff = (op.commutator(a, f3).values() - slow.values()).abs().maxCoeff() / std::max(1.0, slow.max_abs());
  o.require(diff <= tol_commutator, "commutator error " + num(diff));
  if (o.ok) {
    o.detail = "Hilbert " + num(err[0]) + " -> " + num(err[1]) + ", frozen " + num(frozen) + ", commutator " + num(diff);
  }
  return o;
}

Outcome representation() {
  Outcome o;
  std::string detail;
  for (const MultiIndex& alpha : {MultiIndex{2, 0, 0}, MultiIndex{1, 1, 0}}) {
    std::vector<double> res;
    for (int n : {64, 128}) {
      const Grid g(2, n);
      const GridFunction v = generate("compact_bump", g, {{"radius", 0.3}});
      res.push_back(representation_residual(EllipticSystem::laplacian(g, 0.1), v, alpha).l2);
    }
    const double rate = std::log2(res[0] / res[1]);
    o.require(rate >= min_order, "order " + num(rate));
    detail += (detail.empty() ? "orders " : ", ") + num(rate);
  }
  if (o.ok) o.detail = detail;
  return o;
}

Outcome determinism() {
  Outcome o;
  const Config cfg = load_config(std::string(ORLICZ_CONFIG_DIR) + "/young.json");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_config(cfg, a);
  run_config(cfg, b);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    const fs::path other = b / fs::relative(e.path(), a);
    o.require(fs::exists(other) && slurp(e.path()) == slurp(other), "differs: " + fs::relative(e.path(), a).string());
    ++files;
  }
  o.require(files > 0, "no CSVs written");
  if (o.ok) o.detail = std::to_string(files) + " CSVs identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Young certification triad", young_triad},
      {"Hardy inequalities", hardy},
      {"Legendre round trip", legendre_round_trip},
      {"Luxemburg oracle", luxemburg},
      {"maximal function and Jensen", maximal_jensen},
      {"oscillation", oscillation_checks},
      {"singular-operator oracle", singular_oracle},
      {"Orlicz boundedness", [] { return run_suite("operators.json", scratch("operators")); }},
      {"representation formula", representation},
      {"interior estimate", [] { return run_suite("elliptic.json", scratch("elliptic")); }},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-4s criterion %2zu  %-28s %6.1fs  %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

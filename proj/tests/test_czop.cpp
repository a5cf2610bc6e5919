#include <doctest.h>

#include "oracles.hpp"
#include "orlicz/czop.hpp"
#include "orlicz/error.hpp"
#include "orlicz/generators.hpp"
#include "orlicz/oscillation.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace orlicz;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double hilbert_error(int n) {
  const Grid g(1, n);
  const GridFunction f = GridFunction::sample(g, [](const Eigen::Vector3d& x) { return std::cos(two_pi * x[0]); });
  const GridFunction want = GridFunction::sample(g, [](const Eigen::Vector3d& x) { return std::sin(two_pi * x[0]); });
  return oracle::rel_l2(apply_pv(VCZKernel::hilbert(), f), want);
}

GridFunction planar_oracle(const GridFunction& f, const std::function<double(double)>& g) {
  const auto m = oracle::planar_multiplier(g);
  return oracle::apply_multiplier(f, [&](const Eigen::Vector3d& k) { return m(std::atan2(k[1], k[0])); });
}

}  // namespace

TEST_CASE("periodic Hilbert transform of cos is sin") {
  const double e256 = hilbert_error(256);
  const double e512 = hilbert_error(512);
  CHECK(e256 < 0.02);
  CHECK(e512 <= e256);
}

TEST_CASE("Hilbert table is odd") {
  const PvOperator op(VCZKernel::hilbert(), Grid(1, 64));
  const std::vector<double>& t = op.table(0);
  for (int i = 1; i < 32; ++i) CHECK(t[i] == doctest::Approx(-t[64 - i]).epsilon(1e-12));
  CHECK(op.lattice_correction(0) == 0.0);
}

TEST_CASE("frozen planar kernel matches the Fourier multiplier") {
  const Eigen::Vector3d x0(0.3, 0.5, 0.0);
  const VCZKernel k = VCZKernel::variable_cos2theta(0.5).frozen_at(x0);
  REQUIRE(k.frozen());
  const double c0 = 1.0 + 0.5 * std::sin(two_pi * x0[0]);
  const Grid g(2, 256);
  const GridFunction f = generate("band_limited(3)", g, {{"kmax", 3}});
  const GridFunction want = planar_oracle(f, [c0](double t) { return c0 * std::cos(2.0 * t); });
  CHECK(oracle::rel_l2(apply_pv(k, f), want) < 0.02);
}

TEST_CASE("planar Riesz transform of a low mode") {
  const Grid g(2, 256);
  const GridFunction f = generate("sin", g, {{"k", 1}});
  const GridFunction want = planar_oracle(f, [](double t) { return std::cos(t) / two_pi; });
  CHECK(oracle::rel_l2(apply_pv(VCZKernel::riesz(2, 0), f), want) < 0.02);
  // R_1 sin(2 pi x1) = -cos(2 pi x1)
  const GridFunction cosine = generate("cos", g, {{"amplitude", -1.0}});
  CHECK(oracle::rel_l2(want, cosine) < 1e-12);
}

TEST_CASE("commutator matches the brute-force sum") {
  const Grid g(2, 32);
  const PvOperator op(VCZKernel::variable_cos2theta(0.5), g);
  const GridFunction a = generate("sin", g, {{"k", 1}});
  const GridFunction f = generate("random_smooth(9)", g);
  const GridFunction fast = op.commutator(a, f);
  const GridFunction slow = oracle::commutator_brute(op, a, f);
  CHECK((fast.values() - slow.values()).abs().maxCoeff() <= 1e-12 * std::max(1.0, slow.max_abs()));
}

TEST_CASE("commutator with a constant symbol vanishes") {
  const Grid g(1, 128);
  const GridFunction a = generate("constant", g, {{"value", 3.0}});
  CHECK(apply_commutator(VCZKernel::hilbert(), a, generate("random_smooth(2)", g)).max_abs() == 0.0);
}

TEST_CASE("kernel validation") {
  const std::vector<Eigen::Vector3d> base{Eigen::Vector3d(0.1, 0.2, 0.0), Eigen::Vector3d(0.7, 0.4, 0.0)};
  for (const VCZKernel& k : {VCZKernel::riesz(2, 1), VCZKernel::cos2theta(), VCZKernel::variable_cos2theta()}) {
    const KernelValidity v = validate_kernel(k, base, 512, 500);
    CHECK(v.max_cancellation < 1e-12);
    CHECK(std::isfinite(v.hormander_constant));
    CHECK(v.derivative_bounds[0] > 0.0);
  }
  const KernelValidity r3 = validate_kernel(VCZKernel::riesz(3, 2), {Eigen::Vector3d::Zero()}, 64, 200);
  CHECK(r3.max_cancellation < 1e-12);

  const VCZKernel bad("bad", 2, {KernelTerm{{}, [](const Eigen::Vector3d& w) { return 1.0 + w[0] * w[0]; }}});
  try {
    validate_kernel(bad, base, 512, 100);
    FAIL("expected cancellation_violated");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::cancellation_violated);
  }
}

TEST_CASE("catalog lookups") {
  for (const std::string& name : VCZKernel::catalog()) CHECK_NOTHROW(VCZKernel::by_name(name, {{"dim", 2}, {"j", 1}}));
  CHECK(VCZKernel::by_name("riesz_j", {{"dim", 3}, {"j", 2}}).dim() == 3);
  CHECK_THROWS_AS(VCZKernel::by_name("nope"), Error);
}

TEST_CASE("operators need a torus of matching dimension") {
  try {
    PvOperator(VCZKernel::hilbert(), Grid(1, 32, 1.0, Topology::rectangle));
    FAIL("expected non_torus");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_torus);
  }
  CHECK_THROWS_AS(PvOperator(VCZKernel::hilbert(), Grid(2, 16)), Error);
}

TEST_CASE("truncation splits the function") {
  const Grid g(2, 32);
  const GridFunction f = generate("random_smooth(1)", g, {{"amplitude", 3.0}});
  const TruncationPair t = truncate(f, 2.0, 1.0);
  CHECK(((t.f_low + t.f_high).values() == f.values()).all());
  CHECK(t.f_low.max_abs() <= 2.0);
  CHECK(truncate(f, 2.0, 1.0, 2.0).threshold == doctest::Approx(1.0));
}

TEST_CASE("test family sizes") {
  CHECK(test_family(Grid(1, 64)).size() >= 30);
  CHECK(test_family(Grid(2, 16)).size() >= 30);
  CHECK(test_family(Grid(3, 8)).size() >= 30);
  const auto a = test_family(Grid(2, 16), 3);
  const auto b = test_family(Grid(2, 16), 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i].f.values() == b[i].f.values()).all());
}

TEST_CASE("weak type ratio of the identity is at most one") {
  const Grid g(2, 32);
  for (const TestFunction& t : test_family(g)) CHECK(weak_type_ratio(t.f, t.f, 2.0) <= 1.0 + 1e-12);
}

TEST_CASE("empirical Orlicz bound for the Hilbert transform") {
  const Grid g(1, 128);
  const PvOperator op(VCZKernel::hilbert(), g);
  const auto family = test_family(g);
  const OperatorNormReport r = empirical_orlicz_bound(op, YoungFunction::power(2.0), family);
  CHECK(r.ratios.size() == family.size());
  CHECK(r.sup_ratio <= 1.0 + 1e-9);
  CHECK(r.modular_constant >= r.sup_ratio * (1 - 1e-12));
  CHECK(std::isfinite(r.modular_constant));
  REQUIRE(r.theoretical_constant);
  try {
    empirical_orlicz_bound(op, YoungFunction::t_log(), family);
    FAIL("expected not_certified");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_certified);
  }
}

TEST_CASE("commutator bound scales linearly in the symbol") {
  const Grid g(2, 64);
  const PvOperator op(VCZKernel::cos2theta(), g);
  const auto family = test_family(g);
  std::vector<double> sup;
  for (double eps : {0.02, 0.04}) {
    const GridFunction a = generate("sin", g, {{"amplitude", eps}});
    const OperatorNormReport r = empirical_orlicz_bound(op, YoungFunction::power(2.0), family, &a);
    REQUIRE(r.a_bmo);
    CHECK(*r.a_bmo == doctest::Approx(bmo_seminorm(a)).epsilon(0.2));
    sup.push_back(r.sup_ratio);
  }
  const double factor = sup[1] / sup[0];
  CHECK(factor >= 1.6);
  CHECK(factor <= 2.4);
}

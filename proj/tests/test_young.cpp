#include <doctest.h>

#include "oracles.hpp"
#include "orlicz/error.hpp"
#include "orlicz/young.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace orlicz;

namespace {

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = lo * std::pow(hi / lo, i / (count - 1.0));
  return out;
}

}  // namespace

TEST_CASE("power functions are doubling with mu = 2^p") {
  for (double p : {1.5, 2.0, 3.0}) {
    const GrowthCertificate c = certify(YoungFunction::power(p));
    REQUIRE(c.both());
    CHECK(std::abs(*c.mu - std::pow(2.0, p)) <= 1e-9);
    CHECK(c.index_lower == doctest::Approx(p).epsilon(1e-6));
    CHECK(c.index_upper == doctest::Approx(p).epsilon(1e-6));
  }
}

TEST_CASE("exponential and t log t fail opposite conditions") {
  const GrowthCertificate e = certify(YoungFunction::exp_minus_one());
  CHECK_FALSE(e.doubling());
  CHECK(e.nabla2());
  const GrowthCertificate l = certify(YoungFunction::t_log());
  CHECK(l.doubling());
  CHECK_FALSE(l.nabla2());
  CHECK_FALSE(l.hardy.has_value());
}

TEST_CASE("t^2 certificate constants") {
  const GrowthCertificate c = certify(YoungFunction::power(2.0));
  REQUIRE(c.P);
  REQUIRE(c.R);
  CHECK(*c.P == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(*c.R == doctest::Approx(2.0).epsilon(1e-2));
  REQUIRE(c.hardy);
  CHECK(c.hardy->r == doctest::Approx((1.0 + *c.R) / 2.0));
  CHECK(c.hardy->p == doctest::Approx(2.0 * *c.P));
}

TEST_CASE("dilation constant of a power") {
  CHECK(dilation_constant(YoungFunction::power(3.0), 1.5) == doctest::Approx(3.375).epsilon(1e-9));
  CHECK_THROWS_AS(dilation_constant(YoungFunction::exp_minus_one(), 2.0), Error);
}

TEST_CASE("Hardy ratios match the power closed forms") {
  for (double q : {1.5, 2.0, 3.0}) {
    const YoungFunction phi = YoungFunction::power(q);
    const GrowthCertificate c = certify(phi);
    REQUIRE(c.hardy);
    const HardyConstants& h = *c.hardy;
    REQUIRE(h.samples.size() == 20);
    for (const HardySample& s : h.samples) {
      CHECK(s.lower_ratio == doctest::Approx(oracle::hardy_lower_power(q, h.r)).epsilon(1e-6));
      CHECK(s.upper_ratio == doctest::Approx(oracle::hardy_upper_power(q, h.p)).epsilon(1e-6));
      CHECK(s.lower_ratio <= h.C_r);
      CHECK(s.upper_ratio <= h.C_p);
    }
  }
}

TEST_CASE("Hardy constants improve away from the critical exponents") {
  for (double q : {1.5, 2.0, 3.0}) {
    const YoungFunction phi = YoungFunction::power(q);
    const HardyConstants h = *certify(phi).hardy;
    const double at_r = hardy_lower_worst(phi, h.r);
    const double at_p = hardy_upper_worst(phi, h.p);
    for (double f : {0.9, 0.8}) CHECK(hardy_lower_worst(phi, h.r * f) <= at_r * (1 + 1e-9));
    for (double f : {1.1, 1.25}) CHECK(hardy_upper_worst(phi, h.p * f) <= at_p * (1 + 1e-9));
  }
}

TEST_CASE("Legendre transform of t^p/p is t^q/q") {
  const std::vector<double> y = log_grid(1e-2, 1e2, 60);
  for (double p : {1.5, 2.0, 3.0}) {
    const double q = p / (p - 1.0);
    const ComplementaryPair pair = complementary(YoungFunction::power(p, 1.0 / p), y);
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(pair.psi_values[i] == doctest::Approx(std::pow(y[i], q) / q).epsilon(1e-6));
      CHECK(pair.legendre_grid[i] == doctest::Approx(std::pow(y[i], q - 1.0)).epsilon(1e-4));
    }
  }
}

TEST_CASE("Young inequality slack is non-negative on a product grid") {
  const std::vector<double> x = log_grid(1e-2, 1e2, 100);
  const std::vector<double> y = log_grid(1e-2, 1e2, 100);
  for (const YoungFunction& phi : {YoungFunction::power(1.5), YoungFunction::power(3.0), YoungFunction::power_log(2.0)}) {
    const ComplementaryPair pair = complementary(phi, y);
    CHECK(young_inequality_slack(pair, x, y) >= -1e-9);
  }
}

TEST_CASE("Legendre maximiser outside the window throws") {
  try {
    legendre(YoungFunction::power(2.0, 0.5), 1e8);
    FAIL("expected maximizer_at_boundary");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::maximizer_at_boundary);
  }
}

TEST_CASE("validate rejects non-convex and non-vanishing functions") {
  const YoungFunction concave("sqrt", [](double t) { return std::sqrt(t); });
  const YoungFunction shifted("shift", [](double t) { return t * t + 1.0; });
  for (const YoungFunction& f : {concave, shifted}) {
    try {
      validate(f);
      FAIL("expected invalid_young");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_young);
    }
  }
  CHECK_NOTHROW(validate(YoungFunction::t_log()));
}

TEST_CASE("certificate CSV row has one field per header column") {
  const std::string header = certificate_csv_header();
  const std::string row = to_csv_row(certify(YoungFunction::power(2.0)));
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
}

#include <doctest.h>

#include "orlicz/elliptic.hpp"
#include "orlicz/error.hpp"
#include "orlicz/generators.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace orlicz;

namespace {

constexpr double pi = std::numbers::pi;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::io;
}

}  // namespace

TEST_CASE("ellipticity constants") {
  const Grid g(2, 16);
  CHECK(EllipticSystem::laplacian(g).delta() == doctest::Approx(1.0));
  CHECK(EllipticSystem::polyharmonic(g, 2).delta() == doctest::Approx(1.0));
  CHECK(EllipticSystem::by_name("anisotropic", g).delta() == doctest::Approx(1.0));
  CHECK(EllipticSystem::coupled(g, 0.5).delta() == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(EllipticSystem::laplacian(g, 0.5).delta() == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(code_of([&] { EllipticSystem::coupled(g, 1.5); }) == Errc::not_elliptic);
}

TEST_CASE("cofactors of a coupled system") {
  const Grid g(2, 16);
  const FrozenOperator op = freeze(EllipticSystem::coupled(g, 0.5), 0);
  CHECK(op.cofactor_identity_error() < 1e-12);
  const Eigen::MatrixXd L = freeze(EllipticSystem::by_name("decoupled", g), 0).cofactors({0.6, 0.8, 0.0});
  const Eigen::MatrixXd l = freeze(EllipticSystem::by_name("decoupled", g), 0).symbol({0.6, 0.8, 0.0});
  CHECK(L(0, 0) == doctest::Approx(l(1, 1)));
  CHECK(L(1, 1) == doctest::Approx(l(0, 0)));
  CHECK(code_of([&] { fundamental_kernel(op); }) == Errc::unsupported_family);
}

TEST_CASE("fundamental solutions of the Laplacian") {
  const Eigen::Vector3d x(0.3, -0.4, 0.0);
  const FundamentalKernel g2 = fundamental_kernel(freeze(EllipticSystem::laplacian(Grid(2, 16)), 0));
  CHECK(g2(x)(0, 0) == doctest::Approx(std::log(0.5) / (2 * pi)));
  CHECK(g2.degree() == 0);
  const Eigen::Vector3d y(0.3, -0.4, 1.2);
  const FundamentalKernel g3 = fundamental_kernel(freeze(EllipticSystem::laplacian(Grid(3, 8)), 0));
  CHECK(g3(y)(0, 0) == doctest::Approx(-1.0 / (4 * pi * y.norm())));
  const double r = y.norm();
  const Eigen::Vector3d w = y / r;
  CHECK(g3.derivative({1, 1, 0}).kernel(Eigen::Vector3d::Zero(), y) ==
        doctest::Approx(-3.0 * w[0] * w[1] / (4 * pi * r * r * r)));
}

TEST_CASE("sphere terms of the derivative kernels") {
  const FundamentalKernel lap = fundamental_kernel(freeze(EllipticSystem::laplacian(Grid(2, 16)), 0));
  CHECK(lap.derivative({2, 0, 0}).sphere_term == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(lap.derivative({1, 1, 0}).sphere_term == doctest::Approx(0.0));
  const FundamentalKernel bih = fundamental_kernel(freeze(EllipticSystem::polyharmonic(Grid(2, 16), 2), 0));
  CHECK(bih.derivative({4, 0, 0}).sphere_term == doctest::Approx(0.375).epsilon(1e-9));
  CHECK(bih.derivative({2, 2, 0}).sphere_term == doctest::Approx(0.125).epsilon(1e-9));
  const FundamentalKernel an = fundamental_kernel(freeze(EllipticSystem::by_name("anisotropic", Grid(2, 16)), 0));
  CHECK(an.derivative({2, 0, 0}).sphere_term == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("Gamma derivatives agree with differences") {
  const FundamentalKernel bih = fundamental_kernel(freeze(EllipticSystem::polyharmonic(Grid(2, 16), 2), 0));
  const GammaExpression& G = bih.gamma[0];
  const Eigen::Vector3d x(0.4, 0.7, 0.0);
  const double e = 1e-5;
  const Eigen::Vector3d dx(e, 0.0, 0.0);
  CHECK(G.derivative(0)(x) == doctest::Approx((G(x + dx) - G(x - dx)) / (2 * e)).epsilon(1e-7));
  // Delta^2 Gamma = 0 away from the origin
  double bilap = 0.0;
  for (const MultiIndex& a : {MultiIndex{4, 0, 0}, MultiIndex{2, 2, 0}, MultiIndex{0, 4, 0}}) {
    bilap += (a[0] == 2 ? 2.0 : 1.0) * G.derivative(a)(x);
  }
  CHECK(std::abs(bilap) < 1e-10);
}

TEST_CASE("convolution with Gamma inverts the operator") {
  for (const char* fam : {"laplacian", "anisotropic", "biharmonic"}) {
    const EllipticSystem sys = EllipticSystem::by_name(fam, Grid(3, 8));
    const FrozenOperator op = freeze(sys, 0);
    CHECK(convolution_check(fundamental_kernel(op), op, 32).rel_l2 < 0.05);
  }
}

TEST_CASE("representation formula residual decreases under refinement") {
  std::vector<double> res;
  for (int n : {64, 128}) {
    const Grid g(2, n);
    const EllipticSystem sys = EllipticSystem::laplacian(g, 0.1);
    const GridFunction v = generate("compact_bump", g, {{"radius", 0.3}});
    res.push_back(representation_residual(sys, v, {1, 1, 0}).l2);
  }
  CHECK(std::log2(res[0] / res[1]) >= 0.9);
  CHECK(code_of([] {
          const Grid r(2, 32, 1.0, Topology::rectangle);
          representation_residual(EllipticSystem::laplacian(r), generate("compact_bump", r), {2, 0, 0});
        }) == Errc::non_torus);
}

TEST_CASE("operator application to a trigonometric product") {
  const Grid g(2, 128);
  const GridFunction u = generate("sin_product", g);
  const GridFunction Lu = apply_operator(EllipticSystem::laplacian(g), u);
  CHECK((Lu.values() + 8 * pi * pi * u.values()).abs().maxCoeff() < 2e-2);
  const GridFunction B = apply_operator(EllipticSystem::polyharmonic(g, 2), u);
  CHECK((B.values() - 64 * std::pow(pi, 4) * u.values()).abs().maxCoeff() < 5.0);
}

TEST_CASE("cutoff functions") {
  const Grid g(2, 128, 1.0, Topology::rectangle);
  const Eigen::Vector3d c(0.5, 0.5, 0.0);
  CHECK(outer_theta(0.5) == doctest::Approx(0.625));
  const GridFunction phi = cutoff(g, c, 0.3, 0.5);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double d = (g.point(i) - c).norm();
    if (d <= 0.15) CHECK(phi(i) == 1.0);
    if (d >= 0.1875) CHECK(phi(i) == 0.0);
  }
  const std::vector<double> k = cutoff_constants(phi, 0.3, 0.5, 2);
  REQUIRE(k.size() == 3);
  CHECK(k[0] == doctest::Approx(1.0));
  CHECK(std::isfinite(k[2]));
  CHECK(code_of([&] { cutoff(Grid(2, 16, 1.0, Topology::rectangle), c, 0.1, 0.5); }) == Errc::annulus_too_thin);
  CHECK(code_of([&] { cutoff(g, {0.1, 0.5, 0.0}, 0.3, 0.5); }) == Errc::invalid_argument);
}

TEST_CASE("Leibniz expansion of L(phi u)") {
  const Grid g(2, 128, 1.0, Topology::rectangle);
  const GridFunction phi = cutoff(g, {0.5, 0.5, 0.0}, 0.3, 0.5);
  const GridFunction u = generate("sin_product", g);
  for (const EllipticSystem& sys : {EllipticSystem::laplacian(g), EllipticSystem::polyharmonic(g, 2)}) {
    const LeibnizCheck l = leibniz_check(sys, phi, u);
    CHECK(l.max_abs <= 0.05 * l.scale);
  }
}

TEST_CASE("interpolation inequality constants") {
  const Grid g(2, 128, 1.0, Topology::rectangle);
  const GridFunction u = generate("sin_product", g);
  const Eigen::Vector3d c(0.5, 0.5, 0.0);
  CHECK(interpolation_check(u, YoungFunction::power(2.0), 1, c, 0.3, 1.0, {1.0}).rows.empty());
  const InterpolationReport r = interpolation_check(u, YoungFunction::power(2.0), 2, c, 0.3, 1.0, {0.01, 0.1, 1.0, 10.0});
  CHECK(r.rows.size() == 12);
  REQUIRE(r.constants.size() == 3);
  for (const auto& [s, C] : r.constants) CHECK((std::isfinite(C) && C >= 0.0));
}

TEST_CASE("interior estimate and covering") {
  const Grid g(2, 64, 1.0, Topology::rectangle);
  const EllipticSystem sys = EllipticSystem::laplacian(g);
  const GridFunction u = generate("sin_product", g);
  const std::vector<Ball> balls{{{0.5, 0.5, 0.0}, 0.3}, {{0.4, 0.55, 0.0}, 0.2}};
  for (const EstimateReport& e : interior_estimate(sys, u, YoungFunction::power(2.0), balls)) {
    CHECK_FALSE(e.vacuous);
    CHECK(std::isfinite(e.C_emp));
    CHECK(e.C_emp > 0.0);
    CHECK(e.theta_seminorms.size() == 3);
  }
  const CoveringReport cr = covering_estimate(sys, u, YoungFunction::power(2.0), {0.35, 0.35, 0.0}, {0.65, 0.65, 0.0}, 0.1);
  CHECK(std::isfinite(cr.C_emp));
  CHECK(cr.C_emp > 0.0);
  CHECK(cr.cover.size() >= 4);
  CHECK(code_of([&] { interior_estimate(sys, u, YoungFunction::t_log(), balls); }) == Errc::not_certified);
}

TEST_CASE("coefficient oscillation") {
  const Grid g(2, 64);
  const EllipticSystem flat = EllipticSystem::laplacian(g);
  for (const auto& [R, gamma] : flat.coeff_vmo()) CHECK(gamma == 0.0);
  const EllipticSystem wavy = EllipticSystem::laplacian(g, 0.1, 0.25);
  CHECK(wavy.coeff_gamma(0.05) > 0.0);
  CHECK(wavy.coeff_gamma(0.05) <= wavy.coeff_gamma(0.2) + 1e-15);
}

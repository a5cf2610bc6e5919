#include "orlicz/quadrature.hpp"

#include "orlicz/error.hpp"

#include <cmath>
#include <numbers>

namespace orlicz {

GaussRule gauss_legendre(int order) {
  if (order < 1) throw Error(Errc::invalid_argument, "Gauss-Legendre order must be positive");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (order == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = order == 1 ? 2.0 : 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, int order, int panels) {
  const GaussRule rule = gauss_legendre(order);
  const double width = (b - a) / panels;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(order) * panels);
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    for (int i = 0; i < order; ++i) {
      terms.push_back(0.5 * width * rule.weights[i] * f(mid + 0.5 * width * rule.nodes[i]));
    }
  }
  return pairwise_sum(terms);
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t block = 64;
  if (values.size() <= block) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

SphereRule sphere_rule(int dim, int order) {
  SphereRule rule;
  rule.dim = dim;
  if (dim == 1) {
    rule.nodes = {Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(1, 0, 0)};
    rule.weights = {1.0, 1.0};
  } else if (dim == 2) {
    if (order < 3) throw Error(Errc::invalid_argument, "circle rule needs at least 3 nodes");
    const double w = 2.0 * std::numbers::pi / order;
    for (int i = 0; i < order; ++i) {
      const double th = w * i;
      rule.nodes.emplace_back(std::cos(th), std::sin(th), 0.0);
      rule.weights.push_back(w);
    }
  } else if (dim == 3) {
    const int polar = std::max(2, order / 2);
    const GaussRule g = gauss_legendre(polar);
    const double wphi = 2.0 * std::numbers::pi / order;
    for (int i = 0; i < polar; ++i) {
      const double ct = g.nodes[i];
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int j = 0; j < order; ++j) {
        const double ph = wphi * j;
        rule.nodes.emplace_back(st * std::cos(ph), st * std::sin(ph), ct);
        rule.weights.push_back(g.weights[i] * wphi);
      }
    }
  } else {
    throw Error(Errc::invalid_argument, "sphere rule supports dim 1..3");
  }
  return rule;
}

std::vector<Eigen::Vector3d> sphere_directions(int dim, int count) {
  std::vector<Eigen::Vector3d> out;
  if (dim == 1) return {Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(1, 0, 0)};
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * std::numbers::pi * i / count;
      out.emplace_back(std::cos(th), std::sin(th), 0.0);
    }
    return out;
  }
  if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      out.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    return out;
  }
  throw Error(Errc::invalid_argument, "sphere directions support dim 1..3");
}

double sphere_area(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw Error(Errc::invalid_argument, "sphere area supports dim 1..3");
  }
}

}  // namespace orlicz

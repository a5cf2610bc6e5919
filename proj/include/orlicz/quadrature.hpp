#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace orlicz {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int order);

/// Composite Gauss-Legendre over [a, b] split into equal panels.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int order = 8, int panels = 1);

/// Deterministic pairwise (tree) summation; the result does not depend on how
/// callers chunk the work.
double pairwise_sum(std::span<const double> values);

inline double pairwise_sum(const Eigen::ArrayXd& values) {
  return pairwise_sum(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

/// Quadrature on the unit sphere S^{dim-1} embedded in R^3 (unused
/// coordinates are zero).
///   dim 1: the two points {-1, +1}, weight 1 each (exact).
///   dim 2: trapezoid rule with `order` equispaced angles.
///   dim 3: Gauss-Legendre in cos(polar) with order/2 nodes times trapezoid
///          in azimuth with `order` nodes.
struct SphereRule {
  int dim = 2;
  std::vector<Eigen::Vector3d> nodes;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f) const {
    std::vector<double> terms(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) terms[i] = weights[i] * f(nodes[i]);
    return pairwise_sum(terms);
  }
};

SphereRule sphere_rule(int dim, int order);

/// Roughly uniform unit directions: equispaced angles (dim 2), a Fibonacci
/// lattice (dim 3), or {-1, +1} (dim 1).
std::vector<Eigen::Vector3d> sphere_directions(int dim, int count);

/// Surface measure of S^{dim-1}.
double sphere_area(int dim);

}  // namespace orlicz

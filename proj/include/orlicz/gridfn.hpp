#pragma once

#include "orlicz/grid.hpp"
#include "orlicz/young.hpp"

#include <Eigen/Dense>

#include <vector>

namespace orlicz {

/// sum_i Phi(v_i) * cell over non-negative samples; throws Errc::overflow when
/// any term is non-finite.
double modular(const Eigen::ArrayXd& abs_values, const YoungFunction& phi, double cell);
/// Orlicz modular of |f| (Euclidean magnitude for vector fields) over a region.
double modular(const GridFunction& f, const YoungFunction& phi, const Region& region = Region::whole());

/// inf { lambda > 0 : modular(v / lambda) <= 1 }.
double luxemburg_norm(const Eigen::ArrayXd& abs_values, const YoungFunction& phi, double cell);
double luxemburg_norm(const GridFunction& f, const YoungFunction& phi, const Region& region = Region::whole());

/// (sum |f|^p h^n)^(1/p) over a region.
double lp_norm(const GridFunction& f, double p, const Region& region = Region::whole());

/// Magnitudes of f at the region's points.
Eigen::ArrayXd region_values(const GridFunction& f, const Region& region);

using MultiIndex = Index3;

int order(const MultiIndex& alpha);
/// All multi-indices of exactly |alpha| = k in `dim` variables, in
/// lexicographically decreasing order.
std::vector<MultiIndex> multi_indices(int dim, int k);

/// Per-point validity of the centred stencil for D^alpha: always true on a
/// torus; on a rectangle false within the stencil reach of the boundary.
Eigen::Array<bool, Eigen::Dynamic, 1> stencil_mask(const Grid& grid, const MultiIndex& alpha);

/// Throws Errc::stencil_exceeds_domain when some region point lies outside the
/// stencil mask.
void require_stencil(const Grid& grid, const MultiIndex& alpha, const Region& region);

/// Composition of centred second-order differences, per-axis order <= 4.
/// Values outside the stencil mask are set to 0.
GridFunction finite_difference(const GridFunction& u, const MultiIndex& alpha);

/// sum over |alpha| <= order of ||D^alpha u||_Phi on the region.
double sobolev_orlicz_norm(const GridFunction& u, const YoungFunction& phi, int order,
                           const Region& region = Region::whole());

struct JensenReport {
  double lhs = 0.0;  ///< Phi(average |f|)
  double rhs = 0.0;  ///< average Phi(|f|)
  double slack() const { return rhs - lhs; }
};

JensenReport jensen_check(const GridFunction& f, const YoungFunction& phi, const Region& region = Region::whole());

}  // namespace orlicz

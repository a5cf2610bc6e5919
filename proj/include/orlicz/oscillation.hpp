#pragma once

#include "orlicz/grid.hpp"
#include "orlicz/young.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace orlicz {

/// Radii h, 2h, ..., (n/2) h.
std::vector<double> default_radii(const Grid& grid);

/// Discrete balls: grid points within Euclidean distance r of a grid centre.
/// The singleton ball (r < h) is always part of the family.
struct MaximalReport {
  GridFunction Mf;
  std::vector<double> radii_used;
  double weak11_constant = 0.0;  ///< sup_t t |{Mf > t}| / ||f||_1
  double strong_ratio = 0.0;     ///< ||Mf||_2 / ||f||_2
};

/// Mf(x) = max over the radii of the average of |f| over the discrete ball.
/// On a rectangle the average runs over the part of the ball inside the domain.
MaximalReport maximal(const GridFunction& f, std::vector<double> radii = {});

struct MaximalBounds {
  double weak11 = 0.0;
  double strong_p = 0.0;  ///< ||Mf||_p / ||f||_p
  double weak_orlicz = 0.0;  ///< sup_a Phi(a) |{Mf > a}| / modular(f)
  std::optional<double> strong_orlicz;  ///< ||Mf||_Phi / ||f||_Phi
};

/// Empirical constants of the weak (1,1), strong (p,p), weak (Phi,Phi) and
/// strong (Phi,Phi) maximal inequalities. The strong Orlicz ratio needs a
/// nabla_2 certificate: with `require_strong` it throws Errc::not_certified,
/// otherwise it is left empty.
MaximalBounds maximal_bounds_check(const GridFunction& f, const YoungFunction& phi, double p,
                                   std::vector<double> radii = {}, bool require_strong = false);

struct JensenMaximalReport {
  Eigen::ArrayXd slack;  ///< M(Phi(|f|)) - Phi(Mf) per point
  int violations = 0;
  double min_slack = 0.0;
};

JensenMaximalReport jensen_maximal_check(const GridFunction& f, const YoungFunction& phi,
                                         std::vector<double> radii = {});

struct OscillationOptions {
  std::vector<double> radii;  ///< empty: default_radii
  int center_stride = 1;      ///< use every k-th centre along each axis
};

struct OscillationReport {
  std::vector<double> radii;
  std::vector<double> sup_by_radius;  ///< sup of the mean oscillation at each radius
  double bmo_seminorm = 0.0;
  std::vector<std::pair<double, double>> vmo_modulus;  ///< (R, gamma(R))
  std::vector<std::pair<double, double>> jn_ratios;    ///< (p, ratio)
};

/// Mean oscillation sup per radius over all admissible centres (balls inside
/// the domain on a rectangle).
OscillationReport oscillation(const GridFunction& a, const OscillationOptions& opt = {});

double bmo_seminorm(const GridFunction& a, const OscillationOptions& opt = {});

/// gamma(R) = sup over radii r <= R of the mean oscillation.
std::vector<std::pair<double, double>> vmo_modulus(const GridFunction& a, const std::vector<double>& R_grid,
                                                   const OscillationOptions& opt = {});

/// sup over balls of (avg |a - a_B|^p)^(1/p) divided by the same sup at p = 1.
/// Zeros for constant a.
std::vector<std::pair<double, double>> john_nirenberg_check(const GridFunction& a, const std::vector<double>& p_list,
                                                            const OscillationOptions& opt = {});

}  // namespace orlicz

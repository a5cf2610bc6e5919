#pragma once

#include "orlicz/fft.hpp"
#include "orlicz/generators.hpp"
#include "orlicz/grid.hpp"
#include "orlicz/young.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace orlicz {

/// One separable piece c(x) g(omega) of a variable kernel. An empty
/// coefficient means c = 1.
struct KernelTerm {
  std::function<double(const Eigen::Vector3d&)> coefficient;
  std::function<double(const Eigen::Vector3d&)> sphere;
};

/// Variable Calderon-Zygmund kernel k(x; xi) = |xi|^-n h(x; xi/|xi|) with
/// h(x; omega) = sum_j c_j(x) g_j(omega).
class VCZKernel {
 public:
  VCZKernel(std::string name, int dim, std::vector<KernelTerm> terms, int smoothness_order = 2);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int smoothness_order() const { return smoothness_order_; }
  const std::vector<KernelTerm>& terms() const { return terms_; }
  bool frozen() const;

  double sphere_part(const Eigen::Vector3d& x, const Eigen::Vector3d& omega) const;
  double operator()(const Eigen::Vector3d& x, const Eigen::Vector3d& xi) const;
  VCZKernel frozen_at(const Eigen::Vector3d& x0) const;

  /// 1/(pi xi) on the line.
  static VCZKernel hilbert();
  /// omega_j / (2 pi |xi|^2) in the plane, Gamma(2)/pi^2 omega_j/|xi|^3 in space.
  static VCZKernel riesz(int dim, int j);
  /// cos(2 theta) / |xi|^2.
  static VCZKernel cos2theta();
  /// (1 + eps sin(2 pi x1)) cos(2 theta) / |xi|^2.
  static VCZKernel variable_cos2theta(double eps = 0.5);
  /// Catalog lookup: "hilbert", "riesz_j" (params dim, j), "cos2theta",
  /// "variable_cos2theta" (param eps).
  static VCZKernel by_name(const std::string& name, const Params& params = {});
  static std::vector<std::string> catalog();

 private:
  std::string name_;
  int dim_;
  std::vector<KernelTerm> terms_;
  int smoothness_order_;
};

struct KernelValidity {
  std::vector<Eigen::Vector3d> base_points;
  std::vector<double> cancellation;  ///< |int h| / int |h| per base point
  double max_cancellation = 0.0;
  std::array<double, 3> derivative_bounds{};  ///< sup |D^beta h| for |beta| = 0, 1, 2
  double hormander_constant = 0.0;
  int hormander_samples = 0;
};

/// Checks cancellation, bounded sphere derivatives and the Hormander
/// smoothness bound. Throws Errc::cancellation_violated or
/// Errc::unbounded_derivative.
KernelValidity validate_kernel(const VCZKernel& k, const std::vector<Eigen::Vector3d>& base_points,
                               int sphere_order = 512, int hormander_samples = 4000, std::uint64_t seed = 1);

/// Principal-value operator on a torus grid.
///
/// The kernel is periodised by summing its images in cube shells; the centre
/// cell is excluded. Each separable term j contributes
///   c_j(x) [ sum_{y != x} T_j(x - y) f(y) h^n + delta_j f(x) ],
/// where delta_j is the lattice correction of the centre cell (zero for
/// kernels with the symmetries of the cube).
class PvOperator {
 public:
  PvOperator(VCZKernel kernel, Grid grid);

  const VCZKernel& kernel() const { return kernel_; }
  const Grid& grid() const { return grid_; }
  int terms() const { return static_cast<int>(tables_.size()); }
  /// T_j indexed by the wrapped offset's flat index.
  const std::vector<double>& table(int j) const { return tables_[j]; }
  double lattice_correction(int j) const { return corrections_[j]; }
  Eigen::ArrayXd coefficient(int j) const;

  GridFunction apply(const GridFunction& f) const;
  /// K(a f) - a K(f).
  GridFunction commutator(const GridFunction& a, const GridFunction& f) const;

 private:
  Eigen::ArrayXd apply_scalar(const Eigen::ArrayXd& f) const;

  VCZKernel kernel_;
  Grid grid_;
  std::vector<std::vector<double>> tables_;
  std::vector<cvec> spectra_;
  std::vector<double> corrections_;
  std::vector<Eigen::ArrayXd> coefficients_;
};

GridFunction apply_pv(const VCZKernel& k, const GridFunction& f);
GridFunction apply_commutator(const VCZKernel& k, const GridFunction& a, const GridFunction& f);

/// Periodised table of a homogeneous kernel |xi|^-n g(xi/|xi|) on a torus
/// grid (entry 0 holds only the images of the origin).
std::vector<double> periodized_table(const std::function<double(const Eigen::Vector3d&)>& g, const Grid& grid);

/// delta = kappa - lambda for the centre cell of the unit lattice.
double lattice_correction(const std::function<double(const Eigen::Vector3d&)>& g, int dim);

struct TruncationPair {
  GridFunction f_low;
  GridFunction f_high;
  double threshold = 0.0;
};

/// f_low = f where |f| <= t / C (or t / (C a_norm)), f_high = f elsewhere.
TruncationPair truncate(const GridFunction& f, double t, double C, std::optional<double> a_norm = std::nullopt);

struct TestFunction {
  std::string id;
  GridFunction f;
};

/// Fixed seeded family of at least 30 functions: indicators, bumps,
/// band-limited noise at amplitudes 0.1, 1, 10 and axis plane waves.
std::vector<TestFunction> test_family(const Grid& grid, std::uint64_t seed = 1);

struct OperatorNormReport {
  std::string family_id;
  std::string kernel;
  std::string phi;
  int n = 0;
  bool commutator = false;
  std::optional<double> a_bmo;
  std::vector<std::string> ids;
  std::vector<double> ratios;             ///< ||Tf||_Phi / ||f||_Phi
  std::vector<double> normalized_ratios;  ///< ratios / ||a||_* for commutators with ||a||_* > 0
  double sup_ratio = 0.0;
  std::string sup_id;
  std::vector<double> modular_constants;  ///< per function: least C with int Phi(|Tf|) <= int Phi(C|f|)
  double modular_constant = 0.0;          ///< family-wide, rounded up to the 1.01^k grid
  std::vector<std::pair<double, double>> weak_constants;  ///< (p, kappa_p)
  std::optional<double> theoretical_constant;
};

/// Empirical L^Phi bounds for K (or for C[a, .] when `a` is given) over a
/// family. Requires Phi in Delta_2 and nabla_2 (Errc::not_certified).
OperatorNormReport empirical_orlicz_bound(const PvOperator& op, const YoungFunction& phi,
                                          const std::vector<TestFunction>& family,
                                          const GridFunction* a = nullptr, const std::string& family_id = "default",
                                          std::vector<double> weak_p = {1.5, 2.0, 3.0});

/// sup_t t^p |{|g| > t}| / ||f||_p^p.
double weak_type_ratio(const GridFunction& g, const GridFunction& f, double p);

}  // namespace orlicz

#pragma once

#include "orlicz/czop.hpp"
#include "orlicz/grid.hpp"
#include "orlicz/gridfn.hpp"
#include "orlicz/young.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace orlicz {

/// A_alpha as an m x m matrix field; entry (j, k) is component j * m + k.
struct CoefficientField {
  MultiIndex alpha{};
  GridFunction A;
};

/// sum_{|alpha| = 2b} A_alpha(x) D^alpha u = f with m unknowns.
class EllipticSystem {
 public:
  EllipticSystem(Grid grid, int m, int b, std::vector<CoefficientField> coefficients, int sphere_samples = 720);

  /// a(x) Laplacian with a = 1 + eps sin(2 pi x1 / lambda).
  static EllipticSystem laplacian(const Grid& grid, double eps = 0.0, double lambda = 1.0);
  /// a(x) sum_ij A_ij D_ij with a constant symmetric A.
  static EllipticSystem scalar_second_order(const Grid& grid, const Eigen::Matrix3d& A, double eps = 0.0,
                                            double lambda = 1.0);
  /// a(x) Laplacian^b.
  static EllipticSystem polyharmonic(const Grid& grid, int b, double eps = 0.0, double lambda = 1.0);
  /// diag(sum A1_ij D_ij, sum A2_ij D_ij), m = 2.
  static EllipticSystem decoupled(const Grid& grid, const Eigen::Matrix3d& A1, const Eigen::Matrix3d& A2);
  /// Two Laplacians coupled through the off-diagonal entry c Laplacian.
  static EllipticSystem coupled(const Grid& grid, double c);
  /// "laplacian", "anisotropic" (a11, a22, a33), "biharmonic", "decoupled", "coupled" (c),
  /// all with optional eps and lambda.
  static EllipticSystem by_name(const std::string& family, const Grid& grid, const Params& params = {});
  static std::vector<std::string> catalog();

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  int m() const { return m_; }
  int b() const { return b_; }
  const std::vector<CoefficientField>& coefficients() const { return coefficients_; }
  double delta() const { return delta_; }
  double coeff_sup() const { return coeff_sup_; }
  /// (R, max over entries of gamma(R)).
  const std::vector<std::pair<double, double>>& coeff_vmo() const { return coeff_vmo_; }
  /// gamma of the coefficients at the smallest sampled scale >= r.
  double coeff_gamma(double r) const;

  /// l_jk(x, zeta) = sum_alpha a^alpha_jk(x) zeta^alpha at grid point i.
  Eigen::MatrixXd symbol(Eigen::Index i, const Eigen::Vector3d& zeta) const;

 private:
  Grid grid_;
  int m_;
  int b_;
  std::vector<CoefficientField> coefficients_;
  double delta_ = 0.0;
  double coeff_sup_ = 0.0;
  std::vector<std::pair<double, double>> coeff_vmo_;
};

/// min over grid points and sampled unit zeta of det l(x, zeta); throws
/// Errc::not_elliptic when it is not positive.
double ellipticity_constant(const EllipticSystem& sys, int sphere_samples = 720);

class FrozenOperator {
 public:
  FrozenOperator(int dim, int m, int b, Eigen::Vector3d x0, std::vector<std::pair<MultiIndex, Eigen::MatrixXd>> A);

  int dim() const { return dim_; }
  int m() const { return m_; }
  int b() const { return b_; }
  const Eigen::Vector3d& base_point() const { return x0_; }
  const std::vector<std::pair<MultiIndex, Eigen::MatrixXd>>& matrices() const { return A_; }

  Eigen::MatrixXd symbol(const Eigen::Vector3d& zeta) const;
  double scalar_symbol(const Eigen::Vector3d& zeta) const;
  /// L_jk with sum_k l_ik L_jk = delta_ij det l.
  Eigen::MatrixXd cofactors(const Eigen::Vector3d& zeta) const;
  /// max over random zeta of |l L^T - det I| / (|det| + |l| |L|).
  double cofactor_identity_error(int samples = 100, std::uint64_t seed = 1) const;

 private:
  int dim_;
  int m_;
  int b_;
  Eigen::Vector3d x0_;
  std::vector<std::pair<MultiIndex, Eigen::MatrixXd>> A_;
};

/// Freezes the coefficients at grid point i; checks the symbol and the
/// cofactor identity.
FrozenOperator freeze(const EllipticSystem& sys, Eigen::Index i);

/// sum_k c x^beta Q^p (ln Q)^q with Q = x^T B x.
struct GammaTerm {
  MultiIndex beta{};
  double p = 0.0;
  int q = 0;
  double c = 0.0;
};

class GammaExpression {
 public:
  GammaExpression() = default;
  GammaExpression(int dim, Eigen::Matrix3d B, std::vector<GammaTerm> terms);

  double operator()(const Eigen::Vector3d& x) const;
  GammaExpression derivative(int axis) const;
  GammaExpression derivative(const MultiIndex& alpha) const;
  const std::vector<GammaTerm>& terms() const { return terms_; }

 private:
  int dim_ = 0;
  Eigen::Matrix3d B_ = Eigen::Matrix3d::Identity();
  std::vector<GammaTerm> terms_;
};

enum class KernelFamily { scalar_second_order, polyharmonic, decoupled };

std::string to_string(KernelFamily f);

struct DerivativeKernel {
  MultiIndex alpha{};
  int component = 0;
  VCZKernel kernel;
  double sphere_term = 0.0;  ///< int_S D^gamma Gamma nu_s, alpha = gamma + e_s
};

struct FundamentalKernel {
  KernelFamily family = KernelFamily::scalar_second_order;
  int dim = 0;
  int m = 1;
  int b = 1;
  Eigen::Vector3d base_point = Eigen::Vector3d::Zero();
  std::vector<GammaExpression> gamma;  ///< diagonal entries Gamma_jj
  std::vector<DerivativeKernel> derivative_kernels;

  /// Homogeneity degree of the entries of Gamma, 2b - n.
  int degree() const { return 2 * b - dim; }
  Eigen::MatrixXd operator()(const Eigen::Vector3d& x) const;
  const DerivativeKernel& derivative(const MultiIndex& alpha, int component = 0) const;
};

/// Closed-form fundamental solution of a frozen operator. Throws
/// Errc::unsupported_family for coupled systems or unrecognised symbols.
FundamentalKernel fundamental_kernel(const FrozenOperator& frozen);

/// sum_alpha A_alpha D^alpha u by centred differences (zero where the stencil
/// leaves a rectangle).
GridFunction apply_operator(const EllipticSystem& sys, const GridFunction& u);

struct ConvolutionCheck {
  double rel_l2 = 0.0;  ///< ||Gamma * (L phi) - phi||_2 / ||phi||_2
  int n = 0;
};

/// Gamma * (L phi) against phi for a compact bump phi of the given radius at
/// the cube centre, by zero-padded FFT on a rectangle grid (n = 3 only).
ConvolutionCheck convolution_check(const FundamentalKernel& gamma, const FrozenOperator& frozen, int n = 64,
                                   double bump_radius = 0.35);

struct RepresentationResidual {
  double l2 = 0.0;
  double orlicz = 0.0;
  double lhs_l2 = 0.0;
  double rel_l2() const { return lhs_l2 > 0.0 ? l2 / lhs_l2 : l2; }
};

/// D^alpha v against K_alpha(Lv) - sum_beta C[A_beta, D^beta v] + c_alpha Lv on
/// a torus. Needs A_beta(x) = a(x) A_beta(x0) for a scalar field a.
RepresentationResidual representation_residual(const EllipticSystem& sys, const GridFunction& v,
                                               const MultiIndex& alpha,
                                               const YoungFunction& phi = YoungFunction::power(2.0));

/// theta' = theta (3 - theta) / 2.
double outer_theta(double theta);

/// 1 on B(center, theta r), 0 outside B(center, theta' r), a radial
/// smoothstep of class C^smoothness in between. Throws Errc::annulus_too_thin
/// when (theta' - theta) r < 3h.
GridFunction cutoff(const Grid& grid, const Eigen::Vector3d& center, double r, double theta, int smoothness = 2);

/// sup |D^s phi| [theta (1 - theta) r]^s for s = 0..smax, over the points
/// where the stencils fit.
std::vector<double> cutoff_constants(const GridFunction& phi, double r, double theta, int smax);

/// sum over |beta| = s of ||D^beta u||_Phi on a region.
double derivative_seminorm(const GridFunction& u, const YoungFunction& phi, int s, const Region& region);

struct InterpolationRow {
  int s = 0;
  double mu = 0.0;
  double lhs = 0.0;        ///< ||D^s u||
  double top = 0.0;        ///< ||D^2b u||
  double low = 0.0;        ///< ||u||
  double constant = 0.0;   ///< least C(s) for this mu
};

struct InterpolationReport {
  std::vector<InterpolationRow> rows;
  std::vector<std::pair<int, double>> constants;  ///< (s, max over mu of C(s))
};

/// ||D^s u|| <= mu ||D^2b u|| + C(s) mu^(-s/(2b-s)) ||u|| on B(center, theta r)
/// for 1 <= s <= 2b - 1.
InterpolationReport interpolation_check(const GridFunction& u, const YoungFunction& phi, int b,
                                        const Eigen::Vector3d& center, double r, double theta,
                                        const std::vector<double>& mu_list);

struct EstimateReport {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double r = 0.0;
  double lhs = 0.0;    ///< ||D^2b u||_Phi(B_{r/2})
  double rhs_f = 0.0;  ///< ||f||_Phi(B_r)
  double rhs_u = 0.0;  ///< r^-2b ||u||_Phi(B_r)
  double C_emp = 0.0;
  bool vacuous = false;
  std::vector<double> theta_seminorms;  ///< Theta_0..Theta_2b
  std::vector<std::pair<int, double>> interpolation_constants;
  double gamma_coeff = 0.0;
};

/// Per-ball Caccioppoli-type constants for f = L u. Requires Phi in Delta_2
/// and nabla_2.
std::vector<EstimateReport> interior_estimate(const EllipticSystem& sys, const GridFunction& u,
                                              const YoungFunction& phi, const std::vector<Ball>& balls,
                                              const std::vector<double>& thetas = {0.25, 0.5, 0.75});

struct CoveringReport {
  std::vector<Ball> cover;
  double lhs = 0.0;    ///< Sobolev-Orlicz norm of order 2b on the inner box
  double rhs_f = 0.0;  ///< ||f|| on the outer box
  double rhs_u = 0.0;  ///< ||u|| on the outer box
  double C_emp = 0.0;
  double max_ball_constant = 0.0;
};

/// Covers the box [lo, hi] by balls of radius r/2 and compares the order-2b
/// Sobolev-Orlicz norm there with the data on the box grown by r.
CoveringReport covering_estimate(const EllipticSystem& sys, const GridFunction& u, const YoungFunction& phi,
                                 const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, double r);

struct LeibnizCheck {
  double max_abs = 0.0;  ///< max |L(phi u) - sum of Leibniz terms| on the interior
  double scale = 0.0;    ///< max |L(phi u)|
};

/// L(phi u) directly against sum_alpha A_alpha sum_{beta <= alpha} binom(alpha, beta) D^beta phi D^(alpha - beta) u.
LeibnizCheck leibniz_check(const EllipticSystem& sys, const GridFunction& phi, const GridFunction& u);

}  // namespace orlicz

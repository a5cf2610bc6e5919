#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace orlicz {

/// Window [t_min, t_max] on which every "for all t > 0" growth condition is
/// certified, sampled log-uniformly.
struct ScanRange {
  double t_min = 1e-6;
  double t_max = 1e6;
  int points_per_decade = 200;

  std::vector<double> grid() const;
  /// `count` log-spaced points spanning the window.
  std::vector<double> sample(int count) const;
};

/// Convex, strictly increasing growth function with Phi(0) = 0.
///
/// The evaluator may be any callable; the density (right derivative) is
/// optional and replaced by centred differences in log t when absent.
class YoungFunction {
 public:
  using Map = std::function<double(double)>;

  YoungFunction(std::string label, Map value, std::optional<Map> density = std::nullopt,
                ScanRange scan = {});

  double operator()(double t) const { return value_(t); }
  double density(double t) const;
  bool has_density() const { return density_.has_value(); }
  const std::string& label() const { return label_; }
  const ScanRange& scan() const { return scan_; }

  YoungFunction with_scan(ScanRange scan) const;

  /// scale * t^p.
  static YoungFunction power(double p, double scale = 1.0);
  /// e^t - 1, scanned on [1, 300] by default (see README: the condition is
  /// only meaningful away from t = 0, where e^t - 1 behaves like t).
  static YoungFunction exp_minus_one();
  /// t ln(1 + t).
  static YoungFunction t_log();
  /// t^p ln(1 + t).
  static YoungFunction power_log(double p);

 private:
  std::string label_;
  Map value_;
  std::optional<Map> density_;
  ScanRange scan_;
};

/// Checks Phi(0) = 0, strict monotonicity, convexity (relative 1e-10),
/// monotonicity of Phi(t)/t and density consistency on the scan grid.
/// Throws Errc::invalid_young.
void validate(const YoungFunction& phi);

/// Doubling constant mu with Phi(2t) <= mu Phi(t), or nullopt when the ratio
/// keeps growing across the top two decades of the scan.
std::optional<double> certify_delta2(const YoungFunction& phi);

/// Smallest l with Phi(l t) >= 2 l Phi(t) on the scan grid, or nullopt when
/// none exists up to 2^20 or the requirement keeps growing toward an end of
/// the scan window.
std::optional<double> certify_nabla2(const YoungFunction& phi);

struct Indices {
  double lower = 0.0;  ///< inf t phi(t) / Phi(t)
  double upper = 0.0;  ///< sup t phi(t) / Phi(t); +inf when divergent
};

Indices simonenko_indices(const YoungFunction& phi);

/// sup over the scan grid of Phi(lambda t) / Phi(t), lambda > 1.
/// Requires the doubling condition; throws Errc::not_certified otherwise.
double dilation_constant(const YoungFunction& phi, double lambda);

struct HardySample {
  double t = 0.0;
  double lower_ratio = 0.0;  ///< t^r / Phi(t) * int_0^t dPhi(s) / s^r
  double upper_ratio = 0.0;  ///< t^p / Phi(t) * int_t^inf dPhi(s) / s^p
};

struct HardyConstants {
  double r = 0.0;
  double C_r = 0.0;
  double p = 0.0;
  double C_p = 0.0;
  std::vector<HardySample> samples;
};

struct GrowthCertificate {
  std::string label;
  ScanRange scan;
  std::optional<double> mu;   ///< doubling constant
  std::optional<double> ell;  ///< nabla_2 constant
  double index_lower = 0.0;
  double index_upper = 0.0;
  std::optional<double> P;  ///< Phi(t)/t^P non-increasing
  double b_const = 1.0;
  std::optional<double> R;  ///< Phi(t)/t^R non-decreasing
  double a_const = 1.0;
  std::optional<double> alpha;    ///< 1 / R
  std::optional<double> d_const;  ///< a_const^(1/R)
  std::vector<std::pair<double, double>> mu_lambda;
  std::optional<HardyConstants> hardy;

  bool doubling() const { return mu.has_value(); }
  bool nabla2() const { return ell.has_value(); }
  bool both() const { return doubling() && nabla2(); }
};

/// Runs every growth check and assembles the certificate. Hardy constants are
/// attached when both conditions hold.
GrowthCertificate certify(const YoungFunction& phi);

/// int_0^t dPhi(s) / s^r and int_t^inf dPhi(s) / s^p.
double hardy_lower_integral(const YoungFunction& phi, double r, double t);
double hardy_upper_integral(const YoungFunction& phi, double p, double t);

/// Closed-form constants C_r, C_p for r = (1+R)/2, p = 2P, verified at 20
/// log-spaced points. Throws Errc::not_certified or
/// Errc::hardy_verification_failed.
HardyConstants hardy_constants(const YoungFunction& phi, const GrowthCertificate& cert);

/// Checks the lower (resp. upper) Hardy inequality with constant C at
/// exponent r (resp. p) on 20 log-spaced points; returns the worst ratio.
double hardy_lower_worst(const YoungFunction& phi, double r);
double hardy_upper_worst(const YoungFunction& phi, double p);

struct LegendreValue {
  double value = 0.0;
  double argmax = 0.0;
};

/// sup_{x >= 0} { x y - Phi(x) } by golden-section search in log x over the
/// scan window. Throws Errc::maximizer_at_boundary when the maximiser sits at
/// an end of the window.
LegendreValue legendre(const YoungFunction& phi, double y);

struct ComplementaryPair {
  YoungFunction phi;
  YoungFunction psi;
  std::vector<double> y_grid;
  std::vector<double> psi_values;
  std::vector<double> legendre_grid;  ///< maximisers x*(y)
};

ComplementaryPair complementary(const YoungFunction& phi, std::span<const double> y_grid);

/// min over the product grid of (Phi(x) + Psi(y) - x y) / (Phi(x) + Psi(y)).
double young_inequality_slack(const ComplementaryPair& pair, std::span<const double> x_grid,
                              std::span<const double> y_grid);

std::string certificate_csv_header();
std::string to_csv_row(const GrowthCertificate& cert);

}  // namespace orlicz

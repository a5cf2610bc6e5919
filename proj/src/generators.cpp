#include "orlicz/generators.hpp"

#include "orlicz/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace orlicz {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

const std::vector<GeneratorInfo>& generator_catalog() {
  static const std::vector<GeneratorInfo> catalog = {
      {"constant", "value=1", "constant field"},
      {"sin", "k=1 axis=0 amplitude=1", "amplitude * sin(2 pi k x_axis)"},
      {"cos", "k=1 axis=0 amplitude=1", "amplitude * cos(2 pi k x_axis)"},
      {"sin_product", "k=1 amplitude=1", "product of sin(2 pi k x_d) over all axes"},
      {"indicator", "lo=0 hi=0.5 value=1 axes=dim", "value on the box [lo, hi) in the first `axes` coordinates"},
      {"gaussian_bump", "center=0.5 sigma=0.1 amplitude=1", "periodic Gaussian bump"},
      {"compact_bump", "center=0.5 radius=0.25 amplitude=1", "smooth bump exp(1 - 1/(1 - s^2)) supported in a ball"},
      {"random_smooth", "seed kmax=4 amplitude=1", "random trigonometric polynomial, rms = amplitude"},
      {"band_limited", "seed kmax=2 amplitude=1", "random trigonometric polynomial with |k|_inf <= kmax"},
      {"log_singular", "center=0.5", "ln|x - x0| sampled away from x0"},
      {"harmonic_quadratic", "center=0.5", "(x1 - c)^2 - (x2 - c)^2"},
      {"monomial", "e1=0 e2=0 e3=0 coef=1", "coef * x1^e1 x2^e2 x3^e3"},
      {"ramp", "axis=0 slope=1", "slope * x_axis"},
  };
  return catalog;
}

namespace {

double param(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

Eigen::Vector3d centre(const Params& p) {
  const double c = param(p, "center", 0.5);
  return Eigen::Vector3d(param(p, "center1", c), param(p, "center2", c), param(p, "center3", c));
}

double radial(const Grid& g, const Eigen::Vector3d& c, const Eigen::Vector3d& x) {
  return g.displacement(c, x).head(g.dim()).norm();
}

GridFunction random_trig(const Grid& g, std::uint64_t seed, int kmax, double amplitude) {
  Rng rng(seed);
  struct Mode {
    Index3 k;
    double a, b;
  };
  std::vector<Mode> modes;
  const int kz = g.dim() >= 3 ? kmax : 0, ky = g.dim() >= 2 ? kmax : 0;
  for (int i = -kmax; i <= kmax; ++i) {
    for (int j = -ky; j <= ky; ++j) {
      for (int l = -kz; l <= kz; ++l) {
        if (i == 0 && j == 0 && l == 0) continue;
        const double a = rng.normal(), b = rng.normal();
        modes.push_back({{i, j, l}, a, b});
      }
    }
  }
  // e^{2 pi i k x_d / L} per axis and wavenumber.
  const int w = 2 * kmax + 1;
  std::vector<std::complex<double>> ex(static_cast<std::size_t>(3) * g.n() * w, 1.0);
  for (int d = 0; d < g.dim(); ++d) {
    for (int i = 0; i < g.n(); ++i) {
      const double x = (g.point(Index3{i, i, i})[d] - g.origin()[d]) / g.side();
      for (int k = -kmax; k <= kmax; ++k) {
        ex[(static_cast<std::size_t>(d) * g.n() + i) * w + k + kmax] = std::polar(1.0, 2.0 * std::numbers::pi * k * x);
      }
    }
  }
  auto e = [&](int d, int i, int k) { return ex[(static_cast<std::size_t>(d) * g.n() + i) * w + k + kmax]; };
  Eigen::ArrayXd v(g.size());
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    const Index3 idx = g.index(p);
    double s = 0.0;
    for (const auto& m : modes) {
      std::complex<double> z = e(0, idx[0], m.k[0]);
      if (g.dim() >= 2) z *= e(1, idx[1], m.k[1]);
      if (g.dim() >= 3) z *= e(2, idx[2], m.k[2]);
      s += m.a * z.real() + m.b * z.imag();
    }
    v[p] = s;
  }
  const double rms = std::sqrt(v.square().mean());
  if (rms > 0.0) v *= amplitude / rms;
  return GridFunction(g, v);
}

}  // namespace

GridFunction generate(const std::string& spec, const Grid& g, const Params& params) {
  std::string name = spec;
  Params p = params;
  if (const auto open = spec.find('('); open != std::string::npos) {
    const auto close = spec.find(')', open);
    if (close == std::string::npos) throw Error(Errc::unknown_generator, "malformed generator spec " + spec);
    name = spec.substr(0, open);
    try {
      p["seed"] = std::stod(spec.substr(open + 1, close - open - 1));
    } catch (const std::exception&) {
      throw Error(Errc::unknown_generator, "bad seed in " + spec);
    }
  }
  const double L = g.side();
  const double two_pi = 2.0 * std::numbers::pi;
  auto rel = [&](const Eigen::Vector3d& x) { return Eigen::Vector3d(x - g.origin()); };

  if (name == "constant") {
    const double c = param(p, "value", 1.0);
    return GridFunction::sample(g, [c](const Eigen::Vector3d&) { return c; });
  }
  if (name == "sin" || name == "cos") {
    const double k = param(p, "k", 1.0), A = param(p, "amplitude", 1.0);
    const int axis = static_cast<int>(param(p, "axis", 0));
    if (axis < 0 || axis >= g.dim()) throw Error(Errc::invalid_argument, "axis out of range");
    const bool s = name == "sin";
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) {
      const double ph = two_pi * k * rel(x)[axis] / L;
      return A * (s ? std::sin(ph) : std::cos(ph));
    });
  }
  if (name == "sin_product") {
    const double k = param(p, "k", 1.0), A = param(p, "amplitude", 1.0);
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) {
      double v = A;
      for (int d = 0; d < g.dim(); ++d) v *= std::sin(two_pi * k * rel(x)[d] / L);
      return v;
    });
  }
  if (name == "indicator") {
    const double lo = param(p, "lo", 0.0), hi = param(p, "hi", 0.5), c = param(p, "value", 1.0);
    const int axes = static_cast<int>(param(p, "axes", g.dim()));
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) {
      const Eigen::Vector3d r = rel(x) / L;
      for (int d = 0; d < std::min(axes, g.dim()); ++d) {
        if (r[d] < lo - 1e-12 || r[d] >= hi - 1e-12) return 0.0;
      }
      return c;
    });
  }
  if (name == "gaussian_bump") {
    const Eigen::Vector3d c = centre(p);
    const double s = param(p, "sigma", 0.1), A = param(p, "amplitude", 1.0);
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) {
      const double r = radial(g, c, x);
      return A * std::exp(-r * r / (2 * s * s));
    });
  }
  if (name == "compact_bump") {
    const Eigen::Vector3d c = centre(p);
    const double R = param(p, "radius", 0.25), A = param(p, "amplitude", 1.0);
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) {
      const double s = radial(g, c, x) / R;
      return s < 1.0 ? A * std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    });
  }
  if (name == "random_smooth" || name == "band_limited") {
    const auto seed = static_cast<std::uint64_t>(param(p, "seed", 1.0));
    const int kmax = static_cast<int>(param(p, "kmax", name == "random_smooth" ? 4.0 : 2.0));
    return random_trig(g, seed, kmax, param(p, "amplitude", 1.0));
  }
  if (name == "log_singular") {
    Eigen::Vector3d c = centre(p);
    if (g.periodic()) {
      for (int d = 0; d < g.dim(); ++d) c[d] += 0.5 * g.h();
    }
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) { return std::log(radial(g, c, x)); });
  }
  if (name == "harmonic_quadratic") {
    if (g.dim() < 2) throw Error(Errc::invalid_argument, "harmonic_quadratic needs dim >= 2");
    const double c = param(p, "center", 0.5);
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) {
      return (x[0] - c) * (x[0] - c) - (x[1] - c) * (x[1] - c);
    });
  }
  if (name == "monomial") {
    const double e1 = param(p, "e1", 0), e2 = param(p, "e2", 0), e3 = param(p, "e3", 0), a = param(p, "coef", 1.0);
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) {
      return a * std::pow(x[0], e1) * std::pow(x[1], e2) * std::pow(x[2], e3);
    });
  }
  if (name == "ramp") {
    const int axis = static_cast<int>(param(p, "axis", 0));
    const double s = param(p, "slope", 1.0);
    return GridFunction::sample(g, [&](const Eigen::Vector3d& x) { return s * x[axis]; });
  }
  throw Error(Errc::unknown_generator, "unknown generator '" + name + "'");
}

}  // namespace orlicz

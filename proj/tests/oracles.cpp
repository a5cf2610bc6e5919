#include "oracles.hpp"

#include "orlicz/fft.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using orlicz::Grid;
using orlicz::Index3;

std::function<std::complex<double>(double)> planar_multiplier(const std::function<double(double)>& g, int lmax) {
  const int q = 256;
  std::vector<std::complex<double>> modes(2 * lmax + 1);
  for (int l = -lmax; l <= lmax; ++l) {
    std::complex<double> s = 0.0;
    for (int k = 0; k < q; ++k) {
      const double t = 2.0 * std::numbers::pi * k / q;
      s += g(t) * std::polar(1.0, -l * t);
    }
    modes[l + lmax] = s / static_cast<double>(q);
  }
  return [modes, lmax](double phi) {
    std::complex<double> m = 0.0;
    for (int l = -lmax; l <= lmax; ++l) {
      const int a = std::abs(l);
      if (a == 0) continue;
      const std::complex<double> gamma =
          std::numbers::pi * std::pow(std::complex<double>(0.0, -1.0), a) * std::tgamma(a / 2.0) / std::tgamma((a + 2) / 2.0);
      m += modes[l + lmax] * gamma * std::polar(1.0, l * phi);
    }
    return m;
  };
}

GridFunction apply_multiplier(const GridFunction& f,
                              const std::function<std::complex<double>(const Eigen::Vector3d&)>& m) {
  const Grid& g = f.grid();
  const Eigen::ArrayXd v = f.scalar();
  orlicz::cvec data(v.data(), v.data() + v.size());
  orlicz::fft_nd(data, g.dim(), g.n());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Index3 idx = g.index(i);
    Eigen::Vector3d k = Eigen::Vector3d::Zero();
    for (int d = 0; d < g.dim(); ++d) {
      k[d] = idx[d] <= g.n() / 2 ? idx[d] : idx[d] - g.n();
      if (2 * idx[d] == g.n()) k[d] = 0.0;  // drop the unpaired Nyquist mode
    }
    data[i] *= k.norm() == 0.0 ? 0.0 : m(k);
  }
  orlicz::fft_nd(data, g.dim(), g.n(), true);
  Eigen::ArrayXd out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = data[i].real();
  return GridFunction(g, out);
}

GridFunction commutator_brute(const orlicz::PvOperator& op, const GridFunction& a, const GridFunction& f) {
  const Grid& g = op.grid();
  const double cell = g.cell_measure();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(g.size());
  for (int j = 0; j < op.terms(); ++j) {
    const std::vector<double>& T = op.table(j);
    const Eigen::ArrayXd c = op.coefficient(j);
    for (Eigen::Index x = 0; x < g.size(); ++x) {
      const Index3 ix = g.index(x);
      double s = 0.0;
      for (Eigen::Index y = 0; y < g.size(); ++y) {
        if (y == x) continue;
        const Index3 iy = g.index(y);
        const Eigen::Index d = g.wrap({ix[0] - iy[0], ix[1] - iy[1], ix[2] - iy[2]});
        s += T[d] * (a(y) - a(x)) * f(y);
      }
      out[x] += c[x] * s * cell;
    }
  }
  return GridFunction(g, out);
}

Eigen::ArrayXd maximal_brute(const GridFunction& f, const std::vector<double>& radii) {
  const Grid& g = f.grid();
  const Eigen::ArrayXd v = f.magnitude();
  const double h = g.h();
  Eigen::ArrayXd out = v;
  const int reach = g.n();
  for (Eigen::Index x = 0; x < g.size(); ++x) {
    const Index3 c = g.index(x);
    for (double r : radii) {
      if (r < h * (1 - 1e-12)) continue;
      double sum = 0.0;
      int count = 0;
      const int lo = g.periodic() ? -(g.n() - 1) / 2 : -reach;
      const int hi = g.periodic() ? g.n() / 2 : reach;
      for (int i = lo; i <= hi; ++i) {
        for (int j = g.dim() >= 2 ? lo : 0; j <= (g.dim() >= 2 ? hi : 0); ++j) {
          for (int k = g.dim() >= 3 ? lo : 0; k <= (g.dim() >= 3 ? hi : 0); ++k) {
            const double d2 = static_cast<double>(i * i + j * j + k * k);
            if (d2 * h * h > r * r * (1 + 1e-12)) continue;
            const Index3 q{c[0] + i, c[1] + j, c[2] + k};
            if (g.periodic()) {
              sum += v[g.wrap(q)];
            } else if (g.inside(q)) {
              sum += v[g.flat(q)];
            } else {
              continue;
            }
            ++count;
          }
        }
      }
      out[x] = std::max(out[x], sum / count);
    }
  }
  return out;
}

double rel_l2(const GridFunction& f, const GridFunction& g) {
  return std::sqrt((f.values() - g.values()).square().sum() / g.values().square().sum());
}

}  // namespace oracle

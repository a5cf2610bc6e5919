#include "orlicz/fft.hpp"

#include "orlicz/error.hpp"

#include <unsupported/Eigen/FFT>

namespace orlicz {

void fft_nd(cvec& data, int dim, int n, bool inverse) {
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
  if (data.size() != total) throw Error(Errc::invalid_argument, "fft_nd: size mismatch");

  thread_local Eigen::FFT<double> fft;
  cvec line(n), out(n);
  std::size_t stride = 1;
  for (int axis = dim - 1; axis >= 0; --axis) {
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < total; base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        for (int i = 0; i < n; ++i) line[i] = data[base + off + i * stride];
        if (inverse) {
          fft.inv(out, line);
        } else {
          fft.fwd(out, line);
        }
        for (int i = 0; i < n; ++i) data[base + off + i * stride] = out[i];
      }
    }
    stride = block;
  }
}

std::vector<double> circular_convolve(const std::vector<double>& kernel, const std::vector<double>& f,
                                      int dim, int n) {
  cvec a(kernel.begin(), kernel.end()), b(f.begin(), f.end());
  fft_nd(a, dim, n);
  fft_nd(b, dim, n);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  fft_nd(a, dim, n, true);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
  return out;
}

}  // namespace orlicz

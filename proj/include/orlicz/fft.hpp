#pragma once

#include <complex>
#include <vector>

namespace orlicz {

using cvec = std::vector<std::complex<double>>;

/// In-place DFT of a row-major array with `dim` axes of length `n` (first
/// axis slowest). The inverse transform includes the 1/n^dim factor.
void fft_nd(cvec& data, int dim, int n, bool inverse = false);

/// Circular convolution sum_d kernel[d] f[x - d] on the same periodic layout.
std::vector<double> circular_convolve(const std::vector<double>& kernel, const std::vector<double>& f,
                                      int dim, int n);

}  // namespace orlicz

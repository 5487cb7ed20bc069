#pragma once

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace pio {

// In-place 2-D DFT of a row-major rows x cols complex buffer. The inverse is
// unnormalized (plain conjugate-kernel sum); scale by 1/(rows*cols) to invert
// fft2 exactly.
inline void fft2(std::vector<std::complex<double>>& z, int64_t rows, int64_t cols,
                 bool inverse) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<std::complex<double>> in(std::max(rows, cols)), out(std::max(rows, cols));
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t c = 0; c < cols; ++c) in[c] = z[r * cols + c];
    if (inverse)
      fft.inv(out.data(), in.data(), static_cast<int>(cols));
    else
      fft.fwd(out.data(), in.data(), static_cast<int>(cols));
    for (int64_t c = 0; c < cols; ++c) z[r * cols + c] = out[c];
  }
  for (int64_t c = 0; c < cols; ++c) {
    for (int64_t r = 0; r < rows; ++r) in[r] = z[r * cols + c];
    if (inverse)
      fft.inv(out.data(), in.data(), static_cast<int>(rows));
    else
      fft.fwd(out.data(), in.data(), static_cast<int>(rows));
    for (int64_t r = 0; r < rows; ++r) z[r * cols + c] = out[r];
  }
}

}  // namespace pio

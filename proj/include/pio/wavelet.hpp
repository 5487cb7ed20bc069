#pragma once

#include <cstdint>
#include <vector>

#include "pio/tensor.hpp"

namespace pio {

enum class WaveletFamily { dwt_db6, dtcwt_qshift };

// Multilevel wavelet coefficients of a batched field (B, H, W, C).
// DWT: details[l] = {LH, HL, HH}; coarse is the level-`levels` approximation.
// DTCWT: details[l] = 12 real arrays, 6 oriented complex subbands as
// {re, im} pairs in the order LH+, LH-, HL+, HL-, HH+, HH-; coarse is the
// interleaved lowpass tree pair (extent halves only up to level levels-1).
struct WaveletCoeffs {
  WaveletFamily family = WaveletFamily::dwt_db6;
  int levels = 0;
  std::vector<std::vector<Array>> details;
  Array coarse;
  int64_t orig_h = 0, orig_w = 0;  // pre-pad extents, inverse crops to these
};

// Flat view used by the autodiff graph: every band concatenated in a fixed
// order (details level by level, then coarse).
struct BandLayout {
  std::vector<std::vector<int64_t>> shapes;  // per flat band, (B, h, w, C)
  std::vector<int64_t> offsets;
  int64_t total = 0;
  int coarse_index = -1;
};

Array pack_coeffs(const WaveletCoeffs& c, BandLayout* layout = nullptr);
WaveletCoeffs unpack_coeffs(const Array& flat, const WaveletCoeffs& like);

// Layout of the packed coefficients of a (B, Hp, Wp, C) field (padded
// extents), computed without running a transform.
BandLayout coeff_layout(WaveletFamily family, int levels, int64_t batch, int64_t padded_h,
                        int64_t padded_w, int64_t channels);
WaveletCoeffs coeffs_from_layout(const Array& flat, const BandLayout& lay,
                                 WaveletFamily family, int levels, int64_t orig_h,
                                 int64_t orig_w);

// Orthonormal db6 transform, periodic arithmetic. Non-dyadic extents are
// symmetrically padded up to the next multiple of 2^levels and the inverse
// crops back. Transposes are exact by construction (matched loops).
class Dwt2 {
 public:
  explicit Dwt2(int levels);

  WaveletCoeffs forward(const Array& x) const;         // x: (B, H, W, C)
  Array inverse(const WaveletCoeffs& c) const;
  Array forward_t(const WaveletCoeffs& cbar, int64_t orig_h, int64_t orig_w) const;
  WaveletCoeffs inverse_t(const Array& xbar) const;

  int levels() const { return levels_; }
  static int64_t padded_extent(int64_t n, int levels);

 private:
  int levels_;
};

// 1-D db6 transform along a vector, same conventions.
struct Dwt1Coeffs {
  std::vector<std::vector<double>> details;
  std::vector<double> coarse;
  int64_t orig_n = 0;
};
Dwt1Coeffs dwt1_forward(const std::vector<double>& x, int levels);
std::vector<double> dwt1_inverse(const Dwt1Coeffs& c);

// Slim dual-tree complex wavelet transform. Level 1 uses the undecimated
// biorthogonal near-symmetric pair, deeper levels the quarter-shift
// orthonormal pair on interleaved trees. Perfect reconstruction and exact
// transposes hold by construction; orientation selectivity is a measured
// property of the filter set. 2-D only.
class Dtcwt2 {
 public:
  explicit Dtcwt2(int levels);

  WaveletCoeffs forward(const Array& x) const;
  Array inverse(const WaveletCoeffs& c) const;
  // transpose of forward (for gradients through analysis)
  Array forward_t(const WaveletCoeffs& cbar, int64_t orig_h, int64_t orig_w) const;
  // transpose of inverse (for gradients through synthesis)
  WaveletCoeffs inverse_t(const Array& xbar) const;

  int levels() const { return levels_; }
  static int64_t padded_extent(int64_t n, int levels);

 private:
  int levels_;
};

}  // namespace pio

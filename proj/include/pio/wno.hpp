#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pio/autodiff.hpp"
#include "pio/grid.hpp"
#include "pio/tensor.hpp"
#include "pio/wavelet.hpp"

namespace pio {

struct WnoConfig {
  int64_t in_channels = 1;   // raw input channels, before coordinates
  int64_t out_channels = 1;
  int64_t width = 64;        // latent channel count d_v
  int levels = 4;
  int blocks = 4;
  WaveletFamily wavelet = WaveletFamily::dtcwt_qshift;
  ad::Activation activation = ad::Activation::gelu;
  bool include_coordinates = true;
  int64_t project_hidden = 128;
};

using ParamMap = std::map<std::string, Array>;
using VarMap = std::map<std::string, ad::Var>;

// Wavelet neural operator on a fixed 2-D grid: pointwise two-layer lift,
// `blocks` kernel-integration blocks
//   v_{j+1} = act( synthesis(mix(analysis(v_j))) + v_j W_j + b_j ),
// pointwise two-layer projection. The mixing acts per location on the
// deepest-level bands (coarse plus that level's details for the dual-tree
// family, coarse only for the decimated family); all other bands pass
// through unchanged.
//
// Parameter key schema (also the serialization schema):
//   lift.w1 (c_in, d_v)   lift.b1 (d_v)   lift.w2 (d_v, d_v)   lift.b2 (d_v)
//   block<j>.r0 (d_l0, d_v, d_v)          coarse-band mixing tensor
//   block<j>.r1 .. r12 (d_l, d_v, d_v)    deepest-level details (dual-tree only)
//   block<j>.w (d_v, d_v)   block<j>.b (d_v)
//   proj.w1 (d_v, hidden)   proj.b1 (hidden)   proj.w2 (hidden, c_out)   proj.b2 (c_out)
class Wno {
 public:
  Wno(WnoConfig cfg, const Grid& grid);

  // Appends the two coordinate channels when configured.
  Array encode(const Array& raw) const;

  ParamMap init_params(uint64_t seed) const;
  int64_t param_count() const;

  // input: (B, H, W, in_channels [+2]) already encoded
  ad::Var forward(const ad::Var& input, const VarMap& params) const;
  Array forward_value(const Array& input, const ParamMap& params) const;

  const WnoConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  int64_t lifted_channels() const { return c_in_; }
  int mix_bands() const { return n_mix_; }
  int64_t mix_locs(int band) const;  // band 0 = coarse, then details

 private:
  WnoConfig cfg_;
  Grid grid_;
  int64_t c_in_ = 0;  // channels entering the lift
  int64_t hp_ = 0, wp_ = 0;
  int n_mix_ = 0;
};

}  // namespace pio

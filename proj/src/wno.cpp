#include "pio/wno.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pio {

namespace {

int64_t padded(WaveletFamily fam, int64_t n, int levels) {
  return fam == WaveletFamily::dwt_db6 ? Dwt2::padded_extent(n, levels)
                                       : Dtcwt2::padded_extent(n, levels);
}

void fill_uniform(std::mt19937_64& rng, Array& a, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  for (int64_t i = 0; i < a.size(); ++i) a[i] = d(rng);
}

}  // namespace

Wno::Wno(WnoConfig cfg, const Grid& grid) : cfg_(cfg), grid_(grid) {
  if (grid_.ndim() != 2) throw std::invalid_argument("Wno: grid must be 2-D");
  if (cfg_.in_channels < 1 || cfg_.out_channels < 1 || cfg_.width < 1 ||
      cfg_.project_hidden < 1)
    throw std::invalid_argument("Wno: channel counts must be positive");
  if (cfg_.levels < 1 || cfg_.blocks < 1)
    throw std::invalid_argument("Wno: levels and blocks must be positive");
  c_in_ = cfg_.in_channels + (cfg_.include_coordinates ? 2 : 0);
  hp_ = padded(cfg_.wavelet, grid_.dims[0], cfg_.levels);
  wp_ = padded(cfg_.wavelet, grid_.dims[1], cfg_.levels);
  if ((hp_ >> cfg_.levels) < 1 || (wp_ >> cfg_.levels) < 1)
    throw std::invalid_argument("Wno: too many levels for this grid");
  n_mix_ = cfg_.wavelet == WaveletFamily::dwt_db6 ? 1 : 13;
}

int64_t Wno::mix_locs(int band) const {
  if (band < 0 || band >= n_mix_) throw std::invalid_argument("Wno: bad mix band");
  int shift = cfg_.levels;
  if (band == 0 && cfg_.wavelet == WaveletFamily::dtcwt_qshift) shift = cfg_.levels - 1;
  return (hp_ >> shift) * (wp_ >> shift);
}

int64_t Wno::param_count() const {
  const int64_t dv = cfg_.width, hid = cfg_.project_hidden;
  int64_t n = c_in_ * dv + dv + dv * dv + dv;
  int64_t per_block = dv * dv + dv;
  for (int b = 0; b < n_mix_; ++b) per_block += mix_locs(b) * dv * dv;
  n += cfg_.blocks * per_block;
  n += dv * hid + hid + hid * cfg_.out_channels + cfg_.out_channels;
  return n;
}

Array Wno::encode(const Array& raw) const {
  if (raw.ndim() != 4 || raw.dim(1) != grid_.dims[0] || raw.dim(2) != grid_.dims[1] ||
      raw.dim(3) != cfg_.in_channels)
    throw std::invalid_argument("Wno::encode: input does not match grid and in_channels");
  if (!cfg_.include_coordinates) return raw;
  const int64_t B = raw.dim(0), H = raw.dim(1), W = raw.dim(2), C = cfg_.in_channels;
  Array out({B, H, W, C + 2});
  for (int64_t b = 0; b < B; ++b)
    for (int64_t i = 0; i < H; ++i)
      for (int64_t j = 0; j < W; ++j) {
        for (int64_t c = 0; c < C; ++c) out.at(b, i, j, c) = raw.at(b, i, j, c);
        out.at(b, i, j, C) = grid_.node(0, i);
        out.at(b, i, j, C + 1) = grid_.node(1, j);
      }
  return out;
}

ParamMap Wno::init_params(uint64_t seed) const {
  std::mt19937_64 rng(seed);
  ParamMap p;
  const int64_t dv = cfg_.width;
  auto linear = [&](const std::string& w, const std::string& b, int64_t fin, int64_t fout) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fin));
    Array wa({fin, fout}), ba({fout});
    fill_uniform(rng, wa, -s, s);
    fill_uniform(rng, ba, -s, s);
    p[w] = std::move(wa);
    p[b] = std::move(ba);
  };
  linear("lift.w1", "lift.b1", c_in_, dv);
  linear("lift.w2", "lift.b2", dv, dv);
  for (int j = 0; j < cfg_.blocks; ++j) {
    const std::string pre = "block" + std::to_string(j) + ".";
    for (int b = 0; b < n_mix_; ++b) {
      const int64_t locs = mix_locs(b);
      Array r({locs, dv, dv});
      fill_uniform(rng, r, 0.0, 1.0 / static_cast<double>(dv * locs));
      p[pre + "r" + std::to_string(b)] = std::move(r);
    }
    linear(pre + "w", pre + "b", dv, dv);
  }
  linear("proj.w1", "proj.b1", dv, cfg_.project_hidden);
  linear("proj.w2", "proj.b2", cfg_.project_hidden, cfg_.out_channels);
  int64_t total = 0;
  for (const auto& kv : p) total += kv.second.size();
  if (total != param_count()) throw std::logic_error("Wno: parameter count mismatch");
  return p;
}

ad::Var Wno::forward(const ad::Var& input, const VarMap& params) const {
  const Array& x = input.value();
  if (x.ndim() != 4 || x.dim(1) != grid_.dims[0] || x.dim(2) != grid_.dims[1] ||
      x.dim(3) != c_in_)
    throw std::invalid_argument("Wno::forward: input does not match grid and channels");
  const int64_t B = x.dim(0);
  auto P = [&](const std::string& k) -> const ad::Var& {
    auto it = params.find(k);
    if (it == params.end())
      throw std::invalid_argument("Wno::forward: missing parameter " + k);
    return it->second;
  };

  ad::Var v = ad::activate(ad::add_bias(ad::matmul(input, P("lift.w1")), P("lift.b1")),
                           cfg_.activation);
  v = ad::add_bias(ad::matmul(v, P("lift.w2")), P("lift.b2"));

  const int64_t H = grid_.dims[0], W = grid_.dims[1];
  const int lv = cfg_.levels;
  const BandLayout lay = coeff_layout(cfg_.wavelet, lv, B, hp_, wp_, cfg_.width);

  std::vector<ad::BandSeg> segs;
  auto seg_of = [&](int band) {
    const auto& s = lay.shapes[band];
    return ad::BandSeg{lay.offsets[band], s[0], s[1] * s[2], s[3]};
  };
  segs.push_back(seg_of(lay.coarse_index));
  if (cfg_.wavelet == WaveletFamily::dtcwt_qshift)
    for (int b = lay.coarse_index - 12; b < lay.coarse_index; ++b) segs.push_back(seg_of(b));

  std::function<Array(const Array&)> analysis, analysis_t, synthesis, synthesis_t;
  const WaveletFamily fam = cfg_.wavelet;
  if (fam == WaveletFamily::dwt_db6) {
    Dwt2 t(lv);
    analysis = [t](const Array& a) { return pack_coeffs(t.forward(a)); };
    analysis_t = [t, lay, fam, lv, H, W](const Array& cbar) {
      return t.forward_t(coeffs_from_layout(cbar, lay, fam, lv, H, W), H, W);
    };
    synthesis = [t, lay, fam, lv, H, W](const Array& flat) {
      return t.inverse(coeffs_from_layout(flat, lay, fam, lv, H, W));
    };
    synthesis_t = [t](const Array& xbar) { return pack_coeffs(t.inverse_t(xbar)); };
  } else {
    Dtcwt2 t(lv);
    analysis = [t](const Array& a) { return pack_coeffs(t.forward(a)); };
    analysis_t = [t, lay, fam, lv, H, W](const Array& cbar) {
      return t.forward_t(coeffs_from_layout(cbar, lay, fam, lv, H, W), H, W);
    };
    synthesis = [t, lay, fam, lv, H, W](const Array& flat) {
      return t.inverse(coeffs_from_layout(flat, lay, fam, lv, H, W));
    };
    synthesis_t = [t](const Array& xbar) { return pack_coeffs(t.inverse_t(xbar)); };
  }

  for (int j = 0; j < cfg_.blocks; ++j) {
    const std::string pre = "block" + std::to_string(j) + ".";
    ad::Var flat = ad::linear_map(v, analysis, analysis_t);
    std::vector<ad::Var> rs;
    rs.reserve(n_mix_);
    for (int b = 0; b < n_mix_; ++b) rs.push_back(P(pre + "r" + std::to_string(b)));
    ad::Var mixed = ad::band_mix(flat, rs, segs);
    ad::Var back = ad::linear_map(mixed, synthesis, synthesis_t);
    ad::Var skip = ad::add_bias(ad::matmul(v, P(pre + "w")), P(pre + "b"));
    v = ad::activate(ad::add(back, skip), cfg_.activation);
  }

  ad::Var z = ad::activate(ad::add_bias(ad::matmul(v, P("proj.w1")), P("proj.b1")),
                           cfg_.activation);
  return ad::add_bias(ad::matmul(z, P("proj.w2")), P("proj.b2"));
}

Array Wno::forward_value(const Array& input, const ParamMap& params) const {
  VarMap vp;
  for (const auto& kv : params) vp.emplace(kv.first, ad::Var::leaf(kv.second));
  return forward(ad::Var::leaf(input), vp).value();
}

}  // namespace pio

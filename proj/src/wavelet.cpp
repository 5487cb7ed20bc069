#include "pio/wavelet.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "pio/wavelet_filters.hpp"

namespace pio {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

struct AxisView {
  int64_t outer, n, inner;
};

AxisView view_of(const Array& x, int axis) {
  if (x.ndim() != 4) throw std::invalid_argument("wavelet: expected a (B,H,W,C) array");
  if (axis == 1) return {x.dim(0), x.dim(1), x.dim(2) * x.dim(3)};
  if (axis == 2) return {x.dim(0) * x.dim(1), x.dim(2), x.dim(3)};
  throw std::invalid_argument("wavelet: axis must be 1 or 2");
}

std::vector<int64_t> with_extent(const Array& x, int axis, int64_t n) {
  std::vector<int64_t> s = x.shape();
  s[axis] = n;
  return s;
}

inline int64_t wrap(int64_t i, int64_t n) {
  i %= n;
  return i < 0 ? i + n : i;
}

inline int64_t sym_index(int64_t i, int64_t n) {
  int64_t m = wrap(i, 2 * n);
  return m < n ? m : 2 * n - 1 - m;
}

inline void axpy(double a, const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// out(n) = sum_k h(k) x(n - k + delay), periodic in n. sign=-1 gives the
// transpose map out(m) = sum_k h(k) y(m + k - delay).
Array pconv_impl(const Array& x, int axis, const double* h, int L, int delay, int sign) {
  const AxisView v = view_of(x, axis);
  Array out(x.shape());
  const double* xd = x.data();
  double* od = out.data();
  const int64_t plane = v.n * v.inner;
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* xp = xd + o * plane;
    double* op = od + o * plane;
    for (int64_t n = 0; n < v.n; ++n) {
      double* orow = op + n * v.inner;
      for (int k = 0; k < L; ++k) {
        const int64_t src = wrap(n - sign * (k - delay), v.n);
        axpy(h[k], xp + src * v.inner, orow, v.inner);
      }
    }
  }
  return out;
}

Array pconv(const Array& x, int axis, const double* h, int L, int delay) {
  return pconv_impl(x, axis, h, L, delay, 1);
}

Array pconv_t(const Array& x, int axis, const double* h, int L, int delay) {
  return pconv_impl(x, axis, h, L, delay, -1);
}

// Decimating analysis step, correlation form: out(t) = sum_k h(k) x(2t + k).
Array down2(const Array& x, int axis, const double* h, int L) {
  const AxisView v = view_of(x, axis);
  if (v.n % 2 != 0) throw std::invalid_argument("wavelet: odd extent in decimation");
  Array out(with_extent(x, axis, v.n / 2));
  const double* xd = x.data();
  double* od = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* xp = xd + o * v.n * v.inner;
    double* op = od + o * (v.n / 2) * v.inner;
    for (int64_t t = 0; t < v.n / 2; ++t) {
      double* orow = op + t * v.inner;
      for (int k = 0; k < L; ++k) {
        const int64_t src = wrap(2 * t + k, v.n);
        axpy(h[k], xp + src * v.inner, orow, v.inner);
      }
    }
  }
  return out;
}

// Exact transpose of down2 (doubles the extent).
Array up2(const Array& y, int axis, const double* h, int L) {
  const AxisView v = view_of(y, axis);
  const int64_t n2 = 2 * v.n;
  Array out(with_extent(y, axis, n2));
  const double* yd = y.data();
  double* od = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* yp = yd + o * v.n * v.inner;
    double* op = od + o * n2 * v.inner;
    for (int64_t t = 0; t < v.n; ++t) {
      const double* yrow = yp + t * v.inner;
      for (int k = 0; k < L; ++k) {
        const int64_t dst = wrap(2 * t + k, n2);
        axpy(h[k], yrow, op + dst * v.inner, v.inner);
      }
    }
  }
  return out;
}

// Dual-tree decimating step. Tree a filters the odd polyphase, tree b the
// even polyphase, each at net stride 4; outputs interleave as
// out(2t) = sum_k fb(k) xe(2t - k), out(2t+1) = sum_k fa(k) xo(2t - k)
// with xe(s) = x(2s), xo(s) = x(2s+1). Polyphase supports are disjoint, so
// the union of both trees is orthonormal and the transpose inverts exactly.
Array coldfilt(const Array& x, int axis, const double* fa, const double* fb, int L) {
  const AxisView v = view_of(x, axis);
  if (v.n % 4 != 0) throw std::invalid_argument("wavelet: extent must be divisible by 4");
  const int64_t nh = v.n / 2;
  Array out(with_extent(x, axis, nh));
  const double* xd = x.data();
  double* od = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* xp = xd + o * v.n * v.inner;
    double* op = od + o * nh * v.inner;
    for (int64_t t = 0; t < v.n / 4; ++t) {
      double* oe = op + (2 * t) * v.inner;
      double* oo = op + (2 * t + 1) * v.inner;
      for (int k = 0; k < L; ++k) {
        const int64_t s = wrap(2 * t - k, nh);
        axpy(fb[k], xp + (2 * s) * v.inner, oe, v.inner);
        axpy(fa[k], xp + (2 * s + 1) * v.inner, oo, v.inner);
      }
    }
  }
  return out;
}

Array coldfilt_t(const Array& y, int axis, const double* fa, const double* fb, int L) {
  const AxisView v = view_of(y, axis);
  if (v.n % 2 != 0) throw std::invalid_argument("wavelet: odd extent in tree transpose");
  const int64_t n2 = 2 * v.n;
  Array out(with_extent(y, axis, n2));
  const double* yd = y.data();
  double* od = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* yp = yd + o * v.n * v.inner;
    double* op = od + o * n2 * v.inner;
    for (int64_t t = 0; t < v.n / 2; ++t) {
      const double* ye = yp + (2 * t) * v.inner;
      const double* yo = yp + (2 * t + 1) * v.inner;
      for (int k = 0; k < L; ++k) {
        const int64_t s = wrap(2 * t - k, v.n);
        axpy(fb[k], ye, op + (2 * s) * v.inner, v.inner);
        axpy(fa[k], yo, op + (2 * s + 1) * v.inner, v.inner);
      }
    }
  }
  return out;
}

Array pad_axis(const Array& x, int axis, int64_t p) {
  if (p == 0) return x;
  const AxisView v = view_of(x, axis);
  Array out(with_extent(x, axis, v.n + p));
  const double* xd = x.data();
  double* od = out.data();
  const int64_t np = v.n + p;
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* xp = xd + o * v.n * v.inner;
    double* op = od + o * np * v.inner;
    for (int64_t n = 0; n < np; ++n) {
      const double* src = xp + sym_index(n, v.n) * v.inner;
      double* dst = op + n * v.inner;
      for (int64_t i = 0; i < v.inner; ++i) dst[i] = src[i];
    }
  }
  return out;
}

Array pad_axis_t(const Array& y, int axis, int64_t orig) {
  const AxisView v = view_of(y, axis);
  if (v.n == orig) return y;
  Array out(with_extent(y, axis, orig));
  const double* yd = y.data();
  double* od = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* yp = yd + o * v.n * v.inner;
    double* op = od + o * orig * v.inner;
    for (int64_t n = 0; n < v.n; ++n) {
      axpy(1.0, yp + n * v.inner, op + sym_index(n, orig) * v.inner, v.inner);
    }
  }
  return out;
}

Array crop_axis(const Array& x, int axis, int64_t n0) {
  const AxisView v = view_of(x, axis);
  if (v.n == n0) return x;
  Array out(with_extent(x, axis, n0));
  const double* xd = x.data();
  double* od = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* xp = xd + o * v.n * v.inner;
    double* op = od + o * n0 * v.inner;
    for (int64_t n = 0; n < n0; ++n)
      for (int64_t i = 0; i < v.inner; ++i) op[n * v.inner + i] = xp[n * v.inner + i];
  }
  return out;
}

Array zero_extend_axis(const Array& x, int axis, int64_t n1) {
  const AxisView v = view_of(x, axis);
  if (v.n == n1) return x;
  Array out(with_extent(x, axis, n1));
  const double* xd = x.data();
  double* od = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    const double* xp = xd + o * v.n * v.inner;
    double* op = od + o * n1 * v.inner;
    for (int64_t n = 0; n < v.n; ++n)
      for (int64_t i = 0; i < v.inner; ++i) op[n * v.inner + i] = xp[n * v.inner + i];
  }
  return out;
}

// Quad samples of one real band to two complex quarter-rate subbands:
//   z1 = ((a - d) + j(b + c)) / sqrt2,  z2 = ((a + d) + j(c - b)) / sqrt2
// with a,b,c,d the 2x2 polyphase samples. Orthogonal 4->4, transpose = c2q.
std::array<Array, 4> q2c(const Array& y) {
  const int64_t B = y.dim(0), M1 = y.dim(1), M2 = y.dim(2), C = y.dim(3);
  const std::vector<int64_t> hs = {B, M1 / 2, M2 / 2, C};
  std::array<Array, 4> z = {Array(hs), Array(hs), Array(hs), Array(hs)};
  const double* yd = y.data();
  for (int64_t b = 0; b < B; ++b)
    for (int64_t i = 0; i < M1 / 2; ++i)
      for (int64_t j = 0; j < M2 / 2; ++j) {
        const double* pa = yd + (((b * M1 + 2 * i) * M2 + 2 * j) * C);
        const double* pb = pa + C;
        const double* pc = yd + (((b * M1 + 2 * i + 1) * M2 + 2 * j) * C);
        const double* pd = pc + C;
        const int64_t at = ((b * (M1 / 2) + i) * (M2 / 2) + j) * C;
        for (int64_t c = 0; c < C; ++c) {
          z[0].data()[at + c] = (pa[c] - pd[c]) * kInvSqrt2;
          z[1].data()[at + c] = (pb[c] + pc[c]) * kInvSqrt2;
          z[2].data()[at + c] = (pa[c] + pd[c]) * kInvSqrt2;
          z[3].data()[at + c] = (pc[c] - pb[c]) * kInvSqrt2;
        }
      }
  return z;
}

Array c2q(const Array& z1re, const Array& z1im, const Array& z2re, const Array& z2im) {
  const int64_t B = z1re.dim(0), m1 = z1re.dim(1), m2 = z1re.dim(2), C = z1re.dim(3);
  Array y({B, 2 * m1, 2 * m2, C});
  double* yd = y.data();
  for (int64_t b = 0; b < B; ++b)
    for (int64_t i = 0; i < m1; ++i)
      for (int64_t j = 0; j < m2; ++j) {
        double* pa = yd + (((b * 2 * m1 + 2 * i) * 2 * m2 + 2 * j) * C);
        double* pb = pa + C;
        double* pc = yd + (((b * 2 * m1 + 2 * i + 1) * 2 * m2 + 2 * j) * C);
        double* pd = pc + C;
        const int64_t at = ((b * m1 + i) * m2 + j) * C;
        for (int64_t c = 0; c < C; ++c) {
          const double r1 = z1re.data()[at + c], i1 = z1im.data()[at + c];
          const double r2 = z2re.data()[at + c], i2 = z2im.data()[at + c];
          pa[c] = (r1 + r2) * kInvSqrt2;
          pd[c] = (r2 - r1) * kInvSqrt2;
          pb[c] = (i1 - i2) * kInvSqrt2;
          pc[c] = (i1 + i2) * kInvSqrt2;
        }
      }
  return y;
}

struct Filt {
  const double* h;
  int L;
  int delay;
};

struct Db6Pair {
  std::array<double, 12> h, g;
};

const Db6Pair& db6_pair() {
  static const Db6Pair p = [] {
    Db6Pair q{};
    for (int k = 0; k < 12; ++k) {
      q.h[k] = filters::db6[k];
      q.g[k] = (k % 2 == 0 ? 1.0 : -1.0) * filters::db6[11 - k];
    }
    return q;
  }();
  return p;
}

struct DtFilters {
  std::array<double, 13> h0o, g1o;
  std::array<double, 19> g0o, h1o;
  std::array<double, 14> h0a, h0b, h1a, h1b;
};

const DtFilters& dt_filters() {
  static const DtFilters f = [] {
    DtFilters q{};
    for (int k = 0; k < 13; ++k) {
      q.h0o[k] = filters::near_sym_h0[k];
      q.g1o[k] = (k % 2 == 0 ? -1.0 : 1.0) * filters::near_sym_h0[k];
    }
    for (int k = 0; k < 19; ++k) {
      q.g0o[k] = filters::near_sym_g0[k];
      q.h1o[k] = (k % 2 == 0 ? 1.0 : -1.0) * filters::near_sym_g0[k];
    }
    for (int k = 0; k < 14; ++k) q.h0a[k] = filters::qshift_h0a[k];
    for (int k = 0; k < 14; ++k) q.h0b[k] = q.h0a[13 - k];
    for (int k = 0; k < 14; ++k) q.h1a[k] = (k % 2 == 0 ? 1.0 : -1.0) * q.h0b[k];
    for (int k = 0; k < 14; ++k) q.h1b[k] = q.h1a[13 - k];
    return q;
  }();
  return f;
}

using PconvFn = Array (*)(const Array&, int, const double*, int, int);

// Shared analysis-shaped pass: level 1 with the given single-rate pair, then
// dual-tree stages. Covers both forward (pconv, analysis filters) and the
// transpose of inverse (pconv_t, synthesis filters).
WaveletCoeffs dt_analysis_pass(const Array& xp, int levels, PconvFn P, Filt flo, Filt fhi,
                               int64_t orig_h, int64_t orig_w) {
  const DtFilters& ff = dt_filters();
  WaveletCoeffs c;
  c.family = WaveletFamily::dtcwt_qshift;
  c.levels = levels;
  c.orig_h = orig_h;
  c.orig_w = orig_w;
  Array loH = P(xp, 1, flo.h, flo.L, flo.delay);
  Array hiH = P(xp, 1, fhi.h, fhi.L, fhi.delay);
  Array cur = P(loH, 2, flo.h, flo.L, flo.delay);
  {
    Array LH = P(loH, 2, fhi.h, fhi.L, fhi.delay);
    Array HL = P(hiH, 2, flo.h, flo.L, flo.delay);
    Array HH = P(hiH, 2, fhi.h, fhi.L, fhi.delay);
    std::vector<Array> d;
    d.reserve(12);
    for (const Array* band : {&LH, &HL, &HH}) {
      auto z = q2c(*band);
      for (auto& a : z) d.push_back(std::move(a));
    }
    c.details.push_back(std::move(d));
  }
  for (int l = 2; l <= levels; ++l) {
    Array lo2 = coldfilt(cur, 1, ff.h0a.data(), ff.h0b.data(), 14);
    Array hi2 = coldfilt(cur, 1, ff.h1a.data(), ff.h1b.data(), 14);
    cur = coldfilt(lo2, 2, ff.h0a.data(), ff.h0b.data(), 14);
    Array LH = coldfilt(lo2, 2, ff.h1a.data(), ff.h1b.data(), 14);
    Array HL = coldfilt(hi2, 2, ff.h0a.data(), ff.h0b.data(), 14);
    Array HH = coldfilt(hi2, 2, ff.h1a.data(), ff.h1b.data(), 14);
    std::vector<Array> d;
    d.reserve(12);
    for (const Array* band : {&LH, &HL, &HH}) {
      auto z = q2c(*band);
      for (auto& a : z) d.push_back(std::move(a));
    }
    c.details.push_back(std::move(d));
  }
  c.coarse = std::move(cur);
  return c;
}

// Shared synthesis-shaped pass: dual-tree transpose stages, then level 1 with
// the given single-rate pair. Covers both inverse (pconv, synthesis filters)
// and the transpose of forward (pconv_t, analysis filters). Returns the
// padded-extent field.
Array dt_synthesis_pass(const WaveletCoeffs& c, PconvFn P, Filt flo, Filt fhi) {
  const DtFilters& ff = dt_filters();
  Array cur = c.coarse;
  for (int l = c.levels; l >= 2; --l) {
    const auto& d = c.details[l - 1];
    Array LH = c2q(d[0], d[1], d[2], d[3]);
    Array HL = c2q(d[4], d[5], d[6], d[7]);
    Array HH = c2q(d[8], d[9], d[10], d[11]);
    Array lo2 = coldfilt_t(cur, 2, ff.h0a.data(), ff.h0b.data(), 14);
    lo2 += coldfilt_t(LH, 2, ff.h1a.data(), ff.h1b.data(), 14);
    Array hi2 = coldfilt_t(HL, 2, ff.h0a.data(), ff.h0b.data(), 14);
    hi2 += coldfilt_t(HH, 2, ff.h1a.data(), ff.h1b.data(), 14);
    cur = coldfilt_t(lo2, 1, ff.h0a.data(), ff.h0b.data(), 14);
    cur += coldfilt_t(hi2, 1, ff.h1a.data(), ff.h1b.data(), 14);
  }
  const auto& d = c.details[0];
  Array LH = c2q(d[0], d[1], d[2], d[3]);
  Array HL = c2q(d[4], d[5], d[6], d[7]);
  Array HH = c2q(d[8], d[9], d[10], d[11]);
  Array lo = P(cur, 2, flo.h, flo.L, flo.delay);
  lo += P(LH, 2, fhi.h, fhi.L, fhi.delay);
  Array hi = P(HL, 2, flo.h, flo.L, flo.delay);
  hi += P(HH, 2, fhi.h, fhi.L, fhi.delay);
  Array out = P(lo, 1, flo.h, flo.L, flo.delay);
  out += P(hi, 1, fhi.h, fhi.L, fhi.delay);
  return out;
}

void check_input(const Array& x) {
  if (x.ndim() != 4) throw std::invalid_argument("wavelet: expected a (B,H,W,C) array");
  if (x.dim(1) < 2 || x.dim(2) < 2)
    throw std::invalid_argument("wavelet: need a 2-D field, both spatial extents >= 2");
}

}  // namespace

int64_t Dwt2::padded_extent(int64_t n, int levels) {
  const int64_t m = int64_t{1} << levels;
  return ((n + m - 1) / m) * m;
}

int64_t Dtcwt2::padded_extent(int64_t n, int levels) {
  const int64_t m = int64_t{1} << levels;
  return ((n + m - 1) / m) * m;
}

Dwt2::Dwt2(int levels) : levels_(levels) {
  if (levels < 1) throw std::invalid_argument("wavelet: levels must be >= 1");
}

Dtcwt2::Dtcwt2(int levels) : levels_(levels) {
  if (levels < 1) throw std::invalid_argument("wavelet: levels must be >= 1");
}

WaveletCoeffs Dwt2::forward(const Array& x) const {
  check_input(x);
  const Db6Pair& f = db6_pair();
  const int64_t H = x.dim(1), W = x.dim(2);
  Array cur = pad_axis(pad_axis(x, 1, padded_extent(H, levels_) - H), 2,
                       padded_extent(W, levels_) - W);
  WaveletCoeffs c;
  c.family = WaveletFamily::dwt_db6;
  c.levels = levels_;
  c.orig_h = H;
  c.orig_w = W;
  for (int l = 0; l < levels_; ++l) {
    Array rlo = down2(cur, 1, f.h.data(), 12);
    Array rhi = down2(cur, 1, f.g.data(), 12);
    cur = down2(rlo, 2, f.h.data(), 12);
    Array LH = down2(rlo, 2, f.g.data(), 12);
    Array HL = down2(rhi, 2, f.h.data(), 12);
    Array HH = down2(rhi, 2, f.g.data(), 12);
    c.details.push_back({std::move(LH), std::move(HL), std::move(HH)});
  }
  c.coarse = std::move(cur);
  return c;
}

Array Dwt2::inverse(const WaveletCoeffs& c) const {
  const Db6Pair& f = db6_pair();
  Array cur = c.coarse;
  for (int l = c.levels - 1; l >= 0; --l) {
    const auto& d = c.details[l];
    Array rlo = up2(cur, 2, f.h.data(), 12);
    rlo += up2(d[0], 2, f.g.data(), 12);
    Array rhi = up2(d[1], 2, f.h.data(), 12);
    rhi += up2(d[2], 2, f.g.data(), 12);
    cur = up2(rlo, 1, f.h.data(), 12);
    cur += up2(rhi, 1, f.g.data(), 12);
  }
  return crop_axis(crop_axis(cur, 1, c.orig_h), 2, c.orig_w);
}

Array Dwt2::forward_t(const WaveletCoeffs& cbar, int64_t orig_h, int64_t orig_w) const {
  const Db6Pair& f = db6_pair();
  Array cur = cbar.coarse;
  for (int l = cbar.levels - 1; l >= 0; --l) {
    const auto& d = cbar.details[l];
    Array rlo = up2(cur, 2, f.h.data(), 12);
    rlo += up2(d[0], 2, f.g.data(), 12);
    Array rhi = up2(d[1], 2, f.h.data(), 12);
    rhi += up2(d[2], 2, f.g.data(), 12);
    cur = up2(rlo, 1, f.h.data(), 12);
    cur += up2(rhi, 1, f.g.data(), 12);
  }
  return pad_axis_t(pad_axis_t(cur, 2, orig_w), 1, orig_h);
}

WaveletCoeffs Dwt2::inverse_t(const Array& xbar) const {
  check_input(xbar);
  const Db6Pair& f = db6_pair();
  const int64_t H = xbar.dim(1), W = xbar.dim(2);
  Array cur = zero_extend_axis(zero_extend_axis(xbar, 1, padded_extent(H, levels_)), 2,
                               padded_extent(W, levels_));
  WaveletCoeffs c;
  c.family = WaveletFamily::dwt_db6;
  c.levels = levels_;
  c.orig_h = H;
  c.orig_w = W;
  for (int l = 0; l < levels_; ++l) {
    Array rlo = down2(cur, 1, f.h.data(), 12);
    Array rhi = down2(cur, 1, f.g.data(), 12);
    cur = down2(rlo, 2, f.h.data(), 12);
    Array LH = down2(rlo, 2, f.g.data(), 12);
    Array HL = down2(rhi, 2, f.h.data(), 12);
    Array HH = down2(rhi, 2, f.g.data(), 12);
    c.details.push_back({std::move(LH), std::move(HL), std::move(HH)});
  }
  c.coarse = std::move(cur);
  return c;
}

WaveletCoeffs Dtcwt2::forward(const Array& x) const {
  check_input(x);
  const DtFilters& ff = dt_filters();
  const int64_t H = x.dim(1), W = x.dim(2);
  Array xp = pad_axis(pad_axis(x, 1, padded_extent(H, levels_) - H), 2,
                      padded_extent(W, levels_) - W);
  return dt_analysis_pass(xp, levels_, &pconv, {ff.h0o.data(), 13, 6},
                          {ff.h1o.data(), 19, 9}, H, W);
}

Array Dtcwt2::inverse(const WaveletCoeffs& c) const {
  const DtFilters& ff = dt_filters();
  Array out = dt_synthesis_pass(c, &pconv, {ff.g0o.data(), 19, 9}, {ff.g1o.data(), 13, 6});
  return crop_axis(crop_axis(out, 1, c.orig_h), 2, c.orig_w);
}

Array Dtcwt2::forward_t(const WaveletCoeffs& cbar, int64_t orig_h, int64_t orig_w) const {
  const DtFilters& ff = dt_filters();
  Array out =
      dt_synthesis_pass(cbar, &pconv_t, {ff.h0o.data(), 13, 6}, {ff.h1o.data(), 19, 9});
  return pad_axis_t(pad_axis_t(out, 2, orig_w), 1, orig_h);
}

WaveletCoeffs Dtcwt2::inverse_t(const Array& xbar) const {
  check_input(xbar);
  const DtFilters& ff = dt_filters();
  const int64_t H = xbar.dim(1), W = xbar.dim(2);
  Array xe = zero_extend_axis(zero_extend_axis(xbar, 1, padded_extent(H, levels_)), 2,
                              padded_extent(W, levels_));
  return dt_analysis_pass(xe, levels_, &pconv_t, {ff.g0o.data(), 19, 9},
                          {ff.g1o.data(), 13, 6}, H, W);
}

Array pack_coeffs(const WaveletCoeffs& c, BandLayout* layout) {
  int64_t total = 0;
  BandLayout lay;
  for (const auto& lvl : c.details)
    for (const auto& b : lvl) {
      lay.shapes.push_back(b.shape());
      lay.offsets.push_back(total);
      total += b.size();
    }
  lay.shapes.push_back(c.coarse.shape());
  lay.offsets.push_back(total);
  lay.coarse_index = static_cast<int>(lay.shapes.size()) - 1;
  total += c.coarse.size();
  lay.total = total;
  Array flat({total});
  int64_t at = 0;
  for (const auto& lvl : c.details)
    for (const auto& b : lvl) {
      std::copy(b.data(), b.data() + b.size(), flat.data() + at);
      at += b.size();
    }
  std::copy(c.coarse.data(), c.coarse.data() + c.coarse.size(), flat.data() + at);
  if (layout) *layout = std::move(lay);
  return flat;
}

WaveletCoeffs unpack_coeffs(const Array& flat, const WaveletCoeffs& like) {
  WaveletCoeffs c;
  c.family = like.family;
  c.levels = like.levels;
  c.orig_h = like.orig_h;
  c.orig_w = like.orig_w;
  int64_t at = 0;
  for (const auto& lvl : like.details) {
    std::vector<Array> out;
    out.reserve(lvl.size());
    for (const auto& b : lvl) {
      Array a(b.shape());
      std::copy(flat.data() + at, flat.data() + at + a.size(), a.data());
      at += a.size();
      out.push_back(std::move(a));
    }
    c.details.push_back(std::move(out));
  }
  Array coarse(like.coarse.shape());
  std::copy(flat.data() + at, flat.data() + at + coarse.size(), coarse.data());
  at += coarse.size();
  if (at != flat.size()) throw std::invalid_argument("unpack_coeffs: size mismatch");
  c.coarse = std::move(coarse);
  return c;
}

BandLayout coeff_layout(WaveletFamily family, int levels, int64_t batch, int64_t padded_h,
                        int64_t padded_w, int64_t channels) {
  BandLayout lay;
  int64_t at = 0;
  auto push = [&](int64_t h, int64_t w) {
    lay.shapes.push_back({batch, h, w, channels});
    lay.offsets.push_back(at);
    at += batch * h * w * channels;
  };
  const int bands = family == WaveletFamily::dwt_db6 ? 3 : 12;
  for (int l = 1; l <= levels; ++l)
    for (int b = 0; b < bands; ++b) push(padded_h >> l, padded_w >> l);
  if (family == WaveletFamily::dwt_db6)
    push(padded_h >> levels, padded_w >> levels);
  else
    push(padded_h >> (levels - 1), padded_w >> (levels - 1));
  lay.coarse_index = static_cast<int>(lay.shapes.size()) - 1;
  lay.total = at;
  return lay;
}

WaveletCoeffs coeffs_from_layout(const Array& flat, const BandLayout& lay,
                                 WaveletFamily family, int levels, int64_t orig_h,
                                 int64_t orig_w) {
  if (flat.size() != lay.total) throw std::invalid_argument("coeffs_from_layout: size mismatch");
  WaveletCoeffs c;
  c.family = family;
  c.levels = levels;
  c.orig_h = orig_h;
  c.orig_w = orig_w;
  const int bands = static_cast<int>((lay.shapes.size() - 1) / levels);
  int idx = 0;
  for (int l = 0; l < levels; ++l) {
    std::vector<Array> lvl;
    lvl.reserve(bands);
    for (int b = 0; b < bands; ++b, ++idx) {
      Array a(lay.shapes[idx]);
      std::copy(flat.data() + lay.offsets[idx], flat.data() + lay.offsets[idx] + a.size(),
                a.data());
      lvl.push_back(std::move(a));
    }
    c.details.push_back(std::move(lvl));
  }
  Array coarse(lay.shapes[idx]);
  std::copy(flat.data() + lay.offsets[idx], flat.data() + lay.offsets[idx] + coarse.size(),
            coarse.data());
  c.coarse = std::move(coarse);
  return c;
}

Dwt1Coeffs dwt1_forward(const std::vector<double>& x, int levels) {
  if (levels < 1) throw std::invalid_argument("wavelet: levels must be >= 1");
  const Db6Pair& f = db6_pair();
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t np = Dwt2::padded_extent(n, levels);
  Array cur({1, np, 1, 1});
  for (int64_t i = 0; i < np; ++i) cur.data()[i] = x[static_cast<size_t>(sym_index(i, n))];
  Dwt1Coeffs c;
  c.orig_n = n;
  for (int l = 0; l < levels; ++l) {
    Array lo = down2(cur, 1, f.h.data(), 12);
    Array hi = down2(cur, 1, f.g.data(), 12);
    c.details.emplace_back(hi.data(), hi.data() + hi.size());
    cur = std::move(lo);
  }
  c.coarse.assign(cur.data(), cur.data() + cur.size());
  return c;
}

std::vector<double> dwt1_inverse(const Dwt1Coeffs& c) {
  const Db6Pair& f = db6_pair();
  Array cur({1, static_cast<int64_t>(c.coarse.size()), 1, 1});
  std::copy(c.coarse.begin(), c.coarse.end(), cur.data());
  for (int l = static_cast<int>(c.details.size()) - 1; l >= 0; --l) {
    Array hi({1, static_cast<int64_t>(c.details[l].size()), 1, 1});
    std::copy(c.details[l].begin(), c.details[l].end(), hi.data());
    Array up = up2(cur, 1, f.h.data(), 12);
    up += up2(hi, 1, f.g.data(), 12);
    cur = std::move(up);
  }
  return std::vector<double>(cur.data(), cur.data() + c.orig_n);
}

}  // namespace pio

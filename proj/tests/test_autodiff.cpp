#include "doctest.h"

#include <cmath>
#include <functional>

#include "pio/autodiff.hpp"
#include "pio/rng.hpp"
#include "pio/tensor.hpp"

using namespace pio;
using namespace pio::ad;

namespace {

Array randn(std::vector<int64_t> shape, uint64_t seed) {
  Rng rng(seed);
  Array a(std::move(shape));
  for (int64_t i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a;
}

// central finite difference of f at x along coordinate i
double fd_coord(const std::function<double(const Array&)>& f, Array x, int64_t i,
                double eps = 1e-6) {
  const double x0 = x.data()[i];
  x.data()[i] = x0 + eps;
  const double fp = f(x);
  x.data()[i] = x0 - eps;
  const double fm = f(x);
  return (fp - fm) / (2.0 * eps);
}

}  // namespace

TEST_CASE("tape gradients match finite differences through a dense layer") {
  Array x0 = randn({2, 3, 3, 4}, 1);
  Array w0 = randn({4, 5}, 2);
  Array b0 = randn({5}, 3);

  auto loss_of = [&](const Array& xa, const Array& wa, const Array& ba) {
    Var x = Var::leaf(xa, true);
    Var w = Var::leaf(wa, true);
    Var b = Var::leaf(ba, true);
    Var y = activate(add_bias(matmul(x, w), b), Activation::gelu);
    return std::make_tuple(mean(square(y)), x, w, b);
  };

  auto [loss, x, w, b] = loss_of(x0, w0, b0);
  backward(loss);

  auto fx = [&](const Array& xa) {
    auto [l, a1, a2, a3] = loss_of(xa, w0, b0);
    return l.value().data()[0];
  };
  auto fw = [&](const Array& wa) {
    auto [l, a1, a2, a3] = loss_of(x0, wa, b0);
    return l.value().data()[0];
  };
  auto fb = [&](const Array& ba) {
    auto [l, a1, a2, a3] = loss_of(x0, w0, ba);
    return l.value().data()[0];
  };

  for (int64_t i : {int64_t{0}, int64_t{7}, int64_t{41}, x0.size() - 1}) {
    const double num = fd_coord(fx, x0, i);
    CHECK(std::abs(x.grad().data()[i] - num) < 1e-6 * std::max(1.0, std::abs(num)));
  }
  for (int64_t i = 0; i < w0.size(); i += 7) {
    const double num = fd_coord(fw, w0, i);
    CHECK(std::abs(w.grad().data()[i] - num) < 1e-6 * std::max(1.0, std::abs(num)));
  }
  for (int64_t i = 0; i < b0.size(); ++i) {
    const double num = fd_coord(fb, b0, i);
    CHECK(std::abs(b.grad().data()[i] - num) < 1e-6 * std::max(1.0, std::abs(num)));
  }
}

TEST_CASE("elementwise ops and reductions differentiate correctly") {
  Array a0 = randn({3, 4}, 11);
  Array b0 = randn({3, 4}, 12);
  for (int64_t i = 0; i < a0.size(); ++i) a0.data()[i] = std::abs(a0.data()[i]) + 0.5;

  auto f = [&](const Array& aa) {
    Var a = Var::leaf(aa, true);
    Var b = Var::leaf(b0, false);
    Var t = mul(sqrt_v(a), activate(b, Activation::silu));
    Var u = sub(square(t), scale(t, 0.3));
    Var per = sum_per_sample(add_scalar(u, 0.1));
    return std::make_pair(mean(square(per)), a);
  };
  auto [loss, a] = f(a0);
  backward(loss);
  auto fv = [&](const Array& aa) { return f(aa).first.value().data()[0]; };
  for (int64_t i = 0; i < a0.size(); i += 3) {
    const double num = fd_coord(fv, a0, i);
    CHECK(std::abs(a.grad().data()[i] - num) < 2e-5 * std::max(1.0, std::abs(num)));
  }
}

TEST_CASE("a variable used twice accumulates both contributions") {
  Array a0({2}, std::vector<double>{1.5, -0.5});
  Var a = Var::leaf(a0, true);
  Var y = sum(mul(a, a));
  backward(y);
  CHECK(a.grad().data()[0] == doctest::Approx(3.0));
  CHECK(a.grad().data()[1] == doctest::Approx(-1.0));
}

TEST_CASE("linear_map uses the supplied transpose") {
  Array x0 = randn({6}, 21);
  // forward reverses the vector; transpose of a permutation is its inverse
  auto rev = [](const Array& v) {
    Array o(v.shape());
    for (int64_t i = 0; i < v.size(); ++i) o.data()[i] = v.data()[v.size() - 1 - i];
    return o;
  };
  Var x = Var::leaf(x0, true);
  Array wts = randn({6}, 22);
  Var y = sum(mul_const(linear_map(x, rev, rev), wts));
  backward(y);
  for (int64_t i = 0; i < 6; ++i)
    CHECK(x.grad().data()[i] == doctest::Approx(wts.data()[5 - i]));
}

TEST_CASE("band_mix mixes selected segments and passes the rest through") {
  const int64_t B = 2, L1 = 3, L2 = 2, C = 4;
  Array flat0 = randn({B * (L1 + L2 + 5) * C}, 31);
  Array r10 = randn({L1, C, C}, 32);
  Array r20 = randn({L2, C, C}, 33);
  std::vector<BandSeg> segs = {{0, B, L1, C}, {B * L1 * C, B, L2, C}};
  const int64_t tail = B * (L1 + L2) * C;

  auto f = [&](const Array& fl, const Array& r1a, const Array& r2a) {
    Var fv = Var::leaf(fl, true);
    Var r1 = Var::leaf(r1a, true);
    Var r2 = Var::leaf(r2a, true);
    Var y = band_mix(fv, {r1, r2}, segs);
    return std::make_tuple(mean(square(y)), fv, r1, r2, y);
  };
  auto [loss, fv, r1, r2, y] = f(flat0, r10, r20);

  // pass-through region unchanged
  for (int64_t i = tail; i < flat0.size(); ++i)
    CHECK(y.value().data()[i] == flat0.data()[i]);
  // mixed region matches a direct computation at one location
  {
    const int64_t b = 1, t = 2;
    for (int64_t co = 0; co < C; ++co) {
      double acc = 0;
      for (int64_t ci = 0; ci < C; ++ci)
        acc += r10.data()[(t * C + co) * C + ci] * flat0.data()[(b * L1 + t) * C + ci];
      CHECK(y.value().data()[(b * L1 + t) * C + co] == doctest::Approx(acc));
    }
  }

  backward(loss);
  auto f0 = [&](const Array& fl) { return std::get<0>(f(fl, r10, r20)).value().data()[0]; };
  auto f1 = [&](const Array& ra) { return std::get<0>(f(flat0, ra, r20)).value().data()[0]; };
  auto f2 = [&](const Array& ra) { return std::get<0>(f(flat0, r10, ra)).value().data()[0]; };
  for (int64_t i = 0; i < flat0.size(); i += 9) {
    const double num = fd_coord(f0, flat0, i);
    CHECK(std::abs(fv.grad().data()[i] - num) < 2e-6 * std::max(1.0, std::abs(num)));
  }
  for (int64_t i = 0; i < r10.size(); i += 11) {
    const double num = fd_coord(f1, r10, i);
    CHECK(std::abs(r1.grad().data()[i] - num) < 2e-6 * std::max(1.0, std::abs(num)));
  }
  for (int64_t i = 0; i < r20.size(); i += 13) {
    const double num = fd_coord(f2, r20, i);
    CHECK(std::abs(r2.grad().data()[i] - num) < 2e-6 * std::max(1.0, std::abs(num)));
  }
}

TEST_CASE("gradients flow through tanh and gelu kinds") {
  for (auto kind : {Activation::gelu, Activation::silu, Activation::tanh_act}) {
    Array x0 = randn({7}, 41);
    auto f = [&](const Array& xa) {
      Var x = Var::leaf(xa, true);
      return std::make_pair(sum(activate(x, kind)), x);
    };
    auto [loss, x] = f(x0);
    backward(loss);
    auto fv = [&](const Array& xa) { return f(xa).first.value().data()[0]; };
    for (int64_t i = 0; i < 7; ++i) {
      const double num = fd_coord(fv, x0, i);
      CHECK(std::abs(x.grad().data()[i] - num) < 1e-7 * std::max(1.0, std::abs(num)));
    }
    // smooth activations pass through zero
    Var z = Var::leaf(Array({1}, 0.0), false);
    CHECK(std::abs(activate(z, kind).value().data()[0]) < 1e-15);
  }
}

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "pio/grid.hpp"
#include "pio/random_fields.hpp"
#include "pio/stats.hpp"

using namespace pio;

TEST_CASE("normal quantile and cdf") {
  CHECK(norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(norm_ppf(0.0880) == doctest::Approx(-1.3531).epsilon(1e-3));
  for (double x : {-5.0, -2.5, -0.3, 0.0, 0.7, 1.9, 4.0})
    CHECK(norm_ppf(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-11));
  for (double p : {1e-8, 1e-3, 0.2, 0.5, 0.9, 1.0 - 1e-6})
    CHECK(norm_cdf(norm_ppf(p)) == doctest::Approx(p).epsilon(1e-12));
  CHECK_THROWS_AS(norm_ppf(-0.1), std::invalid_argument);
  CHECK(std::isinf(norm_ppf(0.0)));
  CHECK(std::isinf(norm_ppf(1.0)));
}

TEST_CASE("random stream determinism and moments") {
  RandomStream a(42), b(42), c(43);
  bool same = true, diff = false;
  for (int i = 0; i < 100; ++i) {
    double ua = a.uniform01(), ub = b.uniform01(), uc = c.uniform01();
    REQUIRE(ua > 0.0);
    REQUIRE(ua < 1.0);
    same = same && ua == ub;
    diff = diff || ua != uc;
  }
  CHECK(same);
  CHECK(diff);

  RandomStream rs(7);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = rs.normal();
    m1 += z;
    m2 += z * z;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::abs(m1) < 0.01);
  CHECK(m2 - m1 * m1 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("trig source formula") {
  Grid g = make_grid({0.0}, {1.0}, {3}, {AxisRole::space_x});
  FieldSample all1 = sample_trig_source(1.0, 1.0, 1.0, g);
  CHECK(all1.values[0] == doctest::Approx(0.0).epsilon(1e-14));
  FieldSample mid = sample_trig_source(0.5, 0.5, 0.5, g);
  CHECK(mid.values[1] == doctest::Approx(-0.5).epsilon(1e-13));
  FieldSample all0 = sample_trig_source(0.0, 0.0, 0.0, g);
  CHECK(all0.values[0] == doctest::Approx(3.0).epsilon(1e-14));

  Grid fine = make_grid({0.0}, {1.0}, {257}, {AxisRole::space_x});
  for (double n : {0.0, 0.3, 1.0})
    for (double p : {0.0, 0.8})
      for (double w : {0.1, 1.0}) {
        FieldSample f = sample_trig_source(n, p, w, fine);
        CHECK(max_abs(f.values) <= 6.0);
      }

  CHECK_THROWS_AS(sample_trig_source(1.2, 0.5, 0.5, g), std::invalid_argument);
  CHECK_THROWS_AS(sample_trig_source(0.5, -0.1, 0.5, g), std::invalid_argument);
  Grid g2 = make_unit_grid_2d(4, 4, AxisRole::space_x, AxisRole::space_y);
  CHECK_THROWS_AS(sample_trig_source(0.5, 0.5, 0.5, g2), std::invalid_argument);
}

TEST_CASE("rbf sampler covariance statistics") {
  GrfSpec spec;
  spec.kind = GrfKind::rbf;
  spec.sigma = 0.1;
  spec.length_scale = 0.1;
  Grid g = make_grid({0.0}, {1.0}, {101}, {AxisRole::space_x});
  GrfSampler sampler(spec, g);

  FieldSample f1 = sampler.draw(5);
  FieldSample f2 = sampler.draw(5);
  FieldSample f3 = sampler.draw(6);
  REQUIRE(f1.values.size() == 101);
  bool same = true;
  for (int64_t i = 0; i < 101; ++i) same = same && f1.values[i] == f2.values[i];
  CHECK(same);
  CHECK(max_abs(f3.values) > 0.0);

  const int64_t n = 100000;
  Array bank = sampler.draw_bank(123, n);
  const int64_t i0 = 50, lag = 10;  // physical lag 0.1 = length scale
  double v = 0.0, v1 = 0.0, cross = 0.0, anyv = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double a = bank.at(i, i0), b = bank.at(i, i0 + lag);
    v += a * a;
    v1 += b * b;
    cross += a * b;
    anyv += bank.at(i, 17) * bank.at(i, 17);
  }
  v /= n;
  v1 /= n;
  cross /= n;
  anyv /= n;
  CHECK(v == doctest::Approx(0.01).epsilon(0.05));
  CHECK(anyv == doctest::Approx(0.01).epsilon(0.05));
  const double corr = cross / std::sqrt(v * v1);
  CHECK(std::abs(corr - std::exp(-0.5)) < 0.05);

  GrfSpec zero = spec;
  zero.sigma = 0.0;
  FieldSample fz = GrfSampler(zero, g).draw(9);
  CHECK(max_abs(fz.values) == 0.0);
}

TEST_CASE("spectral laplacian sampler mode variance") {
  GrfSpec spec;
  spec.kind = GrfKind::spectral_laplacian;
  spec.laplacian_shift = 9.0;
  Grid g = make_unit_grid_2d(64, 64, AxisRole::space_x, AxisRole::space_y);
  GrfSampler sampler(spec, g);

  FieldSample a = sampler.draw(4);
  FieldSample b = sampler.draw(4);
  bool same = true;
  for (int64_t i = 0; i < a.values.size(); ++i) same = same && a.values[i] == b.values[i];
  CHECK(same);

  // recover the (1,0) basis coefficient by inverting the synthesis
  const int64_t s = 64;
  const double pi = 3.14159265358979323846;
  Eigen::MatrixXd phi(s, s);
  for (int64_t j = 0; j < s; ++j)
    for (int64_t m = 0; m < s; ++m) {
      double v = std::cos(pi * static_cast<double>(j) * g.node(0, m));
      phi(j, m) = j == 0 ? v : v * std::sqrt(2.0);
    }
  Eigen::MatrixXd phinv = phi.inverse();
  Eigen::VectorXd u = phinv.col(1), w = phinv.col(0);

  const int64_t n = 20000;
  double var10 = 0.0, mean00 = 0.0;
  Eigen::VectorXd wcoef0(s), wcoef1(s);
  for (int64_t i = 0; i < n; ++i) {
    FieldSample f = sampler.draw(1000 + i);
    Eigen::Map<const Eigen::MatrixXd> fm(f.values.data(), s, s);  // column-major view of f^T
    // values row-major (m, l); map reads (l, m), so xi = w/u contractions swap
    const double c10 = u.dot(fm * w);   // sum_l sum_m u_m f(m,l) w_l
    const double c00 = w.dot(fm * w);
    var10 += c10 * c10;
    mean00 += c00;
  }
  var10 /= n;
  mean00 /= n;
  const double want = std::pow(pi * pi + 9.0, -2.0);
  CHECK(var10 == doctest::Approx(want).epsilon(0.10));
  CHECK(std::abs(mean00) < 1e-10);  // zero mode removed

  Grid bad = make_grid({0.0, 0.0}, {1.0, 1.0}, {64, 32},
                       {AxisRole::space_x, AxisRole::space_y});
  CHECK_THROWS_AS(GrfSampler(spec, bad), std::invalid_argument);
}

TEST_CASE("darcy pushforward") {
  GrfSpec spec;
  spec.kind = GrfKind::spectral_laplacian;
  Grid g = make_unit_grid_2d(64, 64, AxisRole::space_x, AxisRole::space_y);
  GrfSampler sampler(spec, g);

  FieldSample zero{g, Array({64, 64}), FieldKind::source, 0};
  FieldSample az = darcy_pushforward(zero);
  CHECK(az.kind == FieldKind::permeability);
  CHECK(az.values[0] == 12.0);
  CHECK(max_abs(az.values) == 12.0);
  FieldSample ez = darcy_pushforward(zero, PushforwardKind::exponential);
  for (int64_t i = 0; i < ez.values.size(); ++i) REQUIRE(ez.values[i] == 1.0);

  double frac = 0.0;
  int64_t bad_codomain = 0;
  const int64_t n = 10000;
  for (int64_t i = 0; i < n; ++i) {
    FieldSample f = sampler.draw(77 + i);
    FieldSample a = darcy_pushforward(f);
    int64_t hi = 0;
    for (int64_t k = 0; k < a.values.size(); ++k) {
      bad_codomain += !(a.values[k] == 12.0 || a.values[k] == 3.0);
      hi += a.values[k] == 12.0;
    }
    frac += static_cast<double>(hi) / static_cast<double>(a.values.size());
  }
  frac /= static_cast<double>(n);
  CHECK(bad_codomain == 0);
  CHECK(std::abs(frac - 0.5) < 0.02);
}

TEST_CASE("kle intrinsic dimension") {
  // rank-1 family
  Array x({40, 13});
  for (int64_t i = 0; i < 40; ++i)
    for (int64_t j = 0; j < 13; ++j)
      x.at(i, j) = (1.0 + static_cast<double>(i)) * std::sin(0.3 * static_cast<double>(j));
  CHECK(kle_intrinsic_dim(x, 0.99) == 1);

  GrfSpec spec;
  spec.kind = GrfKind::rbf;
  spec.sigma = 0.1;
  spec.length_scale = 0.1;
  Grid g = make_grid({0.0}, {1.0}, {65}, {AxisRole::space_x});
  Array bank = GrfSampler(spec, g).draw_bank(31, 1000);
  const int64_t d99 = kle_intrinsic_dim(bank, 0.99);
  CHECK(d99 >= 8);
  CHECK(d99 <= 12);
  CHECK(kle_intrinsic_dim(bank, 0.90) <= d99);

  Array tiny({1, 4});
  CHECK_THROWS_AS(kle_intrinsic_dim(tiny, 0.99), std::invalid_argument);
  CHECK_THROWS_AS(kle_intrinsic_dim(bank, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kle_intrinsic_dim(bank, 1.5), std::invalid_argument);
}

TEST_CASE("powerlaw sampler is real, zero-mean-mode, deterministic") {
  GrfSpec spec;
  spec.kind = GrfKind::spectral_powerlaw;
  spec.tau = 15.0;
  spec.alpha_exp = 1.0;
  spec.boundary = BoundaryKind::periodic;
  Grid g = make_grid({0.0, 0.0}, {63.0 / 64.0, 63.0 / 64.0}, {64, 64},
                     {AxisRole::space_x, AxisRole::space_y});
  GrfSampler sampler(spec, g);
  FieldSample a = sampler.draw(8);
  FieldSample b = sampler.draw(8);
  bool same = true;
  for (int64_t i = 0; i < a.values.size(); ++i) same = same && a.values[i] == b.values[i];
  CHECK(same);
  CHECK(max_abs(a.values) > 0.0);
  CHECK(max_abs(a.values) < 1.0);

  // zero frequency removed: spatial mean of every draw vanishes
  double mean = 0.0;
  for (int64_t i = 0; i < a.values.size(); ++i) mean += a.values[i];
  CHECK(std::abs(mean / static_cast<double>(a.values.size())) < 1e-13);
}

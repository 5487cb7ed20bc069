#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "pio/reliability.hpp"
#include "pio/stats.hpp"
#include "pio/tensor.hpp"

using namespace pio;

namespace {

Array space_time(const std::vector<double>& series, int64_t row, int64_t rows) {
  const int64_t nt = static_cast<int64_t>(series.size());
  Array u({rows, nt});
  for (int64_t j = 0; j < nt; ++j) u[row * nt + j] = series[j];
  return u;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (size_t k = 1; k < x.size(); ++k) acc += 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
  return acc;
}

}  // namespace

TEST_CASE("limit-state margins follow the threshold-minus-peak rule") {
  LimitState ls;
  ls.e_h = 0.85;
  ls.x_sp = 1;

  Array u = space_time({0.1, -0.9, 0.3}, 1, 3);
  CHECK(std::abs(evaluate_limit_state(u, ls) - (-0.05)) < 1e-15);

  Array zero({3, 3});
  CHECK(evaluate_limit_state(zero, ls) == 0.85);

  LimitState fm;
  fm.e_h = 0.5;
  fm.probe = ProbeKind::field_max;
  Array constant({4, 4}, -0.3);
  CHECK(std::abs(evaluate_limit_state(constant, fm) - 0.2) < 1e-15);

  // frame stacks reduce per frame, then over the window
  Array frames({3, 2, 2});
  frames[1 * 4 + 2] = 0.9;   // frame 1
  frames[2 * 4 + 0] = -0.4;  // frame 2
  fm.window = std::make_pair<int64_t, int64_t>(1, 2);
  CHECK(std::abs(evaluate_limit_state(frames, fm) - (0.5 - 0.9)) < 1e-15);
  fm.window = std::make_pair<int64_t, int64_t>(2, 2);
  CHECK_THROWS_AS(evaluate_limit_state(frames, fm), std::invalid_argument);
  fm.window = std::make_pair<int64_t, int64_t>(1, 7);
  CHECK_THROWS_AS(evaluate_limit_state(frames, fm), std::invalid_argument);

  ls.x_sp = 9;
  CHECK_THROWS_AS(evaluate_limit_state(u, ls), std::out_of_range);
  ls.x_sp = 0;
  CHECK_THROWS_AS(evaluate_limit_state(Array({5}), ls), std::invalid_argument);
  fm.window.reset();
  CHECK_THROWS_AS(evaluate_limit_state(Array({2, 2, 2, 2}), fm), std::invalid_argument);
}

TEST_CASE("first passage interpolates linearly between frames") {
  std::vector<double> ramp(11);
  for (int k = 0; k <= 10; ++k) ramp[k] = k / 10.0;
  auto tau = first_passage_time(ramp, 0.5);
  REQUIRE(tau.has_value());
  CHECK(*tau == 5.0);

  CHECK(!first_passage_time(ramp, 2.0).has_value());

  auto quarter = first_passage_time({0.0, 1.0}, 0.25);
  REQUIRE(quarter.has_value());
  CHECK(*quarter == 0.25);

  auto immediate = first_passage_time({0.7, 0.1}, 0.5);
  REQUIRE(immediate.has_value());
  CHECK(*immediate == 0.0);

  // touching the threshold exactly is not a crossing; the strict exceedance
  // one frame later interpolates back to the touching frame
  auto touch = first_passage_time({0.3, 0.5, 0.7}, 0.5);
  REQUIRE(touch.has_value());
  CHECK(*touch == 1.0);

  CHECK_THROWS_AS(first_passage_time({}, 0.5), std::invalid_argument);
}

TEST_CASE("failure counting matches the binomial formulas") {
  std::vector<double> margins(1000, 1.0);
  for (int i = 0; i < 88; ++i) margins[i] = -0.5;
  ReliabilityReport rep = estimate_pf(margins);
  CHECK(rep.p_f == 0.088);
  CHECK(rep.n_failures == 88);
  CHECK(std::abs(rep.std_error - std::sqrt(0.088 * 0.912 / 1000.0)) < 1e-15);
  CHECK(std::abs(rep.std_error - 0.00896) < 1e-4);
  CHECK(std::abs(rep.beta - 1.353) < 1e-3);
  CHECK(rep.warning.empty());

  std::mt19937_64 eng(4);
  std::shuffle(margins.begin(), margins.end(), eng);
  ReliabilityReport shuffled = estimate_pf(margins);
  CHECK(shuffled.p_f == rep.p_f);
  CHECK(shuffled.beta == rep.beta);
  CHECK(shuffled.std_error == rep.std_error);

  ReliabilityReport none = estimate_pf(std::vector<double>(50, 0.2));
  CHECK(none.p_f == 0.0);
  CHECK(std::isinf(none.beta));
  CHECK(none.beta > 0);
  CHECK(!none.warning.empty());

  ReliabilityReport all = estimate_pf(std::vector<double>(50, -0.2));
  CHECK(all.p_f == 1.0);
  CHECK(std::isinf(all.beta));
  CHECK(all.beta < 0);

  // a zero margin is a survival: failure is strict
  ReliabilityReport edge = estimate_pf({0.0, -0.1});
  CHECK(edge.p_f == 0.5);

  CHECK_THROWS_AS(estimate_pf({}), std::invalid_argument);
}

TEST_CASE("reliability index reproduces the table conversions") {
  CHECK(std::abs(reliability_index(0.5)) < 1e-12);
  CHECK(std::abs(reliability_index(0.0880) - 1.353) < 1e-3);
  CHECK(std::abs(reliability_index(0.1795) - 0.917) < 1e-3);
  CHECK(std::abs(reliability_index(0.1350) - 1.103) < 1e-3);
  CHECK(std::abs(reliability_index(0.026) - 1.943) < 1e-3);

  CHECK(std::isinf(reliability_index(0.0)));
  CHECK(reliability_index(0.0) > 0);
  CHECK(std::isinf(reliability_index(1.0)));
  CHECK(reliability_index(1.0) < 0);
  CHECK_THROWS_AS(reliability_index(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(reliability_index(1.1), std::invalid_argument);

  for (double beta = -6.0; beta <= 6.0 + 1e-12; beta += 0.25) {
    const double pf = norm_cdf(-beta);
    CHECK(std::abs(reliability_index(pf) - beta) < 1e-7);
  }
}

TEST_CASE("kernel density estimate is normalized and Silverman-scaled") {
  RandomStream rng(31);
  std::vector<double> normal(10000);
  for (auto& v : normal) v = rng.normal();

  DensityCurve curve = pdf_estimate(normal);
  REQUIRE(curve.x.size() == 512);
  CHECK(std::abs(trapezoid(curve.x, curve.pdf) - 1.0) < 1e-3);

  // value at the origin close to the standard normal peak
  size_t k0 = 0;
  for (size_t k = 1; k < curve.x.size(); ++k)
    if (std::abs(curve.x[k]) < std::abs(curve.x[k0])) k0 = k;
  const double peak = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
  CHECK(std::abs(curve.pdf[k0] - peak) < 0.1 * peak);

  // bandwidth follows n^(-1/5) on lattice samples
  auto lattice = [](int64_t n) {
    std::vector<double> s(n);
    for (int64_t i = 0; i < n; ++i) s[i] = static_cast<double>(i) / (n - 1);
    return s;
  };
  const double b2 = pdf_estimate(lattice(100)).bandwidth;
  const double b3 = pdf_estimate(lattice(1000)).bandwidth;
  const double b4 = pdf_estimate(lattice(10000)).bandwidth;
  const double step = std::pow(10.0, 0.2);
  CHECK(std::abs(b2 / b3 - step) / step < 0.02);
  CHECK(std::abs(b3 / b4 - step) / step < 0.02);

  DensityCurve flat = pdf_estimate(std::vector<double>(10, 3.25));
  CHECK(flat.degenerate);
  REQUIRE(flat.x.size() == 1);
  CHECK(flat.x[0] == 3.25);
  CHECK(flat.pdf[0] == 1.0);

  CHECK_THROWS_AS(pdf_estimate({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("threshold sweeps are monotone on shared samples") {
  RandomStream rng(5);
  std::vector<double> peaks(2000);
  for (auto& v : peaks) v = std::abs(rng.normal());
  const double lo = *std::min_element(peaks.begin(), peaks.end());
  const double hi = *std::max_element(peaks.begin(), peaks.end());

  std::vector<double> thresholds;
  for (int k = 0; k <= 40; ++k)
    thresholds.push_back(lo - 0.1 + k * (hi - lo + 0.2) / 40.0);
  auto rows = threshold_sweep(peaks, thresholds);
  REQUIRE(rows.size() == thresholds.size());
  CHECK(rows.front().p_f == 1.0);
  CHECK(rows.back().p_f == 0.0);
  for (size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].p_f <= rows[k - 1].p_f);
    CHECK(rows[k].beta >= rows[k - 1].beta);
  }
  CHECK_THROWS_AS(threshold_sweep({}, thresholds), std::invalid_argument);
}

TEST_CASE("monte carlo driver reduces responses deterministically") {
  // synthetic responses: sample i has a known peak i/20 at row 1
  auto response = [](int64_t i) {
    std::vector<double> series = {0.0, static_cast<double>(i) / 20.0, 0.0};
    return space_time(series, 1, 3);
  };
  LimitState ls;
  ls.e_h = 0.45;
  ls.x_sp = 1;

  McsOptions serial;
  serial.threads = 1;
  ReliabilityReport rep = run_mcs(response, 20, ls, serial);
  // peaks 0/20 .. 19/20; strict exceedance of 0.45 leaves 10..19
  CHECK(rep.n_failures == 10);
  CHECK(rep.p_f == 0.5);
  REQUIRE(rep.samples.size() == 20);
  CHECK(rep.samples[7] == 7.0 / 20.0);
  CHECK(!rep.density.x.empty());

  McsOptions parallel;
  parallel.threads = 4;
  ReliabilityReport par = run_mcs(response, 20, ls, parallel);
  CHECK(par.p_f == rep.p_f);
  REQUIRE(par.samples.size() == rep.samples.size());
  for (size_t i = 0; i < rep.samples.size(); ++i) CHECK(par.samples[i] == rep.samples[i]);

  auto throwing = [](int64_t i) -> Array {
    if (i == 3) throw std::runtime_error("bad sample");
    return Array({2, 2});
  };
  LimitState fm;
  fm.probe = ProbeKind::field_max;
  CHECK_THROWS_AS(run_mcs(throwing, 8, fm, parallel), std::runtime_error);
  CHECK_THROWS_AS(run_mcs(response, 0, ls, serial), std::invalid_argument);
}

TEST_CASE("first-passage mode reports interpolated failure times") {
  // sample i ramps at rate (i+1)/10 per frame over 11 frames
  auto response = [](int64_t i) {
    std::vector<double> series(11);
    for (int k = 0; k <= 10; ++k) series[k] = k * (static_cast<double>(i) + 1.0) / 10.0;
    return space_time(series, 0, 1);
  };
  LimitState ls;
  ls.e_h = 0.5;
  ls.x_sp = 0;
  ls.mode = FailureMode::first_passage;

  McsOptions opt;
  opt.threads = 2;
  opt.frame_dt = 0.1;
  ReliabilityReport rep = run_mcs(response, 4, ls, opt);
  // every ramp crosses 0.5; crossing frame = 5/(i+1), scaled by frame_dt
  CHECK(rep.p_f == 1.0);
  REQUIRE(rep.samples.size() == 4);
  CHECK(std::abs(rep.samples[0] - 0.5) < 1e-12);
  CHECK(std::abs(rep.samples[1] - 0.25) < 1e-12);
  CHECK(std::abs(rep.samples[3] - 0.125) < 1e-12);
  CHECK(!rep.warning.empty());  // all failed: -infinity beta sentinel

  // a window hides the early crossing: only frames 8..10 are inspected
  ls.window = std::make_pair<int64_t, int64_t>(8, 10);
  ls.e_h = 0.85;
  ReliabilityReport windowed = run_mcs(response, 1, ls, opt);
  CHECK(windowed.n_failures == 1);
  REQUIRE(windowed.samples.size() == 1);
  CHECK(std::abs(windowed.samples[0] - 0.85) < 1e-12);

  // never crossing within the window is a survival
  ls.e_h = 5.0;
  ReliabilityReport safe = run_mcs(response, 1, ls, opt);
  CHECK(safe.n_failures == 0);
  CHECK(safe.samples.empty());
}

TEST_CASE("binomial intervals cover a known failure probability") {
  // margin = 1.2816 - z with z standard normal: P_f* = 0.10
  const double p_true = 0.10;
  RandomStream rng(2026);
  int covered = 0;
  const int runs = 500, n = 1000;
  for (int r = 0; r < runs; ++r) {
    int fails = 0;
    for (int i = 0; i < n; ++i) fails += (1.2816 - rng.normal()) < 0.0 ? 1 : 0;
    const double pf = static_cast<double>(fails) / n;
    const double se = std::sqrt(pf * (1.0 - pf) / n);
    if (pf - 1.96 * se <= p_true && p_true <= pf + 1.96 * se) ++covered;
  }
  MESSAGE("binomial CI coverage: ", covered, " of ", runs);
  CHECK(covered >= 465);
}

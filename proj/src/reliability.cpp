#include "pio/reliability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pio/stats.hpp"

namespace pio {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

std::pair<int64_t, int64_t> window_or_full(const LimitState& ls, int64_t n) {
  if (!ls.window) return {0, n - 1};
  const auto [t1, t2] = *ls.window;
  if (t1 < 0 || t2 >= n || t1 >= t2)
    throw std::invalid_argument("limit state: window out of range");
  return {t1, t2};
}

double windowed_peak(const std::vector<double>& series, int64_t t1, int64_t t2) {
  double peak = 0.0;
  for (int64_t j = t1; j <= t2; ++j) peak = std::max(peak, series[j]);
  return peak;
}

}  // namespace

std::vector<double> response_series(const Array& u, const LimitState& ls) {
  if (ls.probe == ProbeKind::point) {
    if (u.ndim() != 2)
      throw std::invalid_argument("point probe needs a (space, time) array");
    const int64_t nt = u.dim(1);
    if (ls.x_sp < 0 || ls.x_sp >= u.dim(0))
      throw std::out_of_range("probe index out of range");
    std::vector<double> s(nt);
    for (int64_t j = 0; j < nt; ++j) s[j] = std::abs(u[ls.x_sp * nt + j]);
    return s;
  }
  if (u.ndim() == 2) {
    double m = 0.0;
    for (int64_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i]));
    return {m};
  }
  if (u.ndim() == 3) {
    const int64_t frames = u.dim(0), per = u.dim(1) * u.dim(2);
    std::vector<double> s(frames, 0.0);
    for (int64_t f = 0; f < frames; ++f)
      for (int64_t i = 0; i < per; ++i) s[f] = std::max(s[f], std::abs(u[f * per + i]));
    return s;
  }
  throw std::invalid_argument("field_max probe needs a 2-D field or a 3-D frame stack");
}

double evaluate_limit_state(const Array& u, const LimitState& ls) {
  const std::vector<double> s = response_series(u, ls);
  const auto [t1, t2] = window_or_full(ls, static_cast<int64_t>(s.size()));
  return ls.e_h - windowed_peak(s, t1, t2);
}

std::optional<double> first_passage_time(const std::vector<double>& series, double e_h) {
  if (series.empty()) throw std::invalid_argument("first_passage_time: empty series");
  for (size_t k = 0; k < series.size(); ++k) {
    if (series[k] > e_h) {
      if (k == 0) return 0.0;
      const double a = series[k - 1], b = series[k];
      return static_cast<double>(k - 1) + (e_h - a) / (b - a);
    }
  }
  return std::nullopt;
}

ReliabilityReport estimate_pf(const std::vector<double>& margins) {
  if (margins.empty()) throw std::invalid_argument("estimate_pf: no samples");
  ReliabilityReport rep;
  rep.n_samples = static_cast<int64_t>(margins.size());
  for (double j : margins) rep.n_failures += j < 0.0 ? 1 : 0;
  rep.p_f = static_cast<double>(rep.n_failures) / static_cast<double>(rep.n_samples);
  rep.std_error = std::sqrt(rep.p_f * (1.0 - rep.p_f) / static_cast<double>(rep.n_samples));
  rep.beta = reliability_index(rep.p_f);
  if (rep.n_failures == 0)
    rep.warning = "no failures observed; beta reported as a +infinity sentinel";
  else if (rep.n_failures == rep.n_samples)
    rep.warning = "every sample failed; beta reported as a -infinity sentinel";
  rep.samples = margins;
  return rep;
}

double reliability_index(double p_f) {
  if (!(p_f >= 0.0 && p_f <= 1.0))
    throw std::invalid_argument("reliability_index: P_f outside [0, 1]");
  if (p_f == 0.0) return std::numeric_limits<double>::infinity();
  if (p_f == 1.0) return -std::numeric_limits<double>::infinity();
  return -norm_ppf(p_f);
}

DensityCurve pdf_estimate(const std::vector<double>& samples) {
  const int64_t n = static_cast<int64_t>(samples.size());
  if (n < 10) throw std::invalid_argument("pdf_estimate: need at least 10 samples");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();

  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  const double sd = std::sqrt(var);

  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const int64_t i0 = static_cast<int64_t>(pos);
    const double frac = pos - static_cast<double>(i0);
    return i0 + 1 < n ? sorted[i0] * (1.0 - frac) + sorted[i0 + 1] * frac : sorted[i0];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double scale = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;

  DensityCurve curve;
  if (!(scale > 0.0)) {
    curve.degenerate = true;
    curve.x = {lo};
    curve.pdf = {1.0};
    return curve;
  }
  const double b = 0.9 * scale * std::pow(static_cast<double>(n), -0.2);
  curve.bandwidth = b;
  const int points = 512;
  curve.x.resize(points);
  curve.pdf.resize(points);
  const double x0 = lo - 3.0 * b, x1 = hi + 3.0 * b;
  const double dx = (x1 - x0) / (points - 1);
  const double norm = kInvSqrt2Pi / (static_cast<double>(n) * b);
  for (int k = 0; k < points; ++k) {
    const double x = x0 + k * dx;
    double acc = 0.0;
    for (double s : samples) {
      const double z = (x - s) / b;
      acc += std::exp(-0.5 * z * z);
    }
    curve.x[k] = x;
    curve.pdf[k] = acc * norm;
  }
  return curve;
}

std::vector<SweepRow> threshold_sweep(const std::vector<double>& peaks,
                                      const std::vector<double>& thresholds) {
  if (peaks.empty()) throw std::invalid_argument("threshold_sweep: no responses");
  std::vector<SweepRow> rows;
  rows.reserve(thresholds.size());
  for (double e : thresholds) {
    int64_t fails = 0;
    for (double p : peaks) fails += p > e ? 1 : 0;
    const double pf = static_cast<double>(fails) / static_cast<double>(peaks.size());
    rows.push_back({e, pf, reliability_index(pf)});
  }
  return rows;
}

ReliabilityReport run_mcs(const std::function<Array(int64_t)>& response, int64_t n_samples,
                          const LimitState& ls, const McsOptions& opt) {
  if (n_samples < 1) throw std::invalid_argument("run_mcs: need at least one sample");
  if (!(opt.frame_dt > 0.0)) throw std::invalid_argument("run_mcs: frame_dt must be positive");

  const bool passage = ls.mode == FailureMode::first_passage;
  const double no_time = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> peaks(n_samples, 0.0);
  std::vector<double> times(passage ? n_samples : 0, no_time);

  int threads = opt.threads > 0 ? opt.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp<int64_t>(threads, 1, n_samples);

  std::atomic<int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int64_t i = next.fetch_add(1);
      if (i >= n_samples) return;
      try {
        const Array u = response(i);
        const std::vector<double> s = response_series(u, ls);
        const auto [t1, t2] = window_or_full(ls, static_cast<int64_t>(s.size()));
        peaks[i] = windowed_peak(s, t1, t2);
        if (passage && peaks[i] > ls.e_h) {
          const std::vector<double> win(s.begin() + t1, s.begin() + t2 + 1);
          times[i] = (static_cast<double>(t1) + *first_passage_time(win, ls.e_h)) *
                     opt.frame_dt;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n_samples);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<double> margins(n_samples);
  for (int64_t i = 0; i < n_samples; ++i) margins[i] = ls.e_h - peaks[i];
  ReliabilityReport rep = estimate_pf(margins);

  if (passage) {
    rep.samples.clear();
    for (double t : times)
      if (std::isfinite(t)) rep.samples.push_back(t);
  } else {
    rep.samples = std::move(peaks);
  }
  if (rep.samples.size() >= 10) {
    rep.density = pdf_estimate(rep.samples);
    if (rep.density.degenerate) {
      if (!rep.warning.empty()) rep.warning += "; ";
      rep.warning += "all sample statistics identical; density is a point mass";
    }
  } else {
    if (!rep.warning.empty()) rep.warning += "; ";
    rep.warning += "fewer than 10 sample statistics; no density estimate";
  }
  return rep;
}

}  // namespace pio

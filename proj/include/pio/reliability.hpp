#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pio/tensor.hpp"

namespace pio {

enum class ProbeKind { point, field_max };
enum class FailureMode { time_independent, first_passage };

// Failure event: J = e_h - max|u| over the probe set is negative. Point
// probes read one spatial row of a (space, time) solution; field_max reduces
// a static (s, s) field, or each frame of a (frames, s, s) stack, to its
// absolute maximum. The optional window restricts the time reduction to
// frame indices [first, second].
struct LimitState {
  double e_h = 0.0;
  ProbeKind probe = ProbeKind::point;
  int64_t x_sp = 0;
  std::optional<std::pair<int64_t, int64_t>> window;
  FailureMode mode = FailureMode::time_independent;
};

struct DensityCurve {
  std::vector<double> x, pdf;
  double bandwidth = 0.0;
  bool degenerate = false;  // point mass at x[0] carrying weight pdf[0]
};

struct ReliabilityReport {
  double p_f = 0.0;
  double beta = 0.0;  // +/- infinity sentinel when p_f is 0 or 1
  int64_t n_samples = 0;
  int64_t n_failures = 0;
  double std_error = 0.0;
  std::vector<double> samples;  // peak values, or failure times of failed runs
  DensityCurve density;
  std::string warning;
};

// |u| over the probe set: one value per time node for point probes, one per
// frame for field_max on a stack, a single value for a static field.
std::vector<double> response_series(const Array& u, const LimitState& ls);

double evaluate_limit_state(const Array& u, const LimitState& ls);

// Fractional index of the first strict exceedance of e_h, linearly
// interpolated from the previous sample; nullopt when never crossed.
std::optional<double> first_passage_time(const std::vector<double>& series, double e_h);

// Counting estimator over precomputed margins (failure iff margin < 0).
ReliabilityReport estimate_pf(const std::vector<double>& margins);

// beta = Phi^-1(1 - P_f); +/- infinity at the endpoints.
double reliability_index(double p_f);

// Gaussian kernel density, Silverman bandwidth, 512 points spanning
// [min - 3b, max + 3b]. Needs at least 10 samples.
DensityCurve pdf_estimate(const std::vector<double>& samples);

struct SweepRow {
  double e_h = 0.0;
  double p_f = 0.0;
  double beta = 0.0;
};

// Applies every threshold to one shared response set, so P_f is exactly
// nonincreasing and beta nondecreasing in e_h.
std::vector<SweepRow> threshold_sweep(const std::vector<double>& peaks,
                                      const std::vector<double>& thresholds);

struct McsOptions {
  int threads = 0;        // 0 picks the hardware thread count
  double frame_dt = 1.0;  // converts frame indices to reported failure times
};

// Monte Carlo failure probability. response(i) is evaluated once for each
// i in [0, n_samples) and must be safe to call concurrently for distinct i.
// samples holds peaks (time_independent) or failure times of the failed
// runs (first_passage); a density estimate is attached when 10 or more
// sample statistics are available.
ReliabilityReport run_mcs(const std::function<Array(int64_t)>& response, int64_t n_samples,
                          const LimitState& ls, const McsOptions& opt = {});

}  // namespace pio

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pio {

// mt19937_64 with explicit variate mappings. std::uniform_real_distribution and
// std::normal_distribution are implementation-defined, which would make sample
// banks differ across standard libraries; these mappings pin the exact stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // (0, 1), never exactly 0 or 1
  double uniform01() {
    while (true) {
      double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller with cached spare
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pio

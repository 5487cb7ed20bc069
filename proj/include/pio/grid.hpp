#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pio/tensor.hpp"

namespace pio {

enum class AxisRole { space_x, space_y, time };

// Uniform tensor-product grid with inclusive endpoints (linspace semantics).
struct Grid {
  std::vector<double> lo, hi;
  std::vector<int64_t> dims;
  std::vector<AxisRole> roles;

  int ndim() const { return static_cast<int>(dims.size()); }

  double spacing(int axis) const {
    return (hi[axis] - lo[axis]) / static_cast<double>(dims[axis] - 1);
  }

  double node(int axis, int64_t i) const {
    return lo[axis] + spacing(axis) * static_cast<double>(i);
  }

  std::vector<double> nodes(int axis) const {
    std::vector<double> x(dims[axis]);
    for (int64_t i = 0; i < dims[axis]; ++i) x[i] = node(axis, i);
    return x;
  }

  int64_t node_count() const {
    int64_t n = 1;
    for (int64_t d : dims) n *= d;
    return n;
  }
};

inline Grid make_grid(const std::vector<double>& lo, const std::vector<double>& hi,
                      const std::vector<int64_t>& dims,
                      const std::vector<AxisRole>& roles) {
  if (lo.size() != hi.size() || lo.size() != dims.size() || lo.size() != roles.size())
    throw std::invalid_argument("make_grid: inconsistent axis counts");
  for (size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] < 2) throw std::invalid_argument("make_grid: need at least 2 nodes per axis");
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(lo[a] < hi[a]))
      throw std::invalid_argument("make_grid: bad bounds");
  }
  return Grid{lo, hi, dims, roles};
}

inline Grid make_unit_grid_2d(int64_t n1, int64_t n2, AxisRole r1, AxisRole r2) {
  return make_grid({0.0, 0.0}, {1.0, 1.0}, {n1, n2}, {r1, r2});
}

enum class FieldKind { source, initial_condition, permeability, solution };

// Values of a function on a Grid, optionally with a leading channel index.
struct FieldSample {
  Grid grid;
  Array values;
  FieldKind kind = FieldKind::source;
  int64_t seed = 0;
};

}  // namespace pio

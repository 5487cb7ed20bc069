#pragma once

#include <cstdint>
#include <vector>

#include "pio/grid.hpp"
#include "pio/tensor.hpp"

namespace pio {

struct NeighborhoodSpec {
  double radius = 0.0;   // physical units
  int min_neighbors = 0; // 0 means grid ndim + 1
};

NeighborhoodSpec default_neighborhood(const Grid& g, double factor = 2.5);

// Precomputed sparse derivative operator over the nodes of a 2-D grid.
// Each row holds the least-squares projection weights of one node's
// neighborhood (all grid nodes within the radius), so applying the operator
// is a sparse matrix product. The same operator differentiates every batch
// entry and channel of a (B, H, W, C) array.
class StencilOp {
 public:
  static StencilOp gradient(const Grid& g, int axis, const NeighborhoodSpec& spec);

  Array apply(const Array& u) const;
  Array apply_t(const Array& y) const;  // exact transpose

  int64_t nodes() const { return static_cast<int64_t>(row_ptr_.size()) - 1; }
  int64_t rows_h() const { return h_; }
  int64_t cols_w() const { return w_; }

 private:
  std::vector<int64_t> row_ptr_;
  std::vector<int64_t> col_;
  std::vector<double> wgt_;
  int64_t h_ = 0, w_ = 0;
};

// Least-squares gradient of a sampled field at one node; exact on affine
// fields at every node including boundaries.
std::vector<double> sp_gradient(const Grid& g, const Array& field, int64_t node,
                                const NeighborhoodSpec& spec);

Array sp_gradient_field(const Grid& g, const Array& u, int axis,
                        const NeighborhoodSpec& spec);

// Gradient of the gradient component (two first-derivative passes).
Array sp_second_derivative(const Grid& g, const Array& u, int axis,
                           const NeighborhoodSpec& spec);

// Validation oracle: central differences inside, one-sided second order at
// the ends.
Array fd_gradient_oracle(const Grid& g, const Array& u, int axis);

}  // namespace pio

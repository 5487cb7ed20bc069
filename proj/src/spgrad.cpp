#include "pio/spgrad.hpp"

#include <cmath>
#include <stdexcept>

namespace pio {

namespace {

void check_grid(const Grid& g) {
  if (g.ndim() != 2) throw std::invalid_argument("spgrad: grid must be 2-D");
}

void check_field(const Grid& g, const Array& u) {
  if (u.ndim() != 4 || u.dim(1) != g.dims[0] || u.dim(2) != g.dims[1])
    throw std::invalid_argument("spgrad: field must be (B, H, W, C) on the grid");
}

struct NodeWeights {
  std::vector<int64_t> col;
  std::vector<double> w;
};

// Least-squares weights of one node: w_i = (M^{-1} dx_i)_axis with
// M = sum dx dx^T over the neighborhood, and -sum w_i on the node itself.
void node_weights(const Grid& g, int64_t i, int64_t j, int axis, double radius,
                  int min_nb, NodeWeights& out) {
  const double h0 = g.spacing(0), h1 = g.spacing(1);
  const int64_t H = g.dims[0], W = g.dims[1];
  const int64_t r0 = static_cast<int64_t>(std::floor(radius / h0));
  const int64_t r1 = static_cast<int64_t>(std::floor(radius / h1));
  const double r2 = radius * radius * (1.0 + 1e-12);
  double m00 = 0, m01 = 0, m11 = 0;
  out.col.clear();
  out.w.clear();
  std::vector<std::pair<double, double>> dxs;
  for (int64_t di = -r0; di <= r0; ++di) {
    const int64_t ii = i + di;
    if (ii < 0 || ii >= H) continue;
    for (int64_t dj = -r1; dj <= r1; ++dj) {
      if (di == 0 && dj == 0) continue;
      const int64_t jj = j + dj;
      if (jj < 0 || jj >= W) continue;
      const double dx = di * h0, dy = dj * h1;
      if (dx * dx + dy * dy > r2) continue;
      m00 += dx * dx;
      m01 += dx * dy;
      m11 += dy * dy;
      out.col.push_back(ii * W + jj);
      dxs.emplace_back(dx, dy);
    }
  }
  if (static_cast<int>(out.col.size()) < min_nb)
    throw std::runtime_error("spgrad: neighborhood has too few nodes");
  const double tr = m00 + m11;
  const double det = m00 * m11 - m01 * m01;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  const double lmin = 0.5 * (tr - disc), lmax = 0.5 * (tr + disc);
  if (!(lmin > 0.0) || lmax / lmin >= 1e12)
    throw std::runtime_error("spgrad: degenerate neighborhood geometry");
  const double inv00 = m11 / det, inv01 = -m01 / det, inv11 = m00 / det;
  double center = 0;
  out.w.resize(out.col.size());
  for (size_t k = 0; k < dxs.size(); ++k) {
    const double gx = inv00 * dxs[k].first + inv01 * dxs[k].second;
    const double gy = inv01 * dxs[k].first + inv11 * dxs[k].second;
    const double wk = axis == 0 ? gx : gy;
    out.w[k] = wk;
    center -= wk;
  }
  out.col.push_back(i * W + j);
  out.w.push_back(center);
}

void check_spec(const Grid& g, const NeighborhoodSpec& spec) {
  const double hmax = std::max(g.spacing(0), g.spacing(1));
  if (spec.radius < 1.5 * hmax * (1.0 - 1e-12))
    throw std::invalid_argument("spgrad: radius must be at least 1.5x the grid spacing");
}

}  // namespace

NeighborhoodSpec default_neighborhood(const Grid& g, double factor) {
  check_grid(g);
  NeighborhoodSpec s;
  s.radius = factor * std::max(g.spacing(0), g.spacing(1));
  s.min_neighbors = g.ndim() + 1;
  return s;
}

StencilOp StencilOp::gradient(const Grid& g, int axis, const NeighborhoodSpec& spec) {
  check_grid(g);
  check_spec(g, spec);
  if (axis < 0 || axis >= 2) throw std::invalid_argument("spgrad: axis out of range");
  const int min_nb = spec.min_neighbors > 0 ? spec.min_neighbors : g.ndim() + 1;
  StencilOp op;
  op.h_ = g.dims[0];
  op.w_ = g.dims[1];
  const int64_t n = op.h_ * op.w_;
  op.row_ptr_.reserve(n + 1);
  op.row_ptr_.push_back(0);
  NodeWeights nw;
  for (int64_t i = 0; i < op.h_; ++i)
    for (int64_t j = 0; j < op.w_; ++j) {
      node_weights(g, i, j, axis, spec.radius, min_nb, nw);
      op.col_.insert(op.col_.end(), nw.col.begin(), nw.col.end());
      op.wgt_.insert(op.wgt_.end(), nw.w.begin(), nw.w.end());
      op.row_ptr_.push_back(static_cast<int64_t>(op.col_.size()));
    }
  return op;
}

Array StencilOp::apply(const Array& u) const {
  if (u.ndim() != 4 || u.dim(1) != h_ || u.dim(2) != w_)
    throw std::invalid_argument("spgrad: field shape does not match the operator grid");
  const int64_t B = u.dim(0), C = u.dim(3), N = h_ * w_;
  Array out(u.shape());
  for (int64_t b = 0; b < B; ++b) {
    const double* up = u.data() + b * N * C;
    double* op = out.data() + b * N * C;
    for (int64_t r = 0; r < N; ++r) {
      double* orow = op + r * C;
      for (int64_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
        const double* urow = up + col_[e] * C;
        const double wv = wgt_[e];
        for (int64_t c = 0; c < C; ++c) orow[c] += wv * urow[c];
      }
    }
  }
  return out;
}

Array StencilOp::apply_t(const Array& y) const {
  if (y.ndim() != 4 || y.dim(1) != h_ || y.dim(2) != w_)
    throw std::invalid_argument("spgrad: field shape does not match the operator grid");
  const int64_t B = y.dim(0), C = y.dim(3), N = h_ * w_;
  Array out(y.shape());
  for (int64_t b = 0; b < B; ++b) {
    const double* yp = y.data() + b * N * C;
    double* op = out.data() + b * N * C;
    for (int64_t r = 0; r < N; ++r) {
      const double* yrow = yp + r * C;
      for (int64_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
        double* orow = op + col_[e] * C;
        const double wv = wgt_[e];
        for (int64_t c = 0; c < C; ++c) orow[c] += wv * yrow[c];
      }
    }
  }
  return out;
}

std::vector<double> sp_gradient(const Grid& g, const Array& field, int64_t node,
                                const NeighborhoodSpec& spec) {
  check_grid(g);
  check_spec(g, spec);
  if (field.size() != g.node_count())
    throw std::invalid_argument("spgrad: field size does not match the grid");
  if (node < 0 || node >= g.node_count())
    throw std::invalid_argument("spgrad: node index out of range");
  const int min_nb = spec.min_neighbors > 0 ? spec.min_neighbors : g.ndim() + 1;
  const int64_t W = g.dims[1];
  std::vector<double> grad(2, 0.0);
  NodeWeights nw;
  for (int axis = 0; axis < 2; ++axis) {
    node_weights(g, node / W, node % W, axis, spec.radius, min_nb, nw);
    double acc = 0;
    for (size_t k = 0; k < nw.col.size(); ++k) acc += nw.w[k] * field.data()[nw.col[k]];
    grad[axis] = acc;
  }
  return grad;
}

Array sp_gradient_field(const Grid& g, const Array& u, int axis,
                        const NeighborhoodSpec& spec) {
  check_field(g, u);
  return StencilOp::gradient(g, axis, spec).apply(u);
}

Array sp_second_derivative(const Grid& g, const Array& u, int axis,
                           const NeighborhoodSpec& spec) {
  check_field(g, u);
  StencilOp op = StencilOp::gradient(g, axis, spec);
  return op.apply(op.apply(u));
}

Array fd_gradient_oracle(const Grid& g, const Array& u, int axis) {
  check_grid(g);
  check_field(g, u);
  if (axis < 0 || axis >= 2) throw std::invalid_argument("spgrad: axis out of range");
  if (g.dims[axis] < 3) throw std::invalid_argument("spgrad: need at least 3 nodes");
  const int64_t B = u.dim(0), H = u.dim(1), W = u.dim(2), C = u.dim(3);
  const double h = g.spacing(axis);
  Array out(u.shape());
  const int64_t n = g.dims[axis];
  auto idx = [&](int64_t b, int64_t a, int64_t other, int64_t c) {
    return axis == 0 ? ((b * H + a) * W + other) * C + c : ((b * H + other) * W + a) * C + c;
  };
  const int64_t other_n = axis == 0 ? W : H;
  for (int64_t b = 0; b < B; ++b)
    for (int64_t o = 0; o < other_n; ++o)
      for (int64_t c = 0; c < C; ++c) {
        auto uat = [&](int64_t a) { return u.data()[idx(b, a, o, c)]; };
        auto oat = [&](int64_t a) -> double& { return out.data()[idx(b, a, o, c)]; };
        oat(0) = (-3.0 * uat(0) + 4.0 * uat(1) - uat(2)) / (2.0 * h);
        for (int64_t a = 1; a < n - 1; ++a) oat(a) = (uat(a + 1) - uat(a - 1)) / (2.0 * h);
        oat(n - 1) = (3.0 * uat(n - 1) - 4.0 * uat(n - 2) + uat(n - 3)) / (2.0 * h);
      }
  return out;
}

}  // namespace pio

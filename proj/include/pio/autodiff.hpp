#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pio/tensor.hpp"

namespace pio::ad {

struct Node;
using NodeRef = std::shared_ptr<Node>;

// One reverse-mode tape entry. Nodes form a DAG through `parents`; creation
// order is a valid topological order. During the backward sweep a node's
// storage is released as soon as its contribution has been pushed to its
// parents, which keeps peak memory near the forward-pass peak.
struct Node {
  Array value;
  Array grad;
  bool requires_grad = false;  // leaf whose grad is kept after backward
  bool needs_grad = false;     // some ancestor leaf requires grad
  int64_t order = 0;
  std::vector<NodeRef> parents;
  std::function<void(Node&)> backprop;
};

class Var {
 public:
  Var() = default;
  explicit Var(NodeRef n) : node_(std::move(n)) {}
  static Var leaf(Array value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Array& value() const { return node_->value; }
  const Array& grad() const { return node_->grad; }
  bool needs_grad() const { return node_->needs_grad; }
  const NodeRef& node() const { return node_; }

 private:
  NodeRef node_;
};

// Seeds d(root)/d(root) = 1 and sweeps the reachable graph in reverse
// creation order. root must be scalar (size 1). Intermediate node storage is
// freed during the sweep; leaf values and requires_grad leaf grads survive.
void backward(const Var& root);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var add_const(const Var& a, const Array& c);
Var sub_const(const Var& a, const Array& c);  // a - c
Var mul_const(const Var& a, const Array& c);
Var square(const Var& a);
Var sqrt_v(const Var& a);

enum class Activation { gelu, silu, tanh_act };
Var activate(const Var& a, Activation kind);

// (..., Cin) x (Cin, Cout) row-wise product; bias adds over the last axis.
Var matmul(const Var& x, const Var& w);
Var add_bias(const Var& x, const Var& b);

Var sum(const Var& a);                 // -> shape {1}
Var mean(const Var& a);                // -> shape {1}
Var sum_per_sample(const Var& a);      // (B, ...) -> shape {B}

// Generic linear operator with a caller-supplied exact transpose.
Var linear_map(const Var& x, std::function<Array(const Array&)> fwd,
               std::function<Array(const Array&)> bwd);

// Per-location channel mixing of selected segments of a flat coefficient
// vector; unselected entries pass through unchanged. Segment i holds a
// (batch, locs, channels) band at `offset` in row-major order, and rs[i] is
// its (locs, channels, channels) mixing tensor.
struct BandSeg {
  int64_t offset = 0, batch = 0, locs = 0, channels = 0;
};
Var band_mix(const Var& flat, const std::vector<Var>& rs, const std::vector<BandSeg>& segs);

}  // namespace pio::ad

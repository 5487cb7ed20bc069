#include "pio/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace pio::ad {

namespace {

std::atomic<int64_t> g_order{0};

NodeRef make_node(Array value, std::vector<NodeRef> parents,
                  std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->order = ++g_order;
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->needs_grad;
  n->needs_grad = needs;
  if (needs) {
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return n;
}

void ensure_grad(Node& n) {
  if (n.grad.size() == 0) n.grad = Array(n.value.shape());
}

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

Var Var::leaf(Array value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->order = ++g_order;
  n->requires_grad = requires_grad;
  n->needs_grad = requires_grad;
  return Var(n);
}

void backward(const Var& root) {
  if (!root.defined() || root.value().size() != 1)
    throw std::invalid_argument("backward: root must be a defined scalar");
  std::vector<Node*> order;
  std::vector<NodeRef> keep;  // guards lifetime during the sweep
  std::unordered_set<Node*> seen;
  std::vector<NodeRef> stack{root.node()};
  seen.insert(root.node().get());
  keep.push_back(root.node());
  while (!stack.empty()) {
    NodeRef n = stack.back();
    stack.pop_back();
    order.push_back(n.get());
    for (const auto& p : n->parents)
      if (p->needs_grad && seen.insert(p.get()).second) {
        keep.push_back(p);
        stack.push_back(p);
      }
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->order > b->order; });
  root.node()->grad = Array(root.value().shape(), 1.0);
  for (Node* n : order) {
    if (n->backprop && n->grad.size() != 0) n->backprop(*n);
    if (!n->requires_grad) {
      if (n->backprop) n->value = Array();
      n->grad = Array();
      n->parents.clear();
      n->backprop = nullptr;
    }
  }
}

Var add(const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value())) throw std::invalid_argument("add: shape mismatch");
  Array v = a.value();
  v += b.value();
  return Var(make_node(std::move(v), {a.node(), b.node()}, [](Node& n) {
    for (int s = 0; s < 2; ++s) {
      Node& p = *n.parents[s];
      if (!p.needs_grad) continue;
      ensure_grad(p);
      for (int64_t i = 0; i < p.grad.size(); ++i) p.grad.data()[i] += n.grad.data()[i];
    }
  }));
}

Var sub(const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value())) throw std::invalid_argument("sub: shape mismatch");
  Array v = a.value();
  v -= b.value();
  return Var(make_node(std::move(v), {a.node(), b.node()}, [](Node& n) {
    for (int s = 0; s < 2; ++s) {
      Node& p = *n.parents[s];
      if (!p.needs_grad) continue;
      ensure_grad(p);
      const double sign = s == 0 ? 1.0 : -1.0;
      for (int64_t i = 0; i < p.grad.size(); ++i) p.grad.data()[i] += sign * n.grad.data()[i];
    }
  }));
}

Var mul(const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value())) throw std::invalid_argument("mul: shape mismatch");
  Array v(a.value().shape());
  for (int64_t i = 0; i < v.size(); ++i) v.data()[i] = a.value().data()[i] * b.value().data()[i];
  return Var(make_node(std::move(v), {a.node(), b.node()}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.needs_grad) {
      ensure_grad(pa);
      for (int64_t i = 0; i < pa.grad.size(); ++i)
        pa.grad.data()[i] += n.grad.data()[i] * pb.value.data()[i];
    }
    if (pb.needs_grad) {
      ensure_grad(pb);
      for (int64_t i = 0; i < pb.grad.size(); ++i)
        pb.grad.data()[i] += n.grad.data()[i] * pa.value.data()[i];
    }
  }));
}

Var scale(const Var& a, double s) {
  Array v = a.value();
  v *= s;
  return Var(make_node(std::move(v), {a.node()}, [s](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    for (int64_t i = 0; i < p.grad.size(); ++i) p.grad.data()[i] += s * n.grad.data()[i];
  }));
}

Var add_scalar(const Var& a, double s) {
  Array v = a.value();
  for (int64_t i = 0; i < v.size(); ++i) v.data()[i] += s;
  return Var(make_node(std::move(v), {a.node()}, [](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    for (int64_t i = 0; i < p.grad.size(); ++i) p.grad.data()[i] += n.grad.data()[i];
  }));
}

namespace {
Var affine_const(const Var& a, const Array& c, double csign) {
  if (!a.value().same_shape(c)) throw std::invalid_argument("const op: shape mismatch");
  Array v = a.value();
  for (int64_t i = 0; i < v.size(); ++i) v.data()[i] += csign * c.data()[i];
  return Var(make_node(std::move(v), {a.node()}, [](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    for (int64_t i = 0; i < p.grad.size(); ++i) p.grad.data()[i] += n.grad.data()[i];
  }));
}
}  // namespace

Var add_const(const Var& a, const Array& c) { return affine_const(a, c, 1.0); }
Var sub_const(const Var& a, const Array& c) { return affine_const(a, c, -1.0); }

Var mul_const(const Var& a, const Array& c) {
  if (!a.value().same_shape(c)) throw std::invalid_argument("mul_const: shape mismatch");
  Array v(a.value().shape());
  for (int64_t i = 0; i < v.size(); ++i) v.data()[i] = a.value().data()[i] * c.data()[i];
  Array ccopy = c;
  return Var(make_node(std::move(v), {a.node()}, [cc = std::move(ccopy)](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    for (int64_t i = 0; i < p.grad.size(); ++i)
      p.grad.data()[i] += n.grad.data()[i] * cc.data()[i];
  }));
}

Var square(const Var& a) {
  Array v(a.value().shape());
  for (int64_t i = 0; i < v.size(); ++i) {
    const double x = a.value().data()[i];
    v.data()[i] = x * x;
  }
  return Var(make_node(std::move(v), {a.node()}, [](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    for (int64_t i = 0; i < p.grad.size(); ++i)
      p.grad.data()[i] += 2.0 * p.value.data()[i] * n.grad.data()[i];
  }));
}

Var sqrt_v(const Var& a) {
  Array v(a.value().shape());
  for (int64_t i = 0; i < v.size(); ++i) v.data()[i] = std::sqrt(a.value().data()[i]);
  return Var(make_node(std::move(v), {a.node()}, [](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    for (int64_t i = 0; i < p.grad.size(); ++i) {
      const double y = std::sqrt(p.value.data()[i]);
      p.grad.data()[i] += 0.5 / std::max(y, 1e-300) * n.grad.data()[i];
    }
  }));
}

Var activate(const Var& a, Activation kind) {
  const Array& x = a.value();
  Array v(x.shape());
  switch (kind) {
    case Activation::gelu:
      for (int64_t i = 0; i < v.size(); ++i) {
        const double t = x.data()[i];
        v.data()[i] = 0.5 * t * std::erfc(-t * M_SQRT1_2);
      }
      break;
    case Activation::silu:
      for (int64_t i = 0; i < v.size(); ++i) {
        const double t = x.data()[i];
        v.data()[i] = t / (1.0 + std::exp(-t));
      }
      break;
    case Activation::tanh_act:
      for (int64_t i = 0; i < v.size(); ++i) v.data()[i] = std::tanh(x.data()[i]);
      break;
  }
  return Var(make_node(std::move(v), {a.node()}, [kind](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    for (int64_t i = 0; i < p.grad.size(); ++i) {
      const double t = p.value.data()[i];
      double d = 0;
      switch (kind) {
        case Activation::gelu: {
          const double cdf = 0.5 * std::erfc(-t * M_SQRT1_2);
          d = cdf + t * inv_sqrt_2pi * std::exp(-0.5 * t * t);
          break;
        }
        case Activation::silu: {
          const double s = 1.0 / (1.0 + std::exp(-t));
          d = s * (1.0 + t * (1.0 - s));
          break;
        }
        case Activation::tanh_act: {
          const double y = std::tanh(t);
          d = 1.0 - y * y;
          break;
        }
      }
      p.grad.data()[i] += d * n.grad.data()[i];
    }
  }));
}

Var matmul(const Var& x, const Var& w) {
  const Array& xv = x.value();
  const Array& wv = w.value();
  if (wv.ndim() != 2) throw std::invalid_argument("matmul: weight must be 2-D");
  const int64_t cin = wv.dim(0), cout = wv.dim(1);
  if (xv.ndim() < 1 || xv.shape().back() != cin)
    throw std::invalid_argument("matmul: trailing axis mismatch");
  const int64_t m = xv.size() / cin;
  std::vector<int64_t> oshape = xv.shape();
  oshape.back() = cout;
  Array v(oshape);
  {
    CMatMap X(xv.data(), m, cin), W(wv.data(), cin, cout);
    MatMap Y(v.data(), m, cout);
    Y.noalias() = X * W;
  }
  return Var(make_node(std::move(v), {x.node(), w.node()}, [m, cin, cout](Node& n) {
    Node& px = *n.parents[0];
    Node& pw = *n.parents[1];
    CMatMap G(n.grad.data(), m, cout);
    if (px.needs_grad) {
      ensure_grad(px);
      CMatMap W(pw.value.data(), cin, cout);
      MatMap DX(px.grad.data(), m, cin);
      DX.noalias() += G * W.transpose();
    }
    if (pw.needs_grad) {
      ensure_grad(pw);
      CMatMap X(px.value.data(), m, cin);
      MatMap DW(pw.grad.data(), cin, cout);
      DW.noalias() += X.transpose() * G;
    }
  }));
}

Var add_bias(const Var& x, const Var& b) {
  const Array& xv = x.value();
  const Array& bv = b.value();
  const int64_t c = bv.size();
  if (xv.shape().back() != c) throw std::invalid_argument("add_bias: channel mismatch");
  Array v = xv;
  const int64_t m = xv.size() / c;
  for (int64_t r = 0; r < m; ++r)
    for (int64_t i = 0; i < c; ++i) v.data()[r * c + i] += bv.data()[i];
  return Var(make_node(std::move(v), {x.node(), b.node()}, [m, c](Node& n) {
    Node& px = *n.parents[0];
    Node& pb = *n.parents[1];
    if (px.needs_grad) {
      ensure_grad(px);
      for (int64_t i = 0; i < px.grad.size(); ++i) px.grad.data()[i] += n.grad.data()[i];
    }
    if (pb.needs_grad) {
      ensure_grad(pb);
      for (int64_t r = 0; r < m; ++r)
        for (int64_t i = 0; i < c; ++i) pb.grad.data()[i] += n.grad.data()[r * c + i];
    }
  }));
}

Var sum(const Var& a) {
  double s = 0;
  for (int64_t i = 0; i < a.value().size(); ++i) s += a.value().data()[i];
  return Var(make_node(Array({1}, s), {a.node()}, [](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    const double g = n.grad.data()[0];
    for (int64_t i = 0; i < p.grad.size(); ++i) p.grad.data()[i] += g;
  }));
}

Var mean(const Var& a) {
  const double inv = 1.0 / static_cast<double>(a.value().size());
  double s = 0;
  for (int64_t i = 0; i < a.value().size(); ++i) s += a.value().data()[i];
  return Var(make_node(Array({1}, s * inv), {a.node()}, [inv](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    const double g = n.grad.data()[0] * inv;
    for (int64_t i = 0; i < p.grad.size(); ++i) p.grad.data()[i] += g;
  }));
}

Var sum_per_sample(const Var& a) {
  const Array& x = a.value();
  if (x.ndim() < 1) throw std::invalid_argument("sum_per_sample: need a batch axis");
  const int64_t b = x.dim(0);
  const int64_t per = x.size() / b;
  Array v({b});
  for (int64_t s = 0; s < b; ++s) {
    double acc = 0;
    for (int64_t i = 0; i < per; ++i) acc += x.data()[s * per + i];
    v.data()[s] = acc;
  }
  return Var(make_node(std::move(v), {a.node()}, [b, per](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    for (int64_t s = 0; s < b; ++s) {
      const double g = n.grad.data()[s];
      for (int64_t i = 0; i < per; ++i) p.grad.data()[s * per + i] += g;
    }
  }));
}

Var linear_map(const Var& x, std::function<Array(const Array&)> fwd,
               std::function<Array(const Array&)> bwd) {
  Array v = fwd(x.value());
  return Var(make_node(std::move(v), {x.node()}, [bw = std::move(bwd)](Node& n) {
    Node& p = *n.parents[0];
    ensure_grad(p);
    Array gx = bw(n.grad);
    if (!gx.same_shape(p.grad)) throw std::logic_error("linear_map: transpose shape mismatch");
    for (int64_t i = 0; i < p.grad.size(); ++i) p.grad.data()[i] += gx.data()[i];
  }));
}

Var band_mix(const Var& flat, const std::vector<Var>& rs, const std::vector<BandSeg>& segs) {
  if (rs.size() != segs.size()) throw std::invalid_argument("band_mix: inconsistent inputs");
  const Array& x = flat.value();
  Array v = x;
  for (size_t k = 0; k < segs.size(); ++k) {
    const BandSeg& s = segs[k];
    const Array& r = rs[k].value();
    if (r.size() != s.locs * s.channels * s.channels)
      throw std::invalid_argument("band_mix: mixing tensor size mismatch");
    if (s.offset + s.batch * s.locs * s.channels > x.size())
      throw std::invalid_argument("band_mix: segment out of range");
    for (int64_t b = 0; b < s.batch; ++b)
      for (int64_t t = 0; t < s.locs; ++t) {
        const double* xr = x.data() + s.offset + (b * s.locs + t) * s.channels;
        double* yr = v.data() + s.offset + (b * s.locs + t) * s.channels;
        const double* rt = r.data() + t * s.channels * s.channels;
        for (int64_t co = 0; co < s.channels; ++co) {
          double acc = 0;
          const double* rrow = rt + co * s.channels;
          for (int64_t ci = 0; ci < s.channels; ++ci) acc += rrow[ci] * xr[ci];
          yr[co] = acc;
        }
      }
  }
  std::vector<NodeRef> parents{flat.node()};
  for (const auto& r : rs) parents.push_back(r.node());
  std::vector<BandSeg> segs_c = segs;
  return Var(make_node(std::move(v), std::move(parents), [segs_c](Node& n) {
    Node& px = *n.parents[0];
    if (px.needs_grad) {
      ensure_grad(px);
      for (int64_t i = 0; i < px.grad.size(); ++i) px.grad.data()[i] += n.grad.data()[i];
      // selected segments map through R, not identity: replace their share
      for (size_t k = 0; k < segs_c.size(); ++k) {
        const BandSeg& s = segs_c[k];
        const Array& r = n.parents[k + 1]->value;
        for (int64_t b = 0; b < s.batch; ++b)
          for (int64_t t = 0; t < s.locs; ++t) {
            const int64_t at = s.offset + (b * s.locs + t) * s.channels;
            const double* gy = n.grad.data() + at;
            double* gx = px.grad.data() + at;
            const double* rt = r.data() + t * s.channels * s.channels;
            for (int64_t ci = 0; ci < s.channels; ++ci) gx[ci] -= gy[ci];
            for (int64_t co = 0; co < s.channels; ++co) {
              const double g = gy[co];
              const double* rrow = rt + co * s.channels;
              for (int64_t ci = 0; ci < s.channels; ++ci) gx[ci] += g * rrow[ci];
            }
          }
      }
    }
    for (size_t k = 0; k < segs_c.size(); ++k) {
      Node& pr = *n.parents[k + 1];
      if (!pr.needs_grad) continue;
      ensure_grad(pr);
      const BandSeg& s = segs_c[k];
      const Array& x = px.value;
      for (int64_t b = 0; b < s.batch; ++b)
        for (int64_t t = 0; t < s.locs; ++t) {
          const int64_t at = s.offset + (b * s.locs + t) * s.channels;
          const double* gy = n.grad.data() + at;
          const double* xr = x.data() + at;
          double* rg = pr.grad.data() + t * s.channels * s.channels;
          for (int64_t co = 0; co < s.channels; ++co) {
            const double g = gy[co];
            double* rrow = rg + co * s.channels;
            for (int64_t ci = 0; ci < s.channels; ++ci) rrow[ci] += g * xr[ci];
          }
        }
    }
  }));
}

}  // namespace pio::ad

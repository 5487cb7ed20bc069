#include "pio/physics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pio {

namespace {

// The stencil references point into the owning PhysicsLoss; graphs built by
// it must be consumed while the instance is alive.
ad::Var first_derivative(const ad::Var& x, const StencilOp& op) {
  const StencilOp* p = &op;
  return ad::linear_map(
      x, [p](const Array& a) { return p->apply(a); },
      [p](const Array& y) { return p->apply_t(y); });
}

ad::Var laplacian(const ad::Var& x, const StencilOp& g0, const StencilOp& g1) {
  const StencilOp *p0 = &g0, *p1 = &g1;
  return ad::linear_map(
      x,
      [p0, p1](const Array& a) {
        Array out = p0->apply(p0->apply(a));
        out += p1->apply(p1->apply(a));
        return out;
      },
      [p0, p1](const Array& y) {
        Array out = p0->apply_t(p0->apply_t(y));
        out += p1->apply_t(p1->apply_t(y));
        return out;
      });
}

ad::Var second_derivative(const ad::Var& x, const StencilOp& op) {
  const StencilOp* p = &op;
  return ad::linear_map(
      x, [p](const Array& a) { return p->apply(p->apply(a)); },
      [p](const Array& y) { return p->apply_t(p->apply_t(y)); });
}

// (B, H, W, C) -> (B, n) values at fixed per-sample flat offsets
ad::Var gather_nodes(const ad::Var& x, std::vector<int64_t> idxs) {
  const int64_t n = static_cast<int64_t>(idxs.size());
  const int64_t per = x.value().size() / x.value().dim(0);
  auto fwd = [idxs, n, per](const Array& a) {
    const int64_t b = a.dim(0);
    Array out({b, n});
    for (int64_t s = 0; s < b; ++s)
      for (int64_t k = 0; k < n; ++k) out.at(s, k) = a[s * per + idxs[k]];
    return out;
  };
  const auto xshape = x.value().shape();
  auto bwd = [idxs, n, per, xshape](const Array& y) {
    const int64_t b = y.dim(0);
    Array xbar(xshape);
    for (int64_t s = 0; s < b; ++s)
      for (int64_t k = 0; k < n; ++k) xbar[s * per + idxs[k]] += y.at(s, k);
    return xbar;
  };
  return ad::linear_map(x, fwd, bwd);
}

// (B, H, W, C) -> (B, n) signed pair differences x[p] - x[q]
ad::Var gather_pair_diffs(const ad::Var& x, std::vector<int64_t> p, std::vector<int64_t> q) {
  const int64_t n = static_cast<int64_t>(p.size());
  const int64_t per = x.value().size() / x.value().dim(0);
  const auto xshape = x.value().shape();
  auto fwd = [p, q, n, per](const Array& a) {
    const int64_t b = a.dim(0);
    Array out({b, n});
    for (int64_t s = 0; s < b; ++s)
      for (int64_t k = 0; k < n; ++k) out.at(s, k) = a[s * per + p[k]] - a[s * per + q[k]];
    return out;
  };
  auto bwd = [p, q, n, per, xshape](const Array& y) {
    const int64_t b = y.dim(0);
    Array xbar(xshape);
    for (int64_t s = 0; s < b; ++s)
      for (int64_t k = 0; k < n; ++k) {
        xbar[s * per + p[k]] += y.at(s, k);
        xbar[s * per + q[k]] -= y.at(s, k);
      }
    return xbar;
  };
  return ad::linear_map(x, fwd, bwd);
}

ad::Var cube(const ad::Var& v) { return ad::mul(ad::square(v), v); }

NeighborhoodSpec loss_neighborhood(const Grid& g, const PhysicsSpec& spec) {
  return default_neighborhood(g, spec.neighborhood_factor);
}

}  // namespace

PhysicsLoss::PhysicsLoss(PdeSystem system, const Grid& grid, const PhysicsSpec& spec)
    : system_(system),
      grid_(grid),
      spec_(spec),
      g0_(StencilOp::gradient(grid, 0, loss_neighborhood(grid, spec))),
      g1_(StencilOp::gradient(grid, 1, loss_neighborhood(grid, spec))) {
  if (grid_.ndim() != 2) throw std::invalid_argument("PhysicsLoss: grid must be 2-D");
  if (spec_.alpha1 < 0.0 || spec_.alpha2 < 0.0)
    throw std::invalid_argument("PhysicsLoss: loss weights must be nonnegative");
  if (system_ == PdeSystem::allen_cahn && spec_.frame_dt <= 0.0)
    throw std::invalid_argument("PhysicsLoss: frame_dt must be positive");
}

void PhysicsLoss::check_u_hat(const Array& u, int64_t channels) const {
  if (u.ndim() != 4 || u.dim(1) != grid_.dims[0] || u.dim(2) != grid_.dims[1] ||
      (channels > 0 && u.dim(3) != channels))
    throw std::invalid_argument("PhysicsLoss: prediction shape does not match grid");
}

ad::Var PhysicsLoss::lap(const ad::Var& v) const { return laplacian(v, g0_, g1_); }

ad::Var PhysicsLoss::residual(const ad::Var& u_hat, const Array& input) const {
  const Array& u = u_hat.value();
  switch (system_) {
    case PdeSystem::diffusion_reaction: {
      check_u_hat(u, 1);
      const int64_t b = u.dim(0), nx = u.dim(1), nt = u.dim(2);
      if (input.ndim() != 2 || input.dim(0) != b || input.dim(1) != nx)
        throw std::invalid_argument("PhysicsLoss: source must be (B, nx)");
      Array fb({b, nx, nt, 1});
      for (int64_t s = 0; s < b; ++s)
        for (int64_t i = 0; i < nx; ++i)
          for (int64_t n = 0; n < nt; ++n) fb.at(s, i, n, 0) = input.at(s, i);
      ad::Var r = ad::sub(first_derivative(u_hat, g1_),
                          ad::scale(second_derivative(u_hat, g0_), spec_.b_coef));
      r = ad::sub(r, ad::scale(ad::square(u_hat), spec_.k_coef));
      return ad::sub_const(r, fb);
    }
    case PdeSystem::nagumo: {
      check_u_hat(u, 1);
      ad::Var r = ad::sub(first_derivative(u_hat, g1_),
                          ad::scale(second_derivative(u_hat, g0_), spec_.eps_nagumo));
      ad::Var reaction = ad::mul(ad::mul(u_hat, ad::add_scalar(ad::scale(u_hat, -1.0), 1.0)),
                                 ad::add_scalar(u_hat, -spec_.alpha_nagumo));
      return ad::sub(r, reaction);
    }
    case PdeSystem::darcy: {
      check_u_hat(u, 1);
      const int64_t b = u.dim(0), s = u.dim(1);
      if (input.ndim() != 3 || input.dim(0) != b || input.dim(1) != s || input.dim(2) != s)
        throw std::invalid_argument("PhysicsLoss: permeability must be (B, s, s)");
      for (int64_t i = 0; i < input.size(); ++i)
        if (!(input[i] > 0.0))
          throw std::invalid_argument("PhysicsLoss: permeability must be positive");
      Array a4({b, s, s, 1}, input.vec());
      Array ax = g0_.apply(a4), ay = g1_.apply(a4);
      ad::Var sum = ad::mul_const(lap(u_hat), a4);
      sum = ad::add(sum, ad::mul_const(first_derivative(u_hat, g0_), ax));
      sum = ad::add(sum, ad::mul_const(first_derivative(u_hat, g1_), ay));
      return ad::add_scalar(ad::scale(sum, -1.0), -1.0);
    }
    case PdeSystem::allen_cahn: {
      check_u_hat(u, 0);
      const int64_t b = u.dim(0), s = u.dim(1), nf = u.dim(3);
      if (input.ndim() != 4 || input.dim(0) != b || input.dim(1) != s || input.dim(2) != s ||
          input.dim(3) < 1)
        throw std::invalid_argument("PhysicsLoss: past frames must be (B, s, s, n_past)");
      const double idt = 1.0 / spec_.frame_dt;
      const int64_t npast = input.dim(3);

      // seam constant: last past frame d: d/dt + eps lap d + d - d^3
      Array d({b, s, s, 1});
      for (int64_t smp = 0; smp < b; ++smp)
        for (int64_t i = 0; i < s; ++i)
          for (int64_t j = 0; j < s; ++j)
            d.at(smp, i, j, 0) = input.at(smp, i, j, npast - 1);
      Array lap_d = g0_.apply(g0_.apply(d));
      lap_d += g1_.apply(g1_.apply(d));
      Array c0({b, s, s, nf});
      for (int64_t smp = 0; smp < b; ++smp)
        for (int64_t i = 0; i < s; ++i)
          for (int64_t j = 0; j < s; ++j) {
            const double dv = d.at(smp, i, j, 0);
            c0.at(smp, i, j, 0) = dv * idt + spec_.eps_ac * lap_d.at(smp, i, j, 0) + dv -
                                  dv * dv * dv;
          }

      auto dfwd = [idt, nf](const Array& x) {
        Array y(x.shape());
        const int64_t rows = x.size() / nf;
        for (int64_t r = 0; r < rows; ++r) {
          y[r * nf] = x[r * nf] * idt;
          for (int64_t c = 1; c < nf; ++c)
            y[r * nf + c] = (x[r * nf + c] - x[r * nf + c - 1]) * idt;
        }
        return y;
      };
      auto dbwd = [idt, nf](const Array& y) {
        Array xb(y.shape());
        const int64_t rows = y.size() / nf;
        for (int64_t r = 0; r < rows; ++r) {
          for (int64_t c = 0; c < nf - 1; ++c)
            xb[r * nf + c] = (y[r * nf + c] - y[r * nf + c + 1]) * idt;
          xb[r * nf + nf - 1] = y[r * nf + nf - 1] * idt;
        }
        return xb;
      };
      auto sfwd = [nf](const Array& x) {
        Array y(x.shape());
        const int64_t rows = x.size() / nf;
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t c = 1; c < nf; ++c) y[r * nf + c] = x[r * nf + c - 1];
        return y;
      };
      auto sbwd = [nf](const Array& y) {
        Array xb(y.shape());
        const int64_t rows = y.size() / nf;
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t c = 0; c < nf - 1; ++c) xb[r * nf + c] = y[r * nf + c + 1];
        return xb;
      };
      ad::Var dvar = ad::linear_map(u_hat, dfwd, dbwd);
      ad::Var shifted = ad::linear_map(u_hat, sfwd, sbwd);
      ad::Var rhs = ad::add(ad::scale(lap(shifted), spec_.eps_ac),
                            ad::sub(shifted, cube(shifted)));
      return ad::sub(ad::sub_const(dvar, c0), rhs);
    }
  }
  throw std::logic_error("PhysicsLoss: unknown system");
}

PhysicsLoss::Parts PhysicsLoss::loss_parts(const ad::Var& u_hat, const Array& input) const {
  Parts parts;
  parts.residual = ad::mean(ad::square(residual(u_hat, input)));
  const Array& u = u_hat.value();
  const int64_t h = grid_.dims[0], w = grid_.dims[1], c = u.dim(3);

  auto flat = [w, c](int64_t i, int64_t j, int64_t ch) { return (i * w + j) * c + ch; };

  switch (system_) {
    case PdeSystem::diffusion_reaction:
    case PdeSystem::nagumo: {
      std::vector<int64_t> bidx;
      for (int64_t n = 0; n < w; ++n) {
        bidx.push_back(flat(0, n, 0));
        bidx.push_back(flat(h - 1, n, 0));
      }
      parts.boundary = ad::mean(ad::square(gather_nodes(u_hat, std::move(bidx))));

      std::vector<int64_t> iidx;
      for (int64_t i = 0; i < h; ++i) iidx.push_back(flat(i, 0, 0));
      ad::Var ic = gather_nodes(u_hat, std::move(iidx));
      if (system_ == PdeSystem::nagumo) {
        if (input.ndim() != 2 || input.dim(0) != u.dim(0) || input.dim(1) != h)
          throw std::invalid_argument("PhysicsLoss: nagumo initial conditions must be (B, nx)");
        ic = ad::sub_const(ic, input);
      }
      parts.initial = ad::mean(ad::square(ic));
      break;
    }
    case PdeSystem::darcy: {
      std::vector<int64_t> bidx;
      for (int64_t j = 0; j < w; ++j) {
        bidx.push_back(flat(0, j, 0));
        bidx.push_back(flat(h - 1, j, 0));
      }
      for (int64_t i = 1; i < h - 1; ++i) {
        bidx.push_back(flat(i, 0, 0));
        bidx.push_back(flat(i, w - 1, 0));
      }
      parts.boundary = ad::mean(ad::square(gather_nodes(u_hat, std::move(bidx))));
      break;
    }
    case PdeSystem::allen_cahn: {
      std::vector<int64_t> p, q;
      for (int64_t ch = 0; ch < c; ++ch) {
        for (int64_t j = 0; j < w; ++j) {
          p.push_back(flat(0, j, ch));
          q.push_back(flat(h - 1, j, ch));
        }
        for (int64_t i = 0; i < h; ++i) {
          p.push_back(flat(i, 0, ch));
          q.push_back(flat(i, w - 1, ch));
        }
      }
      ad::Var wrap = gather_pair_diffs(u_hat, std::move(p), std::move(q));
      parts.boundary = ad::mean(ad::square(wrap));
      break;
    }
  }
  return parts;
}

ad::Var PhysicsLoss::loss(const ad::Var& u_hat, const Array& input) const {
  Parts parts = loss_parts(u_hat, input);
  ad::Var total = parts.residual;
  if (parts.boundary.defined())
    total = ad::add(total, ad::scale(parts.boundary, spec_.alpha1));
  if (parts.initial.defined())
    total = ad::add(total, ad::scale(parts.initial, spec_.alpha2));
  return total;
}

double PhysicsLoss::loss_value(const Array& u_hat, const Array& input) const {
  return loss(ad::Var::leaf(u_hat), input).value()[0];
}

LossTerms PhysicsLoss::loss_terms(const Array& u_hat, const Array& input) const {
  Parts parts = loss_parts(ad::Var::leaf(u_hat), input);
  LossTerms terms;
  terms.residual = parts.residual.value()[0];
  if (parts.boundary.defined()) terms.boundary = parts.boundary.value()[0];
  if (parts.initial.defined()) terms.initial = parts.initial.value()[0];
  return terms;
}

namespace {

Array to_batch(const Array& u) {
  if (u.ndim() != 2) throw std::invalid_argument("residual: field must be 2-D");
  return Array({1, u.dim(0), u.dim(1), 1}, u.vec());
}

Array from_batch(const Array& r) {
  return Array({r.dim(1), r.dim(2)}, r.vec());
}

}  // namespace

Array residual_diffusion_reaction(const Array& u, const Array& f, const Grid& grid,
                                  const PhysicsSpec& spec) {
  PhysicsLoss pl(PdeSystem::diffusion_reaction, grid, spec);
  Array fb({1, f.size()}, f.vec());
  return from_batch(pl.residual(ad::Var::leaf(to_batch(u)), fb).value());
}

Array residual_nagumo(const Array& u, const Grid& grid, const PhysicsSpec& spec) {
  PhysicsLoss pl(PdeSystem::nagumo, grid, spec);
  Array dummy;
  return from_batch(pl.residual(ad::Var::leaf(to_batch(u)), dummy).value());
}

Array residual_darcy(const Array& u, const Array& a, const Grid& grid,
                     const PhysicsSpec& spec) {
  PhysicsLoss pl(PdeSystem::darcy, grid, spec);
  Array ab({1, a.dim(0), a.dim(1)}, a.vec());
  return from_batch(pl.residual(ad::Var::leaf(to_batch(u)), ab).value());
}

Array residual_allen_cahn(const Array& frames, const Grid& grid, const PhysicsSpec& spec) {
  if (frames.ndim() != 3 || frames.dim(0) < 2)
    throw std::invalid_argument("residual_allen_cahn: need (F, s, s) with F >= 2");
  PhysicsLoss pl(PdeSystem::allen_cahn, grid, spec);
  const int64_t nf = frames.dim(0), s = frames.dim(1);
  Array past({1, s, s, 1});
  Array pred({1, s, s, nf - 1});
  for (int64_t i = 0; i < s; ++i)
    for (int64_t j = 0; j < s; ++j) {
      past.at(0, i, j, 0) = frames.at(0, i, j);
      for (int64_t fidx = 1; fidx < nf; ++fidx)
        pred.at(0, i, j, fidx - 1) = frames.at(fidx, i, j);
    }
  Array r = pl.residual(ad::Var::leaf(pred), past).value();
  Array out({nf - 1, s, s});
  for (int64_t fidx = 0; fidx < nf - 1; ++fidx)
    for (int64_t i = 0; i < s; ++i)
      for (int64_t j = 0; j < s; ++j) out.at(fidx, i, j) = r.at(0, i, j, fidx);
  return out;
}

}  // namespace pio

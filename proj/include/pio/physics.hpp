#pragma once

#include <cstdint>

#include "pio/autodiff.hpp"
#include "pio/grid.hpp"
#include "pio/spgrad.hpp"
#include "pio/tensor.hpp"

namespace pio {

enum class PdeSystem { diffusion_reaction, nagumo, darcy, allen_cahn };

struct PhysicsSpec {
  double b_coef = 0.01;           // diffusion-reaction B
  double k_coef = 0.01;           // diffusion-reaction k
  double eps_nagumo = 1.0;
  double alpha_nagumo = -0.5;
  double eps_ac = 1e-3;
  double frame_dt = 0.05;         // physical time between indexed frames
  double alpha1 = 1.0;            // boundary-penalty weight
  double alpha2 = 1.0;            // initial-condition weight
  double neighborhood_factor = 2.5;
};

// Physics residual and loss of a predicted solution batch, differentiable
// through the tape. Derivatives come from the least-squares stencil
// operators, built once per instance.
//
// u_hat is (B, H, W, C); the per-system input is
//   diffusion_reaction  f (B, nx) source samples, u_hat (B, nx, nt, 1)
//   nagumo              u0 (B, nx) initial conditions, u_hat (B, nx, nt, 1)
//   darcy               a (B, s, s) permeability, u_hat (B, s, s, 1)
//   allen_cahn          past frames (B, s, s, n_past), u_hat (B, s, s, n_future)
//
// The loss is mean(residual^2) + alpha1 * mean(boundary^2)
// + alpha2 * mean(ic mismatch^2), each mean over batch x sampled nodes.
// Boundary targets: zero Dirichlet for diffusion_reaction/nagumo/darcy;
// periodic wrap mismatch (first vs last row/column) for allen_cahn. Initial
// targets: zero for diffusion_reaction, u0 for nagumo; darcy and allen_cahn
// have no separate initial term (the allen_cahn seam transition from the
// last past frame sits inside the residual).
// Unweighted mean-square values of the three loss pieces.
struct LossTerms {
  double residual = 0.0;
  double boundary = 0.0;
  double initial = 0.0;
};

class PhysicsLoss {
 public:
  PhysicsLoss(PdeSystem system, const Grid& grid, const PhysicsSpec& spec = {});

  ad::Var residual(const ad::Var& u_hat, const Array& input) const;
  ad::Var loss(const ad::Var& u_hat, const Array& input) const;
  double loss_value(const Array& u_hat, const Array& input) const;
  LossTerms loss_terms(const Array& u_hat, const Array& input) const;

  PdeSystem system() const { return system_; }
  const PhysicsSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }

 private:
  struct Parts {
    ad::Var residual, boundary, initial;  // boundary/initial may be undefined
  };
  Parts loss_parts(const ad::Var& u_hat, const Array& input) const;
  ad::Var lap(const ad::Var& v) const;
  void check_u_hat(const Array& u, int64_t channels) const;

  PdeSystem system_;
  Grid grid_;
  PhysicsSpec spec_;
  StencilOp g0_, g1_;  // first-derivative ops along axis 0 and axis 1
};

// Single-sample plain-array forms of the residuals (test oracles and
// diagnostics). u and companions live on the grid directly.
Array residual_diffusion_reaction(const Array& u, const Array& f, const Grid& grid,
                                  const PhysicsSpec& spec = {});
Array residual_nagumo(const Array& u, const Grid& grid, const PhysicsSpec& spec = {});
Array residual_darcy(const Array& u, const Array& a, const Grid& grid,
                     const PhysicsSpec& spec = {});
// frames (F, s, s) with F >= 2 -> (F-1, s, s) transition residuals
Array residual_allen_cahn(const Array& frames, const Grid& grid,
                          const PhysicsSpec& spec = {});

}  // namespace pio

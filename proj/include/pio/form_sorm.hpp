#pragma once

#include <functional>
#include <vector>

namespace pio {

// Limit state in standard-normal space; failure iff g(u) < 0.
using LimitStateFn = std::function<double(const std::vector<double>&)>;

struct MppResult {
  std::vector<double> u_star;
  double beta_form = 0.0;  // equals |u_star| at convergence
  int iterations = 0;
  bool converged = false;
  std::vector<double> curvatures;  // filled by mpp_curvatures
};

struct FormOptions {
  double fd_step = 1e-4;  // central-difference step in u-space
  double tol = 1e-6;      // on the iterate displacement
  int max_iterations = 100;
};

// Isoprobabilistic map for Unif(0,1) inputs: z = Phi^-1(q), +/- infinity
// sentinels at the endpoints.
double uniform_to_standard_normal(double q);

// Hasofer-Lind / Rackwitz-Fiessler iteration from u0; gradients by central
// finite differences. Non-convergence is flagged and the last iterate kept.
MppResult form_hlrf(const LimitStateFn& g, const std::vector<double>& u0,
                    const FormOptions& opt = {});

// P_f = Phi(-beta_form)
double form_pf(const MppResult& mpp);

// Principal curvatures of the limit-state surface at the MPP: eigenvalues of
// the finite-difference Hessian projected onto the tangent space, divided by
// the gradient norm. Empty in one dimension.
std::vector<double> mpp_curvatures(const LimitStateFn& g, const MppResult& mpp,
                                   double fd_step = 1e-4);

struct SormResult {
  double p_f = 0.0;
  bool defined = true;  // false when some 1 + beta*kappa <= 0
};

// Breitung correction P_f = Phi(-beta) * prod(1 + beta*kappa_i)^(-1/2).
SormResult sorm_breitung(const MppResult& mpp);

}  // namespace pio

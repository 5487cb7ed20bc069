#include "pio/solvers.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pio/fft2.hpp"

namespace pio {

namespace {

// constant-coefficient symmetric tridiagonal (b, a, a) solver, factorized once
struct Tridiag {
  std::vector<double> cp;   // modified upper coefficients
  std::vector<double> inv;  // pivot reciprocals
  double a = 0.0;

  Tridiag(int64_t n, double diag, double off) : cp(n), inv(n), a(off) {
    double denom = diag;
    for (int64_t i = 0; i < n; ++i) {
      if (i > 0) denom = diag - off * cp[i - 1];
      inv[i] = 1.0 / denom;
      cp[i] = off * inv[i];
    }
  }

  void solve(std::vector<double>& d) const {
    const int64_t n = static_cast<int64_t>(d.size());
    d[0] *= inv[0];
    for (int64_t i = 1; i < n; ++i) d[i] = (d[i] - a * d[i - 1]) * inv[i];
    for (int64_t i = n - 2; i >= 0; --i) d[i] -= cp[i] * d[i + 1];
  }
};

void check_finite(const std::vector<double>& u) {
  for (double v : u)
    if (!std::isfinite(v) || std::abs(v) > 1e10)
      throw std::runtime_error("solver diverged (non-finite state)");
}

}  // namespace

Array imex_reaction_diffusion(const Grid& grid_xt, double diffusion,
                              const ReactionFn& reaction, const std::vector<double>& u0,
                              int substeps) {
  if (grid_xt.ndim() != 2)
    throw std::invalid_argument("imex_reaction_diffusion: need an (x, t) grid");
  if (diffusion < 0.0) throw std::invalid_argument("imex_reaction_diffusion: diffusion < 0");
  if (substeps < 1) throw std::invalid_argument("imex_reaction_diffusion: substeps < 1");
  const int64_t nx = grid_xt.dims[0], nt = grid_xt.dims[1];
  if (static_cast<int64_t>(u0.size()) != nx)
    throw std::invalid_argument("imex_reaction_diffusion: initial condition size mismatch");
  const double h = grid_xt.spacing(0);
  const double dt = grid_xt.spacing(1) / static_cast<double>(substeps);
  const int64_t ni = nx - 2;
  // Crank-Nicolson diffusion, Adams-Bashforth 2 reaction (Euler reaction on
  // the very first step)
  const double r = diffusion * dt / (h * h);
  Tridiag tri(ni, 1.0 + r, -0.5 * r);

  Array out({nx, nt});
  std::vector<double> u(ni), rhs(ni), rc(ni), rp(ni);
  for (int64_t i = 0; i < ni; ++i) u[i] = u0[i + 1];
  out.at(0, 0) = 0.0;
  out.at(nx - 1, 0) = 0.0;
  for (int64_t i = 0; i < ni; ++i) out.at(i + 1, 0) = u[i];

  double t = grid_xt.lo[1];
  bool first = true;
  for (int64_t n = 1; n < nt; ++n) {
    for (int s = 0; s < substeps; ++s) {
      for (int64_t i = 0; i < ni; ++i) rc[i] = reaction(u[i], i + 1, t);
      if (first) {
        rp = rc;
        first = false;
      }
      for (int64_t i = 0; i < ni; ++i) {
        const double ul = i > 0 ? u[i - 1] : 0.0;
        const double ur = i < ni - 1 ? u[i + 1] : 0.0;
        rhs[i] = u[i] + 0.5 * r * (ul - 2.0 * u[i] + ur) +
                 dt * (1.5 * rc[i] - 0.5 * rp[i]);
      }
      tri.solve(rhs);
      u.swap(rhs);
      rp.swap(rc);
      t += dt;
    }
    check_finite(u);
    out.at(0, n) = 0.0;
    out.at(nx - 1, n) = 0.0;
    for (int64_t i = 0; i < ni; ++i) out.at(i + 1, n) = u[i];
  }
  return out;
}

Array solve_diffusion_reaction(const Array& f, const Grid& grid_xt, double b_coef,
                               double k_coef, int substeps) {
  if (f.size() != grid_xt.dims[0])
    throw std::invalid_argument("solve_diffusion_reaction: forcing size mismatch");
  const double* fd = f.data();
  auto reaction = [k_coef, fd](double u, int64_t ix, double) {
    return k_coef * u * u + fd[ix];
  };
  std::vector<double> zero(grid_xt.dims[0], 0.0);
  return imex_reaction_diffusion(grid_xt, b_coef, reaction, zero, substeps);
}

Array solve_nagumo(const Array& u0, const Grid& grid_xt, double eps, double alpha,
                   int substeps) {
  if (u0.size() != grid_xt.dims[0])
    throw std::invalid_argument("solve_nagumo: initial condition size mismatch");
  if (eps <= 0.0) throw std::invalid_argument("solve_nagumo: eps must be positive");
  auto reaction = [alpha](double u, int64_t, double) {
    return u * (1.0 - u) * (u - alpha);
  };
  std::vector<double> ic(u0.data(), u0.data() + u0.size());
  return imex_reaction_diffusion(grid_xt, eps, reaction, ic, substeps);
}

Array solve_darcy(const Array& a, const Array& f, const Grid& grid_xy) {
  if (grid_xy.ndim() != 2) throw std::invalid_argument("solve_darcy: need a 2-D grid");
  const int64_t nr = grid_xy.dims[0], nc = grid_xy.dims[1];
  if (a.ndim() != 2 || a.dim(0) != nr || a.dim(1) != nc)
    throw std::invalid_argument("solve_darcy: permeability shape mismatch");
  if (f.ndim() != 2 || f.dim(0) != nr || f.dim(1) != nc)
    throw std::invalid_argument("solve_darcy: source shape mismatch");
  for (int64_t i = 0; i < a.size(); ++i)
    if (!(a[i] > 0.0)) throw std::invalid_argument("solve_darcy: permeability must be positive");
  const double h = grid_xy.spacing(0);
  const int64_t mi = nr - 2, mj = nc - 2;
  auto hm = [](double p, double q) { return 2.0 * p * q / (p + q); };
  auto idx = [mj](int64_t i, int64_t j) { return i * mj + j; };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(5 * mi * mj));
  Eigen::VectorXd rhs(mi * mj);
  const double ih2 = 1.0 / (h * h);
  for (int64_t i = 0; i < mi; ++i)
    for (int64_t j = 0; j < mj; ++j) {
      const int64_t gi = i + 1, gj = j + 1;
      const double ac = a.at(gi, gj);
      const double cn = hm(ac, a.at(gi - 1, gj));
      const double cs = hm(ac, a.at(gi + 1, gj));
      const double cw = hm(ac, a.at(gi, gj - 1));
      const double ce = hm(ac, a.at(gi, gj + 1));
      trip.emplace_back(idx(i, j), idx(i, j), (cn + cs + cw + ce) * ih2);
      if (i > 0) trip.emplace_back(idx(i, j), idx(i - 1, j), -cn * ih2);
      if (i < mi - 1) trip.emplace_back(idx(i, j), idx(i + 1, j), -cs * ih2);
      if (j > 0) trip.emplace_back(idx(i, j), idx(i, j - 1), -cw * ih2);
      if (j < mj - 1) trip.emplace_back(idx(i, j), idx(i, j + 1), -ce * ih2);
      rhs(idx(i, j)) = f.at(gi, gj);
    }
  Eigen::SparseMatrix<double> mat(mi * mj, mi * mj);
  mat.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(mat);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("solve_darcy: factorization failed");
  Eigen::VectorXd u = solver.solve(rhs);
  const double resid = (mat * u - rhs).cwiseAbs().maxCoeff() /
                       std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (!(resid < 1e-10)) throw std::runtime_error("solve_darcy: linear solve residual too large");

  Array out({nr, nc});
  for (int64_t i = 0; i < mi; ++i)
    for (int64_t j = 0; j < mj; ++j) out.at(i + 1, j + 1) = u(idx(i, j));
  return out;
}

Array solve_darcy(const Array& a, const Grid& grid_xy) {
  Array ones(grid_xy.dims, 1.0);
  return solve_darcy(a, ones, grid_xy);
}

Array solve_allen_cahn(const Array& u0, const Grid& grid_xy, int frames, double frame_dt,
                       double eps, int substeps) {
  if (grid_xy.ndim() != 2 || grid_xy.dims[0] != grid_xy.dims[1])
    throw std::invalid_argument("solve_allen_cahn: need a square grid");
  const int64_t s = grid_xy.dims[0];
  if (u0.ndim() != 2 || u0.dim(0) != s || u0.dim(1) != s)
    throw std::invalid_argument("solve_allen_cahn: initial condition shape mismatch");
  if (frames < 1 || frame_dt <= 0.0 || substeps < 1 || eps <= 0.0)
    throw std::invalid_argument("solve_allen_cahn: bad configuration");
  const double pi = 3.14159265358979323846;
  const double period = grid_xy.spacing(0) * static_cast<double>(s);
  const double dt = frame_dt / static_cast<double>(substeps);

  std::vector<double> lam(s * s);
  for (int64_t i = 0; i < s; ++i)
    for (int64_t j = 0; j < s; ++j) {
      const double mi = i < (s + 1) / 2 ? static_cast<double>(i) : static_cast<double>(i - s);
      const double mj = j < (s + 1) / 2 ? static_cast<double>(j) : static_cast<double>(j - s);
      lam[i * s + j] = 4.0 * pi * pi * (mi * mi + mj * mj) / (period * period);
    }

  Array out({frames, s, s});
  std::vector<double> u(u0.data(), u0.data() + u0.size());
  for (int64_t i = 0; i < s * s; ++i) out[i] = u[i];
  const double inv_n = 1.0 / static_cast<double>(s * s);

  // Crank-Nicolson for the spectral diffusion, Adams-Bashforth 2 for the
  // cubic reaction (Euler reaction on the very first step)
  std::vector<std::complex<double>> uh(s * s), g(s * s);
  std::vector<double> rc(s * s), rp(s * s);
  for (int64_t i = 0; i < s * s; ++i) uh[i] = std::complex<double>(u[i], 0.0);
  fft2(uh, s, s, false);
  bool first = true;

  for (int fr = 1; fr < frames; ++fr) {
    for (int st = 0; st < substeps; ++st) {
      for (int64_t i = 0; i < s * s; ++i) rc[i] = u[i] - u[i] * u[i] * u[i];
      if (first) {
        rp = rc;
        first = false;
      }
      for (int64_t i = 0; i < s * s; ++i)
        g[i] = std::complex<double>(1.5 * rc[i] - 0.5 * rp[i], 0.0);
      fft2(g, s, s, false);
      for (int64_t i = 0; i < s * s; ++i) {
        const double c = 0.5 * dt * eps * lam[i];
        uh[i] = (uh[i] * (1.0 - c) + dt * g[i]) / (1.0 + c);
      }
      rp.swap(rc);
      g = uh;
      fft2(g, s, s, true);
      for (int64_t i = 0; i < s * s; ++i) u[i] = g[i].real() * inv_n;
    }
    for (int64_t i = 0; i < s * s; ++i) {
      if (!std::isfinite(u[i])) throw std::runtime_error("solve_allen_cahn: diverged");
      out[static_cast<int64_t>(fr) * s * s + i] = u[i];
    }
  }
  return out;
}

double allen_cahn_energy(const Array& frame, const Grid& grid_xy, double eps) {
  const int64_t s = grid_xy.dims[0];
  if (frame.ndim() != 2 || frame.dim(0) != s || frame.dim(1) != s)
    throw std::invalid_argument("allen_cahn_energy: frame shape mismatch");
  const double h = grid_xy.spacing(0);
  double e = 0.0;
  for (int64_t i = 0; i < s; ++i)
    for (int64_t j = 0; j < s; ++j) {
      const int64_t ip = (i + 1) % s, im = (i + s - 1) % s;
      const int64_t jp = (j + 1) % s, jm = (j + s - 1) % s;
      const double ux = (frame.at(ip, j) - frame.at(im, j)) / (2.0 * h);
      const double uy = (frame.at(i, jp) - frame.at(i, jm)) / (2.0 * h);
      const double v = frame.at(i, j);
      const double w = 1.0 - v * v;
      e += 0.5 * eps * (ux * ux + uy * uy) + 0.25 * w * w;
    }
  return e * h * h;
}

}  // namespace pio

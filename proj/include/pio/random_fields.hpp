#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pio/grid.hpp"
#include "pio/tensor.hpp"

namespace pio {

enum class GrfKind { rbf, spectral_laplacian, spectral_powerlaw };
enum class BoundaryKind { neumann, periodic };

struct GrfSpec {
  GrfKind kind = GrfKind::rbf;
  double sigma = 0.1;          // RBF amplitude
  double length_scale = 0.1;   // RBF l
  double tau = 15.0;           // power-law shift sqrt
  double alpha_exp = 1.0;      // power-law smoothness
  double laplacian_shift = 9.0;
  BoundaryKind boundary = BoundaryKind::neumann;
};

// f(x) = n sin(pi x) + (1-n) cos(pi x) + p sin(2 pi x) + (1-p) cos(2 pi x)
//      + w sin(3 pi x) + (1-w) cos(3 pi x), with n, p, w in [0, 1].
FieldSample sample_trig_source(double n, double p, double w, const Grid& grid_1d);

// Zero-mean Gaussian field sampler with the factorization precomputed, so
// banks of draws amortize the setup. Draws are pure in (spec, grid, seed).
//   rbf                K(x,y) = sigma^2 exp(-(x-y)^2 / (2 l^2)), 1-D grid,
//                      symmetric eigendecomposition, eigenvalues clipped at 0
//   spectral_laplacian Neumann cosine basis phi_j(x) = sqrt(2) cos(pi j x)
//                      (phi_0 = 1) on the node grid, mode std
//                      (pi^2 |k|^2 + laplacian_shift)^-1, zero mode 0
//   spectral_powerlaw  periodic basis e^(2 pi i m.x), mode std
//                      tau^(alpha-1) (4 pi^2 |m|^2 + tau^2)^(-(alpha+1)/2),
//                      zero mode 0, hermitian-symmetrized complex draw
class GrfSampler {
 public:
  GrfSampler(const GrfSpec& spec, const Grid& grid);

  FieldSample draw(uint64_t seed) const;
  // n draws from one sequential stream, row i = flattened field i
  Array draw_bank(uint64_t seed, int64_t n) const;

  const GrfSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }

 private:
  void draw_into(class RandomStream& rs, double* out) const;

  GrfSpec spec_;
  Grid grid_;
  Eigen::MatrixXd factor_;    // rbf: V sqrt(clip(w)); laplacian: basis matrix
  std::vector<double> mode_std_;
};

FieldSample sample_grf_rbf(const GrfSpec& spec, const Grid& grid_1d, uint64_t seed);
FieldSample sample_grf_spectral(const GrfSpec& spec, const Grid& grid_2d, uint64_t seed);

enum class PushforwardKind { binary_high_low, exponential };

// Maps a Gaussian draw to a positive permeability field: g >= 0 -> 12,
// g < 0 -> 3 by default, or exp(g).
FieldSample darcy_pushforward(const FieldSample& g,
                              PushforwardKind kind = PushforwardKind::binary_high_low);

// Smallest m whose top-m empirical-covariance eigenvalues capture at least
// energy_fraction of the total (Gram trick on centered samples, eigenvalues
// clipped at 0, sorted descending).
int64_t kle_intrinsic_dim(const Array& samples, double energy_fraction);  // (n, d)
int64_t kle_intrinsic_dim(const std::vector<FieldSample>& samples, double energy_fraction);

}  // namespace pio

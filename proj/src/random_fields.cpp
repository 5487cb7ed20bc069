#include "pio/random_fields.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "pio/fft2.hpp"
#include "pio/stats.hpp"

namespace pio {

FieldSample sample_trig_source(double n, double p, double w, const Grid& grid_1d) {
  if (grid_1d.ndim() != 1)
    throw std::invalid_argument("sample_trig_source: grid must be 1-D");
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(n) || !in01(p) || !in01(w))
    throw std::invalid_argument("sample_trig_source: parameters must lie in [0, 1]");
  const int64_t m = grid_1d.dims[0];
  Array vals({m});
  const double pi = 3.14159265358979323846;
  for (int64_t i = 0; i < m; ++i) {
    const double x = grid_1d.node(0, i);
    vals[i] = n * std::sin(pi * x) + (1.0 - n) * std::cos(pi * x) +
              p * std::sin(2.0 * pi * x) + (1.0 - p) * std::cos(2.0 * pi * x) +
              w * std::sin(3.0 * pi * x) + (1.0 - w) * std::cos(3.0 * pi * x);
  }
  return FieldSample{grid_1d, std::move(vals), FieldKind::source, 0};
}

GrfSampler::GrfSampler(const GrfSpec& spec, const Grid& grid) : spec_(spec), grid_(grid) {
  const double pi = 3.14159265358979323846;
  switch (spec_.kind) {
    case GrfKind::rbf: {
      if (grid_.ndim() != 1) throw std::invalid_argument("GrfSampler: rbf needs a 1-D grid");
      if (spec_.sigma < 0.0 || spec_.length_scale <= 0.0)
        throw std::invalid_argument("GrfSampler: rbf needs sigma >= 0, length_scale > 0");
      const int64_t m = grid_.dims[0];
      Eigen::MatrixXd k(m, m);
      const double s2 = spec_.sigma * spec_.sigma;
      const double il2 = 1.0 / (2.0 * spec_.length_scale * spec_.length_scale);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < m; ++j) {
          const double d = grid_.node(0, i) - grid_.node(0, j);
          k(i, j) = s2 * std::exp(-d * d * il2);
        }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("GrfSampler: rbf eigendecomposition failed");
      Eigen::VectorXd ev = es.eigenvalues();
      const double floor_tol = -1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff());
      for (int64_t i = 0; i < m; ++i) {
        if (ev(i) < floor_tol)
          throw std::runtime_error("GrfSampler: covariance not positive semidefinite");
        ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
      }
      factor_ = es.eigenvectors() * ev.asDiagonal();
      break;
    }
    case GrfKind::spectral_laplacian: {
      if (grid_.ndim() != 2 || grid_.dims[0] != grid_.dims[1])
        throw std::invalid_argument("GrfSampler: spectral sampler needs a square 2-D grid");
      const int64_t s = grid_.dims[0];
      factor_.resize(s, s);  // factor_(j, m) = phi_j(x_m)
      for (int64_t j = 0; j < s; ++j)
        for (int64_t m = 0; m < s; ++m) {
          const double v = std::cos(pi * static_cast<double>(j) * grid_.node(0, m));
          factor_(j, m) = j == 0 ? v : v * std::sqrt(2.0);
        }
      mode_std_.assign(s * s, 0.0);
      for (int64_t j = 0; j < s; ++j)
        for (int64_t k = 0; k < s; ++k)
          mode_std_[j * s + k] =
              1.0 / (pi * pi * static_cast<double>(j * j + k * k) + spec_.laplacian_shift);
      mode_std_[0] = 0.0;
      break;
    }
    case GrfKind::spectral_powerlaw: {
      if (grid_.ndim() != 2 || grid_.dims[0] != grid_.dims[1])
        throw std::invalid_argument("GrfSampler: spectral sampler needs a square 2-D grid");
      if (spec_.tau <= 0.0) throw std::invalid_argument("GrfSampler: tau must be positive");
      const int64_t s = grid_.dims[0];
      const double scale = std::pow(spec_.tau, spec_.alpha_exp - 1.0);
      const double expo = -(spec_.alpha_exp + 1.0) / 2.0;
      mode_std_.assign(s * s, 0.0);
      for (int64_t i = 0; i < s; ++i)
        for (int64_t j = 0; j < s; ++j) {
          const double mi = i < (s + 1) / 2 ? static_cast<double>(i) : static_cast<double>(i - s);
          const double mj = j < (s + 1) / 2 ? static_cast<double>(j) : static_cast<double>(j - s);
          const double lam = 4.0 * pi * pi * (mi * mi + mj * mj) + spec_.tau * spec_.tau;
          mode_std_[i * s + j] = scale * std::pow(lam, expo);
        }
      mode_std_[0] = 0.0;
      break;
    }
  }
}

void GrfSampler::draw_into(RandomStream& rs, double* out) const {
  switch (spec_.kind) {
    case GrfKind::rbf: {
      const int64_t m = grid_.dims[0];
      Eigen::VectorXd z(m);
      for (int64_t i = 0; i < m; ++i) z(i) = rs.normal();
      Eigen::Map<Eigen::VectorXd>(out, m) = factor_ * z;
      break;
    }
    case GrfKind::spectral_laplacian: {
      const int64_t s = grid_.dims[0];
      Eigen::MatrixXd xi(s, s);
      for (int64_t j = 0; j < s; ++j)
        for (int64_t k = 0; k < s; ++k) xi(j, k) = rs.normal() * mode_std_[j * s + k];
      // field(m, l) = sum_jk phi_j(x_m) xi_jk phi_k(x_l)
      Eigen::MatrixXd f = factor_.transpose() * xi * factor_;
      for (int64_t m = 0; m < s; ++m)
        for (int64_t l = 0; l < s; ++l) out[m * s + l] = f(m, l);
      break;
    }
    case GrfKind::spectral_powerlaw: {
      const int64_t s = grid_.dims[0];
      std::vector<double> a(s * s), b(s * s);
      for (auto& v : a) v = rs.normal();
      for (auto& v : b) v = rs.normal();
      std::vector<std::complex<double>> c(s * s);
      for (int64_t i = 0; i < s; ++i)
        for (int64_t j = 0; j < s; ++j) {
          // hermitian half-sum keeps the synthesis real
          const int64_t ic = (s - i) % s, jc = (s - j) % s;
          const std::complex<double> z(a[i * s + j], b[i * s + j]);
          const std::complex<double> zc(a[ic * s + jc], b[ic * s + jc]);
          c[i * s + j] =
              0.5 * (z * mode_std_[i * s + j] + std::conj(zc) * mode_std_[ic * s + jc]);
        }
      fft2(c, s, s, true);
      for (int64_t i = 0; i < s * s; ++i) out[i] = c[i].real();
      break;
    }
  }
}

FieldSample GrfSampler::draw(uint64_t seed) const {
  Array vals(grid_.dims);
  RandomStream rs(seed);
  draw_into(rs, vals.data());
  FieldKind kind = spec_.kind == GrfKind::spectral_laplacian
                       ? FieldKind::source
                       : FieldKind::initial_condition;
  return FieldSample{grid_, std::move(vals), kind, static_cast<int64_t>(seed)};
}

Array GrfSampler::draw_bank(uint64_t seed, int64_t n) const {
  if (n < 1) throw std::invalid_argument("GrfSampler: bank size must be positive");
  const int64_t d = grid_.node_count();
  Array bank({n, d});
  RandomStream rs(seed);
  for (int64_t i = 0; i < n; ++i) draw_into(rs, bank.data() + i * d);
  return bank;
}

FieldSample sample_grf_rbf(const GrfSpec& spec, const Grid& grid_1d, uint64_t seed) {
  if (spec.kind != GrfKind::rbf)
    throw std::invalid_argument("sample_grf_rbf: spec.kind must be rbf");
  return GrfSampler(spec, grid_1d).draw(seed);
}

FieldSample sample_grf_spectral(const GrfSpec& spec, const Grid& grid_2d, uint64_t seed) {
  if (spec.kind != GrfKind::spectral_laplacian && spec.kind != GrfKind::spectral_powerlaw)
    throw std::invalid_argument("sample_grf_spectral: spec.kind must be spectral");
  return GrfSampler(spec, grid_2d).draw(seed);
}

FieldSample darcy_pushforward(const FieldSample& g, PushforwardKind kind) {
  FieldSample out = g;
  out.kind = FieldKind::permeability;
  if (kind == PushforwardKind::binary_high_low) {
    for (int64_t i = 0; i < out.values.size(); ++i)
      out.values[i] = g.values[i] >= 0.0 ? 12.0 : 3.0;
  } else {
    for (int64_t i = 0; i < out.values.size(); ++i) out.values[i] = std::exp(g.values[i]);
  }
  return out;
}

int64_t kle_intrinsic_dim(const Array& samples, double energy_fraction) {
  if (samples.ndim() != 2) throw std::invalid_argument("kle_intrinsic_dim: need (n, d) samples");
  if (!(energy_fraction > 0.0) || energy_fraction > 1.0)
    throw std::invalid_argument("kle_intrinsic_dim: energy_fraction must be in (0, 1]");
  const int64_t n = samples.dim(0), d = samples.dim(1);
  if (n < 2) throw std::invalid_argument("kle_intrinsic_dim: need at least 2 samples");
  Eigen::MatrixXd x(n, d);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < d; ++j) x(i, j) = samples.at(i, j);
  x.rowwise() -= x.colwise().mean();
  Eigen::MatrixXd gram = x * x.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("kle_intrinsic_dim: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).reverse();
  const double total = ev.sum();
  if (!(total > 0.0)) throw std::runtime_error("kle_intrinsic_dim: zero covariance");
  double run = 0.0;
  for (int64_t m = 0; m < n; ++m) {
    run += ev(m);
    if (run >= energy_fraction * total) return m + 1;
  }
  return n;
}

int64_t kle_intrinsic_dim(const std::vector<FieldSample>& samples, double energy_fraction) {
  if (samples.size() < 2)
    throw std::invalid_argument("kle_intrinsic_dim: need at least 2 samples");
  const int64_t n = static_cast<int64_t>(samples.size());
  const int64_t d = samples[0].values.size();
  Array x({n, d});
  for (int64_t i = 0; i < n; ++i) {
    if (samples[i].values.size() != d)
      throw std::invalid_argument("kle_intrinsic_dim: samples on mismatched grids");
    for (int64_t j = 0; j < d; ++j) x.at(i, j) = samples[i].values[j];
  }
  return kle_intrinsic_dim(x, energy_fraction);
}

}  // namespace pio

#include "pio/form_sorm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pio/stats.hpp"

namespace pio {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::vector<double> fd_gradient(const LimitStateFn& g, const std::vector<double>& u,
                                double h) {
  std::vector<double> out(u.size());
  std::vector<double> probe = u;
  for (size_t i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + h;
    const double up = g(probe);
    probe[i] = u[i] - h;
    const double dn = g(probe);
    probe[i] = u[i];
    out[i] = (up - dn) / (2.0 * h);
  }
  return out;
}

}  // namespace

double uniform_to_standard_normal(double q) {
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("uniform_to_standard_normal: q outside [0, 1]");
  if (q == 0.0) return -std::numeric_limits<double>::infinity();
  if (q == 1.0) return std::numeric_limits<double>::infinity();
  return norm_ppf(q);
}

MppResult form_hlrf(const LimitStateFn& g, const std::vector<double>& u0,
                    const FormOptions& opt) {
  if (u0.empty()) throw std::invalid_argument("form_hlrf: empty start point");
  if (!(opt.fd_step > 0.0) || !(opt.tol > 0.0) || opt.max_iterations < 1)
    throw std::invalid_argument("form_hlrf: bad options");

  MppResult result;
  std::vector<double> u = u0;
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    const double gv = g(u);
    const std::vector<double> gr = fd_gradient(g, u, opt.fd_step);
    const double gnorm2 = dot(gr, gr);
    if (!(gnorm2 > 1e-300))
      throw std::runtime_error("form_hlrf: vanishing limit-state gradient");
    const double coef = (dot(gr, u) - gv) / gnorm2;
    double delta2 = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
      const double next = coef * gr[i];
      delta2 += (next - u[i]) * (next - u[i]);
      u[i] = next;
    }
    result.iterations = iter;
    if (std::sqrt(delta2) < opt.tol) {
      result.converged = true;
      break;
    }
  }
  result.u_star = u;
  result.beta_form = std::sqrt(dot(u, u));
  return result;
}

double form_pf(const MppResult& mpp) { return norm_cdf(-mpp.beta_form); }

std::vector<double> mpp_curvatures(const LimitStateFn& g, const MppResult& mpp,
                                   double fd_step) {
  const int64_t n = static_cast<int64_t>(mpp.u_star.size());
  if (n == 0) throw std::invalid_argument("mpp_curvatures: empty MPP");
  if (n == 1) return {};
  const double h = fd_step;
  const std::vector<double>& u = mpp.u_star;

  std::vector<double> gr = fd_gradient(g, u, h);
  const double gnorm = std::sqrt(dot(gr, gr));
  if (!(gnorm > 1e-300))
    throw std::runtime_error("mpp_curvatures: vanishing limit-state gradient");

  Eigen::MatrixXd hess(n, n);
  std::vector<double> probe = u;
  const double g0 = g(u);
  for (int64_t i = 0; i < n; ++i) {
    probe[i] = u[i] + h;
    const double up = g(probe);
    probe[i] = u[i] - h;
    const double dn = g(probe);
    probe[i] = u[i];
    hess(i, i) = (up - 2.0 * g0 + dn) / (h * h);
    for (int64_t j = i + 1; j < n; ++j) {
      probe[i] = u[i] + h;
      probe[j] = u[j] + h;
      const double pp = g(probe);
      probe[j] = u[j] - h;
      const double pm = g(probe);
      probe[i] = u[i] - h;
      const double mm = g(probe);
      probe[j] = u[j] + h;
      const double mp = g(probe);
      probe[i] = u[i];
      probe[j] = u[j];
      const double hij = (pp - pm - mp + mm) / (4.0 * h * h);
      hess(i, j) = hij;
      hess(j, i) = hij;
    }
  }

  // Householder reflection sending e1 to the unit normal; remaining columns
  // form an orthonormal tangent basis
  Eigen::VectorXd a(n);
  for (int64_t i = 0; i < n; ++i) a(i) = gr[i] / gnorm;
  Eigen::VectorXd v = a;
  v(0) += a(0) >= 0.0 ? 1.0 : -1.0;
  const double vnorm2 = v.squaredNorm();
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n) - (2.0 / vnorm2) * v * v.transpose();
  Eigen::MatrixXd tangent = basis.rightCols(n - 1);

  Eigen::MatrixXd reduced = tangent.transpose() * hess * tangent / gnorm;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
  std::vector<double> kappas(n - 1);
  for (int64_t i = 0; i < n - 1; ++i) kappas[i] = eig.eigenvalues()(i);
  return kappas;
}

SormResult sorm_breitung(const MppResult& mpp) {
  SormResult result;
  double factor = 1.0;
  for (double kappa : mpp.curvatures) {
    // terms inside finite-difference resolution of the beta*kappa = -1 pole
    // give corrections of 100x or more and are treated as undefined
    const double term = 1.0 + mpp.beta_form * kappa;
    if (term <= 1e-4) {
      result.defined = false;
      result.p_f = std::numeric_limits<double>::quiet_NaN();
      return result;
    }
    factor *= term;
  }
  result.p_f = norm_cdf(-mpp.beta_form) / std::sqrt(factor);
  return result;
}

}  // namespace pio

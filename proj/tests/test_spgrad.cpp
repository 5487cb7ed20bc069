#include "doctest.h"

#include <cmath>

#include "pio/grid.hpp"
#include "pio/rng.hpp"
#include "pio/spgrad.hpp"

using namespace pio;

namespace {

Array field_2d(const Grid& g, double (*f)(double, double)) {
  Array u({1, g.dims[0], g.dims[1], 1});
  for (int64_t i = 0; i < g.dims[0]; ++i)
    for (int64_t j = 0; j < g.dims[1]; ++j)
      u.at(0, i, j, 0) = f(g.node(0, i), g.node(1, j));
  return u;
}

double max_err_margin(const Array& a, const Array& b, int64_t m) {
  double worst = 0;
  for (int64_t i = m; i < a.dim(1) - m; ++i)
    for (int64_t j = m; j < a.dim(2) - m; ++j)
      worst = std::max(worst, std::abs(a.at(0, i, j, 0) - b.at(0, i, j, 0)));
  return worst;
}

}  // namespace

TEST_CASE("stochastic projection is exact on affine fields at every node") {
  Grid g = make_unit_grid_2d(33, 33, AxisRole::space_x, AxisRole::space_y);
  auto spec = default_neighborhood(g);
  Array u = field_2d(g, [](double x, double y) { return 2.0 * x + 3.0 * y - 0.7; });
  Array gx = sp_gradient_field(g, u, 0, spec);
  Array gy = sp_gradient_field(g, u, 1, spec);
  for (int64_t i = 0; i < 33; ++i)
    for (int64_t j = 0; j < 33; ++j) {
      CHECK(std::abs(gx.at(0, i, j, 0) - 2.0) < 1e-10);
      CHECK(std::abs(gy.at(0, i, j, 0) - 3.0) < 1e-10);
    }
  Array uc({1, 33, 33, 1}, 4.2);
  CHECK(max_abs(sp_gradient_field(g, uc, 0, spec)) < 1e-12);
}

TEST_CASE("point gradient matches the field operator and is exact on quadratics at symmetric nodes") {
  Grid g = make_unit_grid_2d(41, 41, AxisRole::space_x, AxisRole::space_y);
  auto spec = default_neighborhood(g);
  Array u = field_2d(g, [](double x, double y) { return x * x + 0.0 * y; });
  // center node: x = 0.5, symmetric neighborhood, d(x^2)/dx = 1 exactly
  const int64_t node = 20 * 41 + 20;
  auto grad = sp_gradient(g, u, node, spec);
  CHECK(std::abs(grad[0] - 1.0) < 1e-10);
  CHECK(std::abs(grad[1]) < 1e-10);
  Array gx = sp_gradient_field(g, u, 0, spec);
  CHECK(std::abs(gx.at(0, 20, 20, 0) - grad[0]) < 1e-13);
}

TEST_CASE("smooth-field accuracy on the symmetric interior") {
  Grid g = make_unit_grid_2d(64, 64, AxisRole::space_x, AxisRole::space_y);
  auto spec = default_neighborhood(g);
  Array u = field_2d(g, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
  Array truth = field_2d(g, [](double x, double y) { return M_PI * std::cos(M_PI * x) * std::sin(M_PI * y); });
  Array gx = sp_gradient_field(g, u, 0, spec);
  const double interior = max_err_margin(gx, truth, 2);
  CHECK(interior < 2e-2);
  CHECK(interior / M_PI < 0.02);
  // one-sided boundary estimates stay bounded
  CHECK(max_err_margin(gx, truth, 0) < 0.2);
}

TEST_CASE("second derivative by composition") {
  Grid g = make_unit_grid_2d(81, 81, AxisRole::space_x, AxisRole::space_y);
  auto spec = default_neighborhood(g);
  Array u = field_2d(g, [](double x, double) { return x * x; });
  Array uxx = sp_second_derivative(g, u, 0, spec);
  Array two({1, 81, 81, 1}, 2.0);
  CHECK(max_err_margin(uxx, two, 4) < 1e-8);

  Array ua = field_2d(g, [](double x, double y) { return 5.0 * x - 2.0 * y; });
  CHECK(max_err_margin(sp_second_derivative(g, ua, 0, spec), Array({1, 81, 81, 1}, 0.0), 4) < 1e-10);

  Array us = field_2d(g, [](double x, double) { return std::sin(M_PI * x); });
  Array sxx = sp_second_derivative(g, us, 0, spec);
  double worst_rel = 0;
  for (int64_t i = 0; i < 81; ++i)
    for (int64_t j = 0; j < 81; ++j) {
      const double t = -M_PI * M_PI * std::sin(M_PI * g.node(0, i));
      if (std::abs(t) > 1.0)
        worst_rel = std::max(worst_rel, std::abs(sxx.at(0, i, j, 0) - t) / std::abs(t));
    }
  CHECK(worst_rel < 0.05);
}

TEST_CASE("fd oracle: exact cases and refinement order") {
  Grid g = make_unit_grid_2d(17, 17, AxisRole::space_x, AxisRole::space_y);
  Array u = field_2d(g, [](double x, double) { return x; });
  Array gx = fd_gradient_oracle(g, u, 0);
  for (int64_t i = 0; i < 17; ++i)
    for (int64_t j = 0; j < 17; ++j) CHECK(std::abs(gx.at(0, i, j, 0) - 1.0) < 1e-12);

  Array uq = field_2d(g, [](double x, double) { return x * x; });
  Array gq = fd_gradient_oracle(g, uq, 0);
  for (int64_t i = 1; i < 16; ++i) CHECK(std::abs(gq.at(0, i, 3, 0) - 2.0 * g.node(0, i)) < 1e-12);

  double errs[2];
  int64_t ns[2] = {33, 65};
  for (int k = 0; k < 2; ++k) {
    Grid gf = make_unit_grid_2d(ns[k], ns[k], AxisRole::space_x, AxisRole::space_y);
    Array us = field_2d(gf, [](double x, double) { return std::sin(M_PI * x); });
    Array gs = fd_gradient_oracle(gf, us, 0);
    double worst = 0;
    for (int64_t i = 0; i < ns[k]; ++i)
      worst = std::max(worst, std::abs(gs.at(0, i, 0, 0) - M_PI * std::cos(M_PI * gf.node(0, i))));
    errs[k] = worst;
  }
  const double order = std::log2(errs[0] / errs[1]);
  CHECK(order > 1.9);
}

TEST_CASE("projection and fd oracle agree on interior nodes of a smooth field") {
  Grid g = make_unit_grid_2d(64, 64, AxisRole::space_x, AxisRole::space_y);
  auto spec = default_neighborhood(g);
  Array u = field_2d(g, [](double x, double y) { return std::exp(x) * std::cos(2.0 * y); });
  Array sp = sp_gradient_field(g, u, 1, spec);
  Array fd = fd_gradient_oracle(g, u, 1);
  CHECK(max_err_margin(sp, fd, 2) < 5e-3);
}

TEST_CASE("operator is linear and its transpose is exact") {
  Grid g = make_unit_grid_2d(24, 24, AxisRole::space_x, AxisRole::space_y);
  auto spec = default_neighborhood(g);
  StencilOp op = StencilOp::gradient(g, 0, spec);
  Rng rng(7);
  Array a({2, 24, 24, 3});
  Array b({2, 24, 24, 3});
  for (int64_t i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (int64_t i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();

  Array lin = op.apply(a);
  Array sum = a;
  sum += b;
  Array lin2 = op.apply(sum);
  Array rhs = op.apply(b);
  rhs += lin;
  double worst = 0;
  for (int64_t i = 0; i < rhs.size(); ++i)
    worst = std::max(worst, std::abs(lin2.data()[i] - rhs.data()[i]));
  CHECK(worst < 1e-12);

  const double lhs = dot(op.apply(a), b);
  const double rhs2 = dot(a, op.apply_t(b));
  CHECK(std::abs(lhs - rhs2) / std::abs(lhs) < 1e-12);
}

TEST_CASE("radius below 1.5 spacings is rejected") {
  Grid g = make_unit_grid_2d(16, 16, AxisRole::space_x, AxisRole::space_y);
  NeighborhoodSpec spec;
  spec.radius = 1.0 * g.spacing(0);
  CHECK_THROWS_AS(sp_gradient_field(g, Array({1, 16, 16, 1}, 1.0), 0, spec),
                  std::invalid_argument);
}

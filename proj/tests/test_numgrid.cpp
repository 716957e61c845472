#include <cmath>
#include <numbers>

#include "doctest.h"

#include "cornermass/numgrid.hpp"

using namespace cornermass;
using namespace cornermass::numgrid;

namespace {

const OdeRhs decay_to_one = [](double r, const OdeState& y) {
  return OdeState{(1.0 - y[0]) / r};
};

// midpoint rule for the area of the unit disc as a strip integral
double disc_midpoint(int n) {
  double s = 0.0;
  const double h = 2.0 / n;
  for (int k = 0; k < n; ++k) {
    const double x = -1.0 + (k + 0.5) * h;
    s += 2.0 * std::sqrt(1.0 - x * x) * h;
  }
  return s;
}

AxisymGrid flat_grid(double x0, double L, std::size_t n, std::size_t m) {
  return stretched_grid(x0, L, {}, n, m, 1.5);
}

const MetricSampler flat = [](double x, int) { return RadialMetric{1.0, 0.0, x, 1.0}; };

}  // namespace

TEST_CASE("constant solution stays put") {
  const auto sol = integrate_ode([](double, const OdeState&) { return OdeState{0.0}; },
                                 {3.0}, 1.0, 10.0, 0.1);
  for (const auto& y : sol.y) CHECK(y[0] == 3.0);
  CHECK(sol.profile(0)(5.55) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("exponential growth reaches e") {
  const auto sol = integrate_ode([](double, const OdeState& y) { return y; }, {1.0}, 0.0,
                                 1.0, 1e-3);
  CHECK(std::abs(sol.y.back()[0] - std::numbers::e) < 1e-8);
}

TEST_CASE("round extension ODE matches 1 - 1/r") {
  const auto sol = integrate_ode(decay_to_one, {0.0}, 1.0, 100.0, 1e-3);
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.t.size(); ++k)
    worst = std::max(worst, std::abs(sol.y[k][0] - (1.0 - 1.0 / sol.t[k])));
  CHECK(worst <= 1e-8);
  const auto f = sol.profile(0);
  CHECK(std::abs(f(37.25) - (1.0 - 1.0 / 37.25)) < 1e-8);
}

TEST_CASE("RK4 observed order under step halving") {
  auto err = [](double h) {
    const auto sol = integrate_ode([](double, const OdeState& y) { return OdeState{-2.0 * y[0]}; },
                                   {1.0}, 0.0, 1.0, h);
    return std::abs(sol.y.back()[0] - std::exp(-2.0));
  };
  const double order = std::log2(err(0.05) / err(0.025));
  CHECK(order >= 3.7);
  CHECK(order <= 4.3);
}

TEST_CASE("blow-up raises a diverged error with the last good radius") {
  bool thrown = false;
  try {
    integrate_ode([](double, const OdeState& y) { return OdeState{y[0] * y[0]}; }, {1.0},
                  0.0, 2.0, 1e-2);
  } catch (const DivergedError& e) {
    thrown = true;
    CHECK(e.last_good() < 1.1);
    CHECK(e.last_good() > 0.9);
  }
  CHECK(thrown);
}

TEST_CASE("natural spline hits its nodes and has flat ends") {
  std::vector<double> x, y;
  for (int k = 0; k <= 40; ++k) {
    x.push_back(0.1 * k + 0.01 * k * k);
    y.push_back(std::sin(x.back()));
  }
  const auto s = ScalarProfile::spline(x, y);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(s(x[k]) == doctest::Approx(y[k]).epsilon(1e-14));
  CHECK(std::abs(s.d2(x.front())) < 1e-12);
  CHECK(std::abs(s.d2(x.back())) < 1e-12);
  CHECK(std::abs(s(2.0) - std::sin(2.0)) < 1e-4);
  CHECK(std::abs(s.d1(2.0) - std::cos(2.0)) < 1e-3);
  CHECK_THROWS_AS(s(-1.0), DomainError);
}

TEST_CASE("hermite profile returns the given slopes at nodes") {
  const auto p = ScalarProfile::hermite({0.0, 1.0, 2.0}, {0.0, 1.0, 8.0}, {0.0, 3.0, 12.0});
  CHECK(p.d1(1.0) == doctest::Approx(3.0));
  CHECK(p(1.5) == doctest::Approx(3.375));  // cubic reproduced exactly
}

TEST_CASE("richardson arithmetic and degenerate inputs") {
  const auto a = richardson(1.1, 1.05, 1.0);
  CHECK(a.extrapolated == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(a.degenerate);
  const auto d = richardson(2.0, 2.0, 1.0);
  CHECK(d.degenerate);
  CHECK(d.extrapolated == 2.0);
  const auto three = richardson(1.0 + 0.4, 1.0 + 0.1, 1.0 + 0.025, 2.0);
  CHECK(three.observed_order == doctest::Approx(2.0));
  CHECK(three.monotone);
}

TEST_CASE("midpoint disc areas extrapolate to pi") {
  // the strip integrand has square-root ends, so the error runs as n^{-3/2}
  const auto rep = richardson(disc_midpoint(20000), disc_midpoint(40000), 1.5);
  CHECK(std::abs(rep.extrapolated - std::numbers::pi) < 1e-6);
  const auto three =
      richardson(disc_midpoint(10000), disc_midpoint(20000), disc_midpoint(40000), 1.5);
  CHECK(three.observed_order == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("romberg table removes successive orders") {
  auto v = [](double r) { return 1.0 / (1.0 - 2.0 / r); };
  const auto rep = richardson_table({v(50), v(100), v(200)}, 1.0);
  CHECK(std::abs(rep.extrapolated - 1.0) < 1e-4);
}

TEST_CASE("root finding") {
  CHECK(find_root([](double r) { return r - 2.0; }, 1.0, 3.0) == doctest::Approx(2.0).epsilon(1e-13));
  const double m = 1.0;
  auto areal_slope = [m](double s) { return (1.0 + m / (2 * s)) * (1.0 - m / (2 * s)); };
  CHECK(std::abs(find_root(areal_slope, 0.2, 3.0) - 0.5) < 1e-12);
  CHECK_THROWS_AS(find_root([](double) { return 1.0; }, 1.0, 3.0), BracketError);
  CHECK(std::abs(find_root([](double r) { return std::cos(r); }, 0.0, 3.0) - std::numbers::pi / 2) < 1e-12);
}

TEST_CASE("gauss-legendre and sphere quadrature") {
  const auto q = gauss_legendre(10, 0.0, 2.0);
  double s = 0.0;
  for (std::size_t k = 0; k < q.x.size(); ++k) s += q.w[k] * std::pow(q.x[k], 7);
  CHECK(s == doctest::Approx(32.0).epsilon(1e-13));
  const double area = sphere_integral([](double, double) { return 1.0; });
  CHECK(area == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-14));
  const double z2 = sphere_integral([](double t, double) { return std::pow(std::cos(t), 2); });
  CHECK(z2 == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-14));
}

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(AxisymGrid(std::vector<double>{0, 1, 2}, 8), DomainError);
  CHECK_THROWS_AS(stretched_grid(0.0, 1.0, {}, 16, 4), DomainError);
  const auto g = stretched_grid(0.0, 20.0, {1.0}, 33, 16);
  CHECK(g.theta(0) == 0.0);
  CHECK(g.theta(16) == std::numbers::pi);
  REQUIRE(g.breaks().size() == 1);
  CHECK(g.r(g.breaks()[0]) == 1.0);
  CHECK(g.r(g.nr() - 1) == 20.0);
  for (std::size_t i = 1; i < g.nr(); ++i) CHECK(g.r(i) > g.r(i - 1));
  const auto seg = g.segment(g.breaks()[0], -1);
  CHECK(seg.first == 0);
  CHECK(seg.second == g.breaks()[0]);
}

TEST_CASE("Laplace on a flat annulus reproduces z") {
  const auto g = flat_grid(1.0, 4.0, 24, 16);
  BoundarySpec bc;
  for (std::size_t j = 0; j < g.nt(); ++j) {
    bc.inner_values.push_back(1.0 * std::cos(g.theta(j)));
    bc.outer_values.push_back(4.0 * std::cos(g.theta(j)));
  }
  const auto op = assemble_operator(g, flat, bc);
  const auto res = solve_linear_elliptic(op, GridField(g.size(), 0.0), GridField(g.size(), 0.0));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nr(); ++i)
    for (std::size_t j = 0; j < g.nt(); ++j)
      worst = std::max(worst, std::abs(res.u[g.index(i, j)] - g.r(i) * std::cos(g.theta(j))));
  CHECK(worst < 1e-8);

  // residual falls monotonically once the transient is over
  const std::size_t skip = res.history.size() / 10;
  bool monotone = true;
  for (std::size_t k = skip + 1; k < res.history.size(); ++k)
    if (res.history[k] > res.history[k - 1] * (1.0 + 1e-12)) monotone = false;
  CHECK(monotone);
  CHECK(res.residual <= 1e-12);
}

TEST_CASE("Poisson on the unit ball gives 1 - r^2") {
  const auto g = flat_grid(0.0, 1.0, 20, 12);
  BoundarySpec bc;
  bc.inner = InnerKind::Center;
  bc.outer_values.assign(g.nt(), 0.0);
  const auto op = assemble_operator(g, flat, bc);
  const auto res = solve_linear_elliptic(op, GridField(g.size(), -6.0), GridField(g.size(), 0.0));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nr(); ++i)
    for (std::size_t j = 0; j < g.nt(); ++j)
      worst = std::max(worst, std::abs(res.u[g.index(i, j)] - (1.0 - g.r(i) * g.r(i))));
  CHECK(worst < 1e-9);
}

TEST_CASE("zero data gives the zero field") {
  const auto g = flat_grid(0.5, 3.0, 16, 8);
  BoundarySpec bc;
  bc.inner_values.assign(g.nt(), 0.0);
  bc.outer_values.assign(g.nt(), 0.0);
  const auto op = assemble_operator(g, flat, bc);
  const auto res = solve_linear_elliptic(op, GridField(g.size(), 0.0), GridField(g.size(), 0.0));
  for (double v : res.u) CHECK(v == 0.0);
  CHECK(res.iterations == 0);
}

TEST_CASE("iteration cap reports the final residual") {
  const auto g = flat_grid(0.5, 3.0, 16, 8);
  BoundarySpec bc;
  bc.inner_values.assign(g.nt(), 1.0);
  bc.outer_values.assign(g.nt(), 0.0);
  const auto op = assemble_operator(g, flat, bc);
  SolveOptions opt;
  opt.max_iter = 3;
  CHECK_THROWS_AS(solve_linear_elliptic(op, GridField(g.size(), 0.0), GridField(g.size(), 0.0), opt),
                  UnconvergedError);
}

TEST_CASE("red-black and lexicographic sweeps agree and repeat bit for bit") {
  const auto g = stretched_grid(0.0, 10.0, {1.0}, 40, 16);
  const MetricSampler bumpy = [](double x, int side) {
    const double f = side < 0 || x < 1.0 ? 1.0 + x * x : 1.0 + 1.0 / x;
    const double df = side < 0 || x < 1.0 ? 2 * x : -1.0 / (x * x);
    return RadialMetric{1.0 / f, -df / (f * f), x, 1.0};
  };
  BoundarySpec bc;
  bc.inner = InnerKind::Center;
  for (std::size_t j = 0; j < g.nt(); ++j) bc.outer_values.push_back(10.0 * std::cos(g.theta(j)));
  const auto op = assemble_operator(g, bumpy, bc);
  GridField src(g.size(), 0.0);
  for (std::size_t k = 0; k < src.size(); ++k) src[k] = std::sin(0.01 * static_cast<double>(k));
  SolveOptions lex, rb;
  rb.sweep = Sweep::RedBlack;
  const auto a = solve_linear_elliptic(op, src, GridField(g.size(), 0.0), lex);
  const auto b = solve_linear_elliptic(op, src, GridField(g.size(), 0.0), rb);
  const auto c = solve_linear_elliptic(op, src, GridField(g.size(), 0.0), lex);
  double diff = 0.0;
  for (std::size_t k = 0; k < a.u.size(); ++k) diff = std::max(diff, std::abs(a.u[k] - b.u[k]));
  CHECK(diff < 1e-8);
  CHECK(a.u == c.u);
}

#include <cmath>
#include <numbers>

#include "doctest.h"

#include "cornermass/harmonic.hpp"

using namespace cornermass;
using namespace cornermass::harmonic;
using corner::scenario_build;
using geometry::RadialPatch;
using numgrid::Jet;
using numgrid::ScalarProfile;

namespace {

constexpr double kPi = std::numbers::pi;

GluedDataSet flat_with_k(double c) {
  return corner::single(RadialPatch::areal(ScalarProfile::constant(0.0, 1e3, 1.0),
                                           ScalarProfile::constant(0.0, 1e3, c),
                                           ScalarProfile::constant(0.0, 1e3, c)));
}

// kappa (1 - s^2)^3 on [1.5, 2.5]
ScalarProfile shell(double kappa) {
  return ScalarProfile::analytic(0.0, 1e3, [kappa](double r) {
    const double s = (r - 2.0) / 0.5;
    if (std::abs(s) >= 1.0) return Jet{0.0, 0.0, 0.0};
    const double q = 1.0 - s * s;
    return Jet{kappa * q * q * q, -12.0 * kappa * s * q * q, kappa * (-24.0 * q * q + 96.0 * s * s * q)};
  });
}

// radial v with (r^2 v')' = -K r^2, v(L) = 0, for K = 3 shell(kappa)
double first_order(double kappa, double r, double L) {
  const auto K = shell(3.0 * kappa);
  auto inner = [&](double s) {
    if (s <= 1.5) return 0.0;
    const auto q = numgrid::gauss_legendre(24, 1.5, std::min(s, 2.5));
    double m = 0.0;
    for (std::size_t k = 0; k < q.x.size(); ++k) m += q.w[k] * K(q.x[k]) * q.x[k] * q.x[k];
    return m;
  };
  double v = 0.0;
  const double a = std::max(r, 1.5);
  if (a < L) {
    const auto q = numgrid::gauss_legendre(48, a, L);
    for (std::size_t k = 0; k < q.x.size(); ++k) v += q.w[k] * inner(q.x[k]) / (q.x[k] * q.x[k]);
  }
  return v;
}

// u = sin(z) (x^2 + y^2) + z^3, Hessian in Cartesian components projected on
// (e_r, e_theta, e_phi) at phi = 0
std::array<double, 4> hessian_oracle(double r, double th) {
  const double x = r * std::sin(th), z = r * std::cos(th);
  const double h[3][3] = {{2.0 * std::sin(z), 0.0, 2.0 * x * std::cos(z)},
                          {0.0, 2.0 * std::sin(z), 0.0},
                          {2.0 * x * std::cos(z), 0.0, -std::sin(z) * x * x + 6.0 * z}};
  const double er[3] = {std::sin(th), 0.0, std::cos(th)};
  const double et[3] = {std::cos(th), 0.0, -std::sin(th)};
  auto q = [&](const double* a, const double* b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += a[i] * h[i][j] * b[j];
    return s;
  };
  return {q(er, er), q(er, et), q(et, et), h[1][1]};
}

double oracle_u(double r, double th) {
  const double x = r * std::sin(th), z = r * std::cos(th);
  return std::sin(z) * x * x + z * z * z;
}

AxisymGrid uniform_grid(double a, double b, std::size_t n, std::size_t cells) {
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = a + (b - a) * k / (n - 1);
  return AxisymGrid(r, cells);
}

}  // namespace

TEST_CASE("flat data reproduce the harmonic coordinate") {
  const auto flat = scenario_build("flat");
  const auto grid = make_grid(flat, {6.0, 32, 24});
  for (auto sweep : {numgrid::Sweep::Lexicographic, numgrid::Sweep::RedBlack}) {
    HarmonicOptions opt;
    opt.sweep = sweep;
    const auto f = solve_spacetime_harmonic(flat, grid, opt);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.nr(); ++i)
      for (std::size_t j = 0; j < grid.nt(); ++j)
        err = std::max(err, std::abs(f.value(i, j) - grid.r(i) * std::cos(grid.theta(j))));
    CHECK(err <= 1e-8);
    CHECK(f.diagnostics.picard_iterations == 1);
    CHECK(f.diagnostics.inner == InnerBoundary::Center);
    CHECK(f.diagnostics.max_principle_violation <= 1e-10);
    CHECK(f.axis_defect() <= 6.0 * std::pow(grid.dtheta(), 3));
  }
  HarmonicOptions down;
  down.direction = -1.0;
  const auto f = solve_spacetime_harmonic(flat, grid, down);
  CHECK(f.value(grid.nr() - 1, 0) == doctest::Approx(-6.0));
}

TEST_CASE("Schwarzschild with k = 0 is one linear solve") {
  const auto s = scenario_build("schwarzschild");
  const auto grid = make_grid(s, {40.0, 48, 24});
  const auto f = solve_spacetime_harmonic(s, grid);
  CHECK(f.diagnostics.picard_iterations == 1);
  CHECK(f.diagnostics.residual <= 1e-11);
  CHECK(f.diagnostics.inner == InnerBoundary::Dirichlet);
  double umax = 0.0;
  for (double v : f.values()) umax = std::max(umax, std::abs(v));
  CHECK(umax <= 40.0 + 1e-10);
  CHECK(f.diagnostics.max_principle_violation <= 1e-10);
  // zero Dirichlet data on the inner sphere: d_nu u changes sign with cos(theta)
  CHECK_FALSE(f.diagnostics.inner_sign_consistent);
  CHECK_THROWS_AS(solve_spacetime_harmonic(s, grid, {InnerBoundary::Center}), DomainError);
  CHECK_THROWS_AS(make_grid(s, {1e7, 48, 24}), DomainError);
}

TEST_CASE("shell of mean curvature source shifts u like the first-order oracle") {
  const double L = 6.0;
  for (double kappa : {1e-3, -1e-3}) {
    const auto data = corner::single(RadialPatch::areal(ScalarProfile::constant(0.0, 1e3, 1.0),
                                                        shell(kappa), shell(kappa)));
    const auto grid = make_grid(data, {L, 97, 32, 1.0, 0.5});
    const auto f = solve_spacetime_harmonic(data, grid);
    CHECK(f.diagnostics.picard_iterations >= 2);
    CHECK(f.diagnostics.contraction);
    CHECK(f.diagnostics.residual <= 1e-9);
    double worst = 0.0, ref = 0.0;
    for (std::size_t i = 1; i + 1 < grid.nr(); i += 6) {
      const double v = first_order(kappa, grid.r(i), L);
      ref = std::max(ref, std::abs(v));
      for (std::size_t j : {std::size_t{3}, std::size_t{16}, std::size_t{29}}) {
        const double dv = f.value(i, j) - grid.r(i) * std::cos(grid.theta(j));
        worst = std::max(worst, std::abs(dv - v));
        if (std::abs(v) > 1e-6) CHECK(dv * kappa > 0.0);
      }
    }
    CHECK(ref > 1e-4);
    CHECK(worst <= 0.02 * ref);
  }
}

TEST_CASE("spacetime Hessian") {
  const auto flat = scenario_build("flat");
  const auto grid = make_grid(flat, {4.0, 24, 16});
  auto z = AxisymField::inject(grid, [](double r, double t) { return r * std::cos(t); });
  auto h = spacetime_hessian(z, flat);
  double worst = 0.0;
  for (const auto& t : h.above) worst = std::max(worst, t.s_norm2);
  CHECK(worst <= 1e-20);

  const double c = 0.7;
  const auto kc = flat_with_k(c);
  h = spacetime_hessian(z, kc);
  for (std::size_t i = 1; i < grid.nr(); ++i)
    for (std::size_t j = 0; j < grid.nt(); ++j)
      CHECK(h.at(i, j).s_norm2 == doctest::Approx(3.0 * c * c).epsilon(1e-12));
  CHECK(h.identity_defect <= 1e-12);
  CHECK(h.symmetry_defect <= 1e-10);

  // quadratic in r times cos(theta): the stencils are exact
  auto g = uniform_grid(0.5, 2.0, 16, 16);
  auto quad = spacetime_hessian(
      AxisymField::inject(g, [](double r, double t) { return r * r * std::cos(t); }), flat);
  for (std::size_t i = 0; i < g.nr(); ++i)
    for (std::size_t j = 0; j < g.nt(); ++j) {
      const double t = g.theta(j);
      CHECK(quad.at(i, j).h11 == doctest::Approx(2.0 * std::cos(t)));
      CHECK(quad.at(i, j).h12 == doctest::Approx(-std::sin(t)));
      CHECK(quad.at(i, j).h33 == doctest::Approx(std::cos(t)));
    }

  double err[3];
  for (int level = 0; level < 3; ++level) {
    g = uniform_grid(0.5, 2.0, (12u << level) + 1, 12u << level);
    const auto hs = spacetime_hessian(AxisymField::inject(g, oracle_u), flat);
    double e = 0.0;
    for (std::size_t i = 0; i < g.nr(); ++i)
      for (std::size_t j = 0; j < g.nt(); ++j) {
        const auto ex = hessian_oracle(g.r(i), g.theta(j));
        const auto& t = hs.at(i, j);
        e = std::max({e, std::abs(t.h11 - ex[0]), std::abs(t.h12 - ex[1]), std::abs(t.h22 - ex[2]),
                      std::abs(t.h33 - ex[3])});
      }
    err[level] = e;
  }
  CHECK(std::log2(err[0] / err[1]) >= 1.7);
  CHECK(std::log2(err[1] / err[2]) >= 1.7);
}

TEST_CASE("mass bound terms for flat data vanish") {
  const auto flat = scenario_build("flat");
  const auto grid = make_grid(flat, {8.0, 32, 16});
  const auto f = solve_spacetime_harmonic(flat, grid);
  const auto adm = masses::adm_energy_momentum(flat, {50.0, 100.0, 200.0});
  const auto rep = mass_bound_report(flat, f, adm);
  CHECK(rep.lhs == 0.0);
  CHECK(std::abs(rep.bulk) <= 1e-8);
  CHECK(rep.corner == 0.0);
  CHECK(std::abs(rep.slack) <= 1e-8);
  CHECK(rep.slack == rep.lhs - (rep.bulk + rep.corner));
}

TEST_CASE("counterexample: corner hypothesis fails and the bound is negative") {
  const auto h = scenario_build("hyperbolic_negschw");
  const auto adm = masses::adm_energy_momentum(h, {50.0, 100.0, 200.0});
  const auto grid = make_grid(h, {20.0, 48, 24});
  const auto f = solve_spacetime_harmonic(h, grid);
  CHECK(f.diagnostics.contraction);
  CHECK(f.diagnostics.max_principle_violation <= 1e-10);
  const auto rep = mass_bound_report(h, f, adm);
  CHECK(rep.corner_hypothesis_violated);
  CHECK(rep.corner_bound < 0.0);
  CHECK(rep.corner >= rep.corner_bound);
  CHECK(rep.lhs == doctest::Approx(-8.0 * kPi).epsilon(1e-4));
  CHECK(rep.bulk_hessian >= 0.0);
}

TEST_CASE("integral formula on flat balls") {
  const auto flat = scenario_build("flat");
  const auto grid = make_grid(flat, {2.0, 41, 32, 0.0});
  const auto z = AxisymField::inject(grid, [](double r, double t) { return r * std::cos(t); });
  auto rep = integral_formula_check(flat, z, 0.0, 1.0);
  CHECK(std::abs(rep.lhs) <= 1e-12);
  CHECK(std::abs(rep.rhs) <= 1e-12);

  const double c = 0.5;
  for (std::size_t n : {41u, 81u}) {
    const auto g = make_grid(flat_with_k(c), {2.0, n, n - 1, 0.0});
    const auto u = AxisymField::inject(g, [](double r, double t) { return r * std::cos(t); });
    rep = integral_formula_check(flat_with_k(c), u, 0.0, 1.0);
    CHECK(rep.lhs == doctest::Approx(6.0 * kPi * c * c).epsilon(2e-3));
    CHECK(rep.defect == doctest::Approx(6.0 * kPi * c * c).epsilon(2e-3));
    CHECK(std::abs(rep.flux) <= 1e-10);
    CHECK(std::abs(rep.level_sets) <= 1e-10);
    // u = z and k = c g: the bulk defect F^2 / 2 carries the whole left side
    CHECK(std::abs(rep.discrepancy) <= 1e-10);
  }
}

TEST_CASE("integral formula on a Schwarzschild annulus converges") {
  const auto s = scenario_build("schwarzschild");
  double prev = 0.0;
  for (std::size_t n : {33u, 65u}) {
    const auto grid = make_grid(s, {9.0, n, n - 1, 0.0});
    const auto f = solve_spacetime_harmonic(s, grid);
    const auto rep = integral_formula_check(s, f, 3.0, 9.0);
    CHECK(rep.lhs > 0.0);
    // u = 0 on r = 3 makes the equator critical
    CHECK(rep.excluded_measure < 1e-3);
    if (prev > 0.0) CHECK(std::abs(rep.discrepancy) < 0.35 * prev);
    prev = std::abs(rep.discrepancy);
  }
}

TEST_CASE("boundary formula") {
  const auto flat = scenario_build("flat");
  auto grid = uniform_grid(0.5, 2.0, 31, 48);
  const auto z = AxisymField::inject(grid, [](double r, double t) { return r * std::cos(t); });
  auto rep = boundary_formula_check(flat, z, 1.0);
  CHECK(rep.max_pointwise <= 1e-6);
  CHECK(std::abs(rep.lhs_integral) <= 1e-10);
  CHECK_FALSE(rep.flagged);

  const auto radial = AxisymField::inject(grid, [](double r, double) { return r * r; });
  rep = boundary_formula_check(flat, radial, 1.0);
  CHECK(rep.max_pointwise <= 1e-9);
  // w = 2r: d_nu w = 2 = F nu(u) / w - H w with F = 6
  for (double v : rep.lhs) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

  const auto hyp = scenario_build("hyperbolic_negschw");
  auto u = [](double r, double t) {
    const double c = std::cos(t);
    return r * c + 0.3 * r * r * c * c - 0.2 * std::sin(r) * c * c * c;
  };
  double res[3];
  for (int level = 0; level < 3; ++level) {
    const std::size_t m = 8u << level;
    grid = uniform_grid(0.25, 1.0, 3 * m + 1, 4 * m);
    res[level] = boundary_formula_check(hyp, AxisymField::inject(grid, u), 0.5, -1).max_pointwise;
  }
  CHECK(std::log2(res[1] / res[2]) >= 1.7);
  CHECK(res[2] < res[0]);
  CHECK_THROWS_AS(boundary_formula_check(hyp, AxisymField::inject(grid, u), 0.51), DomainError);
}

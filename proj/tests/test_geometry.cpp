#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "cornermass/geometry.hpp"

using namespace cornermass;
using namespace cornermass::geometry;
using numgrid::ScalarProfile;

namespace {

ScalarProfile konst(double lo, double hi, double v) { return ScalarProfile::constant(lo, hi, v); }

RadialPatch flat(double lo = 0.0, double hi = 10.0) {
  return RadialPatch::areal(konst(lo, hi, 1.0), konst(lo, hi, 0.0), konst(lo, hi, 0.0));
}

RadialPatch schwarzschild(double m, double lo, double hi) {
  auto f = ScalarProfile::analytic(lo, hi, [m](double r) {
    return Jet{1.0 - 2.0 * m / r, 2.0 * m / (r * r), -4.0 * m / (r * r * r)};
  });
  return RadialPatch::areal(f, konst(lo, hi, 0.0), konst(lo, hi, 0.0));
}

RadialPatch hyperbolic(double s, double hi = 1.0) {
  auto f = ScalarProfile::analytic(0.0, hi, [](double r) { return Jet{1.0 + r * r, 2.0 * r, 2.0}; });
  return RadialPatch::areal(f, konst(0.0, hi, s), konst(0.0, hi, s));
}

// isotropic Schwarzschild: A = psi^4, rho = s psi^2
RadialPatch isotropic(double m, double lo, double hi) {
  auto A = ScalarProfile::analytic(lo, hi, [m](double s) {
    const double p = 1.0 + m / (2 * s), dp = -m / (2 * s * s), ddp = m / (s * s * s);
    return Jet{std::pow(p, 4), 4 * std::pow(p, 3) * dp, 12 * p * p * dp * dp + 4 * std::pow(p, 3) * ddp};
  });
  auto rho = ScalarProfile::analytic(lo, hi, [m](double s) {
    const double p = 1.0 + m / (2 * s), dp = -m / (2 * s * s), ddp = m / (s * s * s);
    return Jet{s * p * p, p * p + 2 * s * p * dp, 4 * p * dp + 2 * s * (dp * dp + p * ddp)};
  });
  return RadialPatch::chart(A, rho, konst(lo, hi, 0.0), konst(lo, hi, 0.0));
}

oracle::RadialData as_oracle(const RadialPatch& p) {
  return {[p](double r) { return p.f(r); }, [p](double r) { return p.a(r)[0]; },
          [p](double r) { return p.b(r)[0]; }};
}

}  // namespace

TEST_CASE("scalar curvature of model metrics") {
  CHECK(scalar_curvature(flat(), 2.0) == 0.0);
  CHECK(scalar_curvature(flat(), 0.0) == doctest::Approx(0.0));
  const auto s = schwarzschild(1.0, 3.0, 100.0);
  for (double r : {3.0, 4.5, 17.0, 99.0}) CHECK(std::abs(scalar_curvature(s, r)) < 1e-14);
  const auto h = hyperbolic(1.0);
  for (double r : {0.25, 0.5, 1.0}) CHECK(scalar_curvature(h, r) == doctest::Approx(-6.0).epsilon(1e-13));
  CHECK(std::abs(scalar_curvature(h, 0.0) + 6.0) < 1e-9);
  CHECK_THROWS_AS(scalar_curvature(h, 1.5), DomainError);
}

TEST_CASE("mean curvature of coordinate spheres") {
  CHECK(mean_curvature_sphere(flat(), 2.0) == doctest::Approx(1.0));
  CHECK(mean_curvature_sphere(hyperbolic(1.0), 1.0) == doctest::Approx(2.0 * std::sqrt(2.0)));
  auto neg = ScalarProfile::analytic(1.0, 50.0, [](double r) {
    return Jet{1.0 + 1.0 / r, -1.0 / (r * r), 2.0 / (r * r * r)};
  });
  const auto out = RadialPatch::areal(neg, konst(1.0, 50.0, 0.0), konst(1.0, 50.0, 0.0));
  CHECK(mean_curvature_sphere(out, 1.0) == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK_THROWS_AS(mean_curvature_sphere(flat(), 0.0), DomainError);
}

TEST_CASE("H depends on the areal sphere, not the chart") {
  const auto areal = schwarzschild(1.0, 2.01, 60.0);
  const auto iso = isotropic(1.0, 0.55, 30.0);
  for (double s : {0.6, 1.0, 2.0, 7.5, 25.0}) {
    const double r = iso.rho(s)[0];
    CHECK(mean_curvature_sphere(iso, s) == doctest::Approx(mean_curvature_sphere(areal, r)).epsilon(1e-12));
    CHECK(std::abs(scalar_curvature(iso, s)) < 1e-12);
    CHECK(iso.f(s) == doctest::Approx(areal.f(r)).epsilon(1e-12));
  }
}

TEST_CASE("constraint examples") {
  const auto h = hyperbolic(1.0);
  for (double r : {0.0, 0.3, 0.7, 1.0}) {
    const auto c = constraints(h, r);
    CHECK(std::abs(c.mu) < 1e-8);
    CHECK(std::abs(c.J_radial) < 1e-12);
  }
  const auto c = constraints(flat(), 3.0);
  CHECK(c.mu == 0.0);
  CHECK(c.J_radial == 0.0);
  CHECK(c.dec_margin == c.mu - std::abs(c.J_radial));
}

TEST_CASE("vacuum families to 1e-10") {
  for (double m : {0.1, 1.0, 3.0}) {
    const auto s = schwarzschild(m, 2.5 * m, 40.0 * m);
    for (int k = 0; k <= 20; ++k) {
      const double r = 2.5 * m + k * 37.5 * m / 20;
      const auto c = constraints(s, r);
      CHECK(std::abs(c.mu) < 1e-10);
      CHECK(std::abs(c.J_radial) < 1e-10);
    }
  }
  for (double sign : {1.0, -1.0}) {
    const auto h = hyperbolic(sign);
    for (int k = 1; k <= 20; ++k) {
      const auto c = constraints(h, k / 20.0);
      CHECK(std::abs(c.mu) < 1e-10);
      CHECK(std::abs(c.J_radial) < 1e-10);
    }
  }
}

TEST_CASE("momentum tensor algebra") {
  auto m = momentum_tensor(hyperbolic(1.0), 0.5);
  CHECK(m.pi_nn == -2.0);
  CHECK(m.pi_tan == -2.0);
  const auto zero = momentum_tensor(flat(), 1.0);
  CHECK(zero.pi_nn == 0.0);
  CHECK(zero.pi_tan == 0.0);
  CHECK(zero.tr_k == 0.0);
  CHECK(zero.tr_sigma_k == 0.0);
  const auto p = RadialPatch::areal(konst(0, 5, 1.0), konst(0, 5, 3.0), konst(0, 5, 0.0));
  m = momentum_tensor(p, 2.0);
  CHECK(m.tr_k == 3.0);
  CHECK(m.pi_nn == 0.0);
  CHECK(m.pi_tan == -3.0);

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 200; ++t) {
    const auto q = RadialPatch::areal(konst(0, 1, 1.0), konst(0, 1, u(gen)), konst(0, 1, u(gen)));
    const auto s = momentum_tensor(q, 0.5);
    CHECK(std::abs(s.pi_nn + s.tr_sigma_k) <= 1e-14);
  }
}

TEST_CASE("null expansions and trapping tags") {
  auto e = null_expansions(flat(), 1.0);
  CHECK(e.theta_plus == 2.0);
  CHECK(e.theta_minus == 2.0);
  CHECK_FALSE(e.outer_trapped);
  CHECK_FALSE(e.inner_trapped);

  const auto trapped = RadialPatch::areal(konst(0.5, 2, 1.0), konst(0.5, 2, 0.0), konst(0.5, 2, -2.0));
  e = null_expansions(trapped, 1.0);
  CHECK(e.theta_plus == -2.0);
  CHECK(e.outer_trapped);
  CHECK_FALSE(e.inner_trapped);

  const auto iso = isotropic(1.0, 0.3, 10.0);
  e = null_expansions(iso, 0.5);
  CHECK(std::abs(e.theta_plus) < 1e-14);
  CHECK(e.mots);
  CHECK(e.outer_trapped);
}

TEST_CASE("construction rejects ill-posed patches") {
  auto bad_f = ScalarProfile::analytic(0.0, 2.0, [](double r) { return Jet{1.0 - r, -1.0, 0.0}; });
  CHECK_THROWS_AS(RadialPatch::areal(bad_f, konst(0, 2, 0), konst(0, 2, 0)), DomainError);
  CHECK_THROWS_AS(RadialPatch::areal(konst(0, 2, 2.0), konst(0, 2, 0), konst(0, 2, 0)), DomainError);
  CHECK_THROWS_AS(RadialPatch::areal(konst(1, 2, 1.0), konst(0, 1.5, 0), konst(1, 2, 0)), DomainError);
  CHECK_NOTHROW(RadialPatch::areal(konst(1, 2, 2.0), konst(1, 2, 0), konst(1, 2, 0)));
}

TEST_CASE("dec_check on model data") {
  auto rep = dec_check(schwarzschild(1.0, 3.0, 50.0), 200);
  CHECK(rep.satisfied);
  CHECK(std::abs(rep.min_margin) < 1e-12);
  rep = dec_check(hyperbolic(1.0), 100);
  CHECK(rep.satisfied);
  CHECK(std::abs(rep.min_margin) < 1e-8);
  CHECK_THROWS_AS(dec_check(flat(), 1), DomainError);

  // b = r on flat space: mu = r^2 and J = -2 b' - 2 b / r = -4
  auto b = ScalarProfile::analytic(0.0, 3.0, [](double r) { return Jet{r, 1.0, 0.0}; });
  const auto adhoc = RadialPatch::areal(konst(0, 3, 1.0), konst(0, 3, 0.0), b);
  rep = dec_check(adhoc, 301);
  CHECK(rep.min_margin == doctest::Approx(-4.0).epsilon(1e-10));
  CHECK(rep.at_radius == 0.0);
  CHECK_FALSE(rep.satisfied);
  const auto o = as_oracle(adhoc);
  for (double r : {0.5, 1.0, 2.0}) {
    const oracle::Vec x{r * 0.48, r * 0.6, r * 0.64};
    const auto c = constraints(adhoc, r);
    CHECK(c.J_radial == doctest::Approx(-4.0));
    CHECK(std::abs(c.J_radial - oracle::radial_current(o, x)) < 1e-4);
    CHECK(std::abs(c.mu - oracle::energy_density(o, x)) < 1e-4);
  }
}

TEST_CASE("closed forms agree with the Cartesian oracle on random profiles") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 6; ++trial) {
    const double c1 = u(gen), c2 = u(gen), a0 = u(gen), a1 = u(gen), b0 = u(gen), b1 = u(gen);
    auto f = ScalarProfile::analytic(0.5, 3.0, [=](double r) {
      const double e = std::exp(c2 * r);
      return Jet{1.0 + c1 * std::sin(r) + 0.5 * e - 0.5, c1 * std::cos(r) + 0.5 * c2 * e,
                 -c1 * std::sin(r) + 0.5 * c2 * c2 * e};
    });
    auto a = ScalarProfile::analytic(0.5, 3.0, [=](double r) {
      return Jet{a0 + a1 * r * r, 2 * a1 * r, 2 * a1};
    });
    auto b = ScalarProfile::analytic(0.5, 3.0, [=](double r) {
      return Jet{b0 * std::cos(r) + b1, -b0 * std::sin(r), -b0 * std::cos(r)};
    });
    const auto p = RadialPatch::areal(f, a, b);
    const auto o = as_oracle(p);
    for (double r : {0.9, 1.7, 2.6}) {
      const double th = 0.3 + 0.4 * trial, ph = 1.1 * trial;
      const oracle::Vec x{r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph),
                          r * std::cos(th)};
      const auto c = constraints(p, r);
      CHECK(std::abs(c.R - oracle::scalar_curvature(o, x)) < 1e-4);
      CHECK(std::abs(c.mu - oracle::energy_density(o, x)) < 1e-4);
      CHECK(std::abs(c.J_radial - oracle::radial_current(o, x)) < 1e-4);
    }
  }
}

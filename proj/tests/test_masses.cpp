#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "cornermass/masses.hpp"

using namespace cornermass;
using namespace cornermass::masses;
using corner::scenario_build;

namespace {
const std::vector<double> kRadii{50.0, 100.0, 200.0};
constexpr double kPi = std::numbers::pi;
}  // namespace

TEST_CASE("ADM energy of Schwarzschild by both paths") {
  const auto g = scenario_build("schwarzschild");
  const auto adm = adm_energy_momentum(g, kRadii);
  CHECK(std::abs(adm.E - 1.0) < 1e-4);
  CHECK(std::abs(adm.E_ms - 1.0) < 1e-8);
  CHECK(adm.P_norm <= 1e-10);
  CHECK(adm.mass == doctest::Approx(adm.E));
  // per radius the flux equals (r/2)(1/f - 1)
  for (const auto& s : adm.samples)
    CHECK(s.E_flux == doctest::Approx(0.5 * s.radius * (1.0 / (1.0 - 2.0 / s.radius) - 1.0)).epsilon(1e-12));
  CHECK_FALSE(adm.extrapolation_suspect);
}

TEST_CASE("ADM energy of flat space and of the counterexample") {
  auto adm = adm_energy_momentum(scenario_build("flat"), kRadii);
  CHECK(adm.E == 0.0);
  CHECK(adm.P_norm == 0.0);
  for (double sign : {1.0, -1.0}) {
    adm = adm_energy_momentum(scenario_build("hyperbolic_negschw", {{{"sign", sign}}, {}}), kRadii);
    CHECK(std::abs(adm.E + 0.5) < 1e-4);
    CHECK(adm.P_norm <= 1e-12);
    CHECK(std::isnan(adm.mass));
    CHECK(directional_energy(adm, {0, 0, 1}) == doctest::Approx(adm.E));
  }
}

TEST_CASE("flux and Misner-Sharp agree in the isotropic chart") {
  const auto adm = adm_energy_momentum(scenario_build("isotropic_schwarzschild"), kRadii);
  CHECK(std::abs(adm.E - 1.0) < 1e-4);
  CHECK(std::abs(adm.E_ms - 1.0) < 1e-4);
  CHECK(adm.P_norm <= 1e-12);
}

TEST_CASE("ADM input validation") {
  const auto g = scenario_build("hyperbolic_negschw", {{{"outer", 150.0}}, {}});
  CHECK_THROWS_AS(adm_energy_momentum(g, kRadii), DomainError);
  CHECK_THROWS_AS(adm_energy_momentum(g, {100.0}), DomainError);
  CHECK_THROWS_AS(adm_energy_momentum(g, {100.0, 50.0}), DomainError);
}

TEST_CASE("Hawking mass") {
  const auto s = scenario_build("schwarzschild");
  double lo = 10, hi = -10;
  for (double r : {3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 20.0, 50.0, 100.0, 1000.0}) {
    const double m = hawking_mass(s, r);
    CHECK(std::abs(m - 1.0) < 1e-8);
    CHECK(m == doctest::Approx(0.5 * r * (1.0 - (1.0 - 2.0 / r))).epsilon(1e-12));
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  CHECK(hi - lo < 1e-10);
  CHECK(hawking_mass(scenario_build("flat"), 7.0) == doctest::Approx(0.0).epsilon(1e-14));
  const auto h = scenario_build("hyperbolic_negschw");
  CHECK(hawking_mass(h, 1.0, -1) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(hawking_mass(h, 1.0), DomainError);
}

TEST_CASE("quasilocal masses on round data") {
  auto q = quasilocal(BoundaryData{2.0, 1.0, 0.0, 0.0});
  CHECK(q.W == 0.0);
  CHECK(q.m_BY == 0.0);
  CHECK(q.m_LY == 0.0);
  q = quasilocal(scenario_build("schwarzschild"), 4.0);
  CHECK(std::abs(q.m_BY - 4.0 * (1.0 - std::sqrt(0.5))) < 1e-8);
  CHECK(std::abs(q.m_H - 1.0) < 1e-12);
  q = quasilocal(BoundaryData{1.0, 3.0, 1.0, 0.0});
  CHECK(q.W == doctest::Approx(0.0));
  CHECK(q.m_LY == doctest::Approx(1.0 - 0.5 * std::sqrt(8.0)));
  CHECK(q.W >= q.m_LY);
  q = quasilocal(BoundaryData{1.0, 1.0, 2.0, 0.0});
  CHECK_FALSE(q.ly_hypothesis);
  CHECK(std::isnan(q.m_LY));
  CHECK_THROWS_AS(liu_yau_mass(1.0, 1.0, 2.0), HypothesisError);
}

TEST_CASE("W dominates Liu-Yau on random round data") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 1.0;
  for (int t = 0; t < 10000; ++t) {
    const double r0 = 0.1 + 10 * u(gen), tr = (u(gen) - 0.5) * 6;
    const double H = std::abs(tr) + 1e-6 + 5 * u(gen);
    const auto q = quasilocal(BoundaryData{r0, H, tr, (u(gen) - 0.5) * 4});
    worst = std::min(worst, q.W - q.m_LY);
  }
  CHECK(worst >= -1e-12);
}

TEST_CASE("minimal spheres") {
  auto m = minimal_sphere(scenario_build("isotropic_schwarzschild"));
  REQUIRE(m.has_value());
  CHECK(std::abs(m->x - 0.5) < 1e-10);
  CHECK(std::abs(m->area - 16.0 * kPi) < 1e-8);
  CHECK_FALSE(minimal_sphere(scenario_build("flat")).has_value());
  CHECK_FALSE(minimal_sphere(scenario_build("schwarzschild")).has_value());
}

TEST_CASE("comparison and Penrose checks") {
  const auto s = scenario_build("schwarzschild", {{{"r_in", 2.5}}, {}});
  const auto q = quasilocal(s, 10.0);
  std::vector<double> radii;
  for (int k = 0; k < 50; ++k) radii.push_back(2.5 + 7.5 * k / 49.0);
  auto rep = comparison_check(q, s, radii);
  CHECK(rep.dec);
  CHECK(rep.failures.empty());
  for (const auto& h : rep.hulls) {
    CHECK(h.verdict == Verdict::Pass);
    CHECK(h.margin == doctest::Approx(q.W - 1.0));
  }

  const auto flat = scenario_build("flat");
  rep = comparison_check(quasilocal(flat, 3.0), flat, {1.0, 2.0, 3.0});
  for (const auto& h : rep.hulls) CHECK(std::abs(h.margin) < 1e-14);

  const auto iso = scenario_build("isotropic_schwarzschild");
  rep = comparison_check(quasilocal(iso, 1e4), iso, {});
  REQUIRE(rep.minimal.has_value());
  CHECK(rep.penrose == Verdict::Pass);
  CHECK(rep.penrose_bound == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.W >= 1.0);

  auto untrusted = s;
  untrusted.topology_asserted = false;
  rep = comparison_check(q, untrusted, {5.0});
  CHECK(rep.hulls[0].verdict == Verdict::NotApplicable);
}

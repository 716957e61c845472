#include "cornermass/regress.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

#include "cornermass/errors.hpp"
#include "cornermass/extension.hpp"
#include "cornermass/geometry.hpp"
#include "cornermass/harmonic.hpp"
#include "cornermass/masses.hpp"

namespace cornermass::cli {

namespace {

using corner::scenario_build;
using Values = std::map<std::string, double>;

const std::vector<double> kAdmRadii{50.0, 100.0, 200.0};

double flag(bool b) { return b ? 1.0 : 0.0; }

Values group_hyperbolic() {
  const auto h = scenario_build("hyperbolic_negschw");
  const auto adm = masses::adm_energy_momentum(h, kAdmRadii);
  double margin = INFINITY;
  for (const auto& p : h.patches()) margin = std::min(margin, geometry::dec_check(p, 200).min_margin);
  const auto grid = harmonic::make_grid(h, {20.0, 48, 24});
  const auto f = harmonic::solve_spacetime_harmonic(h, grid);
  const auto rep = harmonic::mass_bound_report(h, f, adm);
  return {{"E", adm.E},
          {"E_ms", adm.E_ms},
          {"P_norm", adm.P_norm},
          {"jump", h.interfaces().front().jump},
          {"dec_margin", margin},
          {"corner_violated", flag(rep.corner_hypothesis_violated)},
          {"lhs", rep.lhs}};
}

Values group_schwarzschild() {
  const auto s = scenario_build("schwarzschild");
  const auto adm = masses::adm_energy_momentum(s, kAdmRadii);
  return {{"E_flux", adm.E},
          {"E_ms", adm.E_ms},
          {"P_norm", adm.P_norm},
          {"m_H_3", masses::hawking_mass(s, 3.0)},
          {"m_H_5", masses::hawking_mass(s, 5.0)},
          {"m_H_10", masses::hawking_mass(s, 10.0)},
          {"m_BY_4", masses::quasilocal(s, 4.0).m_BY}};
}

Values group_extension() {
  const auto e = extension::shi_tam_extend(1.0, 3.0);
  double worst = 0.0, worst_R = 0.0, rise = 0.0;
  for (std::size_t k = 0; k < 1000; ++k) {
    const double r = std::pow(1e3, k / 999.0);
    worst = std::max(worst, std::abs(e.patch.f(r) - (1.0 - (1.0 - e.f0) / r)));
    worst_R = std::max(worst_R, std::abs(geometry::scalar_curvature(e.patch, r)));
  }
  for (std::size_t k = 1; k < e.Q.size(); ++k) rise = std::max(rise, e.Q[k] - e.Q[k - 1]);
  return {{"E_ext", e.E_ext},
          {"Q_start", e.Q.front()},
          {"Q_limit", e.Q_limit},
          {"closed_form_error", worst},
          {"R_max", worst_R},
          {"Q_max_rise", rise}};
}

Values group_massbound() {
  const auto flat = scenario_build("flat");
  const auto fadm = masses::adm_energy_momentum(flat, kAdmRadii);
  const auto ff = harmonic::solve_spacetime_harmonic(flat, harmonic::make_grid(flat, {8.0, 32, 16}));
  const double flat_slack = harmonic::mass_bound_report(flat, ff, fadm).slack;

  const auto iso = scenario_build("isotropic_schwarzschild", {{{"s_in", 0.5}, {"outer", 1e4}}, {}});
  const auto adm = masses::adm_energy_momentum(iso, kAdmRadii);
  harmonic::MassBoundOptions mo;
  mo.grid.L = 20.0;
  mo.grid.n = 64;
  mo.levels = {32, 64, 128};
  mo.solve.inner = harmonic::InnerBoundary::Neumann;
  const auto rep = harmonic::mass_bound_analysis(iso, adm, mo);
  return {{"flat_slack", flat_slack},
          {"schwarzschild_slack", rep.slack},
          {"schwarzschild_eps_grid", rep.eps_grid},
          {"schwarzschild_eps_fine", rep.eps_fine},
          {"schwarzschild_margin", rep.slack + rep.eps_grid},
          {"delta_robust", flag(rep.delta_robust)}};
}

harmonic::AxisymField inject(double a, double b, std::size_t n, std::size_t cells,
                             const std::function<double(double, double)>& u) {
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = a + (b - a) * k / (n - 1);
  return harmonic::AxisymField::inject(numgrid::AxisymGrid(r, cells), u);
}

Values group_lemma52() {
  const auto flat = scenario_build("flat");
  const auto z = inject(0.5, 2.0, 31, 48, [](double r, double t) { return r * std::cos(t); });
  const double flat_res = harmonic::boundary_formula_check(flat, z, 1.0).max_pointwise;

  const auto hyp = scenario_build("hyperbolic_negschw");
  auto u = [](double r, double t) {
    const double c = std::cos(t);
    return r * c + 0.3 * r * r * c * c - 0.2 * std::sin(r) * c * c * c;
  };
  double res[3];
  for (int level = 0; level < 3; ++level) {
    const std::size_t m = 8u << level;
    res[level] = harmonic::boundary_formula_check(hyp, inject(0.25, 1.0, 3 * m + 1, 4 * m, u), 0.5, -1)
                     .max_pointwise;
  }
  return {{"flat_residual", flat_res}, {"random_order", std::log2(res[1] / res[2])}};
}

Values group_hessian() {
  const auto s = scenario_build("schwarzschild");
  const auto f = harmonic::solve_spacetime_harmonic(s, harmonic::make_grid(s, {30.0, 48, 24}));
  const auto h = harmonic::spacetime_hessian(f, s);
  const auto flat = scenario_build("flat");
  const auto p = inject(0.5, 2.0, 17, 16, [](double r, double t) { return r * r * std::cos(t); });
  const auto hp = harmonic::spacetime_hessian(p, flat);
  return {{"identity_defect", h.identity_defect}, {"flat_identity_defect", hp.identity_defect}};
}

Values group_liuyau() {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = INFINITY;
  double violations = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const double r0 = 0.1 + 10 * u(gen), tr = (u(gen) - 0.5) * 6;
    const double H = std::abs(tr) + 1e-6 + 5 * u(gen);
    const auto q = masses::quasilocal(masses::BoundaryData{r0, H, tr, (u(gen) - 0.5) * 4});
    worst = std::min(worst, q.W - q.m_LY);
    violations += q.W - q.m_LY < -1e-12;
  }
  return {{"violations", violations}, {"margin_nonnegative", flag(worst >= -1e-12)}};
}

Values group_penrose() {
  const auto s = scenario_build("schwarzschild", {{{"r_in", 2.5}}, {}});
  std::vector<double> radii;
  for (int k = 0; k < 50; ++k) radii.push_back(2.5 + 7.5 * k / 49.0);
  const auto q = masses::quasilocal(s, 10.0);
  const auto cmp = masses::comparison_check(q, s, radii);
  double fails = 0.0, min_margin = INFINITY;
  for (const auto& h : cmp.hulls) {
    fails += h.verdict != masses::Verdict::Pass;
    min_margin = std::min(min_margin, h.margin);
  }
  const auto iso = scenario_build("isotropic_schwarzschild");
  const auto m = masses::minimal_sphere(iso);
  const auto far = masses::comparison_check(masses::quasilocal(iso, 1e4), iso, {});
  return {{"W_10", q.W},
          {"hull_failures", fails},
          {"hull_min_margin", min_margin},
          {"minimal_s", m ? m->x : NAN},
          {"minimal_area", m ? m->area : NAN},
          {"penrose_bound", far.penrose_bound},
          {"W_far_at_least_1", flag(far.W >= 1.0)}};
}

Values group_certificate() {
  std::vector<double> h;
  for (int k = 1; k <= 400; ++k) h.push_back(0.01 * k);
  const auto sweep = extension::certificate_sweep(1.0, h);
  double mismatches = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) mismatches += sweep[k].no_fill_in != (h[k] > 2.0);
  return {{"threshold_mismatches", mismatches},
          {"E_ext_3", extension::fillin_certificate(1.0, 4.0, 1.0, 0.0).E_ext},
          {"E_ext_2", extension::fillin_certificate(1.0, 2.0, 0.0, 0.0).E_ext}};
}

numgrid::ScalarProfile bump(double amp) {
  return numgrid::ScalarProfile::analytic(0.0, 1e9, [amp](double r) {
    const double s = (r - 2.0) / 0.5;
    if (std::abs(s) >= 1.0) return numgrid::Jet{0.0, 0.0, 0.0};
    const double q = 1.0 - s * s;
    return numgrid::Jet{amp * q * q * q, -6.0 * amp * s * q * q / 0.5, 0.0};
  });
}

Values group_conformal() {
  const auto flat = scenario_build("flat", {{{"outer", 1e4}}, {}});
  const auto plain = extension::conformal_deform(flat, 0.5);
  double u_dev = 0.0;
  for (double r : {0.5, 1.0, 3.0, 10.0, 100.0}) u_dev = std::max(u_dev, std::abs(plain.u(r) - 1.0));
  extension::DeformationOptions opt;
  opt.b = bump(1e-3);
  const auto full = extension::conformal_deform(flat, 0.5, opt);
  opt.b = bump(5e-4);
  const auto half = extension::conformal_deform(flat, 0.5, opt);
  return {{"flat_A", plain.A},
          {"flat_u_deviation", u_dev},
          {"linearity", full.A / half.A},
          {"green_ratio", full.A / full.green_A},
          {"mhat_identity", full.m_hat - full.m - 2.0 * full.A}};
}

const std::map<std::string, std::function<Values()>>& table() {
  static const std::map<std::string, std::function<Values()>> t = {
      {"hyperbolic", group_hyperbolic},   {"schwarzschild", group_schwarzschild},
      {"extension", group_extension},     {"massbound", group_massbound},
      {"lemma52", group_lemma52},         {"hessian", group_hessian},
      {"liuyau", group_liuyau},           {"penrose", group_penrose},
      {"certificate", group_certificate}, {"conformal", group_conformal},
  };
  return t;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

}  // namespace

const std::vector<std::string>& regress_groups() {
  static const std::vector<std::string> g = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : table()) out.push_back(k);
    return out;
  }();
  return g;
}

Values regress_group(const std::string& group) {
  const auto it = table().find(group);
  if (it == table().end()) throw ConfigError("unknown regression group '" + group + "'");
  return it->second();
}

std::vector<GoldenValue> read_goldens(const Config& cfg) {
  std::vector<GoldenValue> out;
  for (const auto& group : cfg.sections()) {
    if (!table().count(group))
      throw ConfigError(cfg.source() + ": unknown regression group [" + group + "]");
    for (const auto& key : cfg.keys(group)) {
      const auto v = cfg.numbers(group, key);
      if (v.size() != 2) throw ConfigError(cfg.where(group, key) + ": expected `value tolerance`");
      if (!(v[1] >= 0.0)) throw ConfigError(cfg.where(group, key) + ": tolerance must be >= 0");
      out.push_back({group, key, v[0], v[1], cfg.line_of(group, key)});
    }
  }
  return out;
}

RegressResult run_regress(const std::vector<GoldenValue>& goldens, const std::string& filter) {
  std::vector<const GoldenValue*> chosen;
  for (const auto& g : goldens)
    if (filter.empty() || filter == g.group || filter == g.name()) chosen.push_back(&g);
  if (chosen.empty()) throw ConfigError("filter '" + filter + "' selects no golden values");

  std::map<std::string, Values> computed;
  for (const auto* g : chosen)
    if (!computed.count(g->group)) computed[g->group] = regress_group(g->group);

  RegressResult res;
  std::ostringstream tab, diff;
  tab << std::left << std::setw(8) << "status" << std::setw(40) << "name" << std::setw(20)
      << "expected" << std::setw(10) << "tol" << "actual\n";
  for (const auto* g : chosen) {
    RegressRow row{g->name(), g->value, g->tol};
    const auto& vals = computed[g->group];
    const auto it = vals.find(g->key);
    row.found = it != vals.end();
    if (row.found) {
      row.actual = it->second;
      row.pass = std::abs(row.actual - row.expected) <= row.tol;
    }
    res.ok = res.ok && row.pass;
    tab << std::setw(8) << (row.pass ? "PASS" : "FAIL") << std::setw(40) << row.name
        << std::setw(20) << fmt(row.expected) << std::setw(10) << fmt(row.tol)
        << (row.found ? fmt(row.actual) : "missing") << '\n';
    if (!row.pass) {
      diff << "line " << g->line << ": " << row.name << ": expected " << fmt(row.expected)
           << " +- " << fmt(row.tol);
      if (row.found)
        diff << ", got " << fmt(row.actual) << " (diff " << fmt(row.actual - row.expected) << ")\n";
      else
        diff << ", not produced by group " << g->group << '\n';
    }
    res.rows.push_back(row);
  }
  res.table = tab.str();
  res.diff = diff.str();
  return res;
}

}  // namespace cornermass::cli

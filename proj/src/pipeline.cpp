#include "cornermass/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "cornermass/errors.hpp"
#include "cornermass/extension.hpp"
#include "cornermass/geometry.hpp"
#include "cornermass/masses.hpp"
#include "cornermass/regress.hpp"

namespace cornermass::cli {

using nlohmann::json;

namespace {

// allowed keys per section; commands add nothing outside this table
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario", {"name", "m", "r_in", "s_in", "outer", "corner", "sign", "r0", "H", "omega",
                    "files", "allow_f_jump", "q", "topology"}},
      {"grid", {"resolutions", "L", "cells", "stretch", "inner_fraction"}},
      {"harmonic", {"delta", "inner", "inner_value", "direction", "tol", "linear_tol",
                    "max_picard", "relax", "sweep"}},
      {"adm", {"radii"}},
      {"sample", {"count", "tol"}},
      {"quasilocal", {"x", "side", "hulls", "hull_from", "hull_to", "hull_count"}},
      {"boundary", {"r0", "H", "tr_sigma_k", "omega_tangential"}},
      {"extension", {"span", "step", "samples"}},
      {"certificate", {"r0", "H", "tr_alpha", "beta", "h_minus_f", "sweep_from", "sweep_to",
                       "sweep_count"}},
      {"output", {"field_csv", "extension_csv"}},
  };
  return s;
}

void validate_layout(const Config& cfg) {
  for (const auto& section : cfg.sections()) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      const auto keys = cfg.keys(section);
      throw ConfigError(cfg.where(section, keys.empty() ? "" : keys.front()) +
                        ": unknown section [" + section + "]");
    }
    for (const auto& key : cfg.keys(section))
      if (!it->second.count(key)) throw ConfigError(cfg.where(section, key) + ": unknown key");
  }
}

void require(bool ok, const Config& cfg, const std::string& section, const std::string& key,
             const std::string& what) {
  if (!ok) throw ConfigError(cfg.where(section, key) + ": " + what);
}

std::string resolve_path(const Config& cfg, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.is_absolute() || cfg.source().empty() || cfg.source().front() == '<') return path;
  const fs::path near = fs::path(cfg.source()).parent_path() / p;
  return fs::exists(near) ? near.string() : path;
}

harmonic::InnerBoundary inner_of(const Config& cfg) {
  const std::string v = cfg.text("harmonic", "inner", "auto");
  if (v == "auto") return harmonic::InnerBoundary::Auto;
  if (v == "center") return harmonic::InnerBoundary::Center;
  if (v == "dirichlet") return harmonic::InnerBoundary::Dirichlet;
  if (v == "neumann") return harmonic::InnerBoundary::Neumann;
  throw ConfigError(cfg.where("harmonic", "inner") + ": expected auto, center, dirichlet or neumann");
}

std::string status_name(masses::Verdict v) {
  switch (v) {
    case masses::Verdict::Pass: return "pass";
    case masses::Verdict::Fail: return "fail";
    default: return "not-applicable";
  }
}

// ---------------------------------------------------------- serializers

json j_conv(const numgrid::ConvergenceReport& c) {
  return {{"coarse", c.coarse},
          {"fine", c.fine},
          {"extrapolated", c.extrapolated},
          {"observed_order", c.observed_order},
          {"degenerate", c.degenerate},
          {"monotone", c.monotone}};
}

json j_vec(const masses::Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json j_adm(const masses::AdmResult& a) {
  json samples = json::array();
  for (const auto& s : a.samples)
    samples.push_back({{"radius", s.radius}, {"E_flux", s.E_flux}, {"E_ms", s.E_ms}, {"P", j_vec(s.P)}});
  return {{"E", a.E},
          {"P", j_vec(a.P)},
          {"P_norm", a.P_norm},
          {"mass", a.mass},
          {"E_ms", a.E_ms},
          {"samples", samples},
          {"flux", j_conv(a.flux)},
          {"misner_sharp", j_conv(a.misner_sharp)},
          {"extrapolation_suspect", a.extrapolation_suspect}};
}

json j_interface(const corner::CornerInterface& c) {
  return {{"r_c", c.r_c},
          {"areal_radius", c.areal_radius},
          {"areal_mismatch", c.areal_mismatch},
          {"H_minus", c.H_minus},
          {"H_plus", c.H_plus},
          {"omega_minus", {c.omega_minus.normal, c.omega_minus.tangential}},
          {"omega_plus", {c.omega_plus.normal, c.omega_plus.tangential}},
          {"f_minus", c.f_minus},
          {"f_plus", c.f_plus},
          {"jump", c.jump},
          {"hypothesis_holds", c.jump >= 0.0}};
}

json j_quasilocal(const masses::QuasilocalReport& q) {
  return {{"r0", q.r0},
          {"H", q.H},
          {"tr_sigma_k", q.tr_sigma_k},
          {"omega_normal", q.omega_normal},
          {"omega_tangential", q.omega_tangential},
          {"omega", q.omega},
          {"H0", q.H0},
          {"W", q.W},
          {"m_BY", q.m_BY},
          {"m_LY", q.m_LY},
          {"m_H", q.m_H},
          {"w_hypothesis", q.w_hypothesis},
          {"ly_hypothesis", q.ly_hypothesis}};
}

json j_extension(const extension::ExtensionResult& e) {
  return {{"r0", e.r0},
          {"H_eff", e.H_eff},
          {"f0", e.f0},
          {"lapse0", e.lapse0},
          {"E_ext", e.E_ext},
          {"Q_limit", e.Q_limit},
          {"Q_start", e.Q.empty() ? std::nan("") : e.Q.front()},
          {"samples", e.Q.size()},
          {"steps", e.steps},
          {"q_report", j_conv(e.q_report)}};
}

json j_certificate(const extension::CertificateVerdict& v) {
  return {{"r0", v.r0},
          {"H", v.H},
          {"f", v.f},
          {"H_eff", v.H_eff},
          {"E_ext", v.E_ext},
          {"no_fill_in", v.no_fill_in},
          {"margin", v.margin},
          {"verdict", extension::verdict_name(v)}};
}

json j_massbound(const harmonic::MassBoundReport& r) {
  json runs = json::array();
  for (const auto& d : r.delta_runs) runs.push_back({{"delta", d.delta}, {"slack", d.slack}});
  return {{"direction", r.direction},
          {"E", r.E},
          {"P_dir", r.P_dir},
          {"lhs", r.lhs},
          {"bulk", r.bulk},
          {"bulk_hessian", r.bulk_hessian},
          {"bulk_matter", r.bulk_matter},
          {"corner", r.corner},
          {"corner_bound", r.corner_bound},
          {"inner_boundary", r.inner_boundary},
          {"slack", r.slack},
          {"corner_hypothesis_violated", r.corner_hypothesis_violated},
          {"delta_runs", runs},
          {"delta_extrapolated", r.delta_extrapolated},
          {"delta_spread", r.delta_spread},
          {"delta_robust", r.delta_robust},
          {"grid_levels", r.grid_levels},
          {"grid_slack", r.grid_slack},
          {"grid", j_conv(r.grid)},
          {"eps_grid", r.eps_grid},
          {"eps_fine", r.eps_fine},
          {"grid_order", r.grid_order},
          {"verdict", status_name(r.verdict)}};
}

json j_solve(const harmonic::SolveDiagnostics& d) {
  return {{"inner", harmonic::inner_name(d.inner)},
          {"inner_value", d.inner_value},
          {"L", d.L},
          {"picard_iterations", d.picard_iterations},
          {"linear_iterations", d.linear_iterations},
          {"residual", d.residual},
          {"max_principle_violation", d.max_principle_violation},
          {"contraction", d.contraction},
          {"inner_dnu_min", d.inner_dnu_min},
          {"inner_dnu_max", d.inner_dnu_max},
          {"inner_sign_consistent", d.inner_sign_consistent}};
}

// -------------------------------------------------------------- helpers

std::vector<double> hull_radii(const Config& cfg) {
  if (cfg.has("quasilocal", "hulls")) return cfg.numbers("quasilocal", "hulls");
  if (!cfg.has("quasilocal", "hull_count")) return {};
  const double a = cfg.number("quasilocal", "hull_from");
  const double b = cfg.number("quasilocal", "hull_to");
  const std::size_t n = cfg.count("quasilocal", "hull_count");
  require(n >= 2 && b > a, cfg, "quasilocal", "hull_count", "needs hull_from < hull_to and count >= 2");
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = a + (b - a) * static_cast<double>(k) / (n - 1);
  return r;
}

std::vector<double> adm_radii(const RunConfig& rc, const corner::GluedDataSet& data) {
  if (!rc.adm_radii.empty()) return rc.adm_radii;
  double base = 50.0;
  for (double c : data.corner_radii()) base = std::max(base, 50.0 * c);
  base = std::max(base, 10.0 * data.outermost().lo());
  return {base, 2.0 * base, 4.0 * base};
}

std::vector<double> sample_radii(const geometry::RadialPatch& p, std::size_t n) {
  const double lo = p.lo(), hi = p.hi();
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    // linear near a center: tiny radii only sample cancellation in (1 - f) / r^2
    x[k] = lo > 0.0 ? lo * std::pow(hi / lo, t) : hi * t;
  }
  return x;
}

// ------------------------------------------------------------- commands

CommandResult cmd_constraints(const Config& cfg, const RunConfig& rc) {
  const auto data = build_scenario(rc);
  const std::size_t n = cfg.count("sample", "count", 64);
  const double tol = cfg.number("sample", "tol", 1e-10);
  require(n >= 2, cfg, "sample", "count", "needs at least two samples");
  require(tol > 0.0, cfg, "sample", "tol", "tolerance must be positive");

  json patches = json::array();
  double max_R = 0.0, max_mu = 0.0, max_J = 0.0, worst = INFINITY;
  bool dec = true;
  for (std::size_t k = 0; k < data.patches().size(); ++k) {
    const auto& p = data.patches()[k];
    const auto d = geometry::dec_check(p, n, tol);
    dec = dec && d.satisfied;
    worst = std::min(worst, d.min_margin);
    json samples = json::array();
    for (double x : sample_radii(p, n)) {
      const auto c = geometry::constraints(p, x);
      max_R = std::max(max_R, std::abs(c.R));
      max_mu = std::max(max_mu, std::abs(c.mu));
      max_J = std::max(max_J, std::abs(c.J_radial));
      samples.push_back({{"radius", c.radius}, {"R", c.R}, {"mu", c.mu}, {"J_radial", c.J_radial},
                         {"dec_margin", c.dec_margin}});
    }
    patches.push_back({{"index", k},
                       {"lo", p.lo()},
                       {"hi", p.hi()},
                       {"dec", {{"min_margin", d.min_margin}, {"at_radius", d.at_radius},
                                {"samples", d.samples}, {"satisfied", d.satisfied}}},
                       {"samples", samples}});
  }
  json interfaces = json::array();
  for (const auto& c : data.interfaces()) interfaces.push_back(j_interface(c));

  const bool vacuum = max_mu <= tol && max_J <= tol;
  CommandResult out;
  out.report["reports"] = {
      {"scenario", data.name},
      {"topology_asserted", data.topology_asserted},
      {"patches", patches},
      {"interfaces", interfaces},
      {"max_abs", {{"R", max_R}, {"mu", max_mu}, {"J_radial", max_J}}},
      {"dec_min_margin", worst},
      {"vacuum", vacuum}};
  out.report["verdict"] = {{"status", dec ? "pass" : "fail"},
                           {"summary", vacuum ? "vacuum" : (dec ? "dominant energy" : "DEC violated")}};
  out.exit_code = dec ? kOk : kVerdictFail;
  return out;
}

CommandResult cmd_massbound(const Config& cfg, RunConfig rc) {
  (void)cfg;
  const auto data = build_scenario(rc);
  const auto adm = masses::adm_energy_momentum(data, adm_radii(rc, data));
  if (rc.auto_direction) rc.solve.direction = adm.P[2] > 0.0 ? -1.0 : 1.0;

  harmonic::MassBoundOptions mo;
  mo.grid = rc.grid;
  mo.grid.n = rc.resolutions[1];
  mo.levels = rc.resolutions;
  mo.solve = rc.solve;
  const auto rep = harmonic::mass_bound_analysis(data, adm, mo);

  const auto grid = harmonic::make_grid(data, mo.grid);
  const auto field = harmonic::solve_spacetime_harmonic(data, grid, rc.solve);
  if (!rc.field_csv.empty()) harmonic::write_field_csv(field, data, rc.field_csv);

  const bool ok = rep.slack >= -rep.eps_grid;
  CommandResult out;
  json interfaces = json::array();
  for (const auto& c : data.interfaces()) interfaces.push_back(j_interface(c));
  out.report["reports"] = {{"scenario", data.name},
                           {"adm", j_adm(adm)},
                           {"interfaces", interfaces},
                           {"solve", j_solve(field.diagnostics)},
                           {"mass_bound", j_massbound(rep)}};
  std::string summary = ok ? "slack within grid error" : "slack below -eps_grid";
  if (rep.corner_hypothesis_violated) summary += "; corner hypothesis violated";
  out.report["verdict"] = {{"status", ok ? "pass" : "fail"},
                           {"theorem", status_name(rep.verdict)},
                           {"summary", summary}};
  out.exit_code = ok ? kOk : kVerdictFail;
  return out;
}

extension::ExtensionOptions extension_options(const Config& cfg) {
  extension::ExtensionOptions o;
  o.span = cfg.number("extension", "span", o.span);
  o.step = cfg.number("extension", "step", o.step);
  o.samples = cfg.count("extension", "samples", o.samples);
  require(o.span > 1.0, cfg, "extension", "span", "must exceed 1");
  require(o.step > 0.0, cfg, "extension", "step", "must be positive");
  require(o.samples >= 3, cfg, "extension", "samples", "needs at least three samples");
  return o;
}

CommandResult cmd_quasilocal(const Config& cfg, const RunConfig& rc) {
  masses::QuasilocalReport q;
  std::optional<corner::GluedDataSet> data;
  if (cfg.has("boundary", "r0")) {
    require(rc.scenario.empty(), cfg, "boundary", "r0", "give either [boundary] or [scenario]");
    q = masses::quasilocal(masses::BoundaryData{cfg.number("boundary", "r0"),
                                                cfg.number("boundary", "H"),
                                                cfg.number("boundary", "tr_sigma_k", 0.0),
                                                cfg.number("boundary", "omega_tangential", 0.0)});
  } else {
    data = build_scenario(rc);
    const double x = cfg.number("quasilocal", "x");
    const auto side = static_cast<int>(cfg.number("quasilocal", "side", 0.0));
    require(side >= -1 && side <= 1, cfg, "quasilocal", "side", "expected -1, 0 or 1");
    q = masses::quasilocal(*data, x, side);
  }
  const auto opts = extension_options(cfg);
  CommandResult out;
  if (!q.w_hypothesis) {
    // masses are defined, the extension is not
    out.report["reports"] = {{"quasilocal", j_quasilocal(q)}, {"extension", nullptr}};
    out.report["verdict"] = {{"status", "not-applicable"},
                             {"notes", {"H <= |omega|: no round extension"}}};
    return out;
  }
  const auto pipe = extension::quasilocal_pipeline(
      masses::BoundaryData{q.r0, q.H, q.tr_sigma_k, q.omega_tangential}, opts);

  if (!rc.extension_csv.empty()) {
    std::ofstream csv(rc.extension_csv);
    if (!csv) throw ConfigError("cannot write " + rc.extension_csv);
    csv << "r,f,Q\n" << std::setprecision(17);
    for (std::size_t k = 0; k < pipe.extension.r.size(); ++k)
      csv << pipe.extension.r[k] << ',' << pipe.extension.patch.f(pipe.extension.r[k]) << ','
          << pipe.extension.Q[k] << '\n';
  }

  json reports = {{"quasilocal", j_quasilocal(q)},
                  {"extension", j_extension(pipe.extension)},
                  {"interface", j_interface(pipe.interface)},
                  {"monotone", pipe.monotone},
                  {"chain", pipe.chain}};
  bool ok = pipe.monotone && pipe.chain;
  std::vector<std::string> notes;
  if (!pipe.monotone) notes.push_back("Q not monotone");
  if (!pipe.chain) notes.push_back("W < E_ext");
  if (data) {
    const auto cmp = masses::comparison_check(q, *data, hull_radii(cfg));
    json hulls = json::array();
    for (const auto& h : cmp.hulls) {
      hulls.push_back({{"radius", h.radius}, {"m_H", h.m_H}, {"margin", h.margin},
                       {"verdict", status_name(h.verdict)}});
      if (h.verdict == masses::Verdict::Fail) ok = false;
    }
    json minimal = nullptr;
    if (cmp.minimal)
      minimal = {{"x", cmp.minimal->x}, {"areal_radius", cmp.minimal->areal_radius},
                 {"area", cmp.minimal->area}};
    if (cmp.penrose == masses::Verdict::Fail) ok = false;
    for (const auto& f : cmp.failures) notes.push_back(f);
    reports["scenario"] = data->name;
    reports["comparison"] = {{"W", cmp.W},
                             {"dec", cmp.dec},
                             {"h_exceeds_omega", cmp.h_exceeds_omega},
                             {"omega_nonzero", cmp.omega_nonzero},
                             {"topology", cmp.topology},
                             {"dec_min_margin", cmp.dec_min_margin},
                             {"hulls", hulls},
                             {"minimal_sphere", minimal},
                             {"penrose_bound", cmp.penrose_bound},
                             {"penrose_margin", cmp.penrose_margin},
                             {"penrose", status_name(cmp.penrose)},
                             {"failures", cmp.failures}};
  }
  out.report["reports"] = reports;
  out.report["verdict"] = {{"status", ok ? "pass" : "fail"}, {"notes", notes}};
  out.exit_code = ok ? kOk : kVerdictFail;
  return out;
}

CommandResult cmd_certificate(const Config& cfg, const RunFlags& flags) {
  const double r0 = cfg.number("certificate", "r0", 1.0);
  require(r0 > 0.0, cfg, "certificate", "r0", "must be positive");
  json verdicts = json::array();
  std::size_t blocked = 0;
  double threshold = std::nan("");
  if (cfg.has("certificate", "H")) {
    const auto v = extension::fillin_certificate(r0, cfg.number("certificate", "H"),
                                                 cfg.number("certificate", "tr_alpha", 0.0),
                                                 cfg.number("certificate", "beta", 0.0));
    verdicts.push_back(j_certificate(v));
    blocked += v.no_fill_in;
  } else {
    std::vector<double> h;
    if (cfg.has("certificate", "h_minus_f")) {
      h = cfg.numbers("certificate", "h_minus_f");
    } else {
      const double a = cfg.number("certificate", "sweep_from");
      const double b = cfg.number("certificate", "sweep_to");
      const std::size_t n = cfg.count("certificate", "sweep_count");
      require(n >= 2 && b > a, cfg, "certificate", "sweep_count",
              "needs sweep_from < sweep_to and count >= 2");
      for (std::size_t k = 0; k < n; ++k) h.push_back(a + (b - a) * static_cast<double>(k) / (n - 1));
    }
    const auto sweep = extension::certificate_sweep(r0, h, flags.threads);
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      verdicts.push_back(j_certificate(sweep[k]));
      if (sweep[k].no_fill_in) {
        ++blocked;
        if (!(threshold <= h[k])) threshold = h[k];
      }
    }
  }
  CommandResult out;
  out.report["reports"] = {{"r0", r0},
                           {"verdicts", verdicts},
                           {"no_fill_in_count", blocked},
                           {"smallest_no_fill_in", threshold}};
  out.report["verdict"] = {{"status", "pass"},
                           {"summary", std::to_string(blocked) + " of " +
                                           std::to_string(verdicts.size()) + " certified"}};
  return out;
}

CommandResult cmd_regress(const Config& cfg, const RunFlags& flags) {
  const auto res = run_regress(read_goldens(cfg), flags.filter);
  CommandResult out;
  json rows = json::array();
  for (const auto& r : res.rows)
    rows.push_back({{"name", r.name}, {"expected", r.expected}, {"tol", r.tol},
                    {"actual", r.found ? r.actual : std::nan("")}, {"pass", r.pass}});
  out.report["reports"] = {{"rows", rows}, {"filter", flags.filter}};
  out.report["verdict"] = {{"status", res.ok ? "pass" : "fail"}, {"diff", res.diff}};
  out.text = res.table + (res.diff.empty() ? "" : "\n" + res.diff);
  out.exit_code = res.ok ? kOk : kVerdictFail;
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

// ------------------------------------------------------------ public API

RunConfig run_config(const Config& cfg) {
  validate_layout(cfg);
  RunConfig rc;
  if (cfg.has("scenario", "name")) {
    rc.scenario = cfg.text("scenario", "name");
    for (const auto& key : cfg.keys("scenario")) {
      if (key == "name") continue;
      if (key == "files") {
        std::string joined;
        for (const auto& f : cfg.values("scenario", key))
          joined += (joined.empty() ? "" : ",") + resolve_path(cfg, f);
        rc.params.text[key] = joined;
      } else {
        rc.params.num[key] = cfg.number("scenario", key);
      }
    }
  }

  std::vector<double> res = cfg.numbers("grid", "resolutions", std::vector<double>{32, 64, 128});
  require(res.size() == 3, cfg, "grid", "resolutions", "expected three node counts");
  for (std::size_t k = 0; k < res.size(); ++k) {
    require(res[k] >= 8 && res[k] == std::floor(res[k]), cfg, "grid", "resolutions",
            "node counts must be integers >= 8");
    require(k == 0 || res[k] > res[k - 1], cfg, "grid", "resolutions", "must be strictly increasing");
    rc.resolutions.push_back(static_cast<std::size_t>(res[k]));
  }
  rc.grid.n = rc.resolutions[1];
  rc.grid.L = cfg.number("grid", "L", 0.0);
  rc.grid.cells = cfg.count("grid", "cells", 0);
  rc.grid.stretch = cfg.number("grid", "stretch", rc.grid.stretch);
  rc.grid.inner_fraction = cfg.number("grid", "inner_fraction", rc.grid.inner_fraction);
  require(rc.grid.L >= 0.0, cfg, "grid", "L", "must be positive (or 0 for automatic)");
  require(rc.grid.stretch >= 1.0, cfg, "grid", "stretch", "must be at least 1");
  require(rc.grid.inner_fraction > 0.0 && rc.grid.inner_fraction < 1.0, cfg, "grid",
          "inner_fraction", "must lie in (0, 1)");

  auto& s = rc.solve;
  s.inner = inner_of(cfg);
  if (cfg.has("harmonic", "inner_value")) s.inner_value = cfg.number("harmonic", "inner_value");
  const std::string dir = cfg.text("harmonic", "direction", "auto");
  rc.auto_direction = dir == "auto";
  if (!rc.auto_direction) {
    s.direction = cfg.number("harmonic", "direction");
    require(s.direction == 1.0 || s.direction == -1.0, cfg, "harmonic", "direction",
            "expected 1, -1 or auto");
  }
  s.delta = cfg.number("harmonic", "delta", s.delta);
  s.tol = cfg.number("harmonic", "tol", s.tol);
  s.linear_tol = cfg.number("harmonic", "linear_tol", s.linear_tol);
  s.max_picard = cfg.count("harmonic", "max_picard", s.max_picard);
  s.relax = cfg.number("harmonic", "relax", s.relax);
  require(s.delta > 0.0, cfg, "harmonic", "delta", "must be positive");
  require(s.tol > 0.0, cfg, "harmonic", "tol", "tolerance must be positive");
  require(s.linear_tol > 0.0, cfg, "harmonic", "linear_tol", "tolerance must be positive");
  require(s.relax > 0.0 && s.relax <= 1.0, cfg, "harmonic", "relax", "must lie in (0, 1]");
  const std::string sweep = cfg.text("harmonic", "sweep", "redblack");
  require(sweep == "redblack" || sweep == "lexicographic", cfg, "harmonic", "sweep",
          "expected redblack or lexicographic");
  s.sweep = sweep == "redblack" ? numgrid::Sweep::RedBlack : numgrid::Sweep::Lexicographic;

  if (cfg.has("adm", "radii")) {
    rc.adm_radii = cfg.numbers("adm", "radii");
    require(rc.adm_radii.size() >= 2, cfg, "adm", "radii", "needs at least two radii");
  }
  if (cfg.has("output", "field_csv")) rc.field_csv = cfg.text("output", "field_csv");
  if (cfg.has("output", "extension_csv")) rc.extension_csv = cfg.text("output", "extension_csv");
  return rc;
}

corner::GluedDataSet build_scenario(const RunConfig& rc) {
  if (rc.scenario.empty()) throw ConfigError("missing [scenario] name");
  const auto& reg = corner::scenario_registry();
  const auto it = std::find_if(reg.begin(), reg.end(),
                               [&](const corner::ScenarioInfo& s) { return s.name == rc.scenario; });
  if (it == reg.end()) throw ConfigError("unknown scenario '" + rc.scenario + "'");
  auto allowed = [&](const std::string& k) {
    return k == "topology" || std::find(it->keys.begin(), it->keys.end(), k) != it->keys.end();
  };
  for (const auto& [k, v] : rc.params.num)
    if (!allowed(k)) throw ConfigError("scenario " + rc.scenario + " takes no parameter '" + k + "'");
  for (const auto& [k, v] : rc.params.text)
    if (!allowed(k)) throw ConfigError("scenario " + rc.scenario + " takes no parameter '" + k + "'");
  return corner::scenario_build(rc.scenario, rc.params);
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"constraints", "massbound", "quasilocal",
                                                 "certificate", "regress"};
  return names;
}

std::string command_help(const std::string& command) {
  static const std::map<std::string, std::string> help = {
      {"constraints", "sample R, mu, J and the DEC margin on every patch"},
      {"massbound", "solve for the harmonic function and report the mass-bound slack"},
      {"quasilocal", "quasilocal masses, round extension and hull comparisons"},
      {"certificate", "no-fill-in certificates over boundary data"},
      {"regress", "compare computed values with a golden file"},
  };
  const auto it = help.find(command);
  return it == help.end() ? std::string{} : it->second;
}

CommandResult run_command(const std::string& command, const Config& cfg, const RunFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  if (!flags.filter.empty() && command != "regress")
    throw ConfigError("--filter only applies to regress");

  CommandResult out;
  if (command == "regress") {
    out = cmd_regress(cfg, flags);
  } else {
    const RunConfig rc = run_config(cfg);
    if (command == "constraints")
      out = cmd_constraints(cfg, rc);
    else if (command == "massbound")
      out = cmd_massbound(cfg, rc);
    else if (command == "quasilocal")
      out = cmd_quasilocal(cfg, rc);
    else if (command == "certificate")
      out = cmd_certificate(cfg, flags);
    else
      throw ConfigError("unknown command '" + command + "'");
  }

  json env = {{"schema_version", kSchemaVersion},
              {"tool", kToolName},
              {"version", kToolVersion},
              {"command", command},
              {"config", cfg.echo()},
              {"reports", out.report["reports"]},
              {"verdict", out.report["verdict"]}};
  env["verdict"]["exit_code"] = out.exit_code;
  if (!flags.deterministic) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    env["timing"] = {{"started", started}, {"seconds", secs}, {"threads", flags.threads}};
  }
  out.report = finite_only(env);
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const HypothesisError*>(&e))
    return kConfigFailure;
  return kNumericalFailure;
}

json error_envelope(const std::string& command, const std::exception& e) {
  std::string kind = "error";
  if (dynamic_cast<const ConfigError*>(&e)) kind = "config";
  else if (dynamic_cast<const DomainError*>(&e)) kind = "domain";
  else if (dynamic_cast<const HypothesisError*>(&e)) kind = "hypothesis";
  else if (dynamic_cast<const NumericalError*>(&e)) kind = "numerical";
  json env = {{"schema_version", kSchemaVersion},
              {"tool", kToolName},
              {"version", kToolVersion},
              {"command", command},
              {"error", {{"kind", kind}, {"message", e.what()}}},
              {"verdict", {{"status", "error"}, {"exit_code", exit_code_for(e)}}}};
  if (const auto* u = dynamic_cast<const UnconvergedError*>(&e)) {
    env["error"]["residual"] = u->residual();
    env["error"]["history"] = u->history();
  }
  if (const auto* d = dynamic_cast<const DivergedError*>(&e)) env["error"]["last_good"] = d->last_good();
  return finite_only(env);
}

json finite_only(const json& j) {
  if (j.is_number_float()) return std::isfinite(j.get<double>()) ? j : json(nullptr);
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(finite_only(v));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = finite_only(v);
    return out;
  }
  return j;
}

std::string csv_columns_help() {
  return "CSV outputs (header row, ',' separator, '.' decimal):\n"
         "  [output] field_csv      x,theta,u,grad   harmonic function on the base grid;\n"
         "                                           grad is |grad u| in the metric\n"
         "  [output] extension_csv  r,f,Q            round extension: areal radius, f = 1/g_rr,\n"
         "                                           Q = r (1 - sqrt f)\n";
}

}  // namespace cornermass::cli

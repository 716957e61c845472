#include "cornermass/corner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace cornermass::corner {

using numgrid::Jet;
using numgrid::ScalarProfile;

double jump_condition(const CornerInterface& c) {
  const double dn = c.omega_minus.normal - c.omega_plus.normal;
  const double dt = c.omega_minus.tangential - c.omega_plus.tangential;
  return (c.H_minus - c.H_plus) - std::hypot(dn, dt);
}

CornerInterface make_interface(const RadialPatch& inner, const RadialPatch& outer) {
  const double x = outer.lo();
  if (!inner.contains(x) || std::abs(inner.hi() - x) > 1e-12 * std::max(1.0, x))
    throw DomainError("patches do not abut at r = " + std::to_string(x));
  CornerInterface c;
  c.r_c = x;
  const double rm = inner.rho(inner.hi())[0], rp = outer.rho(x)[0];
  c.areal_radius = rp;
  c.areal_mismatch = std::abs(rm - rp);
  if (c.areal_mismatch > 1e-12 * std::max(1.0, rp))
    throw DomainError("induced metrics differ across the corner");
  c.H_minus = geometry::mean_curvature_sphere(inner, inner.hi());
  c.H_plus = geometry::mean_curvature_sphere(outer, x);
  c.omega_minus = {geometry::momentum_tensor(inner, inner.hi()).pi_nn, 0.0};
  c.omega_plus = {geometry::momentum_tensor(outer, x).pi_nn, 0.0};
  c.f_minus = inner.f(inner.hi());
  c.f_plus = outer.f(x);
  c.jump = jump_condition(c);
  return c;
}

CornerInterface swapped(const CornerInterface& c) {
  CornerInterface s = c;
  std::swap(s.H_minus, s.H_plus);
  std::swap(s.omega_minus, s.omega_plus);
  std::swap(s.f_minus, s.f_plus);
  s.jump = jump_condition(s);
  return s;
}

// ---------------------------------------------------------- GluedDataSet

bool GluedDataSet::has_center() const {
  return patches_.front().rho(lo())[0] == 0.0;
}

std::vector<double> GluedDataSet::corner_radii() const {
  std::vector<double> r;
  for (const auto& c : interfaces_) r.push_back(c.r_c);
  return r;
}

const RadialPatch& GluedDataSet::patch_at(double x, int side) const {
  for (std::size_t k = 0; k < interfaces_.size(); ++k) {
    const double rc = interfaces_[k].r_c;
    if (std::abs(x - rc) <= 1e-12 * std::max(1.0, rc)) {
      if (side == 0)
        throw DomainError("r = " + std::to_string(x) + " is a corner; choose a side");
      return side < 0 ? patches_[k] : patches_[k + 1];
    }
  }
  for (const auto& p : patches_)
    if (p.contains(x)) return p;
  throw DomainError("r = " + std::to_string(x) + " outside the data set");
}

numgrid::RadialMetric GluedDataSet::metric(double x, int side) const {
  return patch_at(x, side).metric(x);
}

numgrid::MetricSampler GluedDataSet::sampler() const {
  return [this](double x, int side) { return metric(x, side); };
}

double GluedDataSet::trace_k(double x, int side) const {
  return geometry::momentum_tensor(patch_at(x, side), x).tr_k;
}

namespace {

DecayCheck decay_of(const RadialPatch& p, double q) {
  DecayCheck d;
  d.q = q;
  const double x1 = p.hi(), x0 = std::max(p.lo(), 0.5 * p.hi());
  const double e0 = std::abs(1.0 - p.f(x0)), e1 = std::abs(1.0 - p.f(x1));
  const double e2 = std::abs(1.0 - p.f(std::max(p.lo(), 0.25 * p.hi())));
  d.exact = e0 == 0.0 && e1 == 0.0 && e2 == 0.0;
  if (d.exact) {
    d.observed = std::numeric_limits<double>::infinity();
  } else if (e1 > 0.0 && e0 > 0.0 && x1 > x0) {
    d.observed = std::log(e0 / e1) / std::log(x1 / x0);
  }
  d.ok = q > 0.5 && (d.exact || d.observed > 0.5);
  return d;
}

}  // namespace

GluedDataSet glue_all(std::vector<RadialPatch> patches, bool allow_f_jump, double q) {
  if (patches.empty()) throw DomainError("no patches to glue");
  GluedDataSet g;
  for (std::size_t k = 0; k + 1 < patches.size(); ++k) {
    auto c = make_interface(patches[k], patches[k + 1]);
    if (!allow_f_jump && std::abs(c.f_minus - c.f_plus) > 1e-12 * std::max(1.0, c.f_plus))
      throw DomainError("f jumps at r = " + std::to_string(c.r_c) +
                        " without the allow-discontinuous flag");
    g.interfaces_.push_back(c);
  }
  g.patches_ = std::move(patches);
  g.decay_ = decay_of(g.patches_.back(), q);
  return g;
}

GluedDataSet glue(const RadialPatch& inner, const RadialPatch& outer, double r_c,
                  bool allow_f_jump) {
  if (std::abs(inner.hi() - r_c) > 1e-12 * std::max(1.0, r_c) ||
      std::abs(outer.lo() - r_c) > 1e-12 * std::max(1.0, r_c))
    throw DomainError("patch domains do not meet at r_c = " + std::to_string(r_c));
  return glue_all({inner, outer}, allow_f_jump);
}

GluedDataSet single(const RadialPatch& p, double q) { return glue_all({p}, false, q); }

// ------------------------------------------------------- model patches

namespace {
ScalarProfile zero(double lo, double hi) { return ScalarProfile::constant(lo, hi, 0.0); }
}  // namespace

RadialPatch flat_patch(double lo, double hi) {
  return RadialPatch::areal(ScalarProfile::constant(lo, hi, 1.0), zero(lo, hi), zero(lo, hi));
}

RadialPatch schwarzschild_patch(double m, double lo, double hi) {
  auto f = ScalarProfile::analytic(lo, hi, [m](double r) {
    return Jet{1.0 - 2.0 * m / r, 2.0 * m / (r * r), -4.0 * m / (r * r * r)};
  });
  return RadialPatch::areal(f, zero(lo, hi), zero(lo, hi));
}

RadialPatch hyperbolic_patch(double s, double hi) {
  auto f = ScalarProfile::analytic(0.0, hi, [](double r) { return Jet{1.0 + r * r, 2.0 * r, 2.0}; });
  return RadialPatch::areal(f, ScalarProfile::constant(0.0, hi, s),
                            ScalarProfile::constant(0.0, hi, s));
}

RadialPatch isotropic_patch(double m, double lo, double hi) {
  if (!(lo > 0.0)) throw DomainError("isotropic chart needs s > 0");
  auto psi = [m](double s) {
    return Jet{1.0 + m / (2 * s), -m / (2 * s * s), m / (s * s * s)};
  };
  auto A = ScalarProfile::analytic(lo, hi, [psi](double s) {
    const auto [p, dp, ddp] = psi(s);
    return Jet{std::pow(p, 4), 4 * std::pow(p, 3) * dp,
               12 * p * p * dp * dp + 4 * std::pow(p, 3) * ddp};
  });
  auto rho = ScalarProfile::analytic(lo, hi, [psi](double s) {
    const auto [p, dp, ddp] = psi(s);
    return Jet{s * p * p, p * p + 2 * s * p * dp, 4 * p * dp + 2 * s * (dp * dp + p * ddp)};
  });
  return RadialPatch::chart(A, rho, zero(lo, hi), zero(lo, hi));
}

RadialPatch patch_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile file " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> r, f, a, b;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double v[4];
    if (!(ss >> v[0] >> v[1] >> v[2] >> v[3]))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected r,f,a,b");
    r.push_back(v[0]);
    f.push_back(v[1]);
    a.push_back(v[2]);
    b.push_back(v[3]);
  }
  if (r.size() < 4) throw ConfigError(path + ": need at least four samples");
  return RadialPatch::areal(ScalarProfile::spline(r, f), ScalarProfile::spline(r, a),
                            ScalarProfile::spline(r, b));
}

// ---------------------------------------------------------- scenarios

double ScenarioParams::get(const std::string& key, double fallback) const {
  const auto it = num.find(key);
  return it == num.end() ? fallback : it->second;
}

const std::vector<ScenarioInfo>& scenario_registry() {
  static const std::vector<ScenarioInfo> reg = {
      {"flat", "Euclidean space, k = 0", {"outer", "topology"}},
      {"schwarzschild", "exterior chart f = 1 - 2m/r, optional self-glue corner",
       {"m", "r_in", "outer", "corner"}},
      {"isotropic_schwarzschild", "isotropic chart through the horizon", {"m", "s_in", "outer"}},
      {"hyperbolic_negschw", "hyperbolic ball with k = sign g inside negative-mass Schwarzschild",
       {"sign", "outer"}},
      {"shi_tam_glue", "annulus with boundary data (r0, H, omega) and its round extension",
       {"r0", "H", "omega", "outer"}},
      {"custom", "CSV profiles r,f,a,b glued in order", {"files", "allow_f_jump", "q"}},
  };
  return reg;
}

GluedDataSet scenario_build(const std::string& name, const ScenarioParams& params) {
  const double outer = params.get("outer", 1e6);
  GluedDataSet g;
  if (name == "flat") {
    g = single(flat_patch(0.0, outer));
    g.expected = {{"E", 0.0}, {"P", 0.0}, {"mass_ms", 0.0}};
  } else if (name == "schwarzschild") {
    const double m = params.get("m", 1.0);
    const double r_in = params.get("r_in", 3.0 * m);
    if (!(m > 0.0)) throw DomainError("schwarzschild needs m > 0");
    if (!(r_in > 2.0 * m)) throw DomainError("exterior chart needs r_in > 2m");
    const double rc = params.get("corner", 0.0);
    if (rc > 0.0) {
      if (!(rc > r_in && rc < outer)) throw DomainError("corner outside the chart");
      g = glue(schwarzschild_patch(m, r_in, rc), schwarzschild_patch(m, rc, outer), rc);
      g.expected["jump"] = 0.0;
    } else {
      g = single(schwarzschild_patch(m, r_in, outer));
    }
    g.expected["E"] = m;
    g.expected["P"] = 0.0;
    g.expected["mass_ms"] = m;
  } else if (name == "isotropic_schwarzschild") {
    const double m = params.get("m", 1.0);
    if (!(m > 0.0)) throw DomainError("isotropic_schwarzschild needs m > 0");
    const double s_in = params.get("s_in", 0.25 * m);
    g = single(isotropic_patch(m, s_in, outer));
    g.expected = {{"E", m}, {"P", 0.0}, {"mass_ms", m}};
    if (s_in < 0.5 * m) {
      g.expected["minimal_s"] = 0.5 * m;
      g.expected["minimal_area"] = 16.0 * std::numbers::pi * m * m;
    }
  } else if (name == "hyperbolic_negschw") {
    const double sign = params.get("sign", 1.0) < 0 ? -1.0 : 1.0;
    g = glue(hyperbolic_patch(sign, 1.0), schwarzschild_patch(-0.5, 1.0, outer), 1.0);
    g.expected = {{"E", -0.5}, {"P", 0.0}, {"jump", -2.0}, {"dec_margin", 0.0}};
  } else if (name == "shi_tam_glue") {
    const double r0 = params.get("r0", 1.0), H = params.get("H", 2.0);
    const double w = std::abs(params.get("omega", 0.0));
    if (!(r0 > 0.0)) throw DomainError("shi_tam_glue needs r0 > 0");
    if (!(H - w > 0.0)) throw HypothesisError("shi_tam_glue needs H > |omega|");
    const double fin = std::pow(0.5 * H * r0, 2);
    const double f0 = std::pow(0.5 * (H - w) * r0, 2);
    auto inner = RadialPatch::areal(ScalarProfile::constant(0.5 * r0, r0, fin),
                                    ScalarProfile::constant(0.5 * r0, r0, 0.0),
                                    ScalarProfile::constant(0.5 * r0, r0, -0.5 * w));
    // scalar-flat round extension f = 1 - (1 - f0) r0 / r
    const double c = (1.0 - f0) * r0;
    auto f = ScalarProfile::analytic(r0, outer, [c](double r) {
      return Jet{1.0 - c / r, c / (r * r), -2.0 * c / (r * r * r)};
    });
    auto ext = RadialPatch::areal(f, zero(r0, outer), zero(r0, outer));
    g = glue(inner, ext, r0, true);
    g.expected = {{"jump", 0.0}, {"E", 0.5 * c}, {"P", 0.0}, {"mass_ms", 0.5 * c}};
  } else if (name == "custom") {
    const auto it = params.text.find("files");
    if (it == params.text.end() || it->second.empty())
      throw ConfigError("custom scenario needs files = a.csv, b.csv, ...");
    std::vector<RadialPatch> ps;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) ps.push_back(patch_from_csv(item));
    }
    g = glue_all(std::move(ps), params.get("allow_f_jump", 0.0) != 0.0, params.get("q", 1.0));
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  g.name = name;
  g.topology_asserted = params.get("topology", 1.0) != 0.0;
  return g;
}

}  // namespace cornermass::corner

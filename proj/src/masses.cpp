#include "cornermass/masses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cornermass::masses {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec3 unit(double th, double ph) {
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

// g_ij = beta delta_ij + (alpha - beta) n_i n_j in the Cartesian chart x = s n
struct CartesianRadial {
  double alpha, dalpha, beta, dbeta, s;

  CartesianRadial(const geometry::RadialPatch& p, double x) : s(x) {
    const auto m = p.metric(x);
    alpha = m.A;
    dalpha = m.dA;
    beta = m.rho * m.rho / (x * x);
    dbeta = 2.0 * m.rho * m.drho / (x * x) - 2.0 * m.rho * m.rho / (x * x * x);
  }

  double dg(int k, int i, int j, const Vec3& n) const {
    const double d = alpha - beta, dd = dalpha - dbeta;
    return dbeta * n[k] * (i == j) + dd * n[k] * n[i] * n[j] +
           d * ((i == k) * n[j] + (j == k) * n[i] - 2.0 * n[i] * n[j] * n[k]) / s;
  }
};

FluxSample flux_at(const geometry::RadialPatch& p, double x) {
  const CartesianRadial c(p, x);
  const double a = p.a(x)[0], b = p.b(x)[0];
  FluxSample s;
  s.radius = x;
  const double E = numgrid::sphere_integral([&](double th, double ph) {
    const Vec3 n = unit(th, ph);
    double v = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v += (c.dg(i, i, j, n) - c.dg(j, i, i, n)) * n[j];
    return v;
  });
  s.E_flux = E * x * x / (16.0 * kPi);
  for (int i = 0; i < 3; ++i) {
    const double Pi = numgrid::sphere_integral([&](double th, double ph) {
      const Vec3 n = unit(th, ph);
      const double tr = a + 2.0 * b;
      double v = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double g = c.beta * (i == j) + (c.alpha - c.beta) * n[i] * n[j];
        const double k = a * c.alpha * n[i] * n[j] + b * c.beta * ((i == j) - n[i] * n[j]);
        v += (k - tr * g) * n[j];
      }
      return v;
    });
    s.P[i] = Pi * x * x / (8.0 * kPi);
  }
  s.E_ms = 0.5 * p.rho(x)[0] * (1.0 - p.f(x));
  return s;
}

}  // namespace

AdmResult adm_energy_momentum(const GluedDataSet& data, const std::vector<double>& radii) {
  if (radii.size() < 2) throw DomainError("ADM limit needs at least two radii");
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end())
    throw DomainError("ADM radii must increase strictly");
  const auto& outer = data.outermost();
  for (double r : radii)
    if (!outer.contains(r) || r <= outer.lo())
      throw DomainError("ADM radius " + std::to_string(r) + " outside the outermost patch");

  AdmResult res;
  std::vector<double> e, ms;
  std::array<std::vector<double>, 3> p;
  res.samples.resize(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) res.samples[k] = flux_at(outer, radii[k]);
  for (const auto& s : res.samples) {
    e.push_back(s.E_flux);
    ms.push_back(s.E_ms);
    for (int i = 0; i < 3; ++i) p[i].push_back(s.P[i]);
  }
  res.flux = numgrid::richardson_table(e, 1.0);
  res.misner_sharp = numgrid::richardson_table(ms, 1.0);
  res.E = res.flux.extrapolated;
  res.E_ms = res.misner_sharp.extrapolated;
  for (int i = 0; i < 3; ++i) res.P[i] = numgrid::richardson_table(p[i], 1.0).extrapolated;
  res.P_norm = std::hypot(res.P[0], res.P[1], res.P[2]);
  res.mass = res.E >= res.P_norm ? std::sqrt(res.E * res.E - res.P_norm * res.P_norm) : kNaN;
  res.extrapolation_suspect = radii.size() >= 3 && !res.flux.degenerate && !res.flux.monotone &&
                              !(res.flux.observed_order > 0.0);
  if (!std::isfinite(res.E) || !std::isfinite(res.P_norm))
    throw NumericalError("ADM flux limit is not finite");
  return res;
}

double directional_energy(const AdmResult& adm, const Vec3& a) {
  return adm.E + a[0] * adm.P[0] + a[1] * adm.P[1] + a[2] * adm.P[2];
}

double hawking_mass(const GluedDataSet& data, double x, int side) {
  const auto& p = data.patch_at(x, side);
  const double rho = p.rho(x)[0];
  const double H = geometry::mean_curvature_sphere(p, x);
  const double area = numgrid::sphere_integral([&](double, double) { return rho * rho; });
  const double h2 = numgrid::sphere_integral([&](double, double) { return H * H * rho * rho; });
  return std::sqrt(area / (16.0 * kPi)) * (1.0 - h2 / (16.0 * kPi));
}

double liu_yau_mass(double r0, double H, double t) {
  if (!(H > std::abs(t))) throw HypothesisError("Liu-Yau mass needs H > |tr_sigma k|");
  return r0 - 0.5 * r0 * r0 * std::sqrt(H * H - t * t);
}

QuasilocalReport quasilocal(const BoundaryData& b) {
  if (!(b.r0 > 0.0)) throw DomainError("boundary radius must be positive");
  QuasilocalReport q;
  q.r0 = b.r0;
  q.H = b.H;
  q.tr_sigma_k = b.tr_sigma_k;
  q.omega_normal = -b.tr_sigma_k;
  q.omega_tangential = b.omega_tangential;
  q.omega = std::hypot(q.omega_normal, q.omega_tangential);
  q.H0 = 2.0 / b.r0;
  const double r2 = 0.5 * b.r0 * b.r0;
  q.W = b.r0 - r2 * (b.H - q.omega);
  q.m_BY = b.r0 - r2 * b.H;
  q.m_H = 0.5 * b.r0 * (1.0 - 0.25 * b.r0 * b.r0 * b.H * b.H);
  q.w_hypothesis = b.H > q.omega;
  q.ly_hypothesis = b.H > std::abs(b.tr_sigma_k);
  q.m_LY = q.ly_hypothesis ? liu_yau_mass(b.r0, b.H, b.tr_sigma_k) : kNaN;
  return q;
}

QuasilocalReport quasilocal(const GluedDataSet& data, double x, int side) {
  const auto& p = data.patch_at(x, side);
  BoundaryData b;
  b.r0 = p.rho(x)[0];
  b.H = geometry::mean_curvature_sphere(p, x);
  b.tr_sigma_k = geometry::momentum_tensor(p, x).tr_sigma_k;
  auto q = quasilocal(b);
  q.m_H = hawking_mass(data, x, side);
  return q;
}

std::optional<MinimalSphere> minimal_sphere(const GluedDataSet& data) {
  const auto& ps = data.patches();
  for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
    const auto& p = *it;
    auto H = [&](double x) { return p.sigma(x); };  // sign of H
    const double lo = p.rho(p.lo())[0] > 0.0 ? p.lo() : p.lo() + 1e-9 * (p.hi() - p.lo());
    const std::size_t n = 4000;
    const bool geometric = lo > 0.0 && p.hi() / lo > 100.0;
    auto node = [&](std::size_t k) {
      const double t = static_cast<double>(k) / static_cast<double>(n);
      return k == n ? p.hi() : geometric ? lo * std::pow(p.hi() / lo, t) : lo + (p.hi() - lo) * t;
    };
    double xr = node(n), hr = H(xr);
    for (std::size_t k = n; k-- > 0;) {
      const double xl = node(k), hl = H(xl);
      if (hl == 0.0 || std::signbit(hl) != std::signbit(hr)) {
        const double x = hl == 0.0 ? xl : numgrid::find_root(H, xl, xr, 1e-13);
        const double r = p.rho(x)[0];
        return MinimalSphere{x, r, 4.0 * kPi * r * r};
      }
      xr = xl;
      hr = hl;
    }
  }
  return std::nullopt;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "not_applicable";
  }
}

ComparisonReport comparison_check(const QuasilocalReport& q, const GluedDataSet& data,
                                  const std::vector<double>& hull_radii) {
  ComparisonReport rep;
  rep.W = q.W;
  rep.h_exceeds_omega = q.w_hypothesis;
  rep.omega_nonzero = q.omega != 0.0;
  rep.topology = data.topology_asserted;
  rep.dec_min_margin = std::numeric_limits<double>::infinity();
  for (const auto& p : data.patches()) {
    const double hi = std::min(p.hi(), std::max(p.lo(), q.r0) * 1e3);
    const auto d = geometry::dec_check(p, 400, 1e-10, std::pair{p.lo(), std::max(p.lo(), hi)});
    rep.dec_min_margin = std::min(rep.dec_min_margin, d.min_margin);
  }
  rep.dec = rep.dec_min_margin >= -1e-10;
  const bool admissible = rep.dec && rep.h_exceeds_omega && rep.topology;

  rep.hulls.resize(hull_radii.size());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < hull_radii.size(); ++k) {
    HullCheck h;
    h.radius = hull_radii[k];
    h.m_H = hawking_mass(data, h.radius, -1);
    h.margin = q.W - h.m_H;
    h.verdict = !admissible ? Verdict::NotApplicable
                            : h.margin >= -1e-12 ? Verdict::Pass : Verdict::Fail;
    rep.hulls[k] = h;
  }
  for (const auto& h : rep.hulls)
    if (h.verdict == Verdict::Fail)
      rep.failures.push_back("W < m_H at r = " + std::to_string(h.radius) +
                             " (margin " + std::to_string(h.margin) + ")");

  rep.minimal = minimal_sphere(data);
  if (rep.minimal) {
    rep.penrose_bound = std::sqrt(rep.minimal->area / (16.0 * kPi));
    rep.penrose_margin = q.W - rep.penrose_bound;
    rep.penrose = !admissible ? Verdict::NotApplicable
                              : rep.penrose_margin >= -1e-12 ? Verdict::Pass : Verdict::Fail;
    if (rep.penrose == Verdict::Fail)
      rep.failures.push_back("W below the Penrose bound (margin " +
                             std::to_string(rep.penrose_margin) + ")");
  }
  return rep;
}

}  // namespace cornermass::masses

#include "cornermass/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <omp.h>

namespace cornermass::extension {

using numgrid::Jet;
using numgrid::OdeState;

namespace {

constexpr double kPi = std::numbers::pi;

// profile in ln r seen as a function of r
ScalarProfile in_radius(const ScalarProfile& F, double lo, double hi) {
  return ScalarProfile::analytic(lo, hi, [F](double r) {
    const Jet j = F.jet(std::log(r));
    return Jet{j[0], j[1] / r, (j[2] - j[1]) / (r * r)};
  });
}

std::vector<double> log_samples(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k)
    x[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
  x.back() = hi;
  return x;
}

ScalarProfile restrict(const ScalarProfile& p, double lo, double hi) {
  return ScalarProfile::analytic(lo, hi, [p](double r) { return p.jet(r); });
}

}  // namespace

// ------------------------------------------------------------ Shi-Tam

ExtensionResult shi_tam_extend(double r0, double H_eff, const ExtensionOptions& opt) {
  if (!(r0 > 0.0)) throw DomainError("extension radius must be positive");
  if (!(H_eff > 0.0)) throw HypothesisError("extension needs H_eff > 0");
  if (!(opt.span > 8.0)) throw DomainError("extension span too short");
  ExtensionResult res;
  res.r0 = r0;
  res.H_eff = H_eff;
  res.f0 = std::pow(0.5 * H_eff * r0, 2);
  res.lapse0 = (2.0 / r0) / H_eff;
  const double t0 = std::log(r0), t1 = std::log(r0 * opt.span);
  const auto sol = numgrid::integrate_ode(
      [](double, const OdeState& y) { return OdeState{1.0 - y[0]}; }, {res.f0}, t0, t1, opt.step);
  res.steps = sol.t.size() - 1;
  const double hi = r0 * opt.span;
  const auto f = in_radius(sol.profile(0), r0, hi);
  const auto zero = ScalarProfile::constant(r0, hi, 0.0);
  res.patch = RadialPatch::areal(f, zero, zero);

  res.r = log_samples(r0, hi, opt.samples);
  for (double r : res.r) res.Q.push_back(r * (1.0 - std::sqrt(f(r))));

  // both limits eliminate powers of 1/r over radii hi/4, hi/2, hi
  std::vector<double> q3, e3;
  for (double r : {0.25 * hi, 0.5 * hi, hi}) {
    q3.push_back(r * (1.0 - std::sqrt(f(r))));
    e3.push_back(0.5 * r * (1.0 - f(r)));
  }
  res.q_report = numgrid::richardson_table(q3, 1.0);
  res.Q_limit = res.q_report.extrapolated;
  res.E_ext = numgrid::richardson_table(e3, 1.0).extrapolated;
  return res;
}

PipelineResult quasilocal_pipeline(const masses::BoundaryData& b, const ExtensionOptions& opt) {
  PipelineResult out;
  out.quasilocal = masses::quasilocal(b);
  const auto& q = out.quasilocal;
  if (!q.w_hypothesis) throw HypothesisError("quasilocal pipeline needs H > |omega|");
  out.extension = shi_tam_extend(b.r0, b.H - q.omega, opt);
  auto& c = out.interface;
  c.r_c = c.areal_radius = b.r0;
  c.H_minus = b.H;
  c.H_plus = 2.0 * std::sqrt(out.extension.f0) / b.r0;
  c.omega_minus = {q.omega_normal, q.omega_tangential};
  c.omega_plus = {0.0, 0.0};
  c.f_minus = std::pow(0.5 * b.H * b.r0, 2);
  c.f_plus = out.extension.f0;
  c.jump = corner::jump_condition(c);
  const auto& Q = out.extension.Q;
  out.monotone = true;
  for (std::size_t k = 1; k < Q.size(); ++k)
    if (Q[k] > Q[k - 1] + 1e-12) out.monotone = false;
  out.chain = q.W >= out.extension.E_ext - 1e-10;
  return out;
}

// -------------------------------------------------------- certificates

std::string verdict_name(const CertificateVerdict& v) {
  return v.no_fill_in ? "no-DEC-fill-in" : "inconclusive";
}

CertificateVerdict fillin_certificate(double r0, double H, double tr_alpha, double beta,
                                      double tol) {
  CertificateVerdict v;
  v.r0 = r0;
  v.H = H;
  v.f = std::hypot(tr_alpha, beta);
  v.H_eff = H - v.f;
  if (!(v.H_eff > 0.0)) throw HypothesisError("certificate needs H - f > 0");
  ExtensionOptions opt;
  opt.samples = 16;
  v.E_ext = shi_tam_extend(r0, v.H_eff, opt).E_ext;
  v.no_fill_in = v.E_ext < -tol;
  v.margin = -v.E_ext;
  return v;
}

std::vector<CertificateVerdict> certificate_sweep(double r0, const std::vector<double>& h_minus_f,
                                                  int threads) {
  std::vector<CertificateVerdict> out(h_minus_f.size());
  const int n = static_cast<int>(h_minus_f.size());
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (int k = 0; k < n; ++k) out[k] = fillin_certificate(r0, h_minus_f[k] + 1.0, 1.0, 0.0);
  return out;
}

// ------------------------------------------------------------ mollifier

Jet smooth_step(double s) {
  if (s <= -1.0) return {0.0, 0.0, 0.0};
  if (s >= 1.0) return {1.0, 0.0, 0.0};
  const double c = 35.0 / 32.0, q = 1.0 - s * s;
  const double s2 = s * s, s3 = s2 * s;
  return {0.5 + c * (s - s3 + 0.6 * s3 * s2 - s3 * s2 * s2 / 7.0), c * q * q * q,
          -6.0 * c * s * q * q};
}

namespace {

// one-sided profile plus a stepped correction by the difference of the two
// quadratic Taylor polynomials at the corner
ScalarProfile blend(const ScalarProfile& in, const ScalarProfile& out, double rc, double delta) {
  const Jet a = in.jet(rc), b = out.jet(rc);
  const Jet d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  return ScalarProfile::analytic(rc - delta, rc + delta, [=](double r) {
    const double x = r - rc;
    const Jet D{d[0] + d[1] * x + 0.5 * d[2] * x * x, d[1] + d[2] * x, d[2]};
    Jet S = smooth_step(x / delta);
    const bool left = r <= rc;
    const Jet base = left ? in.jet(r) : out.jet(r);
    if (!left) S[0] -= 1.0;
    const double s1 = S[1] / delta, s2 = S[2] / (delta * delta);
    return Jet{base[0] + S[0] * D[0], base[1] + s1 * D[0] + S[0] * D[1],
               base[2] + s2 * D[0] + 2.0 * s1 * D[1] + S[0] * D[2]};
  });
}

}  // namespace

MollifiedData mollify_corner(const GluedDataSet& data, std::size_t idx, double delta) {
  if (idx >= data.interfaces().size()) throw DomainError("no such interface");
  const auto& ps = data.patches();
  const auto& in = ps[idx];
  const auto& out = ps[idx + 1];
  if (!in.is_areal() || !out.is_areal()) throw DomainError("mollifier needs the areal chart");
  const double rc = data.interfaces()[idx].r_c;
  if (!(delta > 0.0) || delta >= 0.5 * (rc - in.lo()) || delta >= 0.5 * (out.hi() - rc))
    throw DomainError("collar exits the adjacent patch domains");

  MollifiedData m;
  m.delta = delta;
  m.collar = RadialPatch::areal(blend(in.f_profile(), out.f_profile(), rc, delta),
                                blend(in.a_profile(), out.a_profile(), rc, delta),
                                blend(in.b_profile(), out.b_profile(), rc, delta));
  std::vector<RadialPatch> list(ps.begin(), ps.begin() + static_cast<long>(idx));
  list.push_back(RadialPatch::areal(restrict(in.f_profile(), in.lo(), rc - delta),
                                    restrict(in.a_profile(), in.lo(), rc - delta),
                                    restrict(in.b_profile(), in.lo(), rc - delta)));
  list.push_back(m.collar);
  list.push_back(RadialPatch::areal(restrict(out.f_profile(), rc + delta, out.hi()),
                                    restrict(out.a_profile(), rc + delta, out.hi()),
                                    restrict(out.b_profile(), rc + delta, out.hi())));
  list.insert(list.end(), ps.begin() + static_cast<long>(idx) + 2, ps.end());
  m.data = corner::glue_all(std::move(list), false, data.decay().q);
  m.data.name = data.name + "_mollified";
  m.data.topology_asserted = data.topology_asserted;
  m.data.expected = data.expected;
  m.data.expected.erase("jump");

  m.inf_R = std::numeric_limits<double>::infinity();
  const std::size_t n = 2001;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = rc - delta + 2.0 * delta * static_cast<double>(k) / static_cast<double>(n - 1);
    const Jet f = m.collar.f_profile().jet(r);
    m.lipschitz = std::max(m.lipschitz, std::abs(f[1] / (f[0] * f[0])));
    m.k_sup = std::max({m.k_sup, std::abs(m.collar.a(r)[0]), std::abs(m.collar.b(r)[0])});
    m.inf_R = std::min(m.inf_R, geometry::scalar_curvature(m.collar, r));
    const double orig = r <= rc ? in.f(r) : out.f(r);
    m.sup_f_change = std::max(m.sup_f_change, std::abs(f[0] - orig));
  }
  return m;
}

MollifyReport mollify_sequence(const GluedDataSet& data, std::size_t idx, double delta) {
  MollifyReport rep;
  for (double d : {delta, 0.5 * delta, 0.25 * delta}) rep.runs.push_back(mollify_corner(data, idx, d));
  const auto& r = rep.runs;
  double lo = r[0].lipschitz, hi = r[0].lipschitz;
  for (const auto& x : r) {
    lo = std::min(lo, x.lipschitz);
    hi = std::max(hi, x.lipschitz);
  }
  rep.lipschitz_uniform = hi <= 1.5 * lo + 1e-12;
  if (r[1].inf_R < 0.0 && r[2].inf_R < 0.0 && r[0].inf_R < 0.0)
    rep.curvature_exponent = 0.5 * std::log2(r[2].inf_R / r[0].inf_R);
  rep.curvature_bounded = rep.curvature_exponent < 0.5;
  return rep;
}

// ------------------------------------------------ conformal deformation

DeformationResult conformal_deform(const GluedDataSet& data, double r_F,
                                   const DeformationOptions& opt) {
  if (!(r_F > data.lo()) || !(r_F < data.hi()))
    throw DomainError("excision radius outside the data set");
  DeformationResult res;
  res.r_F = r_F;
  double last = r_F;
  for (double c : data.corner_radii()) last = std::max(last, c);
  const double outer = opt.outer > 0.0 ? opt.outer : std::min(data.hi(), 1e3 * last);
  if (!(outer > 10.0 * r_F)) throw DomainError("conformal solve needs outer > 10 r_F");

  auto b_of = [&](const RadialPatch& p, double x) {
    if (opt.b) return opt.b->contains(x) ? (*opt.b)(x) : 0.0;
    const auto c = geometry::constraints(p, x);
    const double K = geometry::momentum_tensor(p, x).tr_k;
    // mu below the DEC tolerance counts as vacuum
    return (-2.0 * c.mu > 1e-10 ? -2.0 * c.mu : 0.0) + K * K;
  };

  // y = (u, v) with v = rho^2 u' / sqrt(A), independent variable t = ln x
  std::vector<double> xs, us, dus, bs;
  OdeState y{1.0, 0.0};
  double l32 = 0.0, green = 0.0;
  for (const auto& p : data.patches()) {
    const double lo = std::max(p.lo(), r_F), hi = std::min(p.hi(), outer);
    if (!(hi > lo)) continue;
    auto rhs = [&](double t, const OdeState& s) {
      const double x = std::exp(t);
      const auto m = p.metric(x);
      const double sA = std::sqrt(m.A);
      const double b = b_of(p, x);
      return OdeState{x * s[1] * sA / (m.rho * m.rho), -x * 0.125 * b * sA * m.rho * m.rho * s[0]};
    };
    const auto sol = numgrid::integrate_ode(rhs, y, std::log(lo), std::log(hi), opt.step);
    for (std::size_t k = xs.empty() ? 0 : 1; k < sol.t.size(); ++k) {
      const double x = std::exp(sol.t[k]);
      const auto m = p.metric(x);
      xs.push_back(x);
      us.push_back(sol.y[k][0]);
      dus.push_back(sol.y[k][1] * std::sqrt(m.A) / (m.rho * m.rho));
      bs.push_back(b_of(p, x));
    }
    // volume integrals by the trapezoid rule in t
    for (std::size_t k = 0; k + 1 < sol.t.size(); ++k) {
      const double dt = sol.t[k + 1] - sol.t[k];
      for (std::size_t e : {k, k + 1}) {
        const double x = std::exp(sol.t[e]);
        const auto m = p.metric(x);
        const double dv = 4.0 * kPi * std::sqrt(m.A) * m.rho * m.rho * x * 0.5 * dt;
        const double b = b_of(p, x);
        l32 += std::pow(b, 1.5) * dv;
        green += b * sol.y[e][0] * dv;
      }
    }
    y = sol.y.back();
  }
  res.b_l32 = std::pow(l32, 2.0 / 3.0);

  // far field u = c0 + c1 / x + c2 / x^2 over the last decade, fitted
  // relative to the last value so a constant field fits exactly
  const double u_ref = us.back();
  std::vector<std::size_t> fit;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (xs[k] >= 0.1 * outer) fit.push_back(k);
  Eigen::MatrixXd M(fit.size(), 3);
  Eigen::VectorXd rhs(fit.size());
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const double x = xs[fit[i]];
    M(i, 0) = 1.0;
    M(i, 1) = 1.0 / x;
    M(i, 2) = 1.0 / (x * x);
    rhs(i) = us[fit[i]] - u_ref;
  }
  const Eigen::Vector3d c = M.colPivHouseholderQr().solve(rhs);
  const double u_inf = u_ref + c(0);
  res.u_min = *std::min_element(us.begin(), us.end()) / u_inf;
  res.hypothesis_ok = u_inf > 0.0 && *std::min_element(us.begin(), us.end()) > 0.0;
  for (std::size_t k = 0; k < us.size(); ++k) {
    us[k] /= u_inf;
    dus[k] /= u_inf;
  }
  res.A = c(1) / u_inf;
  res.green_A = green / u_inf / (32.0 * kPi);
  res.u = ScalarProfile::hermite(xs, us, dus);
  res.outer_residual = std::abs(us.back() - 1.0 - res.A / xs.back());

  const auto& op = data.outermost();
  const double xo = op.hi();
  res.m = 0.5 * op.rho(xo)[0] * (1.0 - op.f(xo));
  res.m_hat = res.m + 2.0 * res.A;

  res.R_hat_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!(bs[k] > 0.0)) continue;
    const double x = xs[k];
    const auto& p = data.patch_at(x, x == xs.front() ? +1 : -1);
    const double R = geometry::scalar_curvature(p, x);
    res.R_hat_min = std::min(res.R_hat_min, (R + bs[k]) / std::pow(us[k], 4));
  }
  if (!std::isfinite(res.R_hat_min)) res.R_hat_min = 0.0;
  return res;
}

}  // namespace cornermass::extension

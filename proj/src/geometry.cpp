#include "cornermass/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cornermass::geometry {

namespace {

bool same_domain(const ScalarProfile& p, double lo, double hi) {
  return p.valid() && p.contains(lo) && p.contains(hi);
}

std::vector<double> probe_points(double lo, double hi, std::size_t n) {
  std::vector<double> x;
  const bool geometric = lo > 0.0 && hi / lo > 100.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n);
    x.push_back(geometric ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s);
  }
  x.back() = hi;
  return x;
}

// one-sided quadratic extrapolation towards the center
template <class F>
double center_limit(const RadialPatch& p, F&& eval) {
  const double h = 1e-3 * std::min(1.0, p.hi() - p.lo());
  const double x = p.lo();
  return 3.0 * eval(x + h) - 3.0 * eval(x + 2 * h) + eval(x + 3 * h);
}

void require(const RadialPatch& p, double x) {
  if (!p.contains(x))
    throw DomainError("radius " + std::to_string(x) + " outside patch [" +
                      std::to_string(p.lo()) + ", " + std::to_string(p.hi()) + "]");
}

}  // namespace

RadialPatch RadialPatch::areal(ScalarProfile f, ScalarProfile a, ScalarProfile b) {
  RadialPatch p;
  p.areal_ = true;
  p.lo_ = f.lo();
  p.hi_ = f.hi();
  p.f_ = std::move(f);
  p.a_ = std::move(a);
  p.b_ = std::move(b);
  p.validate();
  return p;
}

RadialPatch RadialPatch::chart(ScalarProfile A, ScalarProfile rho, ScalarProfile a,
                               ScalarProfile b) {
  RadialPatch p;
  p.areal_ = false;
  p.lo_ = A.lo();
  p.hi_ = A.hi();
  p.A_ = std::move(A);
  p.rho_ = std::move(rho);
  p.a_ = std::move(a);
  p.b_ = std::move(b);
  p.validate();
  return p;
}

void RadialPatch::validate() {
  if (lo_ < 0.0) throw DomainError("patch starts at negative radius");
  if (!same_domain(a_, lo_, hi_) || !same_domain(b_, lo_, hi_))
    throw DomainError("k profiles must cover the patch domain");
  if (!areal_ && !same_domain(rho_, lo_, hi_))
    throw DomainError("areal-radius profile must cover the patch domain");
  for (double x : probe_points(lo_, hi_, 256)) {
    if (areal_) {
      if (!(f_(x) > 0.0))
        throw DomainError("metric coefficient f not positive at r = " + std::to_string(x));
    } else {
      if (!(A_(x) > 0.0))
        throw DomainError("metric coefficient A not positive at x = " + std::to_string(x));
      if (!(rho_(x) > 0.0) && x > lo_)
        throw DomainError("areal radius not positive at x = " + std::to_string(x));
    }
    if (!std::isfinite(a_(x)) || !std::isfinite(b_(x)))
      throw DomainError("k not finite at x = " + std::to_string(x));
  }
  const double r0 = areal_ ? lo_ : rho_(lo_);
  if (r0 == 0.0) {
    const double f0 = areal_ ? f_(lo_) : sigma(lo_) * sigma(lo_);
    if (std::abs(f0 - 1.0) > 1e-8)
      throw DomainError("center is not smooth: f(0) must equal 1");
  }
}

bool RadialPatch::contains(double x) const {
  const double eps = 1e-12 * std::max(1.0, std::max(std::abs(lo_), std::abs(hi_)));
  return x >= lo_ - eps && x <= hi_ + eps;
}

Jet RadialPatch::rho(double x) const {
  if (areal_) return {x, 1.0, 0.0};
  return rho_.jet(x);
}

numgrid::RadialMetric RadialPatch::metric(double x) const {
  if (areal_) {
    const Jet f = f_.jet(x);
    return {1.0 / f[0], -f[1] / (f[0] * f[0]), x, 1.0};
  }
  const Jet A = A_.jet(x), r = rho_.jet(x);
  return {A[0], A[1], r[0], r[1]};
}

double RadialPatch::sigma(double x) const {
  if (areal_) return std::sqrt(f_(x));
  return rho_.d1(x) / std::sqrt(A_(x));
}

double RadialPatch::f(double x) const {
  if (areal_) return f_(x);
  const double s = sigma(x);
  return s * s;
}

double RadialPatch::df(double x) const {
  if (areal_) return f_.d1(x);
  const Jet A = A_.jet(x), r = rho_.jet(x);
  return 2.0 * r[1] * r[2] / A[0] - r[1] * r[1] * A[1] / (A[0] * A[0]);
}

Jet RadialPatch::a(double x) const { return a_.jet(x); }
Jet RadialPatch::b(double x) const { return b_.jet(x); }

// ------------------------------------------------------------ pointwise

namespace {

double curvature_raw(const RadialPatch& p, double x) {
  if (p.is_areal()) {
    const Jet f = p.f_profile().jet(x);
    return 2.0 / (x * x) * (1.0 - f[0] - x * f[1]);
  }
  const Jet A = p.A_profile().jet(x), r = p.rho_profile().jet(x);
  const double sA = std::sqrt(A[0]);
  const double s = r[1] / sA;
  const double ds = r[2] / sA - r[1] * A[1] / (2.0 * A[0] * sA);
  return 2.0 / (r[0] * r[0]) * (1.0 - s * s - 2.0 * r[0] * ds / sA);
}

double current_raw(const RadialPatch& p, double x) {
  const Jet a = p.a(x), b = p.b(x);
  const double sA = std::sqrt(p.metric(x).A);
  const double H = 2.0 * p.sigma(x) / p.rho(x)[0];
  // J = div(pi), pi = diag(-2b, -(a+b), -(a+b))
  return -2.0 * b[1] / sA + H * (a[0] - b[0]);
}

bool at_center(const RadialPatch& p, double x) {
  return std::abs(x - p.lo()) < 1e-14 && p.rho(p.lo())[0] == 0.0;
}

}  // namespace

double scalar_curvature(const RadialPatch& p, double x) {
  require(p, x);
  if (at_center(p, x))
    return center_limit(p, [&](double y) { return curvature_raw(p, y); });
  return curvature_raw(p, x);
}

double mean_curvature_sphere(const RadialPatch& p, double x) {
  require(p, x);
  const double r = p.rho(x)[0];
  if (!(r > 0.0)) throw DomainError("mean curvature needs a sphere of positive radius");
  return 2.0 * p.sigma(x) / r;
}

ConstraintSample constraints(const RadialPatch& p, double x) {
  require(p, x);
  ConstraintSample s;
  s.radius = x;
  s.R = scalar_curvature(p, x);
  const double a = p.a(x)[0], b = p.b(x)[0];
  s.mu = 0.5 * (s.R + 4.0 * a * b + 2.0 * b * b);
  s.J_radial = at_center(p, x) ? center_limit(p, [&](double y) { return current_raw(p, y); })
                               : current_raw(p, x);
  s.dec_margin = s.mu - std::abs(s.J_radial);
  return s;
}

MomentumTensorSample momentum_tensor(const RadialPatch& p, double x) {
  require(p, x);
  const double a = p.a(x)[0], b = p.b(x)[0];
  MomentumTensorSample m;
  m.radius = x;
  m.tr_k = a + 2.0 * b;
  m.tr_sigma_k = 2.0 * b;
  m.pi_nn = a - m.tr_k;
  m.pi_tan = b - m.tr_k;
  return m;
}

NullExpansions null_expansions(const RadialPatch& p, double x, double mots_tol) {
  const double H = mean_curvature_sphere(p, x);
  const double trs = 2.0 * p.b(x)[0];
  NullExpansions e;
  e.theta_plus = H + trs;
  e.theta_minus = H - trs;
  e.outer_trapped = e.theta_plus <= 0.0;
  e.inner_trapped = e.theta_minus <= 0.0;
  e.mots = std::abs(e.theta_plus) <= mots_tol;
  return e;
}

DecReport dec_check(const RadialPatch& p, std::size_t samples, double tol,
                    std::optional<std::pair<double, double>> range) {
  if (samples < 2) throw DomainError("dec_check needs at least two samples");
  const double lo = range ? range->first : p.lo();
  const double hi = range ? range->second : p.hi();
  require(p, lo);
  require(p, hi);
  DecReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.samples = samples;
  for (std::size_t k = 0; k < samples; ++k) {
    const double x =
        k + 1 == samples ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples - 1);
    const double m = constraints(p, x).dec_margin;
    if (m < rep.min_margin) {
      rep.min_margin = m;
      rep.at_radius = x;
    }
  }
  rep.satisfied = rep.min_margin >= -tol;
  return rep;
}

}  // namespace cornermass::geometry

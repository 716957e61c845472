#include "cornermass/numgrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cornermass::numgrid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t locate(const std::vector<double>& x, double r) {
  auto it = std::upper_bound(x.begin(), x.end(), r);
  std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(k, x.size() - 2);
}

void check_nodes(const std::vector<double>& x, std::size_t other) {
  if (x.size() < 2 || x.size() != other)
    throw DomainError("profile needs at least two nodes of matching length");
  for (std::size_t k = 1; k < x.size(); ++k)
    if (!(x[k] > x[k - 1])) throw DomainError("profile nodes not strictly increasing");
}

}  // namespace

// -------------------------------------------------------------- profiles

ScalarProfile ScalarProfile::analytic(double lo, double hi, Closure jet) {
  if (!(hi >= lo)) throw DomainError("empty profile domain");
  ScalarProfile p;
  p.lo_ = lo;
  p.hi_ = hi;
  p.eval_ = std::move(jet);
  return p;
}

ScalarProfile ScalarProfile::constant(double lo, double hi, double value) {
  return analytic(lo, hi, [value](double) { return Jet{value, 0.0, 0.0}; });
}

ScalarProfile ScalarProfile::spline(std::vector<double> x, std::vector<double> y) {
  check_nodes(x, y.size());
  const std::size_t n = x.size();
  // second derivatives with natural ends: Thomas algorithm
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double a = h0, b = 2.0 * (h0 + h1), cc = h1;
      const double rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
      const double denom = b - a * c[i - 1];
      c[i] = cc / denom;
      d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];
  }
  auto xs = std::make_shared<std::vector<double>>(std::move(x));
  auto ys = std::make_shared<std::vector<double>>(std::move(y));
  auto ms = std::make_shared<std::vector<double>>(std::move(m));
  const double lo = xs->front(), hi = xs->back();
  return analytic(lo, hi, [xs, ys, ms](double r) {
    const auto& X = *xs;
    const auto& Y = *ys;
    const auto& M = *ms;
    const std::size_t k = locate(X, r);
    const double h = X[k + 1] - X[k];
    const double A = (X[k + 1] - r) / h, B = (r - X[k]) / h;
    const double v = A * Y[k] + B * Y[k + 1] +
                     ((A * A * A - A) * M[k] + (B * B * B - B) * M[k + 1]) * h * h / 6.0;
    const double dv = (Y[k + 1] - Y[k]) / h -
                      (3.0 * A * A - 1.0) / 6.0 * h * M[k] +
                      (3.0 * B * B - 1.0) / 6.0 * h * M[k + 1];
    const double ddv = A * M[k] + B * M[k + 1];
    return Jet{v, dv, ddv};
  });
}

ScalarProfile ScalarProfile::hermite(std::vector<double> x, std::vector<double> y,
                                     std::vector<double> dy) {
  check_nodes(x, y.size());
  if (dy.size() != y.size()) throw DomainError("hermite slopes size mismatch");
  auto xs = std::make_shared<std::vector<double>>(std::move(x));
  auto ys = std::make_shared<std::vector<double>>(std::move(y));
  auto ds = std::make_shared<std::vector<double>>(std::move(dy));
  const double lo = xs->front(), hi = xs->back();
  return analytic(lo, hi, [xs, ys, ds](double r) {
    const auto& X = *xs;
    const std::size_t k = locate(X, r);
    const double h = X[k + 1] - X[k];
    const double t = (r - X[k]) / h;
    const double y0 = (*ys)[k], y1 = (*ys)[k + 1];
    const double m0 = (*ds)[k] * h, m1 = (*ds)[k + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 +
                     (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
    const double dv = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 +
                       (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h;
    const double ddv = ((12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 +
                        (6 * t - 2) * m1) / (h * h);
    return Jet{v, dv, ddv};
  });
}

bool ScalarProfile::contains(double r) const {
  const double eps = 1e-12 * std::max(1.0, std::max(std::abs(lo_), std::abs(hi_)));
  return r >= lo_ - eps && r <= hi_ + eps;
}

Jet ScalarProfile::jet(double r) const {
  if (!eval_) throw DomainError("profile not initialised");
  if (!contains(r))
    throw DomainError("radius " + std::to_string(r) + " outside profile domain [" +
                      std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
  return eval_(std::clamp(r, lo_, hi_));
}

// ------------------------------------------------------------------- ODE

namespace {

OdeState axpy(const OdeState& y, double h, const OdeState& k) {
  OdeState out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + h * k[i];
  return out;
}

OdeState rk4_step(const OdeRhs& f, double t, const OdeState& y, double h) {
  const OdeState k1 = f(t, y);
  const OdeState k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const OdeState k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const OdeState k4 = f(t + h, axpy(y, h, k3));
  OdeState out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

bool finite(const OdeState& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

OdeSolution integrate_ode(const OdeRhs& rhs, OdeState y0, double t0, double t1,
                          double h) {
  if (!(h > 0.0)) throw DomainError("ODE step must be positive");
  if (!finite(y0)) throw DivergedError("non-finite initial state", t0);
  const double span = t1 - t0;
  const auto n = static_cast<std::size_t>(
      std::max(1.0, std::ceil(std::abs(span) / h - 1e-9)));
  const double step = span / static_cast<double>(n);

  OdeSolution sol;
  sol.t.reserve(n + 1);
  sol.y.reserve(n + 1);
  sol.t.push_back(t0);
  sol.y.push_back(std::move(y0));
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + step * static_cast<double>(k);
    const OdeState& y = sol.y.back();
    OdeState next = rk4_step(rhs, t, y, step);
    if (!finite(next)) {
      ++sol.retries;
      next = rk4_step(rhs, t + 0.5 * step, rk4_step(rhs, t, y, 0.5 * step), 0.5 * step);
      if (!finite(next)) throw DivergedError("ODE state became non-finite", t);
    }
    sol.t.push_back(k + 1 == n ? t1 : t0 + step * static_cast<double>(k + 1));
    sol.y.push_back(std::move(next));
  }
  sol.dy.reserve(sol.t.size());
  for (std::size_t k = 0; k < sol.t.size(); ++k) sol.dy.push_back(rhs(sol.t[k], sol.y[k]));
  return sol;
}

ScalarProfile OdeSolution::profile(std::size_t k) const {
  std::vector<double> x = t, v(t.size()), d(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    v[i] = y[i].at(k);
    d[i] = dy[i].at(k);
  }
  if (x.size() > 1 && x.back() < x.front()) {
    std::reverse(x.begin(), x.end());
    std::reverse(v.begin(), v.end());
    std::reverse(d.begin(), d.end());
  }
  return ScalarProfile::hermite(std::move(x), std::move(v), std::move(d));
}

std::vector<ScalarProfile> OdeSolution::profiles() const {
  std::vector<ScalarProfile> out;
  if (y.empty()) return out;
  for (std::size_t k = 0; k < y.front().size(); ++k) out.push_back(profile(k));
  return out;
}

// --------------------------------------------------------- extrapolation

ConvergenceReport richardson(double coarse, double fine, double p) {
  ConvergenceReport rep;
  rep.coarse = coarse;
  rep.fine = fine;
  rep.observed_order = kNaN;
  if (coarse == fine) {
    rep.degenerate = true;
    rep.extrapolated = fine;
    return rep;
  }
  const double s = std::pow(2.0, p);
  rep.extrapolated = (s * fine - coarse) / (s - 1.0);
  return rep;
}

ConvergenceReport richardson(double v0, double v1, double v2, double p) {
  ConvergenceReport rep = richardson(v1, v2, p);
  const double d1 = v0 - v1, d2 = v1 - v2;
  rep.monotone = d1 * d2 > 0.0;
  if (d1 == 0.0 || d2 == 0.0) {
    rep.degenerate = true;
    rep.observed_order = kNaN;
  } else if (d1 / d2 > 0.0) {
    rep.observed_order = std::log2(d1 / d2);
  } else {
    rep.observed_order = kNaN;
  }
  return rep;
}

ConvergenceReport richardson_table(const std::vector<double>& values, double p) {
  if (values.size() < 2) throw DomainError("richardson needs at least two values");
  ConvergenceReport rep =
      values.size() >= 3
          ? richardson(values[values.size() - 3], values[values.size() - 2],
                       values.back(), p)
          : richardson(values[0], values[1], p);
  if (rep.degenerate) return rep;
  std::vector<double> col = values;
  double order = p;
  while (col.size() > 1) {
    const double s = std::pow(2.0, order);
    std::vector<double> next(col.size() - 1);
    for (std::size_t i = 0; i + 1 < col.size(); ++i)
      next[i] = (s * col[i + 1] - col[i]) / (s - 1.0);
    col = std::move(next);
    order += 1.0;
  }
  rep.extrapolated = col.front();
  return rep;
}

// ------------------------------------------------------------------ roots

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  double a = std::min(lo, hi), b = std::max(lo, hi);
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!(std::isfinite(fa) && std::isfinite(fb)) || std::signbit(fa) == std::signbit(fb))
    throw BracketError("no sign change on [" + std::to_string(a) + ", " +
                       std::to_string(b) + "]");
  // Illinois false position, with a bisection step whenever the bracket
  // fails to halve.
  int side = 0;
  double width = b - a;
  for (int it = 0; it < 400 && b - a > tol; ++it) {
    double x = b - fb * (b - a) / (fb - fa);
    const bool stalled = (b - a) > 0.5 * width && it % 3 == 2;
    if (stalled || !(x > a && x < b)) x = 0.5 * (a + b);
    if (it % 3 == 2) width = b - a;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (std::signbit(fx) == std::signbit(fa)) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

// ------------------------------------------------------------ quadrature

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw DomainError("quadrature needs at least one node");
  QuadratureRule q;
  q.x.resize(n);
  q.w.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    q.x[i] = mid - half * z;
    q.x[n - 1 - i] = mid + half * z;
    q.w[i] = q.w[n - 1 - i] = half * w;
  }
  return q;
}

double sphere_integral(const std::function<double(double, double)>& f, std::size_t n) {
  const QuadratureRule q = gauss_legendre(n, -1.0, 1.0);
  const std::size_t nphi = 2 * n;
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(nphi);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = std::acos(q.x[i]);
    double ring = 0.0;
    for (std::size_t k = 0; k < nphi; ++k) ring += f(theta, dphi * static_cast<double>(k));
    sum += q.w[i] * ring * dphi;
  }
  return sum;
}

// ------------------------------------------------------------------ grid

AxisymGrid::AxisymGrid(std::vector<double> r, std::size_t cells,
                       std::vector<std::size_t> breaks)
    : r_(std::move(r)), cells_(cells), breaks_(std::move(breaks)) {
  if (r_.size() < 8) throw DomainError("axisymmetric grid needs N >= 8 radial nodes");
  if (cells_ < 8) throw DomainError("axisymmetric grid needs M >= 8 theta cells");
  for (std::size_t i = 1; i < r_.size(); ++i)
    if (!(r_[i] > r_[i - 1])) throw DomainError("radial nodes not strictly increasing");
  if (r_.front() < 0.0) throw DomainError("negative radial node");
  std::sort(breaks_.begin(), breaks_.end());
  for (std::size_t b : breaks_)
    if (b == 0 || b + 1 >= r_.size()) throw DomainError("break must be an interior node");
  dtheta_ = std::numbers::pi / static_cast<double>(cells_);
}

double AxisymGrid::theta(std::size_t j) const {
  if (j == 0) return 0.0;
  if (j == cells_) return std::numbers::pi;
  return dtheta_ * static_cast<double>(j);
}

bool AxisymGrid::is_break(std::size_t i) const {
  return std::binary_search(breaks_.begin(), breaks_.end(), i);
}

std::pair<std::size_t, std::size_t> AxisymGrid::segment(std::size_t i, int side) const {
  std::size_t first = 0, last = nr() - 1;
  for (std::size_t b : breaks_) {
    if (b < i || (b == i && side > 0)) first = b;
    if (b > i || (b == i && side < 0)) {
      last = b;
      break;
    }
  }
  return {first, last};
}

AxisymGrid stretched_grid(double x0, double L, const std::vector<double>& corners,
                          std::size_t n, std::size_t cells, double stretch,
                          double inner_fraction) {
  if (!(L > x0)) throw DomainError("truncation radius must exceed inner radius");
  if (n < 8) throw DomainError("axisymmetric grid needs N >= 8 radial nodes");
  std::vector<double> cs;
  for (double c : corners)
    if (c > x0 && c < L) cs.push_back(c);
  std::sort(cs.begin(), cs.end());

  auto outer_nodes = [](double a, double b, std::size_t m, double alpha) {
    std::vector<double> x(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(m);
      x[k] = alpha < 1e-9 ? a + (b - a) * s
                          : a + (b - a) * std::expm1(alpha * s) / std::expm1(alpha);
    }
    x[m] = b;
    return x;
  };

  const std::size_t total = n - 1;
  if (cs.empty()) {
    std::vector<double> x = outer_nodes(x0, L, total, stretch);
    x.front() = x0;
    return AxisymGrid(std::move(x), cells);
  }

  const double inner_len = cs.back() - x0;
  const double outer_len = L - cs.back();
  auto n_in = static_cast<std::size_t>(std::lround(inner_fraction * static_cast<double>(total)));
  n_in = std::clamp<std::size_t>(n_in, 2 * (cs.size()), total - 2);
  const double h_in = inner_len / static_cast<double>(n_in);

  std::vector<double> x{x0};
  std::vector<std::size_t> breaks;
  double prev = x0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < cs.size(); ++c) {
    const double len = cs[c] - prev;
    std::size_t m = c + 1 == cs.size()
                        ? n_in - used
                        : std::max<std::size_t>(2, static_cast<std::size_t>(
                                                        std::lround(len / h_in)));
    m = std::max<std::size_t>(m, 2);
    for (std::size_t k = 1; k <= m; ++k)
      x.push_back(k == m ? cs[c] : prev + len * static_cast<double>(k) / static_cast<double>(m));
    used += m;
    breaks.push_back(x.size() - 1);
    prev = cs[c];
  }
  if (used + 2 > total) throw DomainError("too few radial nodes for the corner layout");
  const std::size_t m_out = total - used;
  double alpha = 0.0;
  if (outer_len / static_cast<double>(m_out) > h_in) {
    auto first_gap = [&](double a) {
      return outer_len * std::expm1(a / static_cast<double>(m_out)) / std::expm1(a) - h_in;
    };
    alpha = find_root(first_gap, 1e-8, 60.0, 1e-12);
  }
  const std::vector<double> xo = outer_nodes(cs.back(), L, m_out, alpha);
  x.insert(x.end(), xo.begin() + 1, xo.end());
  return AxisymGrid(std::move(x), cells, std::move(breaks));
}

// -------------------------------------------------------------- stencils

std::array<double, 3> lagrange_d1(const double* x, std::size_t k) {
  const double t = x[k];
  return {(2 * t - x[1] - x[2]) / ((x[0] - x[1]) * (x[0] - x[2])),
          (2 * t - x[0] - x[2]) / ((x[1] - x[0]) * (x[1] - x[2])),
          (2 * t - x[0] - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]))};
}

std::array<double, 3> lagrange_d2(const double* x, std::size_t) {
  return {2.0 / ((x[0] - x[1]) * (x[0] - x[2])), 2.0 / ((x[1] - x[0]) * (x[1] - x[2])),
          2.0 / ((x[2] - x[0]) * (x[2] - x[1]))};
}

// ------------------------------------------------------ elliptic operator

namespace {

struct RowBuilder {
  std::vector<std::pair<std::size_t, double>> terms;
  void add(std::size_t c, double v) {
    for (auto& t : terms)
      if (t.first == c) {
        t.second += v;
        return;
      }
    terms.emplace_back(c, v);
  }
};

}  // namespace

OperatorStencil assemble_operator(const AxisymGrid& grid, const MetricSampler& metric,
                                  const BoundarySpec& bc) {
  const std::size_t nr = grid.nr(), nt = grid.nt();
  if (bc.outer_values.size() != nt) throw DomainError("outer boundary needs one value per theta node");
  if (bc.inner == InnerKind::Dirichlet && bc.inner_values.size() != nt)
    throw DomainError("inner Dirichlet needs one value per theta node");
  if (bc.inner == InnerKind::Center && !grid.has_center())
    throw DomainError("center condition requires r_1 = 0");

  OperatorStencil op;
  op.grid = &grid;
  op.start.push_back(0);
  op.diag.assign(grid.size(), 0.0);
  op.fixed.assign(grid.size(), kNaN);
  op.plain.assign(grid.size(), 0);
  op.homogeneous.assign(grid.size(), 0);

  const double h = grid.dtheta();
  const double d2w = 1.0 / (2.0 * (1.0 - std::cos(h)));
  const double d1w = 1.0 / (2.0 * std::sin(h));
  const double pole = 2.0 / (1.0 - std::cos(h));
  const auto& x = grid.radii();

  // cap-area weights on a shell, summing to one
  std::vector<double> cap(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    const double lo = j == 0 ? 0.0 : grid.theta(j) - 0.5 * h;
    const double hi = j + 1 == nt ? std::numbers::pi : grid.theta(j) + 0.5 * h;
    cap[j] = 0.5 * (std::cos(lo) - std::cos(hi));
  }

  auto angular = [&](RowBuilder& row, std::size_t i, std::size_t j, double c) {
    const std::size_t k = grid.index(i, j);
    if (j == 0) {
      row.add(k, -c * pole);
      row.add(grid.index(i, 1), c * pole);
    } else if (j + 1 == nt) {
      row.add(k, -c * pole);
      row.add(grid.index(i, j - 1), c * pole);
    } else {
      const double cot = std::cos(grid.theta(j)) / std::sin(grid.theta(j));
      row.add(grid.index(i, j - 1), c * (d2w - cot * d1w));
      row.add(k, -2.0 * c * d2w);
      row.add(grid.index(i, j + 1), c * (d2w + cot * d1w));
    }
  };

  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const std::size_t k = grid.index(i, j);
      RowBuilder row;
      bool plain = false;
      if (i + 1 == nr) {
        op.fixed[k] = bc.outer_values[j];
      } else if (i == 0 && bc.inner == InnerKind::Dirichlet) {
        op.fixed[k] = bc.inner_values[j];
      } else if (i == 0 && bc.inner == InnerKind::Center) {
        if (j == 0) {
          const double xh = 0.5 * x[1];
          const RadialMetric mh = metric(xh, +1);
          const double flux = mh.rho * mh.rho / std::sqrt(mh.A);
          const QuadratureRule q = gauss_legendre(8, 0.0, xh);
          double vol = 0.0;
          for (std::size_t s = 0; s < q.x.size(); ++s) {
            const RadialMetric m = metric(q.x[s], +1);
            vol += q.w[s] * std::sqrt(m.A) * m.rho * m.rho;
          }
          const double c = flux / (x[1] * vol);
          row.add(k, -c);
          for (std::size_t jj = 0; jj < nt; ++jj) row.add(grid.index(1, jj), c * cap[jj]);
        } else {
          row.add(k, 1.0);
          row.add(grid.index(0, 0), -1.0);
          op.homogeneous[k] = 1;
        }
      } else if (i == 0) {  // Neumann
        const auto w = lagrange_d1(&x[0], 0);
        for (std::size_t s = 0; s < 3; ++s) row.add(grid.index(s, j), w[s]);
        op.homogeneous[k] = 1;
      } else if (grid.is_break(i)) {
        const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
        const RadialMetric mi = metric(x[i], +1);
        const RadialMetric mm = metric(x[i] - 0.5 * hm, -1);
        const RadialMetric mp = metric(x[i] + 0.5 * hp, +1);
        const RadialMetric qm = metric(x[i] - 0.25 * hm, -1);
        const RadialMetric qp = metric(x[i] + 0.25 * hp, +1);
        const double r2 = mi.rho * mi.rho;
        const double vol = 0.5 * hm * std::sqrt(qm.A) * qm.rho * qm.rho / r2 +
                           0.5 * hp * std::sqrt(qp.A) * qp.rho * qp.rho / r2;
        const double len = 0.5 * hm * std::sqrt(qm.A) + 0.5 * hp * std::sqrt(qp.A);
        const double fm = mm.rho * mm.rho / (std::sqrt(mm.A) * r2 * hm * vol);
        const double fp = mp.rho * mp.rho / (std::sqrt(mp.A) * r2 * hp * vol);
        row.add(grid.index(i - 1, j), fm);
        row.add(k, -fm - fp);
        row.add(grid.index(i + 1, j), fp);
        angular(row, i, j, len / (vol * r2));
        plain = true;
      } else {
        const RadialMetric m = metric(x[i], +1);
        const double cxx = 1.0 / m.A;
        const double cx = 2.0 * m.drho / (m.rho * m.A) - m.dA / (2.0 * m.A * m.A);
        const auto w1 = lagrange_d1(&x[i - 1], 1);
        const auto w2 = lagrange_d2(&x[i - 1], 1);
        for (std::size_t s = 0; s < 3; ++s)
          row.add(grid.index(i - 1 + s, j), cxx * w2[s] + cx * w1[s]);
        angular(row, i, j, 1.0 / (m.rho * m.rho));
        plain = true;
      }
      for (const auto& [c, v] : row.terms) {
        if (c == k) {
          op.diag[k] += v;
        } else {
          op.col.push_back(c);
          op.val.push_back(v);
        }
      }
      if (!std::isnan(op.fixed[k])) op.diag[k] = 1.0;
      if (std::isnan(op.fixed[k]) && op.diag[k] == 0.0)
        throw NumericalError("singular operator row");
      op.plain[k] = plain ? 1 : 0;
      op.start.push_back(op.col.size());
    }
  }
  return op;
}

double apply_row(const OperatorStencil& op, const GridField& u, std::size_t k) {
  if (!std::isnan(op.fixed[k])) return u[k];
  double s = op.diag[k] * u[k];
  for (std::size_t p = op.start[k]; p < op.start[k + 1]; ++p) s += op.val[p] * u[op.col[p]];
  return s;
}

double residual_norm(const OperatorStencil& op, const GridField& source, const GridField& u) {
  double res = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!std::isnan(op.fixed[k])) continue;
    const double s = op.homogeneous[k] ? 0.0 : source[k];
    res = std::max(res, std::abs((s - apply_row(op, u, k)) / op.diag[k]));
  }
  return res;
}

namespace {

inline void relax(const OperatorStencil& op, const GridField& src, GridField& u,
                  std::size_t k, double omega) {
  double s = op.homogeneous[k] ? 0.0 : src[k];
  for (std::size_t p = op.start[k]; p < op.start[k + 1]; ++p) s -= op.val[p] * u[op.col[p]];
  const double target = s / op.diag[k];
  u[k] += omega * (target - u[k]);
}

}  // namespace

SolveResult solve_linear_elliptic(const OperatorStencil& op, const GridField& source,
                                  GridField initial, const SolveOptions& opt) {
  const AxisymGrid& g = *op.grid;
  if (source.size() != g.size() || initial.size() != g.size())
    throw DomainError("field size does not match grid");
  SolveResult res;
  res.u = std::move(initial);
  GridField& u = res.u;
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!std::isnan(op.fixed[k])) u[k] = op.fixed[k];

  const double omega =
      opt.omega > 0.0
          ? opt.omega
          : 2.0 / (1.0 + 1.5 * std::numbers::pi /
                             static_cast<double>(std::max(g.nr(), g.nt())));
  const std::size_t nr = g.nr(), nt = g.nt();

  res.residual = residual_norm(op, source, u);
  res.history.push_back(res.residual);
  while (res.residual > opt.tol) {
    if (res.iterations >= opt.max_iter)
      throw UnconvergedError("relaxation hit the iteration cap", res.residual, res.history);
    if (opt.sweep == Sweep::Lexicographic) {
      for (std::size_t k = 0; k < u.size(); ++k) {
        if (!std::isnan(op.fixed[k])) continue;
        relax(op, source, u, k, op.plain[k] ? omega : 1.0);
      }
    } else {
      for (std::size_t color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(nr); ++ii) {
          const auto i = static_cast<std::size_t>(ii);
          for (std::size_t j = (i + color) % 2; j < nt; j += 2) {
            const std::size_t k = i * nt + j;
            if (op.plain[k]) relax(op, source, u, k, omega);
          }
        }
      }
      for (std::size_t k = 0; k < u.size(); ++k)
        if (std::isnan(op.fixed[k]) && !op.plain[k]) relax(op, source, u, k, 1.0);
    }
    ++res.iterations;
    res.residual = residual_norm(op, source, u);
    res.history.push_back(res.residual);
    if (!std::isfinite(res.residual))
      throw UnconvergedError("relaxation diverged", res.residual, res.history);
  }
  return res;
}

}  // namespace cornermass::numgrid

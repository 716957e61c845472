#include "cornermass/harmonic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

#include "cornermass/geometry.hpp"

namespace cornermass::harmonic {

namespace {

constexpr double kPi = std::numbers::pi;

// Fornberg weights for derivative m at z from n nodes.
std::array<double, 4> fd_weights(const double* x, std::size_t n, double z, int m) {
  double c[4][3] = {};
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<double, 4> w{};
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

struct Stencil {
  std::size_t first = 0;
  std::size_t count = 0;
  std::array<double, 4> d1{};
  std::array<double, 4> d2{};
  std::pair<std::size_t, std::size_t> segment;
};

Stencil radial_stencil(const AxisymGrid& g, std::size_t i, int side) {
  Stencil s;
  s.segment = g.segment(i, side);
  const auto [a, b] = s.segment;
  if (b - a + 1 < 4) throw DomainError("radial segment needs at least four nodes");
  if (i == a) {
    s.first = a;
    s.count = 4;
  } else if (i == b) {
    s.first = b - 3;
    s.count = 4;
  } else {
    s.first = i - 1;
    s.count = 3;
  }
  const double* x = &g.radii()[s.first];
  s.d1 = fd_weights(x, s.count, g.r(i), 1);
  s.d2 = fd_weights(x, s.count, g.r(i), 2);
  return s;
}

// side under which node k of a segment sees that segment
int side_in(const std::pair<std::size_t, std::size_t>& seg, std::size_t k) {
  return k == seg.second && k != seg.first ? -1 : 1;
}

bool is_pole(const AxisymGrid& g, std::size_t j) { return j == 0 || j + 1 == g.nt(); }

double theta_d1(const AxisymGrid& g, const std::vector<double>& col, std::size_t j) {
  if (is_pole(g, j)) return 0.0;
  return (col[j + 1] - col[j - 1]) / (2.0 * std::sin(g.dtheta()));
}

double theta_d2(const AxisymGrid& g, const std::vector<double>& col, std::size_t j) {
  const double h = g.dtheta();
  if (j == 0) return (col[1] - col[0]) / (1.0 - std::cos(h));
  if (j + 1 == g.nt()) return (col[j - 1] - col[j]) / (1.0 - std::cos(h));
  return (col[j + 1] - 2.0 * col[j] + col[j - 1]) / (2.0 * (1.0 - std::cos(h)));
}

// integral over theta in [0, pi] of the hat at node j times sin(theta)
std::vector<double> theta_weights(const AxisymGrid& g) {
  const double h = g.dtheta();
  std::vector<double> w(g.nt());
  for (std::size_t j = 0; j < g.nt(); ++j)
    w[j] = is_pole(g, j) ? 1.0 - std::sin(h) / h
                         : std::sin(g.theta(j)) * 2.0 * (1.0 - std::cos(h)) / h;
  return w;
}

struct Shell {
  double x = 0.0;
  double A = 1.0, sqA = 1.0, dA = 0.0;
  double rho = 0.0, drho = 1.0, d2rho = 0.0;
  double sigma = 1.0;
  double a = 0.0, b = 0.0, K = 0.0;
  double mu = 0.0, J = 0.0, R = 0.0, H = 0.0;
  double ric_n = 0.0, ric_t = 0.0;
  double pi_nn = 0.0;
  bool center = false;
};

Shell shell_at(const GluedDataSet& data, double x, int side) {
  const auto& p = data.patch_at(x, side);
  Shell s;
  s.x = x;
  const auto m = p.metric(x);
  s.A = m.A;
  s.sqA = std::sqrt(m.A);
  s.dA = m.dA;
  s.rho = m.rho;
  s.drho = m.drho;
  s.d2rho = p.rho(x)[2];
  s.a = p.a(x)[0];
  s.b = p.b(x)[0];
  s.K = s.a + 2.0 * s.b;
  s.pi_nn = -2.0 * s.b;
  if (x == 0.0 || s.rho == 0.0) {
    s.center = true;
    return s;
  }
  s.sigma = s.drho / s.sqA;
  const double sigma_x = s.d2rho / s.sqA - s.drho * s.dA / (2.0 * s.A * s.sqA);
  const double rho_ss = sigma_x / s.sqA;
  s.ric_n = -2.0 * rho_ss / s.rho;
  s.ric_t = -rho_ss / s.rho + (1.0 - s.sigma * s.sigma) / (s.rho * s.rho);
  s.H = 2.0 * s.sigma / s.rho;
  const auto c = geometry::constraints(p, x);
  s.mu = c.mu;
  s.J = c.J_radial;
  s.R = c.R;
  return s;
}

struct Shells {
  std::vector<Shell> above;
  std::vector<Shell> below;
  const Shell& at(std::size_t i, int side) const { return side < 0 ? below[i] : above[i]; }
};

Shells shells_for(const GluedDataSet& data, const AxisymGrid& g) {
  Shells s;
  s.above.resize(g.nr());
  s.below.resize(g.nr());
  for (std::size_t i = 0; i < g.nr(); ++i) {
    const bool top = i + 1 == g.nr();
    s.above[i] = shell_at(data, g.r(i), top ? -1 : 1);
    s.below[i] = g.is_break(i) ? shell_at(data, g.r(i), -1) : s.above[i];
  }
  return s;
}

NodeTensor tensor_of(const Derivs& d, const Shell& s, double theta, bool pole, double delta) {
  NodeTensor t;
  if (s.center) return t;
  t.g1 = d.ux / s.sqA;
  t.g2 = d.ut / s.rho;
  t.grad = std::hypot(t.g1, t.g2);
  t.grad_d = std::sqrt(t.grad * t.grad + delta * delta);
  const double r2 = s.rho * s.rho;
  t.h11 = (d.uxx - s.dA * d.ux / (2.0 * s.A)) / s.A;
  t.h12 = (d.uxt - s.drho * d.ut / s.rho) / (s.sqA * s.rho);
  t.h21 = (d.utx - s.drho * d.ut / s.rho) / (s.sqA * s.rho);
  t.h22 = (d.utt + s.rho * s.drho * d.ux / s.A) / r2;
  const double ang = pole ? d.utt : d.ut * std::cos(theta) / std::sin(theta);
  t.h33 = s.drho * d.ux / (s.rho * s.A) + ang / r2;
  t.s11 = t.h11 + t.grad * s.a;
  t.s12 = t.h12;
  t.s22 = t.h22 + t.grad * s.b;
  t.s33 = t.h33 + t.grad * s.b;
  t.s_norm2 = t.s11 * t.s11 + 2.0 * t.s12 * t.s12 + t.s22 * t.s22 + t.s33 * t.s33;
  t.laplacian = t.h11 + t.h22 + t.h33;
  return t;
}

// |grad u| at a center node from the first shell: u ~ u0 + g z
double center_gradient(const AxisymField& f, const Shell& first, const std::vector<double>& tw) {
  const auto& g = f.grid();
  double mean = 0.0;
  for (std::size_t j = 0; j < g.nt(); ++j) mean += 0.5 * tw[j] * f.value(1, j) * std::cos(g.theta(j));
  return std::abs(3.0 * mean / first.rho);
}

// radial derivative of |grad u| along theta row j at node i
double grad_dx(const AxisymField& f, const Shells& sh, std::size_t i, std::size_t j, int side) {
  const auto& g = f.grid();
  const Stencil st = radial_stencil(g, i, side);
  double s = 0.0;
  for (std::size_t k = 0; k < st.count; ++k) {
    const std::size_t n = st.first + k;
    const int sd = side_in(st.segment, n);
    const auto t = tensor_of(f.at(n, j, sd), sh.at(n, sd), g.theta(j), is_pole(g, j), 0.0);
    s += st.d1[k] * t.grad;
  }
  return s;
}

// trapezoid weight of node i inside [a, b]
double trap(const AxisymGrid& g, std::size_t i, std::size_t a, std::size_t b) {
  double w = 0.0;
  if (i > a) w += 0.5 * (g.r(i) - g.r(i - 1));
  if (i < b) w += 0.5 * (g.r(i + 1) - g.r(i));
  return w;
}

// Volume integral over nodes [i1, i2]; fn(i, j, side) returns the integrand.
template <class Fn>
double volume_integral(const AxisymGrid& g, const Shells& sh, const std::vector<double>& tw,
                       std::size_t i1, std::size_t i2, Fn&& fn) {
  std::vector<std::size_t> cuts{i1};
  for (std::size_t b : g.breaks())
    if (b > i1 && b < i2) cuts.push_back(b);
  cuts.push_back(i2);
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const std::size_t a = cuts[c], b = cuts[c + 1];
    for (std::size_t i = a; i <= b; ++i) {
      const int side = (i == b && i != a) ? -1 : 1;
      const Shell& s = sh.at(i, side);
      if (s.center) continue;
      double ring = 0.0;
      for (std::size_t j = 0; j < g.nt(); ++j) ring += tw[j] * fn(i, j, side);
      total += trap(g, i, a, b) * s.sqA * s.rho * s.rho * ring;
    }
  }
  return 2.0 * kPi * total;
}

std::size_t node_of(const AxisymGrid& g, double x) {
  for (std::size_t i = 0; i < g.nr(); ++i)
    if (std::abs(g.r(i) - x) <= 1e-12 * std::max(1.0, std::abs(x))) return i;
  throw DomainError("radius is not a grid node");
}

}  // namespace

std::string inner_name(InnerBoundary b) {
  switch (b) {
    case InnerBoundary::Auto: return "auto";
    case InnerBoundary::Center: return "center";
    case InnerBoundary::Dirichlet: return "dirichlet";
    case InnerBoundary::Neumann: return "neumann";
  }
  return "?";
}

// ---------------------------------------------------------------- field

AxisymField::AxisymField(AxisymGrid grid, GridField u, double delta)
    : grid_(std::move(grid)), u_(std::move(u)), delta_(delta) {
  const auto& g = grid_;
  if (u_.size() != g.size()) throw DomainError("field size does not match the grid");
  for (double v : u_)
    if (!std::isfinite(v)) throw NumericalError("non-finite field value");
  above_.assign(g.size(), {});
  below_.assign(g.size(), {});

  std::vector<double> ut(g.size());
  for (std::size_t i = 0; i < g.nr(); ++i) {
    std::vector<double> col(u_.begin() + g.index(i, 0), u_.begin() + g.index(i, 0) + g.nt());
    for (std::size_t j = 0; j < g.nt(); ++j) ut[g.index(i, j)] = theta_d1(g, col, j);
  }

  const long nr = static_cast<long>(g.nr());
#pragma omp parallel for schedule(static)
  for (long ii = 0; ii < nr; ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    for (int side : {1, -1}) {
      auto& out = side > 0 ? above_ : below_;
      if (side < 0 && !g.is_break(i)) continue;
      if (i == 0 && g.has_center()) {
        for (std::size_t j = 0; j < g.nt(); ++j) out[g.index(i, j)].u = u_[g.index(i, j)];
        continue;
      }
      const Stencil st = radial_stencil(g, i, i + 1 == g.nr() ? -1 : side);
      std::vector<double> ux(g.nt());
      for (std::size_t j = 0; j < g.nt(); ++j) {
        Derivs d;
        d.u = u_[g.index(i, j)];
        for (std::size_t k = 0; k < st.count; ++k) {
          const std::size_t n = g.index(st.first + k, j);
          d.ux += st.d1[k] * u_[n];
          d.uxx += st.d2[k] * u_[n];
          d.utx += st.d1[k] * ut[n];
        }
        d.ut = ut[g.index(i, j)];
        ux[j] = d.ux;
        out[g.index(i, j)] = d;
      }
      std::vector<double> col(u_.begin() + g.index(i, 0), u_.begin() + g.index(i, 0) + g.nt());
      for (std::size_t j = 0; j < g.nt(); ++j) {
        out[g.index(i, j)].uxt = theta_d1(g, ux, j);
        out[g.index(i, j)].utt = theta_d2(g, col, j);
      }
    }
  }
  for (std::size_t i = 0; i < g.nr(); ++i)
    if (!g.is_break(i))
      for (std::size_t j = 0; j < g.nt(); ++j) below_[g.index(i, j)] = above_[g.index(i, j)];
}

AxisymField AxisymField::inject(AxisymGrid grid, const std::function<double(double, double)>& u,
                                double delta) {
  GridField v(grid.size());
  for (std::size_t i = 0; i < grid.nr(); ++i)
    for (std::size_t j = 0; j < grid.nt(); ++j) v[grid.index(i, j)] = u(grid.r(i), grid.theta(j));
  return AxisymField(std::move(grid), std::move(v), delta);
}

const Derivs& AxisymField::at(std::size_t i, std::size_t j, int side) const {
  return side < 0 ? below_[grid_.index(i, j)] : above_[grid_.index(i, j)];
}

double AxisymField::axis_defect() const {
  const auto& g = grid_;
  const double h = g.dtheta();
  double worst = 0.0;
  for (std::size_t i = g.has_center() ? 1 : 0; i < g.nr(); ++i) {
    const std::size_t n = g.nt() - 1;
    const double top = -3.0 * value(i, 0) + 4.0 * value(i, 1) - value(i, 2);
    const double bottom = -3.0 * value(i, n) + 4.0 * value(i, n - 1) - value(i, n - 2);
    worst = std::max({worst, std::abs(top) / (2.0 * h), std::abs(bottom) / (2.0 * h)});
  }
  return worst;
}

// ---------------------------------------------------------------- solve

AxisymGrid make_grid(const GluedDataSet& data, const GridSpec& spec) {
  const auto corners = data.corner_radii();
  double L = spec.L;
  if (L <= 0.0) L = 20.0 * std::max({1.0, corners.empty() ? 0.0 : corners.back(), data.lo()});
  if (L > data.hi()) throw DomainError("truncation radius beyond the data");
  const std::size_t cells = spec.cells ? spec.cells : std::max<std::size_t>(8, spec.n / 2);
  return numgrid::stretched_grid(data.lo(), L, corners, spec.n, cells, spec.stretch,
                                 spec.inner_fraction);
}

AxisymField solve_spacetime_harmonic(const GluedDataSet& data, const AxisymGrid& grid,
                                     const HarmonicOptions& opt) {
  if (!(opt.delta >= 0.0)) throw DomainError("delta must be nonnegative");
  if (std::abs(std::abs(opt.direction) - 1.0) > 1e-14)
    throw DomainError("direction must be +1 or -1 along the axis");
  const auto& g = grid;
  InnerBoundary inner = opt.inner;
  if (inner == InnerBoundary::Auto)
    inner = g.has_center() ? InnerBoundary::Center : InnerBoundary::Dirichlet;
  if ((inner == InnerBoundary::Center) != g.has_center())
    throw DomainError("inner boundary spec incompatible with grid");

  const double L = g.radii().back();
  numgrid::BoundarySpec bc;
  bc.outer_values.resize(g.nt());
  for (std::size_t j = 0; j < g.nt(); ++j)
    bc.outer_values[j] = opt.direction * L * std::cos(g.theta(j));
  // the asymptote averages to zero over any centered sphere
  const double c = opt.inner_value.value_or(0.0);
  switch (inner) {
    case InnerBoundary::Dirichlet:
      bc.inner = numgrid::InnerKind::Dirichlet;
      bc.inner_values.assign(g.nt(), c);
      break;
    case InnerBoundary::Neumann: bc.inner = numgrid::InnerKind::Neumann; break;
    default: bc.inner = numgrid::InnerKind::Center; break;
  }

  const auto op = numgrid::assemble_operator(g, data.sampler(), bc);
  const Shells sh = shells_for(data, g);
  const auto tw = theta_weights(g);

  bool linear = true;
  for (std::size_t i = 0; i < g.nr(); ++i)
    if (sh.above[i].K != 0.0 || sh.below[i].K != 0.0) linear = false;

  // break rows carry half-cell volume averages
  std::vector<std::array<double, 2>> split(g.nr(), {0.5, 0.5});
  for (std::size_t b : g.breaks()) {
    const double hm = g.r(b) - g.r(b - 1), hp = g.r(b + 1) - g.r(b);
    const auto mm = data.metric(g.r(b) - 0.25 * hm, -1);
    const auto mp = data.metric(g.r(b) + 0.25 * hp, 1);
    const double vm = hm * std::sqrt(mm.A) * mm.rho * mm.rho;
    const double vp = hp * std::sqrt(mp.A) * mp.rho * mp.rho;
    split[b] = {vm / (vm + vp), vp / (vm + vp)};
  }

  auto source = [&](const AxisymField& f) {
    GridField s(g.size(), 0.0);
    if (linear) return s;
    for (std::size_t i = 0; i < g.nr(); ++i) {
      if (i == 0 && g.has_center()) {
        const double w = center_gradient(f, sh.above[1], tw);
        s[g.index(0, 0)] = -sh.above[0].K * std::sqrt(w * w + opt.delta * opt.delta);
        continue;
      }
      for (std::size_t j = 0; j < g.nt(); ++j) {
        const bool pole = is_pole(g, j);
        const auto up = tensor_of(f.at(i, j, 1), sh.above[i], g.theta(j), pole, opt.delta);
        double v = -sh.above[i].K * up.grad_d;
        if (g.is_break(i)) {
          const auto dn = tensor_of(f.at(i, j, -1), sh.below[i], g.theta(j), pole, opt.delta);
          v = split[i][0] * (-sh.below[i].K * dn.grad_d) + split[i][1] * v;
        }
        s[g.index(i, j)] = v;
      }
    }
    return s;
  };

  GridField u(g.size());
  for (std::size_t i = 0; i < g.nr(); ++i)
    for (std::size_t j = 0; j < g.nt(); ++j)
      u[g.index(i, j)] = opt.direction * g.r(i) * std::cos(g.theta(j));

  numgrid::SolveOptions lin;
  lin.tol = opt.linear_tol;
  lin.sweep = opt.sweep;

  SolveDiagnostics diag;
  diag.inner = inner;
  diag.inner_value = c;
  diag.direction = opt.direction;
  diag.L = L;

  AxisymField field(g, u, opt.delta);
  bool done = false;
  for (std::size_t it = 0; it < opt.max_picard; ++it) {
    const GridField src = source(field);
    auto res = numgrid::solve_linear_elliptic(op, src, u, lin);
    diag.linear_iterations += res.iterations;
    const double relax = linear ? 1.0 : opt.relax;
    double change = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double next = u[k] + relax * (res.u[k] - u[k]);
      change = std::max(change, std::abs(next - u[k]));
      u[k] = next;
    }
    if (!std::isfinite(change))
      throw DivergedError("Picard iterate is not finite",
                          diag.picard_changes.empty() ? 0.0 : diag.picard_changes.back());
    field = AxisymField(g, u, opt.delta);
    diag.picard_changes.push_back(change);
    diag.picard_iterations = it + 1;
    if (linear || change <= opt.tol) {
      done = true;
      break;
    }
  }
  if (!done)
    throw UnconvergedError("Picard iteration hit its cap", diag.picard_changes.back(),
                           diag.picard_changes);

  const auto& ch = diag.picard_changes;
  for (std::size_t k = 3; k < ch.size(); ++k)
    if (ch[k] > ch[k - 1] && ch[k] > 10.0 * opt.tol) diag.contraction = false;

  diag.residual = numgrid::residual_norm(op, source(field), u);

  double bmax = -std::numeric_limits<double>::infinity(), bmin = -bmax;
  double imax = bmax, imin = bmin;
  for (std::size_t i = 0; i < g.nr(); ++i) {
    const bool boundary = i + 1 == g.nr() || (i == 0 && !g.has_center());
    for (std::size_t j = 0; j < g.nt(); ++j) {
      const double v = u[g.index(i, j)];
      if (boundary) {
        bmax = std::max(bmax, v);
        bmin = std::min(bmin, v);
      } else {
        imax = std::max(imax, v);
        imin = std::min(imin, v);
      }
    }
  }
  diag.max_principle_violation = std::max({0.0, imax - bmax, bmin - imin});

  if (!g.has_center()) {
    diag.inner_dnu_min = std::numeric_limits<double>::infinity();
    diag.inner_dnu_max = -diag.inner_dnu_min;
    for (std::size_t j = 0; j < g.nt(); ++j) {
      const double dnu = -field.at(0, j).ux / sh.above[0].sqA;
      diag.inner_dnu_min = std::min(diag.inner_dnu_min, dnu);
      diag.inner_dnu_max = std::max(diag.inner_dnu_max, dnu);
    }
    const double scale = 1e-8 * std::max(1.0, std::abs(diag.inner_dnu_max - diag.inner_dnu_min));
    diag.inner_sign_consistent = diag.inner_dnu_min >= -scale || diag.inner_dnu_max <= scale;
  }
  field.diagnostics = std::move(diag);
  return field;
}

// -------------------------------------------------------------- Hessian

const NodeTensor& SpacetimeHessianField::at(std::size_t i, std::size_t j, int side) const {
  return side < 0 ? below[grid.index(i, j)] : above[grid.index(i, j)];
}

SpacetimeHessianField spacetime_hessian(const AxisymField& field, const GluedDataSet& data) {
  const auto& g = field.grid();
  const Shells sh = shells_for(data, g);
  SpacetimeHessianField out;
  out.grid = g;
  out.above.resize(g.size());
  out.below.resize(g.size());
  for (std::size_t i = 0; i < g.nr(); ++i) {
    for (std::size_t j = 0; j < g.nt(); ++j) {
      const bool pole = is_pole(g, j);
      for (int side : {1, -1}) {
        const Shell& s = sh.at(i, side);
        const auto t = tensor_of(field.at(i, j, side), s, g.theta(j), pole, field.delta());
        (side > 0 ? out.above : out.below)[g.index(i, j)] = t;
        if (s.center) continue;
        out.symmetry_defect = std::max(out.symmetry_defect, std::abs(t.h12 - t.h21));
        const double d = std::max({std::abs(t.s11 - t.h11 - t.grad * s.a), std::abs(t.s12 - t.h12),
                                   std::abs(t.s22 - t.h22 - t.grad * s.b),
                                   std::abs(t.s33 - t.h33 - t.grad * s.b)});
        out.identity_defect = std::max(out.identity_defect, d);
      }
    }
  }
  return out;
}

// ------------------------------------------------------------ mass bound

MassBoundReport mass_bound_report(const GluedDataSet& data, const AxisymField& field,
                                  const masses::AdmResult& adm, double direction) {
  const auto& g = field.grid();
  const Shells sh = shells_for(data, g);
  const auto tw = theta_weights(g);
  const auto hs = spacetime_hessian(field, data);

  MassBoundReport rep;
  rep.direction = direction;
  rep.E = adm.E;
  rep.P_dir = direction * adm.P[2];
  rep.lhs = 16.0 * kPi * (rep.E + rep.P_dir);

  const std::size_t last = g.nr() - 1;
  rep.bulk_hessian = volume_integral(g, sh, tw, 0, last, [&](std::size_t i, std::size_t j, int s) {
    const auto& t = hs.at(i, j, s);
    return t.grad_d > 0.0 ? t.s_norm2 / t.grad_d : 0.0;
  });
  rep.bulk_matter = volume_integral(g, sh, tw, 0, last, [&](std::size_t i, std::size_t j, int s) {
    const auto& t = hs.at(i, j, s);
    const auto& c = sh.at(i, s);
    return 2.0 * (c.mu * t.grad + c.J * t.g1);
  });
  rep.bulk = rep.bulk_hessian + rep.bulk_matter;

  for (std::size_t b : g.breaks()) {
    const Shell& dn = sh.below[b];
    const Shell& up = sh.above[b];
    double jump = 0.0, best = std::numeric_limits<double>::infinity();
    for (const auto& c : data.interfaces())
      if (std::abs(c.r_c - g.r(b)) < best) {
        best = std::abs(c.r_c - g.r(b));
        jump = c.jump;
      }
    double ring = 0.0, ring_bound = 0.0;
    for (std::size_t j = 0; j < g.nt(); ++j) {
      const auto& tm = hs.at(b, j, -1);
      const auto& tp = hs.at(b, j, 1);
      const double w = 0.5 * (tm.grad + tp.grad);
      const double nu = 0.5 * (tm.g1 + tp.g1);
      ring += tw[j] * 2.0 * ((dn.H - up.H) * w - (dn.pi_nn - up.pi_nn) * nu);
      ring_bound += tw[j] * 2.0 * jump * w;
    }
    const double area = 2.0 * kPi * up.rho * up.rho;
    rep.corner += area * ring;
    rep.corner_bound += area * ring_bound;
  }
  for (const auto& c : data.interfaces())
    if (c.jump < 0.0 && c.r_c < g.radii().back()) rep.corner_hypothesis_violated = true;

  if (!g.has_center()) {
    const Shell& s = sh.above[0];
    double ring = 0.0;
    for (std::size_t j = 0; j < g.nt(); ++j) {
      const auto& t = hs.at(0, j, 1);
      const double dw = t.grad > 0.0 ? (t.h11 * t.g1 + t.h12 * t.g2) / t.grad : 0.0;
      ring += tw[j] * (-dw - s.a * t.g1);
    }
    rep.inner_boundary = 2.0 * 2.0 * kPi * s.rho * s.rho * ring;
  }

  rep.slack = rep.lhs - (rep.bulk + rep.corner);
  return rep;
}

MassBoundReport mass_bound_analysis(const GluedDataSet& data, const masses::AdmResult& adm,
                                    const MassBoundOptions& opt) {
  auto run = [&](std::size_t n, double delta) {
    GridSpec gs = opt.grid;
    gs.n = n;
    if (opt.grid.cells) gs.cells = std::max<std::size_t>(8, opt.grid.cells * n / opt.grid.n);
    HarmonicOptions ho = opt.solve;
    ho.delta = delta;
    const auto grid = make_grid(data, gs);
    const auto f = solve_spacetime_harmonic(data, grid, ho);
    return mass_bound_report(data, f, adm, ho.direction);
  };

  std::vector<std::size_t> levels = opt.levels;
  if (levels.empty()) levels = {opt.grid.n / 2, opt.grid.n, 2 * opt.grid.n};
  if (levels.size() != 3 || !(levels[0] < levels[1] && levels[1] < levels[2]))
    throw DomainError("mass bound needs three increasing grid levels");
  const std::size_t n = levels[1];
  const double delta = opt.solve.delta;
  MassBoundReport rep = run(n, delta);

  double lo = rep.slack, hi = rep.slack;
  rep.delta_runs.push_back({delta, rep.slack});
  for (double d : {0.5 * delta, 0.25 * delta}) {
    const double s = run(n, d).slack;
    rep.delta_runs.push_back({d, s});
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  rep.delta_spread = hi - lo;
  rep.delta_extrapolated =
      numgrid::richardson(rep.delta_runs[0].slack, rep.delta_runs[1].slack,
                          rep.delta_runs[2].slack, 1.0)
          .extrapolated;

  rep.grid_levels = levels;
  rep.grid_slack = {run(levels[0], delta).slack, rep.slack, run(levels[2], delta).slack};
  rep.grid = numgrid::richardson(rep.grid_slack[0], rep.grid_slack[1], rep.grid_slack[2], 2.0);
  const double d_coarse = std::abs(rep.grid_slack[1] - rep.grid_slack[0]);
  const double d_fine = std::abs(rep.grid_slack[2] - rep.grid_slack[1]);
  // differences below rounding of the summed terms carry no grid information
  const double floor =
      1e-12 * std::max({1.0, std::abs(rep.lhs), std::abs(rep.bulk), std::abs(rep.corner)});
  rep.eps_grid = std::max(d_coarse, floor);
  rep.eps_fine = std::max(d_fine, floor);
  rep.grid_order = std::log2(d_coarse / d_fine);
  rep.delta_robust = rep.delta_spread <= rep.eps_grid;

  if (rep.corner_hypothesis_violated)
    rep.verdict = masses::Verdict::NotApplicable;
  else
    rep.verdict = rep.slack >= -rep.eps_grid ? masses::Verdict::Pass : masses::Verdict::Fail;
  return rep;
}

// ------------------------------------------------------ integral formulas

IntegralFormulaReport integral_formula_check(const GluedDataSet& data, const AxisymField& field,
                                             double x_inner, double x_outer) {
  const auto& g = field.grid();
  const std::size_t i1 = node_of(g, x_inner), i2 = node_of(g, x_outer);
  if (i2 <= i1) throw DomainError("region needs x_inner < x_outer");
  for (std::size_t b : g.breaks())
    if (b > i1 && b < i2) throw DomainError("region crosses a corner");

  const Shells sh = shells_for(data, g);
  const auto tw = theta_weights(g);
  const auto hs = spacetime_hessian(field, data);
  const double cut = field.delta();

  IntegralFormulaReport rep;
  rep.x_inner = x_inner;
  rep.x_outer = x_outer;

  auto usable = [&](const NodeTensor& t) { return t.grad > cut && t.grad > 0.0; };
  rep.lhs = volume_integral(g, sh, tw, i1, i2, [&](std::size_t i, std::size_t j, int s) {
    const auto& t = hs.at(i, j, s);
    const auto& c = sh.at(i, s);
    if (!usable(t)) return 0.0;
    return 0.5 * t.s_norm2 / t.grad + c.mu * t.grad + c.J * t.g1;
  });
  rep.level_sets = volume_integral(g, sh, tw, i1, i2, [&](std::size_t i, std::size_t j, int s) {
    const auto& t = hs.at(i, j, s);
    const auto& c = sh.at(i, s);
    if (!usable(t)) return 0.0;
    const double n1 = t.g1 / t.grad, n2 = t.g2 / t.grad;
    // projection of the Hessian onto the level set
    const double H[2][2] = {{t.h11, t.h12}, {t.h12, t.h22}};
    const double P[2][2] = {{1.0 - n1 * n1, -n1 * n2}, {-n1 * n2, 1.0 - n2 * n2}};
    double M[2][2] = {};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) M[a][b] += P[a][p] * H[p][q] * P[q][b];
    const double tr = M[0][0] + M[1][1] + t.h33;
    const double sq = M[0][0] * M[0][0] + 2.0 * M[0][1] * M[0][1] + M[1][1] * M[1][1] + t.h33 * t.h33;
    const double w2 = t.grad * t.grad;
    const double ric = c.ric_n * n1 * n1 + c.ric_t * n2 * n2;
    const double R_sigma = c.R - 2.0 * ric - sq / w2 + tr * tr / w2;
    return 0.5 * t.grad * R_sigma;
  });
  const double bulk_defect = volume_integral(g, sh, tw, i1, i2, [&](std::size_t i, std::size_t j, int s) {
    const auto& t = hs.at(i, j, s);
    if (!usable(t)) return 0.0;
    const double F = t.laplacian + sh.at(i, s).K * t.grad;
    return 0.5 * F * F / t.grad;
  });
  const double total = volume_integral(g, sh, tw, i1, i2, [](std::size_t, std::size_t, int) { return 1.0; });
  rep.excluded_measure = volume_integral(g, sh, tw, i1, i2, [&](std::size_t i, std::size_t j, int s) {
    return usable(hs.at(i, j, s)) ? 0.0 : 1.0;
  }) / total;

  double flux = 0.0, boundary_defect = 0.0;
  auto sphere = [&](std::size_t i, int side, double sign) {
    const Shell& s = sh.at(i, side);
    if (s.center) return;
    double ring = 0.0, ring_f = 0.0;
    for (std::size_t j = 0; j < g.nt(); ++j) {
      const auto& t = hs.at(i, j, side);
      if (!usable(t)) continue;
      const double dw = grad_dx(field, sh, i, j, side) / s.sqA;
      ring += tw[j] * sign * (dw + s.a * t.g1);
      const double F = t.laplacian + s.K * t.grad;
      ring_f += tw[j] * sign * F * t.g1 / t.grad;
    }
    const double area = 2.0 * kPi * s.rho * s.rho;
    flux += area * ring;
    boundary_defect -= area * ring_f;
  };
  sphere(i1, 1, -1.0);
  sphere(i2, -1, 1.0);

  rep.flux = flux;
  rep.defect = bulk_defect + boundary_defect;
  rep.rhs = rep.flux + rep.level_sets + rep.defect;
  rep.discrepancy = rep.lhs - rep.rhs;
  return rep;
}

BoundaryFormulaReport boundary_formula_check(const GluedDataSet& data, const AxisymField& field,
                                             double x, int side) {
  const auto& g = field.grid();
  const std::size_t i = node_of(g, x);
  const Shells sh = shells_for(data, g);
  const Shell& s = sh.at(i, side);
  if (s.center) throw DomainError("boundary formula needs a sphere, not the center");
  const auto tw = theta_weights(g);

  BoundaryFormulaReport rep;
  rep.x = x;
  rep.side = side;
  double kept = 0.0;
  for (std::size_t j = 0; j < g.nt(); ++j) {
    if (is_pole(g, j)) continue;
    const double th = g.theta(j);
    const Derivs& d = field.at(i, j, side);
    const auto t = tensor_of(d, s, th, false, 0.0);
    if (!(t.grad > 0.0)) continue;
    const double w = t.grad, nu = t.g1, cot = std::cos(th) / std::sin(th);

    const double lhs = grad_dx(field, sh, i, j, side) / s.sqA + s.a * nu;

    const double grad_eta = std::abs(d.ut) / s.rho;
    const double lap_eta = (d.utt + cot * d.ut) / (s.rho * s.rho);
    const double eta_nu = d.ut * d.uxt / (s.sqA * s.rho * s.rho);  // <grad eta, grad nu(u)>
    const double sin_t = grad_eta / w, cos_t = nu / w;
    const double sgn = d.ut > 0.0 ? 1.0 : (d.ut < 0.0 ? -1.0 : 0.0);
    const double kappa = sin_t * 0.5 * s.H + cos_t * (-cot / s.rho) * sgn;
    const double curve = -cot * d.ut / (s.rho * s.rho);  // <D_tau tau, grad eta>
    const double F = t.laplacian + s.K * w;
    const double rhs = s.pi_nn * nu - s.H * w + kappa * grad_eta - (nu / w) * lap_eta +
                       eta_nu / w - (nu / w) * curve + F * nu / w;

    rep.theta.push_back(th);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    rep.max_pointwise = std::max(rep.max_pointwise, std::abs(lhs - rhs));
    rep.lhs_integral += tw[j] * lhs;
    rep.rhs_integral += tw[j] * rhs;
    kept += tw[j];
  }
  const double area = 2.0 * kPi * s.rho * s.rho;
  rep.lhs_integral *= area;
  rep.rhs_integral *= area;
  rep.integrated_discrepancy = std::abs(rep.lhs_integral - rep.rhs_integral);
  rep.excluded_measure = 1.0 - kept / 2.0;
  rep.flagged = rep.excluded_measure > 0.01;
  return rep;
}

void write_field_csv(const AxisymField& field, const GluedDataSet& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  const auto& g = field.grid();
  const Shells sh = shells_for(data, g);
  const auto tw = theta_weights(g);
  out << "x,theta,u,grad\n" << std::setprecision(17);
  for (std::size_t i = 0; i < g.nr(); ++i)
    for (std::size_t j = 0; j < g.nt(); ++j) {
      double w = 0.0;
      if (sh.above[i].center)
        w = center_gradient(field, sh.above[1], tw);
      else
        w = tensor_of(field.at(i, j), sh.above[i], g.theta(j), is_pole(g, j), 0.0).grad;
      out << g.r(i) << ',' << g.theta(j) << ',' << field.value(i, j) << ',' << w << '\n';
    }
}

}  // namespace cornermass::harmonic

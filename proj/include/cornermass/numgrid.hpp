#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cornermass/errors.hpp"

namespace cornermass::numgrid {

/// Value and first two derivatives at a point.
using Jet = std::array<double, 3>;

/// A function of one radius on a closed interval, with C^2 access.
class ScalarProfile {
 public:
  using Closure = std::function<Jet(double)>;

  ScalarProfile() = default;

  static ScalarProfile analytic(double lo, double hi, Closure jet);
  static ScalarProfile constant(double lo, double hi, double value);
  /// Natural cubic spline through (x, y); x strictly increasing.
  static ScalarProfile spline(std::vector<double> x, std::vector<double> y);
  /// Piecewise cubic Hermite through values and slopes.
  static ScalarProfile hermite(std::vector<double> x, std::vector<double> y,
                               std::vector<double> dy);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool contains(double r) const;
  bool valid() const { return static_cast<bool>(eval_); }

  Jet jet(double r) const;
  double operator()(double r) const { return jet(r)[0]; }
  double d1(double r) const { return jet(r)[1]; }
  double d2(double r) const { return jet(r)[2]; }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  Closure eval_;
};

// ---------------------------------------------------------------- ODE

using OdeState = std::vector<double>;
using OdeRhs = std::function<OdeState(double t, const OdeState& y)>;

struct OdeSolution {
  std::vector<double> t;
  std::vector<OdeState> y;
  std::vector<OdeState> dy;
  std::size_t retries = 0;

  /// Hermite dense output for component k.
  ScalarProfile profile(std::size_t k) const;
  std::vector<ScalarProfile> profiles() const;
};

/// Classical RK4 with fixed step h on [t0, t1] (t1 may be below t0).
/// A non-finite step is retried once as two half steps.
OdeSolution integrate_ode(const OdeRhs& rhs, OdeState y0, double t0, double t1,
                          double h);

// ---------------------------------------------------------- extrapolation

struct ConvergenceReport {
  double coarse = 0.0;
  double fine = 0.0;
  double extrapolated = 0.0;
  /// NaN when no third value was given or the differences are degenerate.
  double observed_order = 0.0;
  bool degenerate = false;
  bool monotone = true;
};

/// (2^p fine - coarse) / (2^p - 1) for values at h and h/2.
ConvergenceReport richardson(double coarse, double fine, double p);
/// Three nested values h, h/2, h/4: extrapolant from the finest pair and
/// the observed order log2((v0 - v1) / (v1 - v2)).
ConvergenceReport richardson(double v0, double v1, double v2, double p);
/// Repeated elimination of orders p, p+1, ... over halving steps.
ConvergenceReport richardson_table(const std::vector<double>& values, double p);

// ------------------------------------------------------------------ roots

/// Bisection/secant hybrid on [lo, hi]; requires a sign change.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol = 1e-12);

// ------------------------------------------------------------- quadrature

struct QuadratureRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

/// Integral of a function of (theta, phi) over the unit sphere, rule exact
/// for spherical harmonics of degree below 2n.
double sphere_integral(const std::function<double(double, double)>& f,
                       std::size_t n = 24);

// ------------------------------------------------------------------- grid

class AxisymGrid {
 public:
  AxisymGrid() = default;
  /// r strictly increasing (N >= 8), M >= 8 theta cells. breaks are
  /// interior node indices where radial segments join.
  AxisymGrid(std::vector<double> r, std::size_t cells,
             std::vector<std::size_t> breaks = {});

  std::size_t nr() const { return r_.size(); }
  std::size_t nt() const { return cells_ + 1; }
  std::size_t cells() const { return cells_; }
  std::size_t size() const { return nr() * nt(); }
  std::size_t index(std::size_t i, std::size_t j) const { return i * nt() + j; }

  double r(std::size_t i) const { return r_[i]; }
  const std::vector<double>& radii() const { return r_; }
  double dtheta() const { return dtheta_; }
  double theta(std::size_t j) const;

  const std::vector<std::size_t>& breaks() const { return breaks_; }
  bool is_break(std::size_t i) const;
  /// First and last node of the segment containing node i from the given side.
  std::pair<std::size_t, std::size_t> segment(std::size_t i, int side) const;
  bool has_center() const { return r_.front() == 0.0; }

 private:
  std::vector<double> r_;
  std::size_t cells_ = 0;
  double dtheta_ = 0.0;
  std::vector<std::size_t> breaks_;
};

/// Radial nodes on [x0, L]: uniform up to the last corner, then exponentially
/// stretched to L. Corners land exactly on nodes.
AxisymGrid stretched_grid(double x0, double L, const std::vector<double>& corners,
                          std::size_t n, std::size_t cells, double stretch = 3.0,
                          double inner_fraction = 0.3);

using GridField = std::vector<double>;

// --------------------------------------------------------- finite stencils

/// Weights of the 3-point Lagrange first/second derivative at x[k] from
/// nodes x[k0], x[k0+1], x[k0+2].
std::array<double, 3> lagrange_d1(const double* x, std::size_t k);
std::array<double, 3> lagrange_d2(const double* x, std::size_t k);

// ------------------------------------------------------ elliptic operator

/// Radial metric data at a coordinate x: g = A dx^2 + rho^2 dOmega^2.
struct RadialMetric {
  double A = 1.0;
  double dA = 0.0;
  double rho = 0.0;
  double drho = 1.0;
};
/// side = -1 evaluates the segment below x, +1 the segment above.
using MetricSampler = std::function<RadialMetric(double x, int side)>;

enum class InnerKind { Dirichlet, Neumann, Center };

struct BoundarySpec {
  InnerKind inner = InnerKind::Dirichlet;
  std::vector<double> inner_values;  // per theta node, Dirichlet only
  std::vector<double> outer_values;  // per theta node
};

/// Sparse rows of the discrete Laplace-Beltrami operator plus boundary rows.
struct OperatorStencil {
  const AxisymGrid* grid = nullptr;
  std::vector<std::size_t> start;
  std::vector<std::size_t> col;
  std::vector<double> val;
  std::vector<double> diag;
  std::vector<double> fixed;         // Dirichlet value, NaN for unknown rows
  std::vector<unsigned char> plain;  // 5-point row, safe for red-black
  std::vector<unsigned char> homogeneous;  // Neumann and center-copy rows ignore the source
};

OperatorStencil assemble_operator(const AxisymGrid& grid,
                                  const MetricSampler& metric,
                                  const BoundarySpec& boundary);

/// Row action (L u)_k; Dirichlet rows return u_k.
double apply_row(const OperatorStencil& op, const GridField& u, std::size_t k);

enum class Sweep { Lexicographic, RedBlack };

struct SolveOptions {
  double tol = 1e-12;
  std::size_t max_iter = 200000;
  double omega = 0.0;  // 0 picks a grid-based value
  Sweep sweep = Sweep::Lexicographic;
};

struct SolveResult {
  GridField u;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::vector<double> history;  // residual every sweep
};

/// SOR for L u = source. The residual is max |(source - L u)_k / diag_k|.
SolveResult solve_linear_elliptic(const OperatorStencil& op, const GridField& source,
                                  GridField initial, const SolveOptions& opt = {});

double residual_norm(const OperatorStencil& op, const GridField& source,
                     const GridField& u);

}  // namespace cornermass::numgrid

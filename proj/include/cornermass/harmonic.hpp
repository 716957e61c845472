#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cornermass/corner.hpp"
#include "cornermass/masses.hpp"

namespace cornermass::harmonic {

using corner::GluedDataSet;
using numgrid::AxisymGrid;
using numgrid::GridField;

/// Raw coordinate derivatives of u at one node.
struct Derivs {
  double u = 0.0;
  double ux = 0.0;
  double ut = 0.0;
  double uxx = 0.0;
  double uxt = 0.0;  // theta stencil applied to u_x
  double utx = 0.0;  // radial stencil applied to u_theta
  double utt = 0.0;
};

enum class InnerBoundary { Auto, Center, Dirichlet, Neumann };
std::string inner_name(InnerBoundary b);

struct SolveDiagnostics {
  InnerBoundary inner = InnerBoundary::Auto;
  double inner_value = 0.0;  // Dirichlet constant
  double direction = 1.0;    // asymptote direction * x cos(theta)
  double L = 0.0;
  std::vector<double> picard_changes;
  std::size_t picard_iterations = 0;
  std::size_t linear_iterations = 0;
  double residual = 0.0;  // max |L u + K |grad u|_delta| over unknown rows
  double max_principle_violation = 0.0;
  bool contraction = true;  // changes decrease after the third iterate
  // d_nu u on the inner sphere, nu pointing out of the domain
  double inner_dnu_min = 0.0;
  double inner_dnu_max = 0.0;
  bool inner_sign_consistent = true;
};

/// Axisymmetric samples u(x, theta) with cached derivatives.
class AxisymField {
 public:
  AxisymField() = default;
  AxisymField(AxisymGrid grid, GridField u, double delta);
  static AxisymField inject(AxisymGrid grid, const std::function<double(double, double)>& u,
                            double delta = 0.0);

  const AxisymGrid& grid() const { return grid_; }
  const GridField& values() const { return u_; }
  double delta() const { return delta_; }
  double value(std::size_t i, std::size_t j) const { return u_[grid_.index(i, j)]; }
  /// side -1 uses the segment below node i; it differs from +1 only at breaks.
  const Derivs& at(std::size_t i, std::size_t j, int side = 1) const;
  /// max |d_theta u| at the poles by a one-sided stencil
  double axis_defect() const;

  SolveDiagnostics diagnostics;

 private:
  AxisymGrid grid_;
  GridField u_;
  double delta_ = 0.0;
  std::vector<Derivs> above_;
  std::vector<Derivs> below_;
};

/// Radial grid from the data's inner end to L with corners on nodes.
struct GridSpec {
  double L = 0.0;          // 0 picks 20 max(1, last corner)
  std::size_t n = 64;      // radial nodes
  std::size_t cells = 0;   // theta cells, 0 picks n / 2
  double stretch = 3.0;
  double inner_fraction = 0.3;
};
AxisymGrid make_grid(const GluedDataSet& data, const GridSpec& spec);

struct HarmonicOptions {
  InnerBoundary inner = InnerBoundary::Auto;  // Center with a center, else Dirichlet
  std::optional<double> inner_value;          // default: mean of the asymptote (0)
  double direction = 1.0;                     // +1 or -1 along z
  double delta = 1e-2;
  double tol = 1e-10;  // Picard max-norm change
  double linear_tol = 1e-12;
  std::size_t max_picard = 200;
  double relax = 0.8;  // u <- u + relax (T u - u)
  numgrid::Sweep sweep = numgrid::Sweep::RedBlack;
};

/// Picard iteration of Delta u = -K |grad u_n|_delta with u = x cos(theta) on x = L.
AxisymField solve_spacetime_harmonic(const GluedDataSet& data, const AxisymGrid& grid,
                                     const HarmonicOptions& opt = {});

// -------------------------------------------------------------- Hessian

/// Orthonormal frame e1 = d_x / sqrt A, e2 = d_theta / rho, e3 = d_phi / (rho sin).
struct NodeTensor {
  double grad = 0.0;     // |grad u|
  double grad_d = 0.0;   // sqrt(|grad u|^2 + delta^2)
  double g1 = 0.0;
  double g2 = 0.0;
  double h11 = 0.0, h12 = 0.0, h21 = 0.0, h22 = 0.0, h33 = 0.0;
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, s33 = 0.0;
  double s_norm2 = 0.0;  // |Hess u + |grad u| k|^2
  double laplacian = 0.0;
};

struct SpacetimeHessianField {
  AxisymGrid grid;
  std::vector<NodeTensor> above;
  std::vector<NodeTensor> below;
  double symmetry_defect = 0.0;  // max |h12 - h21|
  double identity_defect = 0.0;  // max |S - Hess - |grad u| k|
  const NodeTensor& at(std::size_t i, std::size_t j, int side = 1) const;
};

SpacetimeHessianField spacetime_hessian(const AxisymField& field, const GluedDataSet& data);

// ------------------------------------------------------------ mass bound

struct DeltaRun {
  double delta = 0.0;
  double slack = 0.0;
};

struct MassBoundReport {
  double direction = 1.0;
  double E = 0.0;
  double P_dir = 0.0;
  double lhs = 0.0;  // 16 pi (E + <a, P>)
  double bulk = 0.0;
  double bulk_hessian = 0.0;
  double bulk_matter = 0.0;  // 2 int (mu |grad u| + <J, grad u>)
  double corner = 0.0;
  double corner_bound = 0.0;  // 2 int jump |grad u|, never above corner
  double inner_boundary = 0.0;  // flux term on an inner sphere, 0 with a center
  double slack = 0.0;
  bool corner_hypothesis_violated = false;

  std::vector<DeltaRun> delta_runs;
  double delta_extrapolated = 0.0;
  double delta_spread = 0.0;
  bool delta_robust = false;

  std::vector<std::size_t> grid_levels;
  std::vector<double> grid_slack;
  numgrid::ConvergenceReport grid;
  double eps_grid = 0.0;  // |S_n - S_{n/2}|, floored at rounding of the terms
  double eps_fine = 0.0;  // |S_2n - S_n|, same floor
  double grid_order = 0.0;
  masses::Verdict verdict = masses::Verdict::NotApplicable;
};

MassBoundReport mass_bound_report(const GluedDataSet& data, const AxisymField& field,
                                  const masses::AdmResult& adm, double direction = 1.0);

struct MassBoundOptions {
  GridSpec grid;
  HarmonicOptions solve;
  /// coarse < base < fine radial node counts; empty means {n/2, n, 2n}
  std::vector<std::size_t> levels;
};

/// Base run plus the delta sequence {d, d/2, d/4} and three grid levels.
MassBoundReport mass_bound_analysis(const GluedDataSet& data, const masses::AdmResult& adm,
                                    const MassBoundOptions& opt);

// ------------------------------------------------------ integral formulas

struct IntegralFormulaReport {
  double x_inner = 0.0;
  double x_outer = 0.0;
  double lhs = 0.0;  // int |S|^2 / 2w + mu w + <J, grad u>
  double flux = 0.0;  // boundary d_nu w + k(grad u, nu)
  double level_sets = 0.0;  // (1/2) int int R_{Sigma_t}
  double defect = 0.0;  // int F^2 / 2w - boundary F nu(u) / w
  double rhs = 0.0;
  double discrepancy = 0.0;  // lhs - rhs
  double excluded_measure = 0.0;  // volume fraction with |grad u| <= delta
};

IntegralFormulaReport integral_formula_check(const GluedDataSet& data, const AxisymField& field,
                                             double x_inner, double x_outer);

struct BoundaryFormulaReport {
  double x = 0.0;
  int side = 1;
  std::vector<double> theta;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double max_pointwise = 0.0;
  double lhs_integral = 0.0;
  double rhs_integral = 0.0;
  double integrated_discrepancy = 0.0;
  double excluded_measure = 0.0;  // area fraction of the pole rows
  bool flagged = false;
};

BoundaryFormulaReport boundary_formula_check(const GluedDataSet& data, const AxisymField& field,
                                             double x, int side = 1);

/// Rows of x, theta, u, |grad u|.
void write_field_csv(const AxisymField& field, const GluedDataSet& data, const std::string& path);

}  // namespace cornermass::harmonic

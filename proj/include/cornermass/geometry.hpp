#pragma once

#include <optional>
#include <utility>

#include "cornermass/numgrid.hpp"

namespace cornermass::geometry {

using numgrid::Jet;
using numgrid::ScalarProfile;

/// One smooth rotationally symmetric data patch on [lo, hi].
///
/// The metric is g = A(x) dx^2 + rho(x)^2 dOmega^2. In the areal chart
/// rho = x and A = 1/f. k has radial eigenvalue a and tangential eigenvalue b.
class RadialPatch {
 public:
  RadialPatch() = default;

  static RadialPatch areal(ScalarProfile f, ScalarProfile a, ScalarProfile b);
  static RadialPatch chart(ScalarProfile A, ScalarProfile rho, ScalarProfile a,
                           ScalarProfile b);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool contains(double x) const;
  bool is_areal() const { return areal_; }

  numgrid::RadialMetric metric(double x) const;
  /// Areal radius and its x-derivatives.
  Jet rho(double x) const;
  /// Signed areal speed sigma = rho' / sqrt(A); f = sigma^2 in any chart.
  double sigma(double x) const;
  double f(double x) const;
  Jet a(double x) const;
  Jet b(double x) const;
  /// x-derivative of f as a function of x (areal chart: f').
  double df(double x) const;

  const ScalarProfile& f_profile() const { return f_; }
  const ScalarProfile& a_profile() const { return a_; }
  const ScalarProfile& b_profile() const { return b_; }
  const ScalarProfile& A_profile() const { return A_; }
  const ScalarProfile& rho_profile() const { return rho_; }

 private:
  void validate();

  bool areal_ = true;
  double lo_ = 0.0;
  double hi_ = 0.0;
  ScalarProfile f_;    // areal chart only
  ScalarProfile A_;    // general chart only
  ScalarProfile rho_;  // general chart only
  ScalarProfile a_;
  ScalarProfile b_;
};

struct ConstraintSample {
  double radius = 0.0;
  double R = 0.0;
  double mu = 0.0;
  double J_radial = 0.0;
  double dec_margin = 0.0;
};

struct MomentumTensorSample {
  double radius = 0.0;
  double pi_nn = 0.0;
  double pi_tan = 0.0;
  double tr_k = 0.0;
  double tr_sigma_k = 0.0;
};

struct NullExpansions {
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  bool outer_trapped = false;  // theta_plus <= 0
  bool inner_trapped = false;  // theta_minus <= 0
  bool mots = false;           // theta_plus == 0 within tolerance
};

struct DecReport {
  double min_margin = 0.0;
  double at_radius = 0.0;
  std::size_t samples = 0;
  bool satisfied = false;
};

double scalar_curvature(const RadialPatch& p, double x);
double mean_curvature_sphere(const RadialPatch& p, double x);
ConstraintSample constraints(const RadialPatch& p, double x);
MomentumTensorSample momentum_tensor(const RadialPatch& p, double x);
NullExpansions null_expansions(const RadialPatch& p, double x, double mots_tol = 1e-10);
/// Uniform sampling of mu - |J| over [from, to] (defaults to the patch domain).
DecReport dec_check(const RadialPatch& p, std::size_t samples, double tol = 1e-10,
                    std::optional<std::pair<double, double>> range = std::nullopt);

}  // namespace cornermass::geometry

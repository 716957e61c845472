#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cornermass/corner.hpp"

namespace cornermass::masses {

using corner::GluedDataSet;
using Vec3 = std::array<double, 3>;

struct FluxSample {
  double radius = 0.0;
  double E_flux = 0.0;
  double E_ms = 0.0;  // Misner-Sharp (rho/2)(1 - f)
  Vec3 P{};
};

struct AdmResult {
  double E = 0.0;  // extrapolated flux limit
  Vec3 P{};
  double P_norm = 0.0;
  double mass = 0.0;  // sqrt(E^2 - |P|^2), NaN when E < |P|
  double E_ms = 0.0;
  std::vector<FluxSample> samples;
  numgrid::ConvergenceReport flux;
  numgrid::ConvergenceReport misner_sharp;
  /// Non-monotone flux sequence whose observed order is not positive.
  bool extrapolation_suspect = false;
};

/// Flux integrals over coordinate spheres of the outermost patch, limited
/// by Richardson elimination in 1/r. Radii should double.
AdmResult adm_energy_momentum(const GluedDataSet& data, const std::vector<double>& radii);

/// E + <a, P>.
double directional_energy(const AdmResult& adm, const Vec3& a);

/// sqrt(|S|/16pi) (1 - (1/16pi) int H^2) by quadrature over the coordinate sphere.
double hawking_mass(const GluedDataSet& data, double x, int side = 0);

/// Round Bartnik data on a sphere of areal radius r0.
struct BoundaryData {
  double r0 = 1.0;
  double H = 2.0;
  double tr_sigma_k = 0.0;
  double omega_tangential = 0.0;
};

struct QuasilocalReport {
  double r0 = 0.0;
  double H = 0.0;
  double tr_sigma_k = 0.0;
  double omega_normal = 0.0;
  double omega_tangential = 0.0;
  double omega = 0.0;  // |pi(., nu)|
  double H0 = 0.0;
  double W = 0.0;
  double m_BY = 0.0;
  double m_LY = 0.0;  // NaN when H <= |tr_sigma k|
  double m_H = 0.0;
  bool w_hypothesis = false;   // H > |omega|
  bool ly_hypothesis = false;  // H > |tr_sigma k|
};

QuasilocalReport quasilocal(const BoundaryData& b);
QuasilocalReport quasilocal(const GluedDataSet& data, double x, int side = 0);

/// r0 - (r0^2/2) sqrt(H^2 - t^2); throws HypothesisError when H <= |t|.
double liu_yau_mass(double r0, double H, double tr_sigma_k);

struct MinimalSphere {
  double x = 0.0;
  double areal_radius = 0.0;
  double area = 0.0;
};

/// Outermost zero of H inside a smooth patch.
std::optional<MinimalSphere> minimal_sphere(const GluedDataSet& data);

enum class Verdict { Pass, Fail, NotApplicable };
std::string to_string(Verdict v);

struct HullCheck {
  double radius = 0.0;
  double m_H = 0.0;
  double margin = 0.0;  // W - m_H
  Verdict verdict = Verdict::NotApplicable;
};

struct ComparisonReport {
  double W = 0.0;
  bool dec = false;
  bool h_exceeds_omega = false;
  bool omega_nonzero = false;
  bool topology = false;
  double dec_min_margin = 0.0;
  std::vector<HullCheck> hulls;
  std::optional<MinimalSphere> minimal;
  double penrose_bound = 0.0;  // sqrt(area / 16 pi)
  double penrose_margin = 0.0;
  Verdict penrose = Verdict::NotApplicable;
  std::vector<std::string> failures;
};

/// W >= m_H on the listed hull spheres and the Penrose bound when a minimal
/// sphere exists. Violated hypotheses give NotApplicable.
ComparisonReport comparison_check(const QuasilocalReport& q, const GluedDataSet& data,
                                  const std::vector<double>& hull_radii);

}  // namespace cornermass::masses

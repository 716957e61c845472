#pragma once

#include <map>
#include <string>
#include <vector>

#include "cornermass/geometry.hpp"

namespace cornermass::corner {

using geometry::RadialPatch;

/// Boundary one-form pi(., nu) split into its normal and tangential parts.
struct OmegaPair {
  double normal = 0.0;
  double tangential = 0.0;
};

struct CornerInterface {
  double r_c = 0.0;          // chart coordinate of the corner
  double areal_radius = 0.0;
  double areal_mismatch = 0.0;  // |rho_- - rho_+|, zero for a Lipschitz glue
  double H_minus = 0.0;
  double H_plus = 0.0;
  OmegaPair omega_minus;
  OmegaPair omega_plus;
  double f_minus = 1.0;
  double f_plus = 1.0;
  double jump = 0.0;
};

/// (H_- - H_+) - |omega_- - omega_+| on the shared round boundary metric.
double jump_condition(const CornerInterface& c);

/// Both-sided evaluation at the abutting ends of two patches.
CornerInterface make_interface(const RadialPatch& inner, const RadialPatch& outer);

/// Inner and outer roles exchanged, normal reversed on the H part.
CornerInterface swapped(const CornerInterface& c);

struct DecayCheck {
  double q = 1.0;             // recorded decay order
  double observed = 0.0;      // log2 ratio of |1 - f| at the two largest sample radii
  bool exact = false;         // f == 1 at the sampled radii
  bool ok = false;
};

class GluedDataSet {
 public:
  GluedDataSet() = default;

  const std::vector<RadialPatch>& patches() const { return patches_; }
  const std::vector<CornerInterface>& interfaces() const { return interfaces_; }
  double lo() const { return patches_.front().lo(); }
  double hi() const { return patches_.back().hi(); }
  bool has_center() const;
  std::vector<double> corner_radii() const;

  /// Patch holding x. At a corner side selects inner (-1) or outer (+1);
  /// side 0 there is an error.
  const RadialPatch& patch_at(double x, int side = 0) const;
  const RadialPatch& outermost() const { return patches_.back(); }
  numgrid::RadialMetric metric(double x, int side = 0) const;
  numgrid::MetricSampler sampler() const;
  double trace_k(double x, int side = 0) const;

  const DecayCheck& decay() const { return decay_; }
  bool asymptotic() const { return decay_.ok; }
  bool topology_asserted = false;

  std::string name;
  /// Closed-form values the scenario registry knows (E, P, jump, ...).
  std::map<std::string, double> expected;

  friend GluedDataSet glue_all(std::vector<RadialPatch>, bool, double);

 private:
  std::vector<RadialPatch> patches_;
  std::vector<CornerInterface> interfaces_;
  DecayCheck decay_;
};

/// Concentric patches abutting in order. f may jump only when allowed.
GluedDataSet glue_all(std::vector<RadialPatch> patches, bool allow_f_jump = false,
                      double q = 1.0);
GluedDataSet glue(const RadialPatch& inner, const RadialPatch& outer, double r_c,
                  bool allow_f_jump = false);
GluedDataSet single(const RadialPatch& p, double q = 1.0);

// ------------------------------------------------------- model patches

RadialPatch flat_patch(double lo, double hi);
/// f = 1 - 2m/r, k = 0 (m may be negative).
RadialPatch schwarzschild_patch(double m, double lo, double hi);
/// f = 1 + r^2 with k = s g.
RadialPatch hyperbolic_patch(double s, double hi);
/// psi = 1 + m/2s, g = psi^4 (ds^2 + s^2 dOmega^2), k = 0.
RadialPatch isotropic_patch(double m, double lo, double hi);
/// Samples r,f,a,b from a CSV with a header row, fitted with natural splines.
RadialPatch patch_from_csv(const std::string& path);

// ---------------------------------------------------------- scenarios

struct ScenarioParams {
  std::map<std::string, double> num;
  std::map<std::string, std::string> text;

  double get(const std::string& key, double fallback) const;
};

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::vector<std::string> keys;
};

const std::vector<ScenarioInfo>& scenario_registry();
GluedDataSet scenario_build(const std::string& name, const ScenarioParams& params = {});

}  // namespace cornermass::corner

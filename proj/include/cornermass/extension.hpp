#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cornermass/corner.hpp"
#include "cornermass/masses.hpp"

namespace cornermass::extension {

using corner::GluedDataSet;
using geometry::RadialPatch;
using numgrid::ScalarProfile;

struct ExtensionResult {
  double r0 = 0.0;
  double H_eff = 0.0;
  double f0 = 0.0;
  double lapse0 = 0.0;  // H0 / H_eff
  double E_ext = 0.0;   // extrapolated Misner-Sharp energy
  double Q_limit = 0.0; // extrapolated lim Q
  RadialPatch patch;    // scalar-flat exterior, k = 0
  std::vector<double> r;
  std::vector<double> Q;  // r (1 - sqrt f) at the sample radii
  numgrid::ConvergenceReport q_report;
  std::size_t steps = 0;
};

struct ExtensionOptions {
  double span = 1e3;     // integrate to span * r0
  double step = 2.5e-4;  // in ln r
  std::size_t samples = 200;
};

/// Round quasispherical extension: f(r0) = (H_eff r0 / 2)^2, f' = (1 - f)/r.
ExtensionResult shi_tam_extend(double r0, double H_eff, const ExtensionOptions& opt = {});

struct PipelineResult {
  masses::QuasilocalReport quasilocal;
  ExtensionResult extension;
  corner::CornerInterface interface;  // boundary data against the extension
  bool monotone = false;              // Q nonincreasing
  bool chain = false;                 // W >= E_ext
};

PipelineResult quasilocal_pipeline(const masses::BoundaryData& b, const ExtensionOptions& opt = {});

struct CertificateVerdict {
  double r0 = 0.0;
  double H = 0.0;
  double f = 0.0;  // sqrt(tr_sigma alpha^2 + |beta|^2)
  double H_eff = 0.0;
  double E_ext = 0.0;
  bool no_fill_in = false;
  double margin = 0.0;  // -E_ext
};

std::string verdict_name(const CertificateVerdict& v);

/// No DEC fill-in exists when the extension energy is negative.
CertificateVerdict fillin_certificate(double r0, double H, double tr_alpha, double beta,
                                      double tol = 1e-12);

/// Verdicts for a list of H - f values at fixed r0, in input order.
/// threads = 1 is the serial reference, 0 takes the OpenMP default.
std::vector<CertificateVerdict> certificate_sweep(double r0, const std::vector<double>& h_minus_f,
                                                  int threads = 0);

// ---------------------------------------------------------- mollifier

/// Smooth step from the even bump (35/32)(1 - s^2)^3 on [-1, 1].
numgrid::Jet smooth_step(double s);

struct MollifiedData {
  double delta = 0.0;
  RadialPatch collar;
  GluedDataSet data;
  double lipschitz = 0.0;  // sup |d(1/f)/dr| over the collar
  double k_sup = 0.0;      // sup |a|, |b| over the collar
  double inf_R = 0.0;
  double sup_f_change = 0.0;  // sup |f_delta - f| on the collar (one-sided originals)
};

MollifiedData mollify_corner(const GluedDataSet& data, std::size_t interface, double delta);

struct MollifyReport {
  std::vector<MollifiedData> runs;  // delta, delta/2, delta/4
  double curvature_exponent = 0.0;  // p in inf R ~ -delta^-p (0 when bounded)
  bool lipschitz_uniform = false;
  bool curvature_bounded = false;
};

MollifyReport mollify_sequence(const GluedDataSet& data, std::size_t interface, double delta);

// ------------------------------------------------ conformal deformation

struct DeformationOptions {
  std::optional<ScalarProfile> b;  // overrides max(0, -2 mu) + (tr k)^2
  double outer = 0.0;              // 0 picks 1e3 * max(r_F, last corner)
  double step = 1e-3;              // in ln r
};

struct DeformationResult {
  double r_F = 0.0;
  ScalarProfile u;
  double u_min = 0.0;
  double A = 0.0;
  double m = 0.0;
  double m_hat = 0.0;
  double b_l32 = 0.0;        // L^{3/2} norm of b
  double green_A = 0.0;      // (1/32 pi) int b dV
  double R_hat_min = 0.0;    // min u^-4 (R + b) where b > 0
  double outer_residual = 0.0;  // |u(outer) - 1 - A/outer|
  bool hypothesis_ok = true;    // positive solution found
};

/// Radial solve of Delta u + b u / 8 = 0 on [r_F, outer], u' = 0 at r_F, u -> 1.
DeformationResult conformal_deform(const GluedDataSet& data, double r_F,
                                   const DeformationOptions& opt = {});

}  // namespace cornermass::extension

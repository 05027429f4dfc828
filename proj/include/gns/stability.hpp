#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gns/functionals.hpp"
#include "gns/radial.hpp"

namespace gns {

/// Result of a 1D nearest-optimizer search (lambda for the v-families, mu
/// for the sigma-family).
struct OptimizerFit {
  double lambda_star = 1.0;
  double offset_star = 0.0;
  double distance_l1 = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int evaluations = 0;
  bool converged = false;
  bool boundary_hit = false;   // offset search capped at offset_max
  bool multistart = false;
  double lambda_min_entropy = 0.0;  // entropy-based lower bound, logged only
};

struct FitOptions {
  double lambda_lo = 1e-3;
  double lambda_hi = 1e3;
  double rel_tol = 1e-8;     // relative tolerance in lambda
  bool search_offset = false;
  double offset_max = 10.0;  // |x0| cap; hits are flagged, not hidden
  int angular_nodes = 64;
  int coarse_samples = 33;
};

/// min over lambda (and optionally |x0|) of ||u^6 - lambda^2 v_{lambda,x0}^6||_1.
/// Requires int u^6 = pi/2 within 1e-6 relative.
OptimizerFit fit_nearest_sixth(const RadialDensity& u,
                               const FitOptions& opt = {});

/// min over lambda of ||u^4 - lambda^2 v_lambda^4||_1.
/// Requires int u^4 = pi within 1e-6 relative.
OptimizerFit fit_nearest_fourth(const RadialDensity& u,
                                const FitOptions& opt = {});

struct StabilityProbe {
  double deficit = 0.0;
  double distance_l1 = 0.0;
  double exponent = 0.0;
  double ratio = 0.0;  // distance / deficit^exponent
  OptimizerFit fit;
  double log_hls_value = 0.0;
  double fd_entropy_at_fit = 0.0;
  double dissipation_value = 0.0;
};

/// min over mu of ||rho - sigma_{mu,M}||_1 with the Log-HLS deficit probe;
/// exponent (1-eps)/20.
StabilityProbe hls_fit(const RadialDensity& rho, double eps = 0.1,
                       const FitOptions& opt = {});

struct ClassParams {
  double p = 1.5;  // moment order
  double q = 3.0;  // integrability order
  double A = 0.0;  // moment bound
  double B = 0.0;  // L^q bound
};

struct ContinuityRecord {
  double d_log_hls = 0.0;   // |F[rho] - F[sigma]|
  double d_entropy = 0.0;   // |int rho log rho - int sigma log sigma|
  double d_interaction = 0.0;  // |U[rho] - U[sigma]| (raw log-kernel energy)
  double l1_distance = 0.0;
  ClassParams cls;
};

/// Continuity probe for a pair inside a common moment/integrability class;
/// violated class bounds raise invalid_argument naming the bound.
ContinuityRecord continuity_probe(const RadialDensity& rho,
                                  const RadialDensity& sigma,
                                  const ClassParams& cls,
                                  const FunctionalOptions& opt = {});

}  // namespace gns

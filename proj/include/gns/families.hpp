#pragma once

#include <map>
#include <string>

#include "gns/radial.hpp"

namespace gns {

/// Parameters of the closed-form optimizer families:
///   v_{lambda,x0}(x) = (1 + lambda^2 |x-x0|^2)^{-1/2}      (GNS optimizers)
///   sigma_{kappa,M}(x) = (M/pi) kappa / (kappa + |x|^2)^2  (Log-HLS / steady)
/// By rotational symmetry only |x0| matters.
struct OptimizerParams {
  double lambda = 1.0;
  double kappa = 1.0;
  double mass = 1.0;
  double center_offset = 0.0;
};

enum class Family { v, sigma, g4d };

/// Pointwise family value at radius r; for center_offset > 0 the value is
/// angularly averaged over 64 nodes (the mean used by the L1 fitter).
double eval_family(Family which, const OptimizerParams& params, double r);

/// sigma_{kappa,M} sampled on a grid. With cell_average the exact per-cell
/// mass (M r^2/(kappa+r^2) differenced at consecutive edges) is used, so
/// prefix sums reproduce the analytic cumulative mass at every edge.
RadialDensity sample_sigma(const GridPtr& grid, double kappa, double mass,
                           bool cell_average = false);

/// Profile v_lambda sampled at cell centers.
RadialDensity sample_v(const GridPtr& grid, double lambda);

/// Uniform disk of given radius and total mass; cell_average splits the
/// boundary cell by its exact covered r dr fraction.
RadialDensity uniform_disk(const GridPtr& grid, double radius, double mass,
                           bool cell_average = true);

struct ReferenceConstant {
  std::string expression;
  double value;
};

/// Analytic anchors: ||v||_6^6 = pi/2, ||v||_4^4 = pi, ||grad v||_2^2 = pi/2,
/// ||g||_4^4 = pi^2/6, mass(sigma_{kappa,M}) = M, C(M) = M(1+log pi - log M)
/// evaluated at M = 8 pi.
std::map<std::string, ReferenceConstant> reference_constants();

/// C(M) = M (1 + log pi - log M), the sharp Log-HLS constant.
double log_hls_minimum(double mass);

}  // namespace gns

#pragma once

#include "gns/functionals.hpp"
#include "gns/radial.hpp"

namespace gns {

struct BalanceResult {
  RadialDensity profile;      // u~ with int u~^6 = pi/2, sqrt2||grad|| = ||.||_4^2
  double mu = 1.0;            // scale factor applied as mu^{1/3} u(mu r)
  double amplitude = 1.0;     // constant multiple fixing the L6 normalization
  double deficit_scale = 1.0; // amplitude^3: delta_GNS[u~] = deficit_scale * delta_GNS[u]
  int iterations = 0;
  bool converged = false;
};

/// Rescales u to the normalization under which the 4D lift identity holds:
/// mu = (||u||_4^2 / (sqrt2 ||grad u||_2))^{3/2} from the scaling laws
/// ||grad u_mu||^2 = mu^{2/3}||grad u||^2, ||u_mu||_4^4 = mu^{-2/3}||u||_4^4,
/// iterated against the measured norms of the resampled profile.
BalanceResult balance_normalize(const RadialDensity& u,
                                const FunctionalOptions& opt = {});

struct LiftReport {
  double mu_balance = 1.0;
  double gns_side = 0.0;      // delta_GNS[u~]
  double sobolev_side = 0.0;  // sqrt3((1/4pi)sqrt(3/2)||grad f||^2 - ||f||_4^2)
  double residual = 0.0;      // |gns_side - sobolev_side|
  double f_norm4 = 0.0;       // ||f||_4
  double f_norm4_pow4 = 0.0;  // ||f||_4^4 (= pi^2/6 at u = v)
  double correction = 0.0;    // (1/(2 sqrt2))(sqrt2 ||grad u||_2 - ||u||_4^2)^2
  double three_term_residual = 0.0;  // |gns - (sobolev - correction)|
  double excluded_mass = 0.0;
  double balance_defect = 0.0;  // |sqrt2||grad u|| / ||u||_4^2 - 1|
};

/// Both sides of the planar-GNS / 4D-Sobolev deficit identity, computed
/// through the reduced integrals of f(x,y) = 1/(F(y)+|x|^2), F = u^{-2}:
///   ||grad f||_2^2 = (pi/3) int |grad F|^2 F^{-3} + (2pi/3) int F^{-2}
///   ||f||_4^2     = ((pi/3) int F^{-3})^{1/2}
/// The 4D function is never materialized. Cells with u below `floor` are
/// excluded with mass accounting; excluded mass above 1e-6 of the total is a
/// domain error. `require_balance` enforces the balance precondition at 1e-6.
LiftReport lift_identity(const RadialDensity& u,
                         const FunctionalOptions& opt = {},
                         bool require_balance = true, double floor = 1e-12);

}  // namespace gns

#pragma once

#include <vector>

#include "gns/radial.hpp"

namespace gns {

/// Radial quantile function: Q(m) = the radius enclosing mass m.
struct QuantileProfile {
  std::vector<double> mass_levels;  // increasing, in [0, M]
  std::vector<double> radii;        // Q(m), nondecreasing
  double total_mass = 0.0;
};

/// Cumulative mass by prefix quadrature, inverted by monotone interpolation
/// onto a uniform mass-level ladder (n_levels + 1 points including 0 and M).
QuantileProfile radial_quantile(const RadialDensity& rho, int n_levels = 4096);

struct W2Report {
  double w2_sq = 0.0;           // sum over kept ladder cells
  double dropped_cell = 0.0;    // contribution of the dropped last cell
  bool divergent = false;       // quantile gap blowing up toward m = M
  int n_levels = 0;
};

/// Squared 2-Wasserstein distance between radial densities of equal mass via
/// monotone rearrangement: W2^2 = int_0^M (Q_rho - Q_sigma)^2 dm evaluated on
/// the mass ladder. The last ladder cell is dropped (heavy tails make Q blow
/// up at m -> M) and its contribution is reported; persistent growth across
/// the final cells raises the divergence flag.
W2Report w2_radial(const RadialDensity& rho, const RadialDensity& sigma,
                   int n_levels = 4096);

double w2_squared(const RadialDensity& rho, const RadialDensity& sigma,
                  int n_levels = 4096);

struct InterpolationRecord {
  double lhs = 0.0;  // ||sigma0 - sigma1||_2^2
  double rhs = 0.0;
  double slack = 0.0;
  double w2 = 0.0;
  double q = 0.0;
  double k_bound = 0.0;
};

/// Interpolation bound: ||s0-s1||_2^2 <= (||grad s0^{1/4}|| + ||grad s1^{1/4}||)
/// (2^{5/2} + 2^{9/2} K) W2^{(4q-3)/(4q+2)} + 16 M^{(q-1)/q} K^{(q+2)/2q}
/// W2^{(q-1)/(2q+1)}, q > 2, with int sigma^{q+1} <= K verified.
InterpolationRecord interpolation_check(const RadialDensity& sigma0,
                                        const RadialDensity& sigma1, double q,
                                        double k_bound);

}  // namespace gns

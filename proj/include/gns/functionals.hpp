#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gns/radial.hpp"

namespace gns {

/// One planar integral with its error budget. `value` includes the applied
/// power-law tail completion when enabled; the truncated quadrature, the
/// correction, and a correction-uncertainty estimate are kept separate so
/// truncation error is surfaced rather than hidden.
struct Integral {
  double value = 0.0;
  double truncated = 0.0;
  double tail = 0.0;
  double tail_uncertainty = 0.0;
  double quad_error = 0.0;

  double uncertainty() const { return quad_error + tail_uncertainty; }
};

struct FunctionalOptions {
  /// Complete integrals beyond r_max with a fitted power-law tail. The
  /// optimizer families decay like r^-4 and the deficits are differences of
  /// near-cancelling terms, so at r_max = 1e3 the raw truncation error alone
  /// exceeds the 1e-6 scale the deficit identities are checked at.
  bool tail_correct = true;
  double deficit_tol_floor = 1e-9;
};

struct ProfileNorms {
  Integral grad2;  // int |grad u|^2
  Integral p4;     // int u^4
  Integral p6;     // int u^6
};

ProfileNorms profile_norms(const RadialDensity& u,
                           const FunctionalOptions& opt = {});

/// Planar integral of the cell values with the tail completion and error
/// budget of the functional layer (integrate() stays the plain weighted sum).
Integral integral_with_tail(const RadialDensity& f,
                            const FunctionalOptions& opt = {});

struct DeficitReport {
  double value = 0.0;
  double tol = 0.0;
  ProfileNorms norms;
};

/// delta_GNS[u] = ||grad u||_2 ||u||_4^2 - sqrt(pi) ||u||_6^3, nonnegative up
/// to the attached quadrature tolerance, zero on v_{lambda,x0}.
DeficitReport gns_deficit(const RadialDensity& u,
                          const FunctionalOptions& opt = {});

struct LogHlsReport {
  double value = 0.0;     // F[rho]
  double deficit = 0.0;   // F[rho] - M(1 + log pi - log M)
  double entropy = 0.0;   // int rho log rho
  double interaction = 0.0;  // (2/M) double integral of rho rho log|x-y|
  double mass = 0.0;
  double tol = 0.0;
};

/// Log-HLS functional; the radial double integral uses the angular mean
/// value of the log kernel, log max(|x|,|y|), reducing it to prefix sums.
LogHlsReport log_hls(const RadialDensity& rho,
                     const FunctionalOptions& opt = {});

struct FdEntropyReport {
  double value = 0.0;  // truncated integral
  bool divergent = false;
  double log_slope = 0.0;  // fitted growth per log r between R/10 and R
};

/// H_{kappa,M}[sigma] = int |sqrt(sigma)-sqrt(sigma_{kappa,M})|^2 /
/// sqrt(sigma_{kappa,M}) dx on the truncated disk, with a logarithmic-growth
/// divergence flag (scale-mismatched inputs grow like log r_max).
FdEntropyReport fd_entropy(const RadialDensity& sigma, double kappa,
                           double mass);

struct DissipationReport {
  double value = 0.0;       // (1/pi)(||grad u||^2 ||u||_4^4 - pi ||u||_6^6)
  double factorized = 0.0;  // (1/pi)(a+b)(a-b) with a,b the two deficit terms
  double tol = 0.0;
  DeficitReport gns;
};

DissipationReport dissipation(const RadialDensity& sigma,
                              const FunctionalOptions& opt = {});

struct MomentsReport {
  double entropy = 0.0;  // int sigma log sigma, 0 log 0 := 0
  double l1 = 0.0;
  double l_3_2 = 0.0;  // (int sigma^{3/2})^{2/3}
  std::map<double, double> moment;  // p -> int |x|^p sigma
  std::map<double, bool> moment_divergent;
};

/// Moments N_p and entropy of a density; p in [0,2) per the admissible
/// moment range, moments whose fitted tail decay is not integrable are
/// flagged divergent instead of being completed.
MomentsReport moments_entropy(const RadialDensity& sigma,
                              const std::vector<double>& p_list,
                              const FunctionalOptions& opt = {});

/// Sixth-power moments M_p[u] = int |x|^p u^6.
std::map<double, double> moments6(const RadialDensity& u,
                                  const std::vector<double>& p_list,
                                  const FunctionalOptions& opt = {});

/// All scalar functionals of one density in one record.
struct FunctionalReport {
  double grad_u_sq = 0.0;
  double l4_4 = 0.0;
  double l6_6 = 0.0;
  double l1 = 0.0;
  double l_3_2 = 0.0;
  double gns_deficit = 0.0;
  double gns_tol = 0.0;
  double log_hls = 0.0;
  double hls_deficit = 0.0;
  double fd_entropy = 0.0;
  bool fd_entropy_divergent = false;
  double dissipation = 0.0;
  double dissipation_factorized = 0.0;
  double entropy_S = 0.0;
  double kappa = 0.0;
  double mass_param = 0.0;
  std::map<double, double> moment_p;
  std::map<double, double> moment6_p;
  std::map<std::string, double> tail_loss;

  std::string to_json() const;
  static std::string csv_header(const std::vector<double>& p_list);
  std::string to_csv_row(const std::vector<double>& p_list) const;
};

/// Full evaluation; input may be a density or a profile (converted as
/// needed). kappa and mass parametrize H_{kappa,M}.
FunctionalReport evaluate_functionals(const RadialDensity& f, double kappa,
                                      double mass,
                                      const std::vector<double>& p_list = {1.0},
                                      const FunctionalOptions& opt = {});

/// Multiplies u by a constant so that int u^6 = pi/2 (computed, matching the
/// normalization int v^6 = pi/2 of the optimizer).
RadialDensity normalize_sixth(const RadialDensity& u);

/// Multiplies u by a constant so that int u^4 = pi.
RadialDensity normalize_fourth(const RadialDensity& u);

}  // namespace gns

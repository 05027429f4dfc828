#pragma once

#include <string>
#include <vector>

#include "gns/functionals.hpp"
#include "gns/radial.hpp"

namespace gns {

struct FlowControls {
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 1e-3;
  double cfl = 0.4;
  double dt_growth = 1.1;
  bool full_newton = false;   // iterate the lagged sqrt linearization
  int max_picard = 20;
  double picard_tol = 1e-11;
  double lin_monitor_tol = 2e-3;  // per-step linearization residual cap
  double sample_dt = 0.1;         // diagnostics interval before t = 1
  double sample_growth = 1.2;     // geometric stride after t = 1
  bool track_mu = true;           // sigma-family fit in the diagnostics rows
  bool store_states = true;
  double diag_kappa = 1.0;        // kappa of the H_{kappa,M} diagnostics (KS)
};

/// Per-sample diagnostics; column order matches the CSV contract
/// t,mass,F,hls_deficit,H,D,S,N1,l32,mu_fit.
struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  double log_hls = 0.0;
  double hls_deficit = 0.0;
  double fd_entropy = 0.0;
  double dissipation = 0.0;
  double entropy = 0.0;
  double n1 = 0.0;
  double l32 = 0.0;
  double mu_fit = 0.0;
};

struct SchemeMeta {
  long steps_accepted = 0;
  long steps_rejected = 0;
  double dt_min_used = 0.0;
  double dt_max_used = 0.0;
  double truncation_flux = 0.0;  // time-integrated suppressed boundary flux
  double mass_initial = 0.0;
  double mass_final = 0.0;
  bool mass_warning = false;   // off-nominal initial mass
  bool blowup_watch = false;   // supercritical mass watch armed
};

struct FlowTrajectory {
  std::vector<double> times;            // sampled times
  std::vector<RadialDensity> states;    // sampled states (see store_states)
  std::vector<DiagnosticsRow> diagnostics;
  SchemeMeta meta;
  double kappa = 0.0;
  double mass = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

/// Fast diffusion d sigma/dt = div grad sqrt(sigma) + 2 sqrt(pi/(kappa M))
/// div(x sigma), radial conservative finite volumes. The flux is written as
/// (psi_{i+1}-psi_i)/dr + a rbar psi_i psi_{i+1} with psi = sqrt(sigma) and
/// rbar the mean of adjacent centers, which makes the pointwise-sampled
/// steady profile sigma_{kappa,M} an exact discrete fixed point. Diffusion is
/// semi-implicit via the lagged-sqrt linearization, drift explicit under a
/// CFL monitor, zero-flux boundaries with a truncation-flux ledger.
FlowTrajectory fd_evolve(const RadialDensity& sigma0, double kappa, double mass,
                         double t_end, const FlowControls& controls = {});

/// Critical-mass Keller-Segel d rho/dt = div[grad rho + rho m(r)/(2 pi r) x/r],
/// with m(r) the prefix mass (radial reduction of the log-kernel drift).
/// Same semi-implicit machinery; masses away from 8 pi run with a warning
/// flag and a supercritical blow-up watch (time-step collapse is reported).
FlowTrajectory ks_evolve(const RadialDensity& rho0, double t_end,
                         const FlowControls& controls = {});

/// Zero-flux fixed point of the discrete Keller-Segel operator near
/// sigma_{kappa,M}: marched cell by cell (the flux at each edge only needs
/// the mass below it), with the inner value tuned to the target mass.
RadialDensity ks_discrete_steady(const GridPtr& grid, double kappa, double mass);

/// Max-norm residual of the discrete Keller-Segel operator at rho.
double ks_operator_residual(const RadialDensity& rho);

enum class RateModel { power_law, log_decay };

struct RateFit {
  RateModel model = RateModel::power_law;
  double exponent = 0.0;   // power_law: value ~ prefactor (1+t)^exponent
  double prefactor = 0.0;  // log_decay: value ~ prefactor / log(e+t)
  double residual = 0.0;   // RMS on the fitted scale
  double window_lo = 0.0;
  double window_hi = 0.0;
};

RateFit rate_fit(const std::vector<double>& t, const std::vector<double>& value,
                 RateModel model, double window_lo, double window_hi);

struct ScaleSample {
  double t = 0.0;
  double mu = 0.0;
  double distance_l1 = 0.0;
  bool converged = false;
  double log_probe = 0.0;  // (mu - kappa)^2 log(e+t)
};

/// sigma-family fit at every stored state; logs (mu-kappa)^2 log(e+t).
std::vector<ScaleSample> scale_track(const FlowTrajectory& traj);

}  // namespace gns

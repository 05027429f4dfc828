#include "gns/flows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gns/errors.hpp"
#include "gns/families.hpp"
#include "gns/numerics.hpp"
#include "gns/stability.hpp"

namespace gns {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double psi_floor = 1e-150;

struct EdgeGeometry {
  std::vector<double> r_surf;   // cell boundary radius (flux surface)
  std::vector<double> dr;       // center-to-center spacing
  std::vector<double> rbar;     // mean of adjacent centers (drift abscissa)
  std::vector<double> alpha;    // r^2-interpolation weight of the inner cell
  std::vector<double> r_drift;  // r_surf^2 / rbar (Keller-Segel drift radius)
};

EdgeGeometry edge_geometry(const RadialGrid& g) {
  const auto& c = g.centers();
  const auto& e = g.edges();
  const std::size_t n = c.size();
  EdgeGeometry geo;
  geo.r_surf.resize(n - 1);
  geo.dr.resize(n - 1);
  geo.rbar.resize(n - 1);
  geo.alpha.resize(n - 1);
  geo.r_drift.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    geo.r_surf[i] = e[i + 1];
    geo.dr[i] = c[i + 1] - c[i];
    geo.rbar[i] = 0.5 * (c[i] + c[i + 1]);
    geo.alpha[i] = (c[i + 1] * c[i + 1] - e[i + 1] * e[i + 1]) /
                   (c[i + 1] * c[i + 1] - c[i] * c[i]);
    geo.r_drift[i] = e[i + 1] * e[i + 1] / geo.rbar[i];
  }
  return geo;
}

enum class FlowKind { fast_diffusion, keller_segel };

// Explicit drift coefficient and full nonlinear edge flux for either flow.
// Fast diffusion: G = (psi_{i+1}-psi_i)/dr + a rbar psi_i psi_{i+1}.
// Keller-Segel:   G = 2 psi_hat (psi_{i+1}-psi_i)/dr + beta psi_i psi_{i+1},
// psi_hat the r^2-weighted harmonic mean hitting the edge radius, beta =
// m_edge/(2 pi r_drift). Both vanish identically on the steady family.
struct EdgeState {
  std::vector<double> psi;       // sqrt(sigma) at centers
  std::vector<double> diff_co;   // diffusion prefactor at edges (1 or 2 psi_hat)
  std::vector<double> drift;     // explicit drift term at edges
};

EdgeState edge_state(FlowKind kind, const std::vector<double>& sigma,
                     const EdgeGeometry& geo, const std::vector<double>& w,
                     double drift_a) {
  const std::size_t n = sigma.size();
  EdgeState st;
  st.psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    st.psi[i] = std::sqrt(std::max(0.0, sigma[i]));
  }
  st.diff_co.resize(n - 1);
  st.drift.resize(n - 1);
  if (kind == FlowKind::fast_diffusion) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      st.diff_co[i] = 1.0;
      st.drift[i] = drift_a * geo.rbar[i] * st.psi[i] * st.psi[i + 1];
    }
  } else {
    double m_edge = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      m_edge += two_pi * w[i] * sigma[i];
      const double pa = std::max(st.psi[i], psi_floor);
      const double pb = std::max(st.psi[i + 1], psi_floor);
      const double psi_hat =
          1.0 / (geo.alpha[i] / pa + (1.0 - geo.alpha[i]) / pb);
      st.diff_co[i] = 2.0 * psi_hat;
      const double beta = m_edge / (two_pi * geo.r_drift[i]);
      st.drift[i] = beta * st.psi[i] * st.psi[i + 1];
    }
  }
  return st;
}

double nonlinear_flux(const EdgeState& st, const EdgeGeometry& geo,
                      std::size_t e) {
  return st.diff_co[e] * (st.psi[e + 1] - st.psi[e]) / geo.dr[e] + st.drift[e];
}

struct StepResult {
  bool ok = false;
  double lin_residual = 0.0;
  std::vector<double> next;
};

// One semi-implicit step: diffusion via the lagged linearization
// psi^{n+1} ~ sigma^{n+1}/(2 psi) + psi/2, drift explicit.
StepResult implicit_step(FlowKind kind, const std::vector<double>& sigma,
                         const EdgeGeometry& geo, const std::vector<double>& w,
                         double drift_a, double dt, const FlowControls& ctl) {
  const std::size_t n = sigma.size();
  StepResult res;
  std::vector<double> cur = sigma;
  EdgeState st = edge_state(kind, sigma, geo, w, drift_a);
  const int iters = ctl.full_newton ? ctl.max_picard : 1;
  std::vector<double> lower(n), diag(n), upper(n), rhs(n);
  for (int it = 0; it < iters; ++it) {
    if (it > 0) st = edge_state(kind, cur, geo, w, drift_a);
    for (std::size_t i = 0; i < n; ++i) {
      lower[i] = upper[i] = 0.0;
      diag[i] = w[i] / dt;
      rhs[i] = w[i] / dt * sigma[i];
    }
    for (std::size_t e = 0; e + 1 < n; ++e) {
      const double pa = std::max(st.psi[e], psi_floor);
      const double pb = std::max(st.psi[e + 1], psi_floor);
      const double k = geo.r_surf[e] * st.diff_co[e] / geo.dr[e];
      // Explicit residual of the linearization plus the drift.
      const double expl = geo.r_surf[e] *
          (st.diff_co[e] * 0.5 * (st.psi[e + 1] - st.psi[e]) / geo.dr[e] +
           st.drift[e]);
      // Cell e gains through its right edge, cell e+1 loses through its left.
      diag[e] += k / (2.0 * pa);
      upper[e] -= k / (2.0 * pb);
      rhs[e] += expl;
      diag[e + 1] += k / (2.0 * pb);
      lower[e + 1] -= k / (2.0 * pa);
      rhs[e + 1] -= expl;
    }
    std::vector<double> lo = lower, di = diag, up = upper, rh = rhs;
    solve_tridiagonal(lo, di, up, rh);
    double move = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(rh[i]) || rh[i] < 0.0) return res;
      move = std::max(move, std::abs(rh[i] - cur[i]));
      scale = std::max(scale, rh[i]);
    }
    cur = rh;
    if (ctl.full_newton && move <= ctl.picard_tol * std::max(scale, 1e-300)) {
      break;
    }
  }
  // Linearization residual: compare the implicit update against the true
  // nonlinear flux divergence at the new state (old-state drift, as stepped).
  const EdgeState st_new = edge_state(kind, cur, geo, w, drift_a);
  double resid = 0.0, scale = 1e-300;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, cur[i]);
  for (std::size_t i = 0; i < n; ++i) {
    double div = 0.0;
    if (i + 1 < n) {
      div += geo.r_surf[i] *
             (st_new.diff_co[i] * (st_new.psi[i + 1] - st_new.psi[i]) / geo.dr[i] +
              st.drift[i]);
    }
    if (i > 0) {
      div -= geo.r_surf[i - 1] *
             (st_new.diff_co[i - 1] * (st_new.psi[i] - st_new.psi[i - 1]) /
                  geo.dr[i - 1] +
              st.drift[i - 1]);
    }
    const double r = (cur[i] - sigma[i]) - dt / w[i] * div;
    resid = std::max(resid, std::abs(r));
  }
  res.lin_residual = resid / scale;
  res.ok = res.lin_residual <= ctl.lin_monitor_tol;
  res.next = std::move(cur);
  return res;
}

DiagnosticsRow diagnostics_row(const RadialDensity& state, double t,
                               double kappa, double mass, bool track_mu) {
  DiagnosticsRow row;
  row.t = t;
  row.mass = integrate(state);
  const LogHlsReport f = log_hls(state);
  row.log_hls = f.value;
  row.hls_deficit = f.deficit;
  row.fd_entropy = fd_entropy(state, kappa, mass).value;
  row.dissipation = dissipation(state).value;
  const MomentsReport m = moments_entropy(state, {1.0});
  row.entropy = m.entropy;
  row.n1 = m.moment.at(1.0);
  row.l32 = m.l_3_2;
  if (track_mu) {
    const StabilityProbe p = hls_fit(state);
    row.mu_fit = p.fit.lambda_star;
  } else {
    row.mu_fit = 0.0;
  }
  return row;
}

FlowTrajectory evolve(FlowKind kind, const RadialDensity& initial, double kappa,
                      double mass, double t_end, const FlowControls& ctl) {
  if (initial.kind != Kind::density) {
    throw std::invalid_argument("evolve: initial state must be a density");
  }
  if (!(t_end > 0.0)) throw std::invalid_argument("evolve: t_end must be positive");
  const GridPtr grid = initial.grid;
  const EdgeGeometry geo = edge_geometry(*grid);
  const auto& w = grid->weights();
  const std::size_t n = initial.values.size();

  FlowTrajectory traj;
  traj.kappa = kappa;
  traj.mass = mass;
  traj.meta.mass_initial = integrate(initial);
  traj.meta.dt_min_used = t_end;

  const double drift_a =
      (kind == FlowKind::fast_diffusion) ? 2.0 * std::sqrt(pi / (kappa * mass)) : 0.0;

  if (kind == FlowKind::fast_diffusion) {
    // Allow for the analytic tail mass beyond the truncated disk.
    const double r = grid->r_max();
    const double tail = mass * kappa / (kappa + r * r);
    if (std::abs(traj.meta.mass_initial - mass) > 1e-6 * mass + 2.0 * tail) {
      throw std::invalid_argument("fd_evolve: initial mass differs from M");
    }
  } else {
    // Truncation removes the analytic r^-4 tail mass (~ kappa/r_max^2
    // relative), so the critical-mass check allows for it.
    const double critical = 8.0 * pi;
    const double r = grid->r_max();
    const double tail_allowance =
        2.0 * ctl.diag_kappa / (ctl.diag_kappa + r * r);
    const double tol = critical * (1e-6 + tail_allowance);
    if (std::abs(traj.meta.mass_initial - critical) > tol) {
      traj.meta.mass_warning = true;
      if (traj.meta.mass_initial > critical + tol) {
        traj.meta.blowup_watch = true;
      }
    }
  }

  // Static CFL bound for the fast-diffusion drift (velocity a r).
  double dt_cfl_static = t_end;
  if (kind == FlowKind::fast_diffusion) {
    for (std::size_t e = 0; e + 1 < n; ++e) {
      dt_cfl_static =
          std::min(dt_cfl_static, ctl.cfl * geo.dr[e] / (drift_a * geo.rbar[e]));
    }
  }

  std::vector<double> state = initial.values;
  double t = 0.0;
  double dt = std::min(ctl.dt_init, ctl.dt_max);
  double next_sample = 0.0;

  auto sample = [&](double at) {
    RadialDensity s(grid, state, Kind::density);
    traj.times.push_back(at);
    traj.diagnostics.push_back(
        diagnostics_row(s, at, kind == FlowKind::fast_diffusion ? kappa : ctl.diag_kappa,
                        kind == FlowKind::fast_diffusion ? mass : traj.meta.mass_initial,
                        ctl.track_mu));
    if (ctl.store_states) traj.states.push_back(std::move(s));
  };
  sample(0.0);
  next_sample = ctl.sample_dt;

  while (t < t_end - 1e-15 * t_end) {
    double dt_try = std::min({dt, ctl.dt_max, t_end - t, dt_cfl_static});
    if (kind == FlowKind::keller_segel) {
      // Drift speed ~ m/(2 pi r); recompute the CFL bound from the state.
      double m_edge = 0.0;
      for (std::size_t e = 0; e + 1 < n; ++e) {
        m_edge += two_pi * w[e] * state[e];
        const double speed = m_edge / (two_pi * geo.r_drift[e]);
        if (speed > 0.0) {
          dt_try = std::min(dt_try, ctl.cfl * geo.dr[e] / speed);
        }
      }
    }
    bool accepted = false;
    while (!accepted) {
      const StepResult r =
          implicit_step(kind, state, geo, w, drift_a, dt_try, ctl);
      if (r.ok) {
        state = r.next;
        t += dt_try;
        accepted = true;
        ++traj.meta.steps_accepted;
        traj.meta.dt_min_used = std::min(traj.meta.dt_min_used, dt_try);
        traj.meta.dt_max_used = std::max(traj.meta.dt_max_used, dt_try);
        // Suppressed outer-boundary flux (drift component) ledger.
        const double psi_last = std::sqrt(std::max(0.0, state[n - 1]));
        const double g_free =
            (kind == FlowKind::fast_diffusion)
                ? drift_a * grid->r_max() * psi_last * psi_last
                : traj.meta.mass_initial / (two_pi * grid->r_max()) * psi_last * psi_last;
        traj.meta.truncation_flux += dt_try * two_pi * grid->r_max() * std::abs(g_free);
      } else {
        ++traj.meta.steps_rejected;
        dt_try *= 0.5;
        if (dt_try < ctl.dt_min) {
          traj.aborted = true;
          traj.abort_reason = traj.meta.blowup_watch
                                  ? "time-step collapse (blow-up watch)"
                                  : "time-step underflow below dt_min";
          sample(t);
          traj.meta.mass_final = integrate(RadialDensity(grid, state, Kind::density));
          return traj;
        }
      }
    }
    dt = dt_try * ctl.dt_growth;
    if (t >= next_sample - 1e-12 || t >= t_end - 1e-15 * t_end) {
      sample(t);
      if (ctl.sample_dt <= 0.0) {
        next_sample = 0.0;  // every accepted step
      } else if (t < 1.0) {
        next_sample += ctl.sample_dt;
        if (next_sample <= t) next_sample = t + ctl.sample_dt;
      } else {
        // Geometric stride: rate fits want log-uniform coverage.
        next_sample = std::max(t, 1.0) * ctl.sample_growth;
      }
    }
  }
  traj.meta.mass_final = integrate(RadialDensity(grid, state, Kind::density));
  return traj;
}
}  // namespace

FlowTrajectory fd_evolve(const RadialDensity& sigma0, double kappa, double mass,
                         double t_end, const FlowControls& controls) {
  if (!(kappa > 0.0) || !(mass > 0.0)) {
    throw std::invalid_argument("fd_evolve: kappa and mass must be positive");
  }
  return evolve(FlowKind::fast_diffusion, sigma0, kappa, mass, t_end, controls);
}

FlowTrajectory ks_evolve(const RadialDensity& rho0, double t_end,
                         const FlowControls& controls) {
  return evolve(FlowKind::keller_segel, rho0, controls.diag_kappa,
                8.0 * pi, t_end, controls);
}

double ks_operator_residual(const RadialDensity& rho) {
  const EdgeGeometry geo = edge_geometry(*rho.grid);
  const auto& w = rho.grid->weights();
  const EdgeState st =
      edge_state(FlowKind::keller_segel, rho.values, geo, w, 0.0);
  const std::size_t n = rho.values.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double div = 0.0;
    if (i + 1 < n) div += geo.r_surf[i] * nonlinear_flux(st, geo, i);
    if (i > 0) div -= geo.r_surf[i - 1] * nonlinear_flux(st, geo, i - 1);
    worst = std::max(worst, std::abs(div / w[i]));
  }
  return worst;
}

RadialDensity ks_discrete_steady(const GridPtr& grid, double kappa,
                                 double mass) {
  if (!(kappa > 0.0) || !(mass > 0.0)) {
    throw std::invalid_argument("ks_discrete_steady: kappa and mass positive");
  }
  const EdgeGeometry geo = edge_geometry(*grid);
  const auto& w = grid->weights();
  const auto& c = grid->centers();
  const std::size_t n = c.size();

  // Zero the flux edge by edge: the flux at edge e only involves the mass
  // below it, so the profile marches outward from the analytic center value.
  // (The zero-flux family's total mass is nearly independent of the center
  // value on a truncated disk, so the center value is the right selector.)
  std::vector<double> rho(n, 0.0);
  const double d0 = kappa + c[0] * c[0];
  rho[0] = (mass / pi) * kappa / (d0 * d0);
  double m_edge = 0.0;
  for (std::size_t e = 0; e + 1 < n; ++e) {
    m_edge += two_pi * w[e] * rho[e];
    const double beta = m_edge / (two_pi * geo.r_drift[e]);
    const double k = 1.0 / std::sqrt(rho[e]);
    const double a = geo.alpha[e];
    const double denom = 2.0 - beta * geo.dr[e] * (1.0 - a);
    if (!(denom > 0.0)) {
      throw numerical_error("ks_discrete_steady: march lost positivity");
    }
    const double x = k * (2.0 + beta * geo.dr[e] * a) / denom;
    rho[e + 1] = 1.0 / (x * x);
  }
  return RadialDensity(grid, std::move(rho), Kind::density);
}

RateFit rate_fit(const std::vector<double>& t, const std::vector<double>& value,
                 RateModel model, double window_lo, double window_hi) {
  if (t.size() != value.size()) {
    throw structural_error("rate_fit: series length mismatch");
  }
  std::vector<double> xs, ys;
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window_lo || t[i] > window_hi) continue;
    if (model == RateModel::power_law) {
      if (!(value[i] > 0.0)) {
        bad.push_back(i);
        continue;
      }
      xs.push_back(std::log1p(t[i]));
      ys.push_back(std::log(value[i]));
    } else {
      xs.push_back(t[i]);
      ys.push_back(value[i] * std::log(std::numbers::e + t[i]));
    }
  }
  if (model == RateModel::power_law && !bad.empty()) {
    std::ostringstream os;
    os << "rate_fit: nonpositive values in power_law window at indices";
    for (std::size_t i : bad) os << ' ' << i;
    throw std::invalid_argument(os.str());
  }
  if (xs.size() < 10) {
    throw std::invalid_argument("rate_fit: need >= 10 points in window");
  }
  RateFit out;
  out.model = model;
  out.window_lo = window_lo;
  out.window_hi = window_hi;
  if (model == RateModel::power_law) {
    const LineFit f = fit_line(xs, ys);
    out.exponent = f.slope;
    out.prefactor = std::exp(f.intercept);
    out.residual = f.rms_residual;
  } else {
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= ys.size();
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    out.prefactor = mean;
    out.residual = std::sqrt(ss / ys.size());
  }
  return out;
}

std::vector<ScaleSample> scale_track(const FlowTrajectory& traj) {
  std::vector<ScaleSample> out;
  out.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    ScaleSample s;
    s.t = traj.times[i];
    try {
      const StabilityProbe p = hls_fit(traj.states[i]);
      s.mu = p.fit.lambda_star;
      s.distance_l1 = p.distance_l1;
      s.converged = p.fit.converged;
    } catch (const std::exception&) {
      s.converged = false;
    }
    const double d = s.mu - traj.kappa;
    s.log_probe = d * d * std::log(std::numbers::e + s.t);
    out.push_back(s);
  }
  return out;
}

}  // namespace gns

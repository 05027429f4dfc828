#include "gns/sobolev_lift.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gns/errors.hpp"
#include "gns/numerics.hpp"

namespace gns {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;

double balance_ratio(const ProfileNorms& n) {
  // ||u||_4^2 / (sqrt2 ||grad u||_2); equals 1 when balanced.
  return std::sqrt(n.p4.value) / (std::sqrt(2.0) * std::sqrt(n.grad2.value));
}
}  // namespace

BalanceResult balance_normalize(const RadialDensity& u,
                                const FunctionalOptions& opt) {
  if (u.kind != Kind::profile) {
    throw std::invalid_argument("balance_normalize: expected a profile");
  }
  double peak = 0.0;
  for (double x : u.values) peak = std::max(peak, x);
  if (peak <= 0.0) {
    throw std::invalid_argument("balance_normalize: u is identically zero");
  }
  if (grad_sq(u) <= 1e-30 * peak * peak) {
    throw std::invalid_argument("balance_normalize: constant profile cannot be balanced");
  }

  const auto& c = u.grid->centers();
  std::vector<double> x2(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) x2[i] = c[i] * c[i];
  const MonotoneCubic interp(std::move(x2), u.values);

  // The L6 normalization must be applied before (or together with) the
  // mu-rescaling: the rescaling preserves int u^6 but a constant multiple
  // changes the balance ratio, so each iterate is renormalized first.
  BalanceResult out;
  out.mu = 1.0;
  RadialDensity cur = normalize_sixth(u);
  {
    const ProfileNorms n0 = profile_norms(u, opt);
    out.amplitude = std::pow(pi / 2.0 / n0.p6.value, 1.0 / 6.0);
    out.deficit_scale = std::pow(out.amplitude, 3);
  }
  for (out.iterations = 0; out.iterations < 32; ++out.iterations) {
    const ProfileNorms n = profile_norms(cur, opt);
    const double ratio = balance_ratio(n);
    if (std::abs(ratio - 1.0) < 1e-13) {
      out.converged = true;
      break;
    }
    out.mu *= std::pow(ratio, 1.5);
    std::vector<double> v(c.size());
    const double amp = std::cbrt(out.mu);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double rq = out.mu * c[i];
      v[i] = std::max(0.0, amp * interp(rq * rq));
    }
    cur = normalize_sixth(RadialDensity(u.grid, std::move(v), Kind::profile));
  }
  // Exact final L6 normalization against the measured (tail-completed) norm.
  const ProfileNorms n = profile_norms(cur, opt);
  const double fix = std::pow(pi / 2.0 / n.p6.value, 1.0 / 6.0);
  std::vector<double> v = cur.values;
  for (double& x : v) x *= fix;
  out.profile = RadialDensity(u.grid, std::move(v), Kind::profile);
  if (!out.converged) {
    const double ratio = balance_ratio(profile_norms(out.profile, opt));
    out.converged = std::abs(ratio - 1.0) < 1e-10;
  }
  return out;
}

LiftReport lift_identity(const RadialDensity& u, const FunctionalOptions& opt,
                         bool require_balance, double floor) {
  if (u.kind != Kind::profile) {
    throw std::invalid_argument("lift_identity: expected a profile");
  }
  const auto& centers = u.grid->centers();
  const std::size_t n = u.values.size();

  // Exclude cells where F = u^{-2} would overflow; the lift integrands
  // weight them by u^4 and u^6 so exclusion is benign, but it is accounted.
  std::vector<double> rc, F;
  rc.reserve(n);
  F.reserve(n);
  double excluded = 0.0, total_mass = 0.0;
  const auto& w = u.grid->weights();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u.values[i];
    const double m = two_pi * w[i] * x * x * x * x;
    total_mass += m;
    if (x < floor) {
      excluded += m;
      continue;
    }
    rc.push_back(centers[i]);
    F.push_back(1.0 / (x * x));
  }
  if (total_mass > 0.0 && excluded > 1e-6 * total_mass) {
    throw std::domain_error("lift_identity: excluded mass exceeds 1e-6 of total");
  }
  if (rc.size() < 8) {
    throw std::invalid_argument("lift_identity: too few usable cells");
  }

  LiftReport out;
  out.excluded_mass = excluded;

  const ProfileNorms norms = profile_norms(u, opt);
  const double P = norms.grad2.value;
  const double Q = norms.p4.value;
  const double R6 = norms.p6.value;
  out.gns_side = std::sqrt(P * Q) - std::sqrt(pi * R6);
  out.balance_defect = std::abs(std::sqrt(2.0 * P) / std::sqrt(Q) - 1.0);
  if (require_balance && out.balance_defect > 1e-6) {
    throw std::invalid_argument(
        "lift_identity: balance condition sqrt2||grad u|| = ||u||_4^2 violated");
  }
  out.mu_balance = 1.0;

  // int |grad F|^2 F^{-3}, Richardson-extrapolated like the Dirichlet term
  // of the deficit so both sides carry matching discretizations.
  auto interior = [&](std::size_t step) {
    double s = 0.0;
    std::size_t i = 0;
    while (i + 1 < rc.size()) {
      const std::size_t j = std::min(i + step, rc.size() - 1);
      const double slope = (F[j] - F[i]) / (rc[j] - rc[i]);
      const double fmid = std::sqrt(F[i] * F[j]);  // geometric mean
      s += slope * slope / (fmid * fmid * fmid) * 0.5 *
           (rc[j] * rc[j] - rc[i] * rc[i]);
      i = j;
    }
    return s;
  };
  const double a1 = interior(1), a2 = interior(2);
  double grad_f_core = a1 + (a1 - a2) / 3.0;
  // Tail completion of the |grad F|^2 F^{-3} = 4 |grad u|^2 integrand: reuse
  // the gradient tail already fitted inside profile_norms.
  grad_f_core += 4.0 * norms.grad2.tail / two_pi;

  const double l1 = two_pi * grad_f_core;        // int |grad F|^2 F^{-3}
  const double l2 = Q;                           // int F^{-2} = int u^4
  const double l3 = R6;                          // int F^{-3} = int u^6
  const double grad_f_sq = (pi / 3.0) * l1 + (2.0 * pi / 3.0) * l2;
  const double f4_sq = std::sqrt((pi / 3.0) * l3);

  out.sobolev_side =
      std::sqrt(3.0) * ((1.0 / (4.0 * pi)) * std::sqrt(1.5) * grad_f_sq - f4_sq);
  out.f_norm4 = std::sqrt(f4_sq);
  out.f_norm4_pow4 = (pi / 3.0) * l3;
  out.residual = std::abs(out.gns_side - out.sobolev_side);

  const double balance_gap = std::sqrt(2.0 * P) - std::sqrt(Q);  // sqrt2||grad|| - ||u||_4^2
  out.correction = balance_gap * balance_gap / (2.0 * std::sqrt(2.0));
  out.three_term_residual =
      std::abs(out.gns_side - (out.sobolev_side - out.correction));
  if (!std::isfinite(out.sobolev_side) || !std::isfinite(out.gns_side)) {
    throw numerical_error("lift_identity: non-finite side");
  }
  return out;
}

}  // namespace gns

#include "gns/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gns/errors.hpp"
#include "gns/numerics.hpp"

namespace gns {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

// Strictly increasing (mass, radius) nodes from the prefix mass at edges;
// plateaus (empty cells) are compressed so the inverse stays a function.
MonotoneCubic quantile_interp(const RadialDensity& rho, double* total) {
  const std::vector<double> pm = prefix_mass(rho);
  const auto& edges = rho.grid->edges();
  std::vector<double> m, r;
  m.reserve(pm.size());
  r.reserve(pm.size());
  m.push_back(0.0);
  r.push_back(0.0);
  for (std::size_t i = 1; i < pm.size(); ++i) {
    if (pm[i] > m.back()) {
      m.push_back(pm[i]);
      r.push_back(edges[i]);
    }
  }
  *total = pm.back();
  if (m.size() < 2) throw std::invalid_argument("radial_quantile: zero mass");
  return MonotoneCubic(std::move(m), std::move(r));
}
}  // namespace

QuantileProfile radial_quantile(const RadialDensity& rho, int n_levels) {
  if (n_levels < 2) throw std::invalid_argument("radial_quantile: n_levels >= 2");
  QuantileProfile out;
  const MonotoneCubic q = quantile_interp(rho, &out.total_mass);
  if (!(out.total_mass > 0.0)) {
    throw std::invalid_argument("radial_quantile: zero mass");
  }
  out.mass_levels.resize(n_levels + 1);
  out.radii.resize(n_levels + 1);
  for (int j = 0; j <= n_levels; ++j) {
    const double m = out.total_mass * j / n_levels;
    out.mass_levels[j] = m;
    out.radii[j] = std::max(0.0, q(m));
  }
  // Monotone interpolation can leave roundoff dimples; enforce Q nondecreasing.
  for (int j = 1; j <= n_levels; ++j) {
    out.radii[j] = std::max(out.radii[j], out.radii[j - 1]);
  }
  return out;
}

W2Report w2_radial(const RadialDensity& rho, const RadialDensity& sigma,
                   int n_levels) {
  double m_rho = 0.0, m_sigma = 0.0;
  const MonotoneCubic q_rho = quantile_interp(rho, &m_rho);
  const MonotoneCubic q_sigma = quantile_interp(sigma, &m_sigma);
  if (std::abs(m_rho - m_sigma) > 1e-6 * std::max(m_rho, m_sigma)) {
    throw std::invalid_argument("w2_radial: mass mismatch (" +
                                format_double(m_rho) + " vs " +
                                format_double(m_sigma) + ")");
  }
  const double mass = 0.5 * (m_rho + m_sigma);
  const double dm = mass / n_levels;
  W2Report out;
  out.n_levels = n_levels;
  std::vector<double> cell(n_levels);
  for (int k = 0; k < n_levels; ++k) {
    const double m = (k + 0.5) * dm;
    const double d = q_rho(m) - q_sigma(m);
    cell[k] = d * d * dm;
  }
  for (int k = 0; k + 1 < n_levels; ++k) out.w2_sq += cell[k];
  out.dropped_cell = cell[n_levels - 1];

  // Divergence near m = M: integrand strictly growing over the final cells
  // and far above the bulk scale.
  const int tail_cells = 8;
  if (n_levels > 4 * tail_cells) {
    bool growing = true;
    for (int k = n_levels - tail_cells; k + 1 < n_levels; ++k) {
      if (cell[k + 1] <= cell[k]) {
        growing = false;
        break;
      }
    }
    std::vector<double> sorted(cell.begin(), cell.end() - 1);
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double median = sorted[sorted.size() / 2];
    out.divergent = growing && cell[n_levels - 2] > 100.0 * (median + 1e-300);
  }
  return out;
}

double w2_squared(const RadialDensity& rho, const RadialDensity& sigma,
                  int n_levels) {
  return w2_radial(rho, sigma, n_levels).w2_sq;
}

InterpolationRecord interpolation_check(const RadialDensity& sigma0,
                                        const RadialDensity& sigma1, double q,
                                        double k_bound) {
  if (!(q > 2.0)) throw std::invalid_argument("interpolation_check: q must be > 2");
  auto lqq = [&](const RadialDensity& s) {
    std::vector<double> f(s.values.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = std::pow(s.values[i], q + 1.0);
    }
    return integrate(RadialDensity(s.grid, std::move(f), Kind::density));
  };
  for (const auto* s : {&sigma0, &sigma1}) {
    const double v = lqq(*s);
    if (v > k_bound * (1.0 + 1e-12)) {
      throw std::invalid_argument(
          "interpolation_check: ||sigma||_{q+1}^{q+1} = " + format_double(v) +
          " exceeds K = " + format_double(k_bound));
    }
  }
  InterpolationRecord rec;
  rec.q = q;
  rec.k_bound = k_bound;

  const auto& w = sigma0.grid->weights();
  double l2 = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < sigma0.values.size(); ++i) {
    const double d = sigma0.values[i] - sigma1.values[i];
    l2 += w[i] * d * d;
    mass += w[i] * sigma0.values[i];
  }
  rec.lhs = two_pi * l2;
  mass *= two_pi;

  rec.w2 = std::sqrt(std::max(0.0, w2_radial(sigma0, sigma1).w2_sq));
  const double g0 = std::sqrt(grad_sq(profile_of(sigma0)));
  const double g1 = std::sqrt(grad_sq(profile_of(sigma1)));
  const double t1 = (g0 + g1) * (std::pow(2.0, 2.5) + std::pow(2.0, 4.5) * k_bound) *
                    std::pow(rec.w2, (4.0 * q - 3.0) / (4.0 * q + 2.0));
  const double t2 = 16.0 * std::pow(mass, (q - 1.0) / q) *
                    std::pow(k_bound, (q + 2.0) / (2.0 * q)) *
                    std::pow(rec.w2, (q - 1.0) / (2.0 * q + 1.0));
  rec.rhs = t1 + t2;
  rec.slack = rec.rhs - rec.lhs;
  return rec;
}

}  // namespace gns

#pragma once

// Test-only oracles, independent of the radial-grid quadrature path they
// check: composite-Simpson planar integrals of analytic integrands, and a
// brute-force tensor quadrature of the logarithmic interaction energy that
// averages the kernel over angles numerically instead of using the
// log max(|x|,|y|) identity.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Simpson integral of 2*pi*r*f(r) over [0, r_max].
inline double planar_integral(const std::function<double(double)>& f,
                              double r_max, int n = 200000) {
  if (n % 2) ++n;
  const double h = r_max / n;
  auto g = [&](double r) { return 2.0 * pi * r * f(r); };
  double s = g(0.0) + g(r_max);
  for (int i = 1; i < n; ++i) s += g(i * h) * ((i % 2) ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Planar integral over the whole plane: Simpson on [0, r_split] plus a
/// log-substituted Simpson on [r_split, r_far] for the decaying far field.
inline double planar_integral_full(const std::function<double(double)>& f,
                                   double r_split = 50.0, double r_far = 1e8,
                                   int n_core = 400000, int n_far = 40000) {
  double total = planar_integral(f, r_split, n_core);
  if (n_far % 2) ++n_far;
  const double a = std::log(r_split), b = std::log(r_far);
  const double h = (b - a) / n_far;
  auto g = [&](double s) {
    const double r = std::exp(s);
    return 2.0 * pi * r * r * f(r);  // extra r from dr = r ds
  };
  double acc = g(a) + g(b);
  for (int i = 1; i < n_far; ++i) acc += g(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  total += acc * h / 3.0;
  return total;
}

/// Brute-force interaction energy int int rho(x) log|x-y| rho(y) dx dy for a
/// radial density given as an analytic callable, by tensor quadrature in
/// (r, s) with numeric angular averaging of the kernel.
inline double interaction_energy_2d(const std::function<double(double)>& rho,
                                    double r_max, int n_r = 400,
                                    int n_theta = 512) {
  std::vector<double> r(n_r), m(n_r);
  const double h = r_max / n_r;
  for (int i = 0; i < n_r; ++i) {
    r[i] = (i + 0.5) * h;
    m[i] = 2.0 * pi * r[i] * rho(r[i]) * h;  // ring mass
  }
  std::vector<double> cos_t(n_theta);
  for (int k = 0; k < n_theta; ++k) {
    cos_t[k] = std::cos(2.0 * pi * (k + 0.5) / n_theta);
  }
  double total = 0.0;
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j < n_r; ++j) {
      double avg = 0.0;
      for (int k = 0; k < n_theta; ++k) {
        const double d2 = r[i] * r[i] + r[j] * r[j] - 2.0 * r[i] * r[j] * cos_t[k];
        avg += 0.5 * std::log(std::max(d2, 1e-300));
      }
      total += m[i] * m[j] * avg / n_theta;
    }
  }
  return total;
}

/// v_lambda and sigma_{kappa,M} closed forms for building analytic integrands.
inline double v_profile(double lambda, double r) {
  return 1.0 / std::sqrt(1.0 + lambda * lambda * r * r);
}
inline double sigma_family(double kappa, double mass, double r) {
  const double d = kappa + r * r;
  return (mass / pi) * kappa / (d * d);
}

}  // namespace oracle

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gns {

/// Monotone cubic (Fritsch-Carlson) interpolant on strictly increasing nodes.
/// Out-of-range queries: linear continuation through the first two nodes on
/// the left (radial callers pass r^2 abscissae, making this the even radial
/// extension); on the right a power-law continuation of the last two nodes
/// when both values are positive and decreasing, zero otherwise.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double xq) const;

 private:
  std::vector<double> x_, y_, m_;  // nodes, values, node slopes
  double tail_exponent_ = 0.0;     // right continuation y ~ c * x^{-p}
  double tail_coef_ = 0.0;
  bool tail_power_ = false;
};

/// Solves a tridiagonal system in place (Thomas algorithm).
/// lower[0] and upper[n-1] are ignored.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs);

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Brent minimization on [lo, hi] to absolute tolerance tol in x.
ScalarMinimum minimize_brent(const std::function<double(double)>& f, double lo,
                             double hi, double tol, int max_iter = 200);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::size_t n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Stable 64-bit FNV-1a hash of a byte string (used for config manifests).
std::uint64_t fnv1a64(const std::string& bytes);

/// Shortest round-trip decimal formatting of a double ("%.17g" trimmed).
std::string format_double(double v);

}  // namespace gns

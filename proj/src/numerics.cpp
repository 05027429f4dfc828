#include "gns/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gns/errors.hpp"

namespace gns {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw structural_error("MonotoneCubic: need >= 2 nodes, matching sizes");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw structural_error("MonotoneCubic: nodes must be strictly increasing");
    }
  }
  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  }
  // Slopes from the 5-point Lagrange derivative, limited into the monotone
  // region (Hyman): near-quartic accuracy on smooth data, shape preserving
  // where the limiter engages. The interpolant stays a monotone cubic.
  m_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = (i >= 2) ? i - 2 : 0;
    if (lo + 4 >= n) lo = (n >= 5) ? n - 5 : 0;
    const std::size_t hi = std::min(n - 1, lo + 4);
    double slope = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j == i) {
        double s = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) {
          if (k != i) s += 1.0 / (x_[i] - x_[k]);
        }
        slope += y_[j] * s;
      } else {
        double num = 1.0, den = 1.0;
        for (std::size_t k = lo; k <= hi; ++k) {
          if (k != j && k != i) num *= (x_[i] - x_[k]);
          if (k != j) den *= (x_[j] - x_[k]);
        }
        slope += y_[j] * num / den;
      }
    }
    const double d_lo = (i == 0) ? d[0] : d[i - 1];
    const double d_hi = (i == n - 1) ? d[n - 2] : d[i];
    if (i > 0 && i + 1 < n && d_lo * d_hi <= 0.0) {
      m_[i] = 0.0;
    } else if (slope * (d_lo + d_hi) <= 0.0) {
      m_[i] = 0.0;
    } else {
      const double cap = 3.0 * std::min(std::abs(d_lo), std::abs(d_hi));
      m_[i] = (slope > 0 ? 1.0 : -1.0) * std::min(std::abs(slope), cap);
    }
  }
  // Right power-law continuation from the last two nodes.
  if (y_[n - 1] > 0.0 && y_[n - 2] > y_[n - 1] && x_[n - 2] > 0.0) {
    tail_exponent_ = std::log(y_[n - 2] / y_[n - 1]) /
                     std::log(x_[n - 1] / x_[n - 2]);
    tail_coef_ = y_[n - 1] * std::pow(x_[n - 1], tail_exponent_);
    tail_power_ = true;
  }
}

double MonotoneCubic::operator()(double xq) const {
  const std::size_t n = x_.size();
  if (xq <= x_[0]) {
    // Linear continuation through the first two nodes (radial callers pass
    // r^2 abscissae, making this the even extension).
    const double t = (xq - x_[0]) / (x_[1] - x_[0]);
    return y_[0] + t * (y_[1] - y_[0]);
  }
  if (xq >= x_[n - 1]) {
    if (xq == x_[n - 1]) return y_[n - 1];
    if (tail_power_) return tail_coef_ * std::pow(xq, -tail_exponent_);
    return 0.0;
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw structural_error("solve_tridiagonal: size mismatch");
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }
}

ScalarMinimum minimize_brent(const std::function<double(double)>& f, double lo,
                             double hi, double tol, int max_iter) {
  constexpr double gold = 0.3819660112501051;
  ScalarMinimum out;
  double a = lo, b = hi;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  out.evaluations = 1;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol + 1e-15 * std::abs(x);
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) {
      out.converged = true;
      break;
    }
    double u;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm > x) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x >= xm) ? a - x : b - x;
      d = gold * e;
    }
    u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0) ? tol1 : -tol1);
    const double fu = f(u);
    ++out.evaluations;
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; w = x; x = u;
      fv = fw; fw = fx; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; w = u; fv = fw; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  out.x = x;
  out.value = fx;
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit out;
  out.n = x.size();
  if (x.size() != y.size() || x.size() < 2) {
    throw structural_error("fit_line: need >= 2 matching points");
  }
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
  const double mx = sx / x.size(), my = sy / y.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw numerical_error("fit_line: degenerate abscissae");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (out.intercept + out.slope * x[i]);
    ss += r * r;
  }
  out.rms_residual = std::sqrt(ss / x.size());
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace gns

#include "gns/radial.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gns/errors.hpp"
#include "gns/numerics.hpp"

namespace gns {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

void require_finite_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw std::invalid_argument(std::string(name) + " must be finite and positive");
  }
}

// Derivative at x0 of the parabola through three (x, y) points.
double parabolic_slope(double x0, double x1, double y1, double x2, double y2,
                       double x3, double y3) {
  const double d12 = (y2 - y1) / (x2 - x1);
  const double d23 = (y3 - y2) / (x3 - x2);
  const double c = (d23 - d12) / (x3 - x1);
  return d12 + c * (2.0 * x0 - x1 - x2);
}
}  // namespace

std::shared_ptr<const RadialGrid> RadialGrid::make(double r_max, int n_cells,
                                                   double stretch) {
  require_finite_positive(r_max, "r_max");
  if (!std::isfinite(stretch) || stretch < 1.0) {
    throw std::invalid_argument("stretch must be finite and >= 1");
  }
  if (n_cells < 3) {
    throw std::invalid_argument("n_cells must be >= 3");
  }
  auto g = std::shared_ptr<RadialGrid>(new RadialGrid());
  g->r_max_ = r_max;
  g->stretch_ = stretch;
  const int n = n_cells;
  g->edges_.resize(n + 1);
  g->centers_.resize(n);
  g->weights_.resize(n);
  for (int k = 0; k <= n; ++k) {
    g->edges_[k] = r_max * std::pow(double(k) / double(n), stretch);
  }
  g->edges_[0] = 0.0;
  g->edges_[n] = r_max;
  for (int i = 0; i < n; ++i) {
    const double a = g->edges_[i], b = g->edges_[i + 1];
    g->centers_[i] = 0.5 * (a + b);
    g->weights_[i] = 0.5 * (b * b - a * a);
  }
  return g;
}

double RadialGrid::disk_area() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return two_pi * s;
}

std::string RadialGrid::descriptor() const {
  std::ostringstream os;
  os << format_double(r_max_) << ' ' << n_cells() << ' '
     << format_double(stretch_);
  return os.str();
}

GridPtr make_grid(double r_max, int n_cells, double stretch) {
  return RadialGrid::make(r_max, n_cells, stretch);
}

RadialDensity::RadialDensity(GridPtr g, std::vector<double> v, Kind k)
    : grid(std::move(g)), values(std::move(v)), kind(k) {
  if (!grid) throw structural_error("RadialDensity: null grid");
  if (values.size() != static_cast<std::size_t>(grid->n_cells())) {
    throw structural_error("RadialDensity: value/grid length mismatch");
  }
  for (double x : values) {
    if (!(x >= 0.0)) {
      throw std::invalid_argument("RadialDensity: values must be nonnegative");
    }
  }
}

RadialDensity density_of(const RadialDensity& u) {
  std::vector<double> v(u.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = u.values[i];
    v[i] = x * x * x * x;
  }
  return RadialDensity(u.grid, std::move(v), Kind::density);
}

RadialDensity profile_of(const RadialDensity& sigma) {
  std::vector<double> v(sigma.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::sqrt(std::sqrt(sigma.values[i]));
  }
  return RadialDensity(sigma.grid, std::move(v), Kind::profile);
}

double integrate(const RadialDensity& f) {
  if (!f.grid || f.values.size() != static_cast<std::size_t>(f.grid->n_cells())) {
    throw structural_error("integrate: value/grid length mismatch");
  }
  const auto& w = f.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * w[i];
  return two_pi * s;
}

std::vector<double> prefix_mass(const RadialDensity& f) {
  const auto& w = f.grid->weights();
  std::vector<double> pm(f.values.size() + 1, 0.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    pm[i + 1] = pm[i] + two_pi * w[i] * f.values[i];
  }
  return pm;
}

double grad_sq(const RadialDensity& u) {
  const auto& c = u.grid->centers();
  const auto& v = u.values;
  const std::size_t n = v.size();
  if (n < 3) throw std::invalid_argument("grad_sq: need at least 3 cells");
  double s = 0.0;
  // Interior edges between consecutive centers; dual-cell weight is the
  // exact integral of r dr over [c_i, c_{i+1}].
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double slope = (v[i + 1] - v[i]) / (c[i + 1] - c[i]);
    const double w = 0.5 * (c[i + 1] * c[i + 1] - c[i] * c[i]);
    s += slope * slope * w;
  }
  const double s0 = parabolic_slope(0.0, c[0], v[0], c[1], v[1], c[2], v[2]);
  s += s0 * s0 * 0.5 * c[0] * c[0];
  const double R = u.grid->r_max();
  const double sR = parabolic_slope(R, c[n - 3], v[n - 3], c[n - 2], v[n - 2],
                                    c[n - 1], v[n - 1]);
  s += sR * sR * 0.5 * (R * R - c[n - 1] * c[n - 1]);
  return two_pi * s;
}

ResampleResult resample(const RadialDensity& f, const GridPtr& target) {
  if (!target) throw structural_error("resample: null target grid");
  if (f.grid == target) {
    return {RadialDensity(target, f.values, f.kind), 0.0};
  }
  MonotoneCubic interp(f.grid->centers(), f.values);
  std::vector<double> v(target->n_cells());
  for (int i = 0; i < target->n_cells(); ++i) {
    v[i] = std::max(0.0, interp(target->centers()[i]));
  }
  RadialDensity out(target, std::move(v), f.kind);
  const double m0 = integrate(f);
  const double m1 = integrate(out);
  const double drift = (m0 != 0.0) ? (m1 - m0) / m0 : m1;
  return {std::move(out), drift};
}

}  // namespace gns

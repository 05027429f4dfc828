#pragma once

#include <memory>
#include <string>
#include <vector>

namespace gns {

/// Truncated, power-stretched radial mesh for rotationally symmetric fields
/// on the plane. Cell edges follow r_k = r_max * (k/N)^stretch; cell centers
/// are edge midpoints and the quadrature weight of a cell is the exact
/// integral of r dr across it, so that 2*pi*sum(f_i w_i) integrates f over
/// the truncated disk and constants are integrated exactly.
class RadialGrid {
 public:
  static std::shared_ptr<const RadialGrid> make(double r_max, int n_cells,
                                                double stretch);

  int n_cells() const { return static_cast<int>(centers_.size()); }
  double r_max() const { return r_max_; }
  double stretch() const { return stretch_; }

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& centers() const { return centers_; }
  const std::vector<double>& weights() const { return weights_; }

  /// 2*pi*sum(w_i): equals pi r_max^2 to roundoff.
  double disk_area() const;

  std::string descriptor() const;

 private:
  RadialGrid() = default;
  std::vector<double> edges_, centers_, weights_;
  double r_max_ = 0.0, stretch_ = 1.0;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(double r_max, int n_cells, double stretch);

enum class Kind { density, profile };

/// Nonnegative cell values on a RadialGrid: either a mass density (rho or
/// sigma) or the profile u = sigma^{1/4}.
struct RadialDensity {
  GridPtr grid;
  std::vector<double> values;
  Kind kind = Kind::density;

  RadialDensity() = default;
  RadialDensity(GridPtr g, std::vector<double> v, Kind k);

  std::size_t size() const { return values.size(); }
};

/// sigma = u^4 (profile -> density), exact inverse of profile_of.
RadialDensity density_of(const RadialDensity& u);
/// u = sigma^{1/4} (density -> profile).
RadialDensity profile_of(const RadialDensity& sigma);

/// 2*pi*sum(f_i w_i), the planar integral over the truncated disk.
double integrate(const RadialDensity& f);

/// Cumulative mass at cell edges: pm[0]=0, pm[i+1]=pm[i]+2*pi*w_i*f_i.
std::vector<double> prefix_mass(const RadialDensity& f);

/// Dirichlet integral int |grad u|^2 dx from edge-centered differences:
/// interior edges use (u_{i+1}-u_i)/(c_{i+1}-c_i) weighted by the exact
/// r dr measure of the dual cell [c_i, c_{i+1}]; the r=0 and r=r_max edges
/// use second-order one-sided parabolic slopes.
double grad_sq(const RadialDensity& u);

struct ResampleResult {
  RadialDensity density;
  double mass_change_rel = 0.0;
};

/// Monotone-cubic resampling onto the target grid, clamped at zero.
ResampleResult resample(const RadialDensity& f, const GridPtr& target);

}  // namespace gns

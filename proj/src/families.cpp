#include "gns/families.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gns {

namespace {
constexpr double pi = std::numbers::pi;

double v_value(double lambda, double r) {
  return 1.0 / std::sqrt(1.0 + lambda * lambda * r * r);
}

double sigma_value(double kappa, double mass, double r) {
  const double d = kappa + r * r;
  return (mass / pi) * kappa / (d * d);
}

double angular_average(double (*f)(double, double), double a, double offset,
                       double r) {
  constexpr int k = 64;
  double s = 0.0;
  for (int j = 0; j < k; ++j) {
    const double th = 2.0 * pi * (j + 0.5) / k;
    const double d2 = r * r + offset * offset - 2.0 * r * offset * std::cos(th);
    s += f(a, std::sqrt(std::max(0.0, d2)));
  }
  return s / k;
}
}  // namespace

double eval_family(Family which, const OptimizerParams& p, double r) {
  if (r < 0.0 || !std::isfinite(r)) {
    throw std::invalid_argument("eval_family: r must be finite and >= 0");
  }
  switch (which) {
    case Family::v:
      if (p.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
      if (p.center_offset > 0.0) {
        return angular_average(&v_value, p.lambda, p.center_offset, r);
      }
      return v_value(p.lambda, r);
    case Family::sigma: {
      if (p.kappa <= 0.0) throw std::invalid_argument("kappa must be positive");
      if (p.mass <= 0.0) throw std::invalid_argument("mass must be positive");
      if (p.center_offset > 0.0) {
        const double m = p.mass, k = p.kappa;
        constexpr int nodes = 64;
        double s = 0.0;
        for (int j = 0; j < nodes; ++j) {
          const double th = 2.0 * pi * (j + 0.5) / nodes;
          const double d2 =
              r * r + p.center_offset * p.center_offset -
              2.0 * r * p.center_offset * std::cos(th);
          s += sigma_value(k, m, std::sqrt(std::max(0.0, d2)));
        }
        return s / nodes;
      }
      return sigma_value(p.kappa, p.mass, r);
    }
    case Family::g4d:
      // 4D Sobolev optimizer 1/(1+|x|^2+|y|^2) at 4D radius r.
      return 1.0 / (1.0 + r * r);
  }
  throw std::invalid_argument("eval_family: unknown family tag");
}

RadialDensity sample_sigma(const GridPtr& grid, double kappa, double mass,
                           bool cell_average) {
  if (kappa <= 0.0 || !std::isfinite(kappa)) {
    throw std::invalid_argument("kappa must be positive");
  }
  if (mass <= 0.0 || !std::isfinite(mass)) {
    throw std::invalid_argument("mass must be positive");
  }
  std::vector<double> v(grid->n_cells());
  if (cell_average) {
    const auto& e = grid->edges();
    const auto& w = grid->weights();
    auto cum = [&](double r) { return mass * r * r / (kappa + r * r); };
    for (int i = 0; i < grid->n_cells(); ++i) {
      const double cell_mass = cum(e[i + 1]) - cum(e[i]);
      v[i] = cell_mass / (2.0 * pi * w[i]);
    }
  } else {
    for (int i = 0; i < grid->n_cells(); ++i) {
      v[i] = sigma_value(kappa, mass, grid->centers()[i]);
    }
  }
  return RadialDensity(grid, std::move(v), Kind::density);
}

RadialDensity sample_v(const GridPtr& grid, double lambda) {
  if (lambda <= 0.0 || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive");
  }
  std::vector<double> v(grid->n_cells());
  for (int i = 0; i < grid->n_cells(); ++i) {
    v[i] = v_value(lambda, grid->centers()[i]);
  }
  return RadialDensity(grid, std::move(v), Kind::profile);
}

RadialDensity uniform_disk(const GridPtr& grid, double radius, double mass,
                           bool cell_average) {
  if (radius <= 0.0 || mass <= 0.0) {
    throw std::invalid_argument("uniform_disk: radius and mass must be positive");
  }
  const double rho = mass / (pi * radius * radius);
  const auto& e = grid->edges();
  std::vector<double> v(grid->n_cells(), 0.0);
  for (int i = 0; i < grid->n_cells(); ++i) {
    if (e[i + 1] <= radius) {
      v[i] = rho;
    } else if (e[i] < radius && cell_average) {
      const double covered = 0.5 * (radius * radius - e[i] * e[i]);
      v[i] = rho * covered / grid->weights()[i];
    } else if (grid->centers()[i] < radius) {
      v[i] = rho;
    }
  }
  return RadialDensity(grid, std::move(v), Kind::density);
}

double log_hls_minimum(double mass) {
  // Value of F at sigma_{kappa,M}: entropy part M(log(M/pi) - 2) plus
  // interaction part M, i.e. M(log M - log pi - 1). Matches the classical
  // mass-one sharp constant -(1 + log pi).
  return mass * (std::log(mass) - std::log(pi) - 1.0);
}

std::map<std::string, ReferenceConstant> reference_constants() {
  std::map<std::string, ReferenceConstant> t;
  t["norm6_6_v"] = {"pi/2", pi / 2.0};
  t["norm4_4_v"] = {"pi", pi};
  t["grad_sq_v"] = {"pi/2", pi / 2.0};
  t["norm4_4_g4d"] = {"pi^2/6", pi * pi / 6.0};
  t["mass_sigma"] = {"M", 1.0};
  t["log_hls_minimum_8pi"] = {"M(log M - log pi - 1), M = 8 pi",
                              log_hls_minimum(8.0 * pi)};
  return t;
}

}  // namespace gns

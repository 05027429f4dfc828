#include "gns/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "gns/errors.hpp"
#include "gns/families.hpp"
#include "gns/numerics.hpp"

namespace gns {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;

struct ScanResult {
  double best_x = 0.0;
  double lo = 0.0, hi = 0.0;  // refinement bracket
  int evaluations = 0;
  bool endpoints_low = false;  // both endpoints below all interior samples
  int local_minima = 0;
};

// Coarse scan over [lo, hi]; returns the bracket around the best sample and
// unimodality diagnostics.
ScanResult coarse_scan(const std::function<double(double)>& f, double lo,
                       double hi, int m) {
  ScanResult out;
  std::vector<double> xs(m), fs(m);
  for (int k = 0; k < m; ++k) {
    xs[k] = lo + (hi - lo) * k / (m - 1);
    fs[k] = f(xs[k]);
  }
  out.evaluations = m;
  int best = 0;
  for (int k = 1; k < m; ++k) {
    if (fs[k] < fs[best]) best = k;
  }
  double interior_min = fs[1];
  for (int k = 1; k + 1 < m; ++k) interior_min = std::min(interior_min, fs[k]);
  out.endpoints_low = fs[0] < interior_min && fs[m - 1] < interior_min;
  for (int k = 1; k + 1 < m; ++k) {
    if (fs[k] < fs[k - 1] && fs[k] <= fs[k + 1]) ++out.local_minima;
  }
  out.best_x = xs[best];
  out.lo = xs[std::max(0, best - 1)];
  out.hi = xs[std::min(m - 1, best + 1)];
  return out;
}

// 1D minimization over log(lambda): coarse scan, Brent refinement, and a
// deterministic 8-seed multi-start fallback when the scan is not unimodal.
void fit_scalar(const std::function<double(double)>& obj_log, double lo,
                double hi, double rel_tol, int coarse, OptimizerFit& fit) {
  const double llo = std::log(lo), lhi = std::log(hi);
  const ScanResult scan = coarse_scan(obj_log, llo, lhi, coarse);
  fit.evaluations += scan.evaluations;
  double best_x;
  double best_f;
  if (scan.endpoints_low || scan.local_minima > 1) {
    fit.multistart = true;
    best_x = scan.best_x;
    best_f = obj_log(scan.best_x);
    ++fit.evaluations;
    for (int s = 0; s < 8; ++s) {
      const double a = llo + (lhi - llo) * s / 8.0;
      const double b = llo + (lhi - llo) * (s + 1) / 8.0;
      const ScalarMinimum m = minimize_brent(obj_log, a, b, rel_tol);
      fit.evaluations += m.evaluations;
      if (m.value < best_f) {
        best_f = m.value;
        best_x = m.x;
      }
    }
    // Still ambiguous when the best point sits at the global bracket edge.
    fit.converged = best_x > llo + 2 * rel_tol && best_x < lhi - 2 * rel_tol;
  } else {
    const ScalarMinimum m = minimize_brent(obj_log, scan.lo, scan.hi, rel_tol);
    fit.evaluations += m.evaluations;
    best_x = m.x;
    best_f = m.value;
    fit.converged = m.converged && best_x > llo + 2 * rel_tol &&
                    best_x < lhi - 2 * rel_tol;
  }
  fit.lambda_star = std::exp(best_x);
  fit.distance_l1 = best_f;
  fit.bracket_lo = lo;
  fit.bracket_hi = hi;
}

// L1 distance between a radial sixth/fourth power and the offset family
// member, by polar tensor quadrature (64-point periodic rule per radius).
double offset_l1(const RadialDensity& upow, double lambda, double offset,
                 int nodes, int family_power) {
  const auto& c = upow.grid->centers();
  const auto& w = upow.grid->weights();
  const double l2 = lambda * lambda;
  double total = 0.0;
  if (offset <= 0.0) {
    for (std::size_t i = 0; i < upow.values.size(); ++i) {
      const double d = 1.0 + l2 * c[i] * c[i];
      const double fam = (family_power == 6) ? l2 / (d * d * d) : l2 / (d * d);
      total += w[i] * std::abs(upow.values[i] - fam);
    }
    return two_pi * total;
  }
  std::vector<double> cos_th(nodes);
  for (int j = 0; j < nodes; ++j) {
    cos_th[j] = std::cos(two_pi * (j + 0.5) / nodes);
  }
  for (std::size_t i = 0; i < upow.values.size(); ++i) {
    double s = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double d2 =
          c[i] * c[i] + offset * offset - 2.0 * c[i] * offset * cos_th[j];
      const double d = 1.0 + l2 * d2;
      const double fam = (family_power == 6) ? l2 / (d * d * d) : l2 / (d * d);
      s += std::abs(upow.values[i] - fam);
    }
    total += w[i] * s / nodes;
  }
  return two_pi * total;
}

RadialDensity power_of(const RadialDensity& u, int k) {
  std::vector<double> v(u.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(u.values[i], k);
  return RadialDensity(u.grid, std::move(v), Kind::density);
}
}  // namespace

OptimizerFit fit_nearest_sixth(const RadialDensity& u, const FitOptions& opt) {
  if (u.kind != Kind::profile) {
    throw std::invalid_argument("fit_nearest_sixth: expected a profile");
  }
  const RadialDensity u6 = power_of(u, 6);
  const double i6 = integral_with_tail(u6).value;
  if (std::abs(i6 - pi / 2.0) > 1e-6 * (pi / 2.0)) {
    throw std::invalid_argument(
        "fit_nearest_sixth: int u^6 must equal pi/2 (normalize_sixth first)");
  }
  OptimizerFit fit;
  auto fit_at_offset = [&](double offset) {
    OptimizerFit inner;
    auto obj = [&](double x) {
      return offset_l1(u6, std::exp(x), offset, opt.angular_nodes, 6);
    };
    fit_scalar(obj, opt.lambda_lo, opt.lambda_hi, opt.rel_tol,
               opt.coarse_samples, inner);
    return inner;
  };
  if (!opt.search_offset) {
    fit = fit_at_offset(0.0);
    fit.offset_star = 0.0;
    return fit;
  }
  // Outer golden/Brent search over |x0|; rotational symmetry of u makes the
  // objective depend on the offset magnitude only.
  int outer_evals = 0;
  auto outer = [&](double offset) {
    const OptimizerFit inner = fit_at_offset(offset);
    outer_evals += inner.evaluations;
    return inner.distance_l1;
  };
  // Offsets live on a linear scale including 0, so scan linearly.
  double best_off = 0.0, best_val = outer(0.0);
  const int m = 9;
  for (int k = 1; k < m; ++k) {
    const double off = opt.offset_max * k / (m - 1);
    const double val = outer(off);
    if (val < best_val) {
      best_val = val;
      best_off = off;
    }
  }
  const double lo = std::max(0.0, best_off - opt.offset_max / (m - 1));
  const double hi = std::min(opt.offset_max, best_off + opt.offset_max / (m - 1));
  const ScalarMinimum om = minimize_brent(outer, lo, hi, 1e-6);
  const double offset = (om.value < best_val) ? om.x : best_off;
  fit = fit_at_offset(offset);
  fit.offset_star = offset;
  fit.evaluations += outer_evals;
  fit.boundary_hit = offset > 0.999 * opt.offset_max;
  return fit;
}

OptimizerFit fit_nearest_fourth(const RadialDensity& u, const FitOptions& opt) {
  if (u.kind != Kind::profile) {
    throw std::invalid_argument("fit_nearest_fourth: expected a profile");
  }
  const RadialDensity u4 = density_of(u);
  const double i4 = integral_with_tail(u4).value;
  if (std::abs(i4 - pi) > 1e-6 * pi) {
    throw std::invalid_argument(
        "fit_nearest_fourth: int u^4 must equal pi (normalize_fourth first)");
  }
  OptimizerFit fit;
  auto obj = [&](double x) {
    return offset_l1(u4, std::exp(x), 0.0, opt.angular_nodes, 4);
  };
  fit_scalar(obj, opt.lambda_lo, opt.lambda_hi, opt.rel_tol, opt.coarse_samples,
             fit);
  // Entropy/moment lower bound on lambda (logged, not enforced):
  // -log lambda <= (2/pi)(S + N_1) + 4/e + log 2.
  const MomentsReport m = moments_entropy(u4, {1.0});
  const double s_u = m.entropy;
  const double n1 = m.moment.at(1.0);
  fit.lambda_min_entropy =
      std::exp(-((2.0 / pi) * (s_u + n1) + 4.0 / std::numbers::e + std::log(2.0)));
  return fit;
}

StabilityProbe hls_fit(const RadialDensity& rho, double eps,
                       const FitOptions& opt) {
  if (rho.kind != Kind::density) {
    throw std::invalid_argument("hls_fit: expected a density");
  }
  // Tail-completed mass: normalizing the family by the truncated mass would
  // floor the distance at the truncation level (~1e-5 at r_max = 1e3).
  const double mass = integral_with_tail(rho).value;
  if (!(mass > 0.0)) throw std::invalid_argument("hls_fit: zero mass");
  const auto& c = rho.grid->centers();
  const auto& w = rho.grid->weights();
  auto distance = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.values.size(); ++i) {
      const double d = mu + c[i] * c[i];
      s += w[i] * std::abs(rho.values[i] - (mass / pi) * mu / (d * d));
    }
    return two_pi * s;
  };
  StabilityProbe probe;
  auto obj = [&](double x) { return distance(std::exp(x)); };
  fit_scalar(obj, opt.lambda_lo, opt.lambda_hi, opt.rel_tol, opt.coarse_samples,
             probe.fit);
  probe.distance_l1 = probe.fit.distance_l1;
  const LogHlsReport rep = log_hls(rho);
  probe.log_hls_value = rep.value;
  probe.deficit = rep.deficit;
  probe.exponent = (1.0 - eps) / 20.0;
  probe.ratio = (probe.deficit > 0.0)
                    ? probe.distance_l1 / std::pow(probe.deficit, probe.exponent)
                    : 0.0;
  probe.fd_entropy_at_fit = fd_entropy(rho, probe.fit.lambda_star, mass).value;
  probe.dissipation_value = dissipation(rho).value;
  return probe;
}

ContinuityRecord continuity_probe(const RadialDensity& rho,
                                  const RadialDensity& sigma,
                                  const ClassParams& cls,
                                  const FunctionalOptions& opt) {
  if (rho.kind != Kind::density || sigma.kind != Kind::density) {
    throw std::invalid_argument("continuity_probe: expected densities");
  }
  if (rho.grid != sigma.grid) {
    throw structural_error("continuity_probe: densities must share a grid");
  }
  auto verify = [&](const RadialDensity& f, const char* name) {
    const MomentsReport m = moments_entropy(f, {cls.p}, opt);
    const double np = m.moment.at(cls.p);
    if (np > cls.A * (1.0 + 1e-12)) {
      throw std::invalid_argument(std::string("continuity_probe: moment bound violated for ") +
                                  name + ": int |x|^p = " + format_double(np) +
                                  " > A = " + format_double(cls.A));
    }
    std::vector<double> fq(f.values.size());
    for (std::size_t i = 0; i < fq.size(); ++i) {
      fq[i] = std::pow(f.values[i], cls.q);
    }
    const double lq = integrate(RadialDensity(f.grid, std::move(fq), Kind::density));
    if (lq > cls.B * (1.0 + 1e-12)) {
      throw std::invalid_argument(std::string("continuity_probe: L^q bound violated for ") +
                                  name + ": int f^q = " + format_double(lq) +
                                  " > B = " + format_double(cls.B));
    }
  };
  verify(rho, "rho");
  verify(sigma, "sigma");

  const LogHlsReport fr = log_hls(rho, opt);
  const LogHlsReport fs = log_hls(sigma, opt);
  ContinuityRecord rec;
  rec.cls = cls;
  rec.d_log_hls = std::abs(fr.value - fs.value);
  rec.d_entropy = std::abs(fr.entropy - fs.entropy);
  rec.d_interaction =
      std::abs(fr.interaction * fr.mass / 2.0 - fs.interaction * fs.mass / 2.0);
  double l1 = 0.0;
  const auto& w = rho.grid->weights();
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    l1 += w[i] * std::abs(rho.values[i] - sigma.values[i]);
  }
  rec.l1_distance = two_pi * l1;
  return rec;
}

}  // namespace gns

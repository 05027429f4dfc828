#include "gns/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gns/errors.hpp"
#include "gns/families.hpp"
#include "gns/numerics.hpp"

#include "json.hpp"

namespace gns {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;

struct TailFit {
  bool valid = false;
  double p = 0.0;  // integrand ~ c r^{-p}
  double c = 0.0;
  double rms = 0.0;
};

// Fits log f = log c - p log r over the trailing quarter of the domain.
TailFit fit_tail(const std::vector<double>& r, const std::vector<double>& f,
                 double r_max) {
  TailFit out;
  const double r_lo = 0.25 * r_max;
  std::vector<double> lx, ly;
  std::size_t count = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] >= r_lo) ++count;
  }
  if (count < 8) return out;
  const std::size_t stride = std::max<std::size_t>(1, count / 128);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < r_lo) continue;
    if (seen++ % stride != 0) continue;
    if (!(f[i] > 0.0)) return out;  // tail model needs positive values
    lx.push_back(std::log(r[i]));
    ly.push_back(std::log(f[i]));
  }
  if (lx.size() < 6) return out;
  const LineFit fit = fit_line(lx, ly);
  out.p = -fit.slope;
  out.c = std::exp(fit.intercept);
  out.rms = fit.rms_residual;
  out.valid = std::isfinite(out.p) && std::isfinite(out.c) && out.rms < 0.05;
  return out;
}

// int_R^inf 2 pi r * c r^{-p} dr, p > 2.
double power_tail(double c, double p, double R) {
  return two_pi * c * std::pow(R, 2.0 - p) / (p - 2.0);
}

// int_R^inf 2 pi r * c r^{-p} log r dr, p > 2.
double power_tail_log(double c, double p, double R) {
  return two_pi * c * std::pow(R, 2.0 - p) / (p - 2.0) *
         (std::log(R) + 1.0 / (p - 2.0));
}

// Trapezoid-on-centers companion sum used as a quadrature error indicator:
// midpoint and trapezoid composites bracket the true value for smooth
// integrands, so |mid - trap|/3 tracks the midpoint error magnitude.
double trapezoid_companion(const GridPtr& g, const std::vector<double>& f) {
  const auto& c = g->centers();
  const std::size_t n = f.size();
  double s = f[0] * 0.5 * c[0] * c[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    s += 0.5 * (f[i] + f[i + 1]) * 0.5 * (c[i + 1] * c[i + 1] - c[i] * c[i]);
  }
  const double R = g->r_max();
  s += f[n - 1] * 0.5 * (R * R - c[n - 1] * c[n - 1]);
  return two_pi * s;
}

Integral integrate_integrand(const GridPtr& g, const std::vector<double>& f,
                             const FunctionalOptions& opt,
                             double min_decay = 2.2) {
  Integral out;
  const auto& w = g->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * w[i];
  out.truncated = two_pi * s;
  out.quad_error =
      std::abs(out.truncated - trapezoid_companion(g, f)) / 3.0 +
      1e-15 * std::abs(out.truncated);
  out.value = out.truncated;
  if (opt.tail_correct) {
    const TailFit t = fit_tail(g->centers(), f, g->r_max());
    if (t.valid && t.p > min_decay) {
      out.tail = power_tail(t.c, t.p, g->r_max());
      out.tail_uncertainty = 0.02 * std::abs(out.tail);
      out.value += out.tail;
    } else if (f.back() > 0.0) {
      // No trustworthy tail model: surface a conservative bound instead.
      out.tail_uncertainty = two_pi * f.back() * g->r_max() * g->r_max();
    }
  }
  return out;
}

void check_shape(const RadialDensity& f, const char* who) {
  if (!f.grid || f.values.size() != static_cast<std::size_t>(f.grid->n_cells())) {
    throw structural_error(std::string(who) + ": value/grid length mismatch");
  }
}

// Interior Dirichlet sum over dual cells spanning `step` centers, covering
// [c_0, c_{n-1}] exactly for any step (the last interval may be shorter).
double dirichlet_interior(const std::vector<double>& c,
                          const std::vector<double>& v, std::size_t step) {
  const std::size_t n = v.size();
  double s = 0.0;
  std::size_t i = 0;
  while (i + 1 < n) {
    const std::size_t j = std::min(i + step, n - 1);
    const double slope = (v[j] - v[i]) / (c[j] - c[i]);
    s += slope * slope * 0.5 * (c[j] * c[j] - c[i] * c[i]);
    i = j;
  }
  return s;
}
}  // namespace

Integral integral_with_tail(const RadialDensity& f,
                            const FunctionalOptions& opt) {
  check_shape(f, "integral_with_tail");
  return integrate_integrand(f.grid, f.values, opt);
}

ProfileNorms profile_norms(const RadialDensity& u, const FunctionalOptions& opt) {
  check_shape(u, "profile_norms");
  const auto& c = u.grid->centers();
  const std::size_t n = u.values.size();
  ProfileNorms out;

  std::vector<double> u4(n), u6(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u.values[i];
    const double x2 = x * x;
    u4[i] = x2 * x2;
    u6[i] = x2 * x2 * x2;
  }
  out.p4 = integrate_integrand(u.grid, u4, opt);
  out.p6 = integrate_integrand(u.grid, u6, opt);

  // Dirichlet integral from edge-centered differences. The deficits need
  // this term far past plain second order, so the interior sum is Richardson
  // extrapolated (h and 2h dual cells); the h2/h4 pair gives the error
  // estimate. The public grad_sq op stays at the plain fine sum.
  out.grad2.truncated = grad_sq(u);
  {
    const double a1 = dirichlet_interior(c, u.values, 1);
    const double a2 = dirichlet_interior(c, u.values, 2);
    const double a4 = dirichlet_interior(c, u.values, 4);
    const double e2 = a1 + (a1 - a2) / 3.0;
    const double e4 = a2 + (a2 - a4) / 3.0;
    const double caps = out.grad2.truncated / two_pi - a1;
    out.grad2.value = two_pi * (e2 + caps);
    out.grad2.quad_error =
        two_pi * std::abs(e2 - e4) + 1e-15 * std::abs(out.grad2.value);
  }
  if (opt.tail_correct && n >= 8) {
    std::vector<double> re(n - 1), qe(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double slope = (u.values[i + 1] - u.values[i]) / (c[i + 1] - c[i]);
      re[i] = 0.5 * (c[i] + c[i + 1]);
      qe[i] = slope * slope;
    }
    const TailFit t = fit_tail(re, qe, u.grid->r_max());
    if (t.valid && t.p > 2.2) {
      out.grad2.tail = power_tail(t.c, t.p, u.grid->r_max());
      out.grad2.tail_uncertainty = 0.02 * std::abs(out.grad2.tail);
      out.grad2.value += out.grad2.tail;
    }
  }
  return out;
}

DeficitReport gns_deficit(const RadialDensity& u, const FunctionalOptions& opt) {
  if (u.kind != Kind::profile) {
    throw std::invalid_argument("gns_deficit: expected a profile (u = sigma^{1/4})");
  }
  DeficitReport out;
  out.norms = profile_norms(u, opt);
  const double P = out.norms.grad2.value;
  const double Q = out.norms.p4.value;
  const double R6 = out.norms.p6.value;
  const double a = std::sqrt(P * Q);
  const double b = std::sqrt(pi * R6);
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw numerical_error("gns_deficit: non-finite intermediate");
  }
  out.value = a - b;
  const double eP = out.norms.grad2.uncertainty();
  const double eQ = out.norms.p4.uncertainty();
  const double eR = out.norms.p6.uncertainty();
  out.tol = 0.5 * (std::sqrt(Q / std::max(P, 1e-300)) * eP +
                   std::sqrt(P / std::max(Q, 1e-300)) * eQ) +
            0.5 * std::sqrt(pi / std::max(R6, 1e-300)) * eR +
            opt.deficit_tol_floor;
  return out;
}

LogHlsReport log_hls(const RadialDensity& rho, const FunctionalOptions& opt) {
  check_shape(rho, "log_hls");
  if (rho.kind != Kind::density) {
    throw std::invalid_argument("log_hls: expected a density");
  }
  for (double x : rho.values) {
    if (x < 0.0) throw std::invalid_argument("log_hls: negative values");
  }
  const auto& c = rho.grid->centers();
  const auto& w = rho.grid->weights();
  const std::size_t n = rho.values.size();
  const double R = rho.grid->r_max();

  LogHlsReport out;

  // Entropy part with a log-aware power-law tail completion.
  std::vector<double> ent(n);
  for (std::size_t i = 0; i < n; ++i) {
    ent[i] = (rho.values[i] > 0.0) ? rho.values[i] * std::log(rho.values[i]) : 0.0;
  }
  double ent_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) ent_sum += ent[i] * w[i];
  out.entropy = two_pi * ent_sum;
  double tol = std::abs(out.entropy - trapezoid_companion(rho.grid, ent)) / 3.0;

  const TailFit t = fit_tail(c, rho.values, R);
  double mass_tail = 0.0;
  if (opt.tail_correct && t.valid && t.p > 2.2) {
    mass_tail = power_tail(t.c, t.p, R);
    const double ent_tail =
        std::log(t.c) * power_tail(t.c, t.p, R) - t.p * power_tail_log(t.c, t.p, R);
    out.entropy += ent_tail;
    tol += 0.05 * std::abs(ent_tail);
  }

  // Interaction part: the angular average of log|x-y| over a circle is
  // log max(|x|,|y|), so the double integral collapses to prefix sums over
  // cell masses.
  std::vector<double> mass_cell(n);
  for (std::size_t i = 0; i < n; ++i) mass_cell[i] = two_pi * w[i] * rho.values[i];
  double mass_in = 0.0;
  for (double m : mass_cell) mass_in += m;
  const double mass = mass_in + mass_tail;
  if (!(mass > 0.0)) throw std::invalid_argument("log_hls: zero mass");

  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    suffix[i] = suffix[i + 1] + mass_cell[i] * std::log(c[i]);
  }
  double prefix = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prefix += mass_cell[i];
    pairs += mass_cell[i] * (std::log(c[i]) * prefix + suffix[i + 1]);
  }
  out.interaction = (2.0 / mass) * pairs;
  if (opt.tail_correct && t.valid && t.p > 2.2) {
    // Pairs with one point beyond r_max see log|x-y| ~ log of the far radius.
    const double far_log = power_tail_log(t.c, t.p, R);
    out.interaction += (4.0 * mass_in / mass) * far_log;
    tol += 0.05 * std::abs(4.0 * far_log) +
           (2.0 / mass) * mass_tail * mass_tail * std::abs(std::log(R));
  }

  out.mass = mass;
  out.value = out.entropy + out.interaction;
  out.deficit = out.value - log_hls_minimum(mass);
  out.tol = tol + opt.deficit_tol_floor;
  return out;
}

FdEntropyReport fd_entropy(const RadialDensity& sigma, double kappa,
                           double mass) {
  check_shape(sigma, "fd_entropy");
  if (!(kappa > 0.0) || !(mass > 0.0)) {
    throw std::invalid_argument("fd_entropy: kappa and mass must be positive");
  }
  const auto& c = sigma.grid->centers();
  const auto& w = sigma.grid->weights();
  const double R = sigma.grid->r_max();
  const double r_inner = 0.1 * R;
  double total = 0.0, inner = 0.0;
  for (std::size_t i = 0; i < sigma.values.size(); ++i) {
    const double d = kappa + c[i] * c[i];
    const double ref_sqrt = std::sqrt(mass * kappa / pi) / d;
    const double diff = std::sqrt(sigma.values[i]) - ref_sqrt;
    const double g = diff * diff / ref_sqrt;
    total += g * w[i];
    if (c[i] <= r_inner) inner += g * w[i];
  }
  FdEntropyReport out;
  out.value = two_pi * total;
  const double h_inner = two_pi * inner;
  out.log_slope = (out.value - h_inner) / std::log(R / r_inner);
  out.divergent = out.log_slope > 1e-6 * (1.0 + h_inner) + 1e-12;
  return out;
}

DissipationReport dissipation(const RadialDensity& sigma,
                              const FunctionalOptions& opt) {
  const RadialDensity u =
      (sigma.kind == Kind::density) ? profile_of(sigma) : sigma;
  DissipationReport out;
  out.gns = gns_deficit(u, opt);
  const double P = out.gns.norms.grad2.value;
  const double Q = out.gns.norms.p4.value;
  const double R6 = out.gns.norms.p6.value;
  out.value = (P * Q - pi * R6) / pi;
  const double a = std::sqrt(P * Q);
  const double b = std::sqrt(pi * R6);
  out.factorized = (a + b) * (a - b) / pi;
  if (!std::isfinite(out.value)) {
    throw numerical_error("dissipation: non-finite gradient term");
  }
  const double eP = out.gns.norms.grad2.uncertainty();
  const double eQ = out.gns.norms.p4.uncertainty();
  const double eR = out.gns.norms.p6.uncertainty();
  out.tol = (Q * eP + P * eQ + pi * eR) / pi + opt.deficit_tol_floor;
  return out;
}

MomentsReport moments_entropy(const RadialDensity& sigma,
                              const std::vector<double>& p_list,
                              const FunctionalOptions& opt) {
  check_shape(sigma, "moments_entropy");
  const auto& c = sigma.grid->centers();
  const std::size_t n = sigma.values.size();
  MomentsReport out;

  std::vector<double> ent(n), s32(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sigma.values[i];
    ent[i] = (x > 0.0) ? x * std::log(x) : 0.0;
    s32[i] = x * std::sqrt(x);
  }
  // Entropy kept truncated here (log-aware completion lives in log_hls).
  out.entropy = integrate_integrand(sigma.grid, ent, {.tail_correct = false}).value;
  out.l1 = integrate_integrand(sigma.grid, sigma.values, opt).value;
  out.l_3_2 = std::pow(integrate_integrand(sigma.grid, s32, opt).value, 2.0 / 3.0);

  for (double p : p_list) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw std::invalid_argument("moments_entropy: p must be >= 0");
    }
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::pow(c[i], p) * sigma.values[i];
    const TailFit t = fit_tail(c, f, sigma.grid->r_max());
    const bool divergent = t.valid && t.p <= 2.02;
    const Integral ip = integrate_integrand(sigma.grid, f, opt);
    out.moment[p] = ip.value;
    out.moment_divergent[p] = divergent;
  }
  return out;
}

std::map<double, double> moments6(const RadialDensity& u,
                                  const std::vector<double>& p_list,
                                  const FunctionalOptions& opt) {
  check_shape(u, "moments6");
  const auto& c = u.grid->centers();
  const std::size_t n = u.values.size();
  std::map<double, double> out;
  for (double p : p_list) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = u.values[i];
      const double x2 = x * x;
      f[i] = std::pow(c[i], p) * x2 * x2 * x2;
    }
    out[p] = integrate_integrand(u.grid, f, opt).value;
  }
  return out;
}

FunctionalReport evaluate_functionals(const RadialDensity& f, double kappa,
                                      double mass,
                                      const std::vector<double>& p_list,
                                      const FunctionalOptions& opt) {
  const RadialDensity sigma = (f.kind == Kind::density) ? f : density_of(f);
  const RadialDensity u = (f.kind == Kind::profile) ? f : profile_of(f);

  FunctionalReport r;
  r.kappa = kappa;
  r.mass_param = mass;

  const DissipationReport d = dissipation(sigma, opt);
  r.grad_u_sq = d.gns.norms.grad2.value;
  r.l4_4 = d.gns.norms.p4.value;
  r.l6_6 = d.gns.norms.p6.value;
  r.gns_deficit = d.gns.value;
  r.gns_tol = d.gns.tol;
  r.dissipation = d.value;
  r.dissipation_factorized = d.factorized;
  r.tail_loss["grad_u_sq"] = d.gns.norms.grad2.tail + d.gns.norms.grad2.quad_error;
  r.tail_loss["l4_4"] = d.gns.norms.p4.tail + d.gns.norms.p4.quad_error;
  r.tail_loss["l6_6"] = d.gns.norms.p6.tail + d.gns.norms.p6.quad_error;

  const LogHlsReport h = log_hls(sigma, opt);
  r.log_hls = h.value;
  r.hls_deficit = h.deficit;
  r.l1 = h.mass;
  r.tail_loss["log_hls"] = h.tol;

  const FdEntropyReport fe = fd_entropy(sigma, kappa, mass);
  r.fd_entropy = fe.value;
  r.fd_entropy_divergent = fe.divergent;

  const MomentsReport m = moments_entropy(sigma, p_list, opt);
  r.entropy_S = m.entropy;
  r.l_3_2 = m.l_3_2;
  r.moment_p = m.moment;
  r.moment6_p = moments6(u, p_list, opt);
  return r;
}

std::string FunctionalReport::to_json() const {
  nlohmann::ordered_json j;
  j["grad_u_sq"] = grad_u_sq;
  j["l4_4"] = l4_4;
  j["l6_6"] = l6_6;
  j["l1"] = l1;
  j["l_3_2"] = l_3_2;
  j["gns_deficit"] = gns_deficit;
  j["gns_tol"] = gns_tol;
  j["log_hls"] = log_hls;
  j["hls_deficit"] = hls_deficit;
  j["fd_entropy"] = fd_entropy;
  j["fd_entropy_divergent"] = fd_entropy_divergent;
  j["dissipation"] = dissipation;
  j["dissipation_factorized"] = dissipation_factorized;
  j["entropy_S"] = entropy_S;
  j["kappa"] = kappa;
  j["mass"] = mass_param;
  nlohmann::ordered_json mp;
  for (const auto& [p, v] : moment_p) mp[format_double(p)] = v;
  j["moment_p"] = mp;
  nlohmann::ordered_json m6;
  for (const auto& [p, v] : moment6_p) m6[format_double(p)] = v;
  j["moment6_p"] = m6;
  nlohmann::ordered_json tl;
  for (const auto& [k, v] : tail_loss) tl[k] = v;
  j["tail_loss"] = tl;
  return j.dump(2);
}

std::string FunctionalReport::csv_header(const std::vector<double>& p_list) {
  std::ostringstream os;
  os << "grad_u_sq,l4_4,l6_6,l1,l_3_2,gns_deficit,log_hls,hls_deficit,"
        "fd_entropy,fd_entropy_divergent,dissipation,entropy_S";
  for (double p : p_list) os << ",N_" << format_double(p);
  for (double p : p_list) os << ",M6_" << format_double(p);
  return os.str();
}

std::string FunctionalReport::to_csv_row(const std::vector<double>& p_list) const {
  std::ostringstream os;
  os << format_double(grad_u_sq) << ',' << format_double(l4_4) << ','
     << format_double(l6_6) << ',' << format_double(l1) << ','
     << format_double(l_3_2) << ',' << format_double(gns_deficit) << ','
     << format_double(log_hls) << ',' << format_double(hls_deficit) << ','
     << format_double(fd_entropy) << ',' << (fd_entropy_divergent ? 1 : 0)
     << ',' << format_double(dissipation) << ',' << format_double(entropy_S);
  for (double p : p_list) {
    auto it = moment_p.find(p);
    os << ',' << format_double(it == moment_p.end() ? 0.0 : it->second);
  }
  for (double p : p_list) {
    auto it = moment6_p.find(p);
    os << ',' << format_double(it == moment6_p.end() ? 0.0 : it->second);
  }
  return os.str();
}

RadialDensity normalize_sixth(const RadialDensity& u) {
  if (u.kind != Kind::profile) {
    throw std::invalid_argument("normalize_sixth: expected a profile");
  }
  std::vector<double> u6(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double x = u.values[i], x2 = x * x;
    u6[i] = x2 * x2 * x2;
  }
  // Tail-completed norm: a truncated normalization would leave a ~1e-6
  // amplitude offset that floors every downstream family-fit distance.
  const double i6 =
      integral_with_tail(RadialDensity(u.grid, std::move(u6), Kind::density)).value;
  if (!(i6 > 0.0)) throw std::invalid_argument("normalize_sixth: u is zero");
  const double scale = std::pow(pi / 2.0 / i6, 1.0 / 6.0);
  std::vector<double> v(u.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = scale * u.values[i];
  return RadialDensity(u.grid, std::move(v), Kind::profile);
}

RadialDensity normalize_fourth(const RadialDensity& u) {
  if (u.kind != Kind::profile) {
    throw std::invalid_argument("normalize_fourth: expected a profile");
  }
  const double i4 = integral_with_tail(density_of(u)).value;
  if (!(i4 > 0.0)) throw std::invalid_argument("normalize_fourth: u is zero");
  const double scale = std::pow(pi / i4, 0.25);
  std::vector<double> v(u.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = scale * u.values[i];
  return RadialDensity(u.grid, std::move(v), Kind::profile);
}

}  // namespace gns

// Python bindings for the main operations: grids, densities, functionals,
// the lift identity, nearest-optimizer fits, both flows, and transport.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "gns/experiment.hpp"
#include "gns/families.hpp"
#include "gns/flows.hpp"
#include "gns/functionals.hpp"
#include "gns/radial.hpp"
#include "gns/sobolev_lift.hpp"
#include "gns/stability.hpp"
#include "gns/transport.hpp"

namespace py = pybind11;
using namespace gns;

namespace {

RadialDensity make_density(const GridPtr& grid, std::vector<double> values,
                           const std::string& kind) {
  return RadialDensity(grid, std::move(values),
                       kind == "profile" ? Kind::profile : Kind::density);
}

py::dict diagnostics_dict(const FlowTrajectory& traj) {
  std::vector<double> t, mass, f, hls, h, d, s, n1, l32, mu;
  for (const auto& row : traj.diagnostics) {
    t.push_back(row.t);
    mass.push_back(row.mass);
    f.push_back(row.log_hls);
    hls.push_back(row.hls_deficit);
    h.push_back(row.fd_entropy);
    d.push_back(row.dissipation);
    s.push_back(row.entropy);
    n1.push_back(row.n1);
    l32.push_back(row.l32);
    mu.push_back(row.mu_fit);
  }
  py::dict out;
  out["t"] = t;
  out["mass"] = mass;
  out["F"] = f;
  out["hls_deficit"] = hls;
  out["H"] = h;
  out["D"] = d;
  out["S"] = s;
  out["N1"] = n1;
  out["l32"] = l32;
  out["mu_fit"] = mu;
  return out;
}

py::dict trajectory_dict(const FlowTrajectory& traj) {
  py::dict out;
  out["times"] = traj.times;
  py::list states;
  for (const auto& st : traj.states) states.append(st.values);
  out["states"] = states;
  out["diagnostics"] = diagnostics_dict(traj);
  out["aborted"] = traj.aborted;
  out["abort_reason"] = traj.abort_reason;
  out["mass_initial"] = traj.meta.mass_initial;
  out["mass_final"] = traj.meta.mass_final;
  out["steps_accepted"] = traj.meta.steps_accepted;
  return out;
}

FlowControls controls_from_kwargs(double dt_max, bool full_newton,
                                  bool track_mu) {
  FlowControls ctl;
  ctl.dt_max = dt_max;
  ctl.full_newton = full_newton;
  ctl.track_mu = track_mu;
  return ctl;
}

}  // namespace

PYBIND11_MODULE(_gnslab, m) {
  m.doc() = "Sharp GNS / Log-HLS deficits, stability fits, and the "
            "fast-diffusion and Keller-Segel flows on radial grids";

  py::class_<RadialGrid, std::shared_ptr<RadialGrid>>(m, "RadialGrid")
      .def_property_readonly("n_cells", &RadialGrid::n_cells)
      .def_property_readonly("r_max", &RadialGrid::r_max)
      .def_property_readonly("stretch", &RadialGrid::stretch)
      .def_property_readonly("edges", &RadialGrid::edges)
      .def_property_readonly("centers", &RadialGrid::centers)
      .def_property_readonly("weights", &RadialGrid::weights)
      .def("disk_area", &RadialGrid::disk_area);

  py::class_<RadialDensity>(m, "RadialDensity")
      .def_property_readonly("values",
                             [](const RadialDensity& d) { return d.values; })
      .def_property_readonly("grid",
                             [](const RadialDensity& d) {
                               return std::const_pointer_cast<RadialGrid>(d.grid);
                             })
      .def_property_readonly("kind", [](const RadialDensity& d) {
        return d.kind == Kind::profile ? "profile" : "density";
      });

  m.def("make_grid", [](double r_max, int n_cells, double stretch) {
    return std::const_pointer_cast<RadialGrid>(make_grid(r_max, n_cells, stretch));
  }, py::arg("r_max"), py::arg("n_cells"), py::arg("stretch") = 2.0);
  m.def("density", &make_density, py::arg("grid"), py::arg("values"),
        py::arg("kind") = "density");
  m.def("sample_v", &sample_v, py::arg("grid"), py::arg("lambda_") = 1.0);
  m.def("sample_sigma", &sample_sigma, py::arg("grid"), py::arg("kappa"),
        py::arg("mass"), py::arg("cell_average") = false);
  m.def("uniform_disk", &uniform_disk, py::arg("grid"), py::arg("radius"),
        py::arg("mass"), py::arg("cell_average") = true);
  m.def("reference_constants", [] {
    py::dict out;
    for (const auto& [key, rc] : reference_constants()) {
      out[py::str(key)] = py::make_tuple(rc.expression, rc.value);
    }
    return out;
  });

  m.def("integrate", &integrate);
  m.def("grad_sq", &grad_sq);
  m.def("profile_of", &profile_of);
  m.def("density_of", &density_of);
  m.def("normalize_sixth", &normalize_sixth);
  m.def("normalize_fourth", &normalize_fourth);

  m.def("gns_deficit", [](const RadialDensity& u) {
    const DeficitReport d = gns_deficit(u);
    py::dict out;
    out["value"] = d.value;
    out["tol"] = d.tol;
    out["grad_u_sq"] = d.norms.grad2.value;
    out["l4_4"] = d.norms.p4.value;
    out["l6_6"] = d.norms.p6.value;
    return out;
  });
  m.def("log_hls", [](const RadialDensity& rho) {
    const LogHlsReport r = log_hls(rho);
    py::dict out;
    out["value"] = r.value;
    out["deficit"] = r.deficit;
    out["entropy"] = r.entropy;
    out["interaction"] = r.interaction;
    out["mass"] = r.mass;
    return out;
  });
  m.def("fd_entropy", [](const RadialDensity& sigma, double kappa, double mass) {
    const FdEntropyReport r = fd_entropy(sigma, kappa, mass);
    py::dict out;
    out["value"] = r.value;
    out["divergent"] = r.divergent;
    out["log_slope"] = r.log_slope;
    return out;
  });
  m.def("dissipation", [](const RadialDensity& sigma) {
    const DissipationReport r = dissipation(sigma);
    py::dict out;
    out["value"] = r.value;
    out["factorized"] = r.factorized;
    out["tol"] = r.tol;
    return out;
  });

  m.def("balance_normalize", [](const RadialDensity& u) {
    const BalanceResult b = balance_normalize(u);
    py::dict out;
    out["profile"] = b.profile;
    out["mu"] = b.mu;
    out["amplitude"] = b.amplitude;
    out["converged"] = b.converged;
    return out;
  });
  m.def("lift_identity", [](const RadialDensity& u, bool require_balance) {
    const LiftReport r = lift_identity(u, {}, require_balance);
    py::dict out;
    out["gns_side"] = r.gns_side;
    out["sobolev_side"] = r.sobolev_side;
    out["residual"] = r.residual;
    out["f_norm4_pow4"] = r.f_norm4_pow4;
    out["correction"] = r.correction;
    out["three_term_residual"] = r.three_term_residual;
    return out;
  }, py::arg("u"), py::arg("require_balance") = true);

  auto fit_dict = [](const OptimizerFit& f) {
    py::dict out;
    out["lambda_star"] = f.lambda_star;
    out["offset_star"] = f.offset_star;
    out["distance_l1"] = f.distance_l1;
    out["converged"] = f.converged;
    out["evaluations"] = f.evaluations;
    return out;
  };
  m.def("fit_nearest_sixth", [fit_dict](const RadialDensity& u, bool offset) {
    FitOptions opt;
    opt.search_offset = offset;
    return fit_dict(fit_nearest_sixth(u, opt));
  }, py::arg("u"), py::arg("search_offset") = false);
  m.def("fit_nearest_fourth", [fit_dict](const RadialDensity& u) {
    return fit_dict(fit_nearest_fourth(u));
  });
  m.def("hls_fit", [fit_dict](const RadialDensity& rho, double eps) {
    const StabilityProbe p = hls_fit(rho, eps);
    py::dict out = fit_dict(p.fit);
    out["deficit"] = p.deficit;
    out["exponent"] = p.exponent;
    out["ratio"] = p.ratio;
    return out;
  }, py::arg("rho"), py::arg("eps") = 0.1);

  m.def("fd_evolve", [](const RadialDensity& sigma0, double kappa, double mass,
                        double t_end, double dt_max, bool full_newton,
                        bool track_mu) {
    return trajectory_dict(fd_evolve(sigma0, kappa, mass, t_end,
                                     controls_from_kwargs(dt_max, full_newton,
                                                          track_mu)));
  }, py::arg("sigma0"), py::arg("kappa"), py::arg("mass"), py::arg("t_end"),
     py::arg("dt_max") = 1e-3, py::arg("full_newton") = false,
     py::arg("track_mu") = false);
  m.def("ks_evolve", [](const RadialDensity& rho0, double t_end, double dt_max,
                        bool full_newton, bool track_mu, double diag_kappa) {
    FlowControls ctl = controls_from_kwargs(dt_max, full_newton, track_mu);
    ctl.diag_kappa = diag_kappa;
    return trajectory_dict(ks_evolve(rho0, t_end, ctl));
  }, py::arg("rho0"), py::arg("t_end"), py::arg("dt_max") = 1e-3,
     py::arg("full_newton") = false, py::arg("track_mu") = false,
     py::arg("diag_kappa") = 1.0);
  m.def("ks_discrete_steady", &ks_discrete_steady, py::arg("grid"),
        py::arg("kappa"), py::arg("mass"));

  m.def("radial_quantile", [](const RadialDensity& rho, int n_levels) {
    const QuantileProfile q = radial_quantile(rho, n_levels);
    py::dict out;
    out["mass_levels"] = q.mass_levels;
    out["radii"] = q.radii;
    out["total_mass"] = q.total_mass;
    return out;
  }, py::arg("rho"), py::arg("n_levels") = 4096);
  m.def("w2_squared", &w2_squared, py::arg("rho"), py::arg("sigma"),
        py::arg("n_levels") = 4096);
  m.def("interpolation_check", [](const RadialDensity& s0,
                                  const RadialDensity& s1, double q, double k) {
    const InterpolationRecord r = interpolation_check(s0, s1, q, k);
    py::dict out;
    out["lhs"] = r.lhs;
    out["rhs"] = r.rhs;
    out["slack"] = r.slack;
    out["w2"] = r.w2;
    return out;
  }, py::arg("sigma0"), py::arg("sigma1"), py::arg("q") = 3.0,
     py::arg("k_bound") = 400.0);

  m.def("perturbed_sigma", &perturbed_sigma, py::arg("grid"), py::arg("kappa"),
        py::arg("mass"), py::arg("shape"), py::arg("eps"));
  m.def("perturbed_v", &perturbed_v, py::arg("grid"), py::arg("shape"),
        py::arg("eps"));
}

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gns/experiment.hpp"
#include "gns/numerics.hpp"

#include "json.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string grid_triplet;  // r_max,n,stretch
  bool quiet = false;
};

int run_mode(const GlobalArgs& g, const std::string& mode,
             const std::vector<std::pair<std::string, std::string>>& overrides) {
  try {
    gns::ExperimentConfig cfg = g.config_path.empty()
                                    ? gns::ExperimentConfig::parse_text("")
                                    : gns::ExperimentConfig::parse_file(g.config_path);
    if (!g.out_dir.empty()) cfg.output.dir = g.out_dir;
    if (g.seed_set) cfg.probes.seed = g.seed;
    if (!g.grid_triplet.empty()) {
      double r_max = 0, stretch = 0;
      int n = 0;
      if (std::sscanf(g.grid_triplet.c_str(), "%lf,%d,%lf", &r_max, &n, &stretch) != 3) {
        throw gns::ValidationError("grid", "expected --grid r_max,n,stretch");
      }
      cfg.grid = {r_max, n, stretch};
    }
    // Flag overrides are appended as fully-qualified keys and re-parsed so
    // validation stays in one place.
    std::string text = cfg.canonical_text;
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) text += key + " = " + value + "\n";
    }
    cfg = gns::ExperimentConfig::parse_text(text);
    if (!g.out_dir.empty()) cfg.output.dir = g.out_dir;
    if (g.seed_set) cfg.probes.seed = g.seed;
    if (!g.grid_triplet.empty()) {
      double r_max = 0, stretch = 0;
      int n = 0;
      std::sscanf(g.grid_triplet.c_str(), "%lf,%d,%lf", &r_max, &n, &stretch);
      cfg.grid = {r_max, n, stretch};
    }
    return gns::run_experiment(cfg, mode, g.quiet);
  } catch (const gns::ValidationError& e) {
    nlohmann::ordered_json err;
    err["error"] = "validation";
    err["field"] = e.field();
    err["reason"] = e.what();
    std::cerr << err.dump() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    nlohmann::ordered_json err;
    err["error"] = "validation";
    err["reason"] = e.what();
    std::cerr << err.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = "numerical";
    err["reason"] = e.what();
    std::cerr << err.dump() << '\n';
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnslab: sharp GNS / Log-HLS deficits, stability probes, and "
               "the fast-diffusion / Keller-Segel flows on radial grids"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "experiment config file");
  app.add_option("--out", g.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "corpus seed");
  app.add_option("--grid", g.grid_triplet, "grid as r_max,n,stretch");
  app.add_flag("--quiet", g.quiet, "suppress stdout");

  std::string family, preset, target = "sixth", flow;
  std::string kappa, mass, lambda, eps, t_end;

  auto add_initial_opts = [&](CLI::App* sub) {
    sub->add_option("--family", family, "initial family: v | sigma | disk");
    sub->add_option("--preset", preset, "initial preset");
    sub->add_option("--kappa", kappa, "family kappa");
    sub->add_option("--mass", mass, "family mass (accepts e.g. 8pi)");
    sub->add_option("--lambda", lambda, "family lambda");
    sub->add_option("--epsilon", eps, "perturbation amplitude");
  };

  CLI::App* deficit = app.add_subcommand("deficit", "all scalar functionals of one density");
  add_initial_opts(deficit);
  CLI::App* lift = app.add_subcommand("lift", "balance + 4D Sobolev lift identity");
  add_initial_opts(lift);
  CLI::App* fit = app.add_subcommand("fit", "nearest-optimizer fit");
  add_initial_opts(fit);
  fit->add_option("--target", target, "sixth | fourth | hls");
  CLI::App* efd = app.add_subcommand("evolve-fd", "fast diffusion run");
  add_initial_opts(efd);
  efd->add_option("--t-end", t_end, "final time");
  CLI::App* eks = app.add_subcommand("evolve-ks", "Keller-Segel run");
  add_initial_opts(eks);
  eks->add_option("--t-end", t_end, "final time");
  CLI::App* rates = app.add_subcommand("rates", "decay-rate fits along a run");
  add_initial_opts(rates);
  rates->add_option("--t-end", t_end, "final time");

  CLI::App* verify = app.add_subcommand("verify", "property suites");
  verify->require_subcommand(1);
  std::vector<std::string> verify_names = {"monotone", "w2", "interp",
                                           "continuity", "stability"};
  for (const std::string& name : verify_names) {
    CLI::App* sub = verify->add_subcommand(name);
    add_initial_opts(sub);
    sub->add_option("--t-end", t_end, "final time");
  }

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  std::vector<std::pair<std::string, std::string>> overrides = {
      {"initial.family", family}, {"initial.preset", preset},
      {"initial.kappa", kappa},   {"initial.mass", mass},
      {"initial.lambda", lambda}, {"initial.epsilon", eps},
      {"run.t_end", t_end}};

  if (deficit->parsed()) return run_mode(g, "deficit", overrides);
  if (lift->parsed()) return run_mode(g, "lift", overrides);
  if (fit->parsed()) return run_mode(g, "fit-" + target, overrides);
  if (efd->parsed()) {
    overrides.push_back({"run.flow", "fd"});
    return run_mode(g, "evolve-fd", overrides);
  }
  if (eks->parsed()) {
    overrides.push_back({"run.flow", "ks"});
    return run_mode(g, "evolve-ks", overrides);
  }
  if (rates->parsed()) {
    overrides.push_back({"run.flow", "ks"});
    return run_mode(g, "rates", overrides);
  }
  if (verify->parsed()) {
    for (const std::string& name : verify_names) {
      if (verify->get_subcommand(name)->parsed()) {
        return run_mode(g, "verify-" + name, overrides);
      }
    }
  }
  return 2;
}

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gns/flows.hpp"
#include "gns/radial.hpp"

namespace gns {

/// Validation failure carrying the offending config field.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& reason)
      : std::invalid_argument(reason), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GridSpec {
  double r_max = 1000.0;
  int n_cells = 4096;
  double stretch = 2.0;
};

struct InitialSpec {
  std::string source = "family";  // family | preset | checkpoint
  std::string family = "sigma";   // v | sigma | disk
  std::string preset;  // bump | dilate | tail_matched | vbump1 | vbump2 | vbump3
  std::string checkpoint;
  double kappa = 1.0;
  double mass = 8.0 * 3.14159265358979323846;
  double lambda = 1.0;
  double radius = 1.0;
  double epsilon = 0.05;
  bool cell_average = false;
};

struct RunSpec {
  std::string flow = "fd";  // fd | ks
  double kappa = 1.0;
  double mass = 8.0 * 3.14159265358979323846;
  double t_end = 10.0;
  FlowControls controls;
};

struct ProbeSpec {
  std::vector<std::string> list;
  double p = 1.5;
  double eps = 0.1;
  double q = 3.0;
  std::uint64_t seed = 42;
};

struct OutputSpec {
  std::string dir = "out";
  std::vector<std::string> formats = {"csv", "json"};
};

/// Key = value configuration with [grid], [initial], [run], [probes],
/// [output] sections. Numeric values accept a "pi" suffix (mass = 8pi).
struct ExperimentConfig {
  GridSpec grid;
  InitialSpec initial;
  RunSpec run;
  ProbeSpec probes;
  OutputSpec output;
  std::string canonical_text;  // normalized key=value dump used for hashing

  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
  void validate() const;  // throws ValidationError before any computation
};

GridPtr build_grid(const GridSpec& g);

/// Initial data from the config: family samples, named perturbation presets
/// (mass-neutral bump redistributions, dilations, tail-matched scale
/// mismatches, v-profile bumps), or a checkpoint file.
RadialDensity build_initial(const ExperimentConfig& cfg, const GridPtr& grid);

/// Mass-neutral local redistribution of sigma_{kappa,M} (shape 1..3); the
/// tail is untouched so H_{kappa,M} stays finite.
RadialDensity perturbed_sigma(const GridPtr& grid, double kappa, double mass,
                              int shape, double eps);

/// sigma_{factor*kappa,M} core blended into exact sigma_{kappa,M} tails,
/// mass-corrected by a compact bump.
RadialDensity tail_matched_sigma(const GridPtr& grid, double kappa, double mass,
                                 double factor);

/// v + eps * shape_k for the GNS perturbation corpus (shape 1..3).
RadialDensity perturbed_v(const GridPtr& grid, int shape, double eps);

struct Checkpoint {
  RadialDensity state;
  double t = 0.0;
  double kappa = 0.0;
  double mass = 0.0;
};

/// Line-oriented text checkpoint: header (grid descriptor, t, kappa, M),
/// then one value per line.
void write_checkpoint(const std::string& path, const RadialDensity& state,
                      double t, double kappa, double mass);
Checkpoint read_checkpoint(const std::string& path);

/// Diagnostics CSV with the fixed header t,mass,F,hls_deficit,H,D,S,N1,l32,mu_fit.
std::string diagnostics_csv(const FlowTrajectory& traj);

/// Manifest: config hash, version, grid, tolerances, seed, artifact hashes.
/// No timestamps; repeated runs of the same config are byte-identical.
std::string manifest_json(const ExperimentConfig& cfg,
                          const std::map<std::string, std::string>& artifacts);

/// Executes the configured pipeline for one subcommand (deficit, lift, fit,
/// evolve-fd, evolve-ks, verify:<target>, rates) and writes artifacts into
/// cfg.output.dir. Returns 0 on success, 3 on numerical failure. Validation
/// problems throw ValidationError (CLI exit 2). `quiet` suppresses stdout.
int run_experiment(const ExperimentConfig& cfg, const std::string& mode,
                   bool quiet);

}  // namespace gns

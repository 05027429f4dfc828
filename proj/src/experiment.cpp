#include "gns/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "gns/errors.hpp"
#include "gns/families.hpp"
#include "gns/functionals.hpp"
#include "gns/numerics.hpp"
#include "gns/sobolev_lift.hpp"
#include "gns/stability.hpp"
#include "gns/transport.hpp"

#include "json.hpp"

namespace gns {

namespace {
constexpr double pi = std::numbers::pi;
constexpr const char* kVersion = "gnslab 0.1.0";

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Numbers may carry a trailing "pi" multiplier: "8pi", "0.5pi".
double parse_number(const std::string& field, std::string v) {
  v = trim(v);
  double mult = 1.0;
  if (v.size() > 2 && v.substr(v.size() - 2) == "pi") {
    mult = pi;
    v = trim(v.substr(0, v.size() - 2));
    if (v.empty()) return pi;
  }
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x * mult;
  } catch (const std::exception&) {
    throw ValidationError(field, "not a number: " + v);
  }
}

bool parse_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(field, "not a boolean: " + v);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}
}  // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::string section;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(section, "malformed line (expected key = value): " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    // Keys may be fully qualified (section.key) outside any section.
    const std::string full =
        key.find('.') != std::string::npos ? key : section + "." + key;
    kv[full] = val;
  }

  auto take = [&](const std::string& key, auto setter) {
    const auto it = kv.find(key);
    if (it != kv.end()) {
      setter(it->second);
      kv.erase(it);
    }
  };
  take("grid.r_max", [&](const std::string& v) { cfg.grid.r_max = parse_number("grid.r_max", v); });
  take("grid.n_cells", [&](const std::string& v) {
    cfg.grid.n_cells = static_cast<int>(parse_number("grid.n_cells", v));
  });
  take("grid.stretch", [&](const std::string& v) { cfg.grid.stretch = parse_number("grid.stretch", v); });

  take("initial.source", [&](const std::string& v) {
    if (!v.empty()) cfg.initial.source = v;
  });
  take("initial.family", [&](const std::string& v) {
    if (!v.empty()) cfg.initial.family = v;
  });
  take("initial.preset", [&](const std::string& v) {
    if (v.empty()) return;
    cfg.initial.preset = v;
    if (cfg.initial.source == "family") cfg.initial.source = "preset";
  });
  take("initial.checkpoint", [&](const std::string& v) {
    if (v.empty()) return;
    cfg.initial.checkpoint = v;
    if (cfg.initial.source == "family") cfg.initial.source = "checkpoint";
  });
  take("initial.kappa", [&](const std::string& v) { cfg.initial.kappa = parse_number("initial.kappa", v); });
  take("initial.mass", [&](const std::string& v) { cfg.initial.mass = parse_number("initial.mass", v); });
  take("initial.lambda", [&](const std::string& v) { cfg.initial.lambda = parse_number("initial.lambda", v); });
  take("initial.radius", [&](const std::string& v) { cfg.initial.radius = parse_number("initial.radius", v); });
  take("initial.epsilon", [&](const std::string& v) { cfg.initial.epsilon = parse_number("initial.epsilon", v); });
  take("initial.cell_average", [&](const std::string& v) {
    cfg.initial.cell_average = parse_bool("initial.cell_average", v);
  });

  take("run.flow", [&](const std::string& v) { cfg.run.flow = v; });
  take("run.kappa", [&](const std::string& v) { cfg.run.kappa = parse_number("run.kappa", v); });
  take("run.mass", [&](const std::string& v) { cfg.run.mass = parse_number("run.mass", v); });
  take("run.t_end", [&](const std::string& v) { cfg.run.t_end = parse_number("run.t_end", v); });
  take("run.dt_init", [&](const std::string& v) { cfg.run.controls.dt_init = parse_number("run.dt_init", v); });
  take("run.dt_max", [&](const std::string& v) { cfg.run.controls.dt_max = parse_number("run.dt_max", v); });
  take("run.cfl", [&](const std::string& v) { cfg.run.controls.cfl = parse_number("run.cfl", v); });
  take("run.full_newton", [&](const std::string& v) {
    cfg.run.controls.full_newton = parse_bool("run.full_newton", v);
  });
  take("run.track_mu", [&](const std::string& v) {
    cfg.run.controls.track_mu = parse_bool("run.track_mu", v);
  });
  take("run.sample_dt", [&](const std::string& v) {
    cfg.run.controls.sample_dt = parse_number("run.sample_dt", v);
  });
  take("run.sample_growth", [&](const std::string& v) {
    cfg.run.controls.sample_growth = parse_number("run.sample_growth", v);
  });
  take("run.diag_kappa", [&](const std::string& v) {
    cfg.run.controls.diag_kappa = parse_number("run.diag_kappa", v);
  });

  take("probes.list", [&](const std::string& v) {
    if (!v.empty()) cfg.probes.list = split_list(v);
  });
  take("probes.p", [&](const std::string& v) { cfg.probes.p = parse_number("probes.p", v); });
  take("probes.eps", [&](const std::string& v) { cfg.probes.eps = parse_number("probes.eps", v); });
  take("probes.q", [&](const std::string& v) { cfg.probes.q = parse_number("probes.q", v); });
  take("probes.seed", [&](const std::string& v) {
    cfg.probes.seed = static_cast<std::uint64_t>(parse_number("probes.seed", v));
  });

  take("output.dir", [&](const std::string& v) {
    if (!v.empty()) cfg.output.dir = v;
  });
  take("output.formats", [&](const std::string& v) {
    if (!v.empty()) cfg.output.formats = split_list(v);
  });

  if (!kv.empty()) {
    throw ValidationError(kv.begin()->first, "unknown config key");
  }

  // Canonical dump for hashing: deterministic key order, normalized values.
  std::ostringstream os;
  os << "grid.r_max=" << format_double(cfg.grid.r_max) << '\n'
     << "grid.n_cells=" << cfg.grid.n_cells << '\n'
     << "grid.stretch=" << format_double(cfg.grid.stretch) << '\n'
     << "initial.source=" << cfg.initial.source << '\n'
     << "initial.family=" << cfg.initial.family << '\n'
     << "initial.preset=" << cfg.initial.preset << '\n'
     << "initial.checkpoint=" << cfg.initial.checkpoint << '\n'
     << "initial.kappa=" << format_double(cfg.initial.kappa) << '\n'
     << "initial.mass=" << format_double(cfg.initial.mass) << '\n'
     << "initial.lambda=" << format_double(cfg.initial.lambda) << '\n'
     << "initial.radius=" << format_double(cfg.initial.radius) << '\n'
     << "initial.epsilon=" << format_double(cfg.initial.epsilon) << '\n'
     << "initial.cell_average=" << (cfg.initial.cell_average ? 1 : 0) << '\n'
     << "run.flow=" << cfg.run.flow << '\n'
     << "run.kappa=" << format_double(cfg.run.kappa) << '\n'
     << "run.mass=" << format_double(cfg.run.mass) << '\n'
     << "run.t_end=" << format_double(cfg.run.t_end) << '\n'
     << "run.dt_init=" << format_double(cfg.run.controls.dt_init) << '\n'
     << "run.dt_max=" << format_double(cfg.run.controls.dt_max) << '\n'
     << "run.cfl=" << format_double(cfg.run.controls.cfl) << '\n'
     << "run.full_newton=" << (cfg.run.controls.full_newton ? 1 : 0) << '\n'
     << "run.track_mu=" << (cfg.run.controls.track_mu ? 1 : 0) << '\n'
     << "run.sample_dt=" << format_double(cfg.run.controls.sample_dt) << '\n'
     << "run.sample_growth=" << format_double(cfg.run.controls.sample_growth) << '\n'
     << "run.diag_kappa=" << format_double(cfg.run.controls.diag_kappa) << '\n'
     << "probes.p=" << format_double(cfg.probes.p) << '\n'
     << "probes.eps=" << format_double(cfg.probes.eps) << '\n'
     << "probes.q=" << format_double(cfg.probes.q) << '\n'
     << "probes.seed=" << cfg.probes.seed << '\n';
  os << "probes.list=";
  for (std::size_t i = 0; i < cfg.probes.list.size(); ++i) {
    os << (i ? "," : "") << cfg.probes.list[i];
  }
  os << '\n' << "output.dir=" << cfg.output.dir << '\n' << "output.formats=";
  for (std::size_t i = 0; i < cfg.output.formats.size(); ++i) {
    os << (i ? "," : "") << cfg.output.formats[i];
  }
  os << '\n';
  cfg.canonical_text = os.str();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

void ExperimentConfig::validate() const {
  if (!(grid.r_max > 0.0) || !std::isfinite(grid.r_max)) {
    throw ValidationError("grid.r_max", "r_max must be positive");
  }
  if (grid.n_cells < 3) throw ValidationError("grid.n_cells", "n_cells must be >= 3");
  if (!(grid.stretch >= 1.0)) throw ValidationError("grid.stretch", "stretch must be >= 1");
  if (initial.source != "family" && initial.source != "preset" &&
      initial.source != "checkpoint") {
    throw ValidationError("initial.source", "unknown source: " + initial.source);
  }
  if (initial.source == "family" && initial.family != "v" &&
      initial.family != "sigma" && initial.family != "disk") {
    throw ValidationError("initial.family", "unknown family: " + initial.family);
  }
  if (initial.source == "preset") {
    static const std::vector<std::string> known = {
        "bump", "dilate", "tail_matched", "vbump1", "vbump2", "vbump3"};
    if (std::find(known.begin(), known.end(), initial.preset) == known.end()) {
      throw ValidationError("initial.preset", "unknown preset: " + initial.preset);
    }
  }
  if (!(initial.kappa > 0.0)) throw ValidationError("initial.kappa", "kappa must be positive");
  if (!(initial.mass > 0.0)) throw ValidationError("initial.mass", "mass must be positive");
  if (!(initial.lambda > 0.0)) throw ValidationError("initial.lambda", "lambda must be positive");
  if (!(initial.radius > 0.0)) throw ValidationError("initial.radius", "radius must be positive");
  if (run.flow != "fd" && run.flow != "ks") {
    throw ValidationError("run.flow", "flow must be fd or ks");
  }
  if (!(run.kappa > 0.0)) throw ValidationError("run.kappa", "kappa must be positive");
  if (!(run.mass > 0.0)) throw ValidationError("run.mass", "mass must be positive");
  if (!(run.t_end > 0.0)) throw ValidationError("run.t_end", "t_end must be positive");
  if (!(run.controls.dt_max > 0.0) || !(run.controls.dt_init > 0.0)) {
    throw ValidationError("run.dt", "time steps must be positive");
  }
  if (!(probes.p > 0.0 && probes.p < 2.0)) {
    throw ValidationError("probes.p", "p must lie in (0, 2)");
  }
  if (!(probes.eps > 0.0 && probes.eps < 1.0)) {
    throw ValidationError("probes.eps", "eps must lie in (0, 1)");
  }
  if (!(probes.q > 2.0)) throw ValidationError("probes.q", "q must be > 2");
  if (output.dir.empty()) throw ValidationError("output.dir", "output dir must be set");
}

GridPtr build_grid(const GridSpec& g) {
  return make_grid(g.r_max, g.n_cells, g.stretch);
}

RadialDensity perturbed_sigma(const GridPtr& grid, double kappa, double mass,
                              int shape, double eps) {
  struct Params { double r1, s1, r2, s2; };
  static const Params table[3] = {{0.5, 0.35, 1.8, 0.5},
                                  {1.0, 0.40, 2.6, 0.6},
                                  {0.3, 0.25, 1.2, 0.4}};
  const Params& p = table[(shape - 1) % 3];
  const double scale = std::sqrt(kappa);
  const auto& c = grid->centers();
  const auto& w = grid->weights();
  std::vector<double> g1(c.size()), g2(c.size());
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double r = c[i] / scale;
    g1[i] = std::exp(-(r - p.r1) * (r - p.r1) / (p.s1 * p.s1));
    g2[i] = std::exp(-(r - p.r2) * (r - p.r2) / (p.s2 * p.s2));
    m1 += w[i] * g1[i];
    m2 += w[i] * g2[i];
  }
  const double balance = m1 / m2;
  auto sigma_at = [&](double r) {
    const double d = kappa + r * r;
    return (mass / pi) * kappa / (d * d);
  };
  const double amp = eps * std::min(sigma_at(p.r1 * scale), sigma_at(p.r2 * scale));
  std::vector<double> v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    v[i] = std::max(0.0, sigma_at(c[i]) + amp * (g1[i] - balance * g2[i]));
  }
  return RadialDensity(grid, std::move(v), Kind::density);
}

RadialDensity tail_matched_sigma(const GridPtr& grid, double kappa, double mass,
                                 double factor) {
  const double mu = factor * kappa;
  const double rc = 6.0 * std::sqrt(kappa), s = 0.5 * std::sqrt(kappa);
  const auto& c = grid->centers();
  const auto& w = grid->weights();
  auto sig = [&](double k, double r) {
    const double d = k + r * r;
    return (mass / pi) * k / (d * d);
  };
  std::vector<double> v(c.size()), fix(c.size());
  double target = 0.0, got = 0.0, fix_mass = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double chi = 0.5 * (1.0 - std::tanh((c[i] - rc) / s));
    v[i] = sig(kappa, c[i]) + chi * (sig(mu, c[i]) - sig(kappa, c[i]));
    fix[i] = std::exp(-4.0 * (c[i] - std::sqrt(kappa)) * (c[i] - std::sqrt(kappa)));
    target += w[i] * sig(kappa, c[i]);
    got += w[i] * v[i];
    fix_mass += w[i] * fix[i];
  }
  const double delta = (target - got) / fix_mass;
  for (std::size_t i = 0; i < c.size(); ++i) {
    v[i] = std::max(0.0, v[i] + delta * fix[i]);
  }
  return RadialDensity(grid, std::move(v), Kind::density);
}

RadialDensity perturbed_v(const GridPtr& grid, int shape, double eps) {
  const auto& c = grid->centers();
  std::vector<double> v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double r = c[i];
    double s = 0.0;
    switch ((shape - 1) % 3) {
      case 0: s = std::exp(-r * r); break;
      case 1: s = std::exp(-(r - 1.5) * (r - 1.5)); break;
      default: s = r * r / std::pow(1.0 + r * r, 3); break;
    }
    v[i] = 1.0 / std::sqrt(1.0 + r * r) + eps * s;
  }
  return RadialDensity(grid, std::move(v), Kind::profile);
}

RadialDensity build_initial(const ExperimentConfig& cfg, const GridPtr& grid) {
  const InitialSpec& s = cfg.initial;
  if (s.source == "family") {
    if (s.family == "v") return sample_v(grid, s.lambda);
    if (s.family == "sigma") {
      return sample_sigma(grid, s.kappa, s.mass, s.cell_average);
    }
    return uniform_disk(grid, s.radius, s.mass);
  }
  if (s.source == "preset") {
    if (s.preset == "bump") return perturbed_sigma(grid, s.kappa, s.mass, 1, s.epsilon);
    if (s.preset == "dilate") {
      const double a = 1.0 + s.epsilon;
      return sample_sigma(grid, s.kappa / (a * a), s.mass, s.cell_average);
    }
    if (s.preset == "tail_matched") {
      return tail_matched_sigma(grid, s.kappa, s.mass, 1.0 + s.epsilon);
    }
    if (s.preset == "vbump1") return perturbed_v(grid, 1, s.epsilon);
    if (s.preset == "vbump2") return perturbed_v(grid, 2, s.epsilon);
    return perturbed_v(grid, 3, s.epsilon);
  }
  Checkpoint ck = read_checkpoint(s.checkpoint);
  if (ck.state.grid != grid) {
    return resample(ck.state, grid).density;
  }
  return ck.state;
}

void write_checkpoint(const std::string& path, const RadialDensity& state,
                      double t, double kappa, double mass) {
  std::ofstream out(path);
  if (!out) throw numerical_error("write_checkpoint: cannot open " + path);
  out << "gnslab-checkpoint 1\n";
  out << "grid " << state.grid->descriptor() << '\n';
  out << "state t=" << format_double(t) << " kappa=" << format_double(kappa)
      << " mass=" << format_double(mass) << " kind="
      << (state.kind == Kind::density ? "density" : "profile") << '\n';
  for (double v : state.values) out << format_double(v) << '\n';
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("initial.checkpoint", "cannot open checkpoint: " + path);
  std::string line;
  std::getline(in, line);
  if (trim(line) != "gnslab-checkpoint 1") {
    throw ValidationError("initial.checkpoint", "bad checkpoint header");
  }
  std::getline(in, line);
  std::istringstream gl(line);
  std::string tag;
  double r_max = 0, stretch = 0;
  int n = 0;
  gl >> tag >> r_max >> n >> stretch;
  if (tag != "grid") throw ValidationError("initial.checkpoint", "missing grid line");
  Checkpoint ck;
  std::getline(in, line);
  Kind kind = Kind::density;
  {
    std::istringstream sl(line);
    sl >> tag;
    if (tag != "state") throw ValidationError("initial.checkpoint", "missing state line");
    std::string item;
    while (sl >> item) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
      if (key == "t") ck.t = std::stod(val);
      if (key == "kappa") ck.kappa = std::stod(val);
      if (key == "mass") ck.mass = std::stod(val);
      if (key == "kind") kind = (val == "profile") ? Kind::profile : Kind::density;
    }
  }
  GridPtr grid = make_grid(r_max, n, stretch);
  std::vector<double> values;
  values.reserve(n);
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  if (static_cast<int>(values.size()) != n) {
    throw ValidationError("initial.checkpoint", "value count does not match grid");
  }
  ck.state = RadialDensity(grid, std::move(values), kind);
  return ck;
}

std::string diagnostics_csv(const FlowTrajectory& traj) {
  std::ostringstream os;
  os << "t,mass,F,hls_deficit,H,D,S,N1,l32,mu_fit\n";
  for (const DiagnosticsRow& r : traj.diagnostics) {
    os << format_double(r.t) << ',' << format_double(r.mass) << ','
       << format_double(r.log_hls) << ',' << format_double(r.hls_deficit) << ','
       << format_double(r.fd_entropy) << ',' << format_double(r.dissipation)
       << ',' << format_double(r.entropy) << ',' << format_double(r.n1) << ','
       << format_double(r.l32) << ',' << format_double(r.mu_fit) << '\n';
  }
  return os.str();
}

std::string manifest_json(const ExperimentConfig& cfg,
                          const std::map<std::string, std::string>& artifacts) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["config_hash"] = std::to_string(fnv1a64(cfg.canonical_text));
  j["grid"] = {{"r_max", cfg.grid.r_max},
               {"n_cells", cfg.grid.n_cells},
               {"stretch", cfg.grid.stretch}};
  j["seed"] = cfg.probes.seed;
  j["tolerances"] = {{"deficit_abs", 1e-6},
                     {"hls_deficit_abs", 1e-3},
                     {"mass_rel", 1e-6},
                     {"monotone_slack", 1e-8}};
  nlohmann::ordered_json arts;
  for (const auto& [name, content] : artifacts) {
    arts[name] = std::to_string(fnv1a64(content));
  }
  j["artifacts"] = arts;
  return j.dump(2) + "\n";
}

namespace {

// Collects artifacts in memory, then writes them with deterministic bytes.
struct ArtifactSet {
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string content) {
    files[name] = std::move(content);
  }
  void write_all(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output.dir);
    files["manifest.json"] = manifest_json(cfg, files);
    for (const auto& [name, content] : files) {
      std::ofstream out(fs::path(cfg.output.dir) / name, std::ios::binary);
      if (!out) throw numerical_error("cannot write artifact: " + name);
      out << content;
    }
  }
};

RadialDensity as_profile(const RadialDensity& f) {
  return f.kind == Kind::profile ? f : profile_of(f);
}
RadialDensity as_density(const RadialDensity& f) {
  return f.kind == Kind::density ? f : density_of(f);
}

int mode_deficit(const ExperimentConfig& cfg, bool quiet) {
  const GridPtr grid = build_grid(cfg.grid);
  const RadialDensity f = build_initial(cfg, grid);
  const FunctionalReport rep =
      evaluate_functionals(f, cfg.initial.kappa, cfg.initial.mass, {1.0, cfg.probes.p});
  ArtifactSet arts;
  arts.add("report.json", rep.to_json() + "\n");
  const std::vector<double> plist = {1.0, cfg.probes.p};
  arts.add("report.csv", FunctionalReport::csv_header(plist) + "\n" +
                             rep.to_csv_row(plist) + "\n");
  arts.write_all(cfg);
  if (!quiet) {
    std::cout << "gns_deficit=" << format_double(rep.gns_deficit)
              << " hls_deficit=" << format_double(rep.hls_deficit)
              << " dissipation=" << format_double(rep.dissipation) << '\n';
  }
  return 0;
}

int mode_lift(const ExperimentConfig& cfg, bool quiet) {
  const GridPtr grid = build_grid(cfg.grid);
  const RadialDensity u0 = as_profile(build_initial(cfg, grid));
  const BalanceResult bal = balance_normalize(u0);
  const LiftReport lift = lift_identity(bal.profile);
  nlohmann::ordered_json j;
  j["mu_balance"] = bal.mu;
  j["amplitude"] = bal.amplitude;
  j["gns_side"] = lift.gns_side;
  j["sobolev_side"] = lift.sobolev_side;
  j["residual"] = lift.residual;
  j["f_norm4"] = lift.f_norm4;
  j["f_norm4_pow4"] = lift.f_norm4_pow4;
  j["excluded_mass"] = lift.excluded_mass;
  ArtifactSet arts;
  arts.add("lift.json", j.dump(2) + "\n");
  arts.write_all(cfg);
  if (!quiet) {
    std::cout << "gns_side=" << format_double(lift.gns_side)
              << " sobolev_side=" << format_double(lift.sobolev_side)
              << " residual=" << format_double(lift.residual) << '\n';
  }
  return 0;
}

nlohmann::ordered_json fit_json(const OptimizerFit& fit) {
  nlohmann::ordered_json j;
  j["lambda_star"] = fit.lambda_star;
  j["offset_star"] = fit.offset_star;
  j["distance_l1"] = fit.distance_l1;
  j["bracket"] = {fit.bracket_lo, fit.bracket_hi};
  j["evaluations"] = fit.evaluations;
  j["converged"] = fit.converged;
  j["boundary_hit"] = fit.boundary_hit;
  j["multistart"] = fit.multistart;
  if (fit.lambda_min_entropy > 0.0) j["lambda_min_entropy"] = fit.lambda_min_entropy;
  return j;
}

int mode_fit(const ExperimentConfig& cfg, const std::string& target, bool quiet) {
  const GridPtr grid = build_grid(cfg.grid);
  const RadialDensity f = build_initial(cfg, grid);
  nlohmann::ordered_json j;
  if (target == "sixth" || target == "fourth") {
    RadialDensity u = as_profile(f);
    u = (target == "sixth") ? normalize_sixth(u) : normalize_fourth(u);
    const OptimizerFit fit =
        (target == "sixth") ? fit_nearest_sixth(u) : fit_nearest_fourth(u);
    j = fit_json(fit);
    const DeficitReport d = gns_deficit(u);
    j["gns_deficit"] = d.value;
  } else if (target == "hls") {
    const StabilityProbe probe = hls_fit(as_density(f), cfg.probes.eps);
    j = fit_json(probe.fit);
    j["hls_deficit"] = probe.deficit;
    j["exponent"] = probe.exponent;
    j["ratio"] = probe.ratio;
  } else {
    throw ValidationError("fit.target", "target must be sixth, fourth, or hls");
  }
  ArtifactSet arts;
  arts.add("fit.json", j.dump(2) + "\n");
  arts.write_all(cfg);
  if (!quiet) std::cout << j.dump(2) << '\n';
  return 0;
}

FlowTrajectory run_flow(const ExperimentConfig& cfg, const GridPtr& grid,
                        const RadialDensity& init) {
  if (cfg.run.flow == "fd") {
    return fd_evolve(init, cfg.run.kappa, cfg.run.mass, cfg.run.t_end,
                     cfg.run.controls);
  }
  FlowControls ctl = cfg.run.controls;
  ctl.diag_kappa = cfg.run.kappa;
  return ks_evolve(init, cfg.run.t_end, ctl);
}

int mode_evolve(const ExperimentConfig& cfg, bool quiet) {
  const GridPtr grid = build_grid(cfg.grid);
  const RadialDensity init = as_density(build_initial(cfg, grid));
  const FlowTrajectory traj = run_flow(cfg, grid, init);
  ArtifactSet arts;
  arts.add("diagnostics.csv", diagnostics_csv(traj));
  // Final checkpoint as an artifact (deterministic bytes).
  {
    std::ostringstream os;
    os << "gnslab-checkpoint 1\n"
       << "grid " << grid->descriptor() << '\n'
       << "state t=" << format_double(traj.times.back())
       << " kappa=" << format_double(cfg.run.kappa)
       << " mass=" << format_double(cfg.run.mass) << " kind=density\n";
    const RadialDensity& last = traj.states.empty() ? init : traj.states.back();
    for (double v : last.values) os << format_double(v) << '\n';
    arts.add("checkpoint_final.txt", os.str());
  }
  nlohmann::ordered_json j;
  j["aborted"] = traj.aborted;
  j["abort_reason"] = traj.abort_reason;
  j["steps_accepted"] = traj.meta.steps_accepted;
  j["steps_rejected"] = traj.meta.steps_rejected;
  j["mass_initial"] = traj.meta.mass_initial;
  j["mass_final"] = traj.meta.mass_final;
  j["mass_drift_rel"] =
      (traj.meta.mass_final - traj.meta.mass_initial) / traj.meta.mass_initial;
  j["truncation_flux"] = traj.meta.truncation_flux;
  j["dt_min_used"] = traj.meta.dt_min_used;
  j["dt_max_used"] = traj.meta.dt_max_used;
  j["mass_warning"] = traj.meta.mass_warning;
  j["blowup_watch"] = traj.meta.blowup_watch;
  nlohmann::ordered_json probes = nlohmann::ordered_json::array();
  for (const std::string& p : cfg.probes.list) probes.push_back(p);
  j["probes"] = probes;
  arts.add("summary.json", j.dump(2) + "\n");
  arts.write_all(cfg);
  if (!quiet) {
    std::cout << "t_end=" << format_double(traj.times.back())
              << " steps=" << traj.meta.steps_accepted
              << " mass_drift=" << format_double(
                     (traj.meta.mass_final - traj.meta.mass_initial) /
                     traj.meta.mass_initial)
              << (traj.aborted ? " ABORTED: " + traj.abort_reason : "") << '\n';
  }
  return traj.aborted ? 3 : 0;
}

int mode_rates(const ExperimentConfig& cfg, bool quiet) {
  const GridPtr grid = build_grid(cfg.grid);
  const RadialDensity init = as_density(build_initial(cfg, grid));
  const FlowTrajectory traj = run_flow(cfg, grid, init);
  std::vector<double> t, fdef, probe;
  const double fmin = log_hls_minimum(traj.meta.mass_initial);
  for (const auto& row : traj.diagnostics) {
    t.push_back(row.t);
    fdef.push_back(row.log_hls - fmin);
  }
  const double w_lo = 1.0, w_hi = cfg.run.t_end;
  const RateFit power = rate_fit(t, fdef, RateModel::power_law, w_lo, w_hi);
  nlohmann::ordered_json j;
  j["f_deficit_power"] = {{"exponent", power.exponent},
                          {"prefactor", power.prefactor},
                          {"residual", power.residual},
                          {"window", {w_lo, w_hi}}};
  const std::vector<ScaleSample> scale = scale_track(traj);
  nlohmann::ordered_json ss = nlohmann::ordered_json::array();
  for (const auto& s : scale) {
    ss.push_back({{"t", s.t}, {"mu", s.mu}, {"log_probe", s.log_probe}});
  }
  j["scale_track"] = ss;
  ArtifactSet arts;
  arts.add("rates.json", j.dump(2) + "\n");
  arts.add("diagnostics.csv", diagnostics_csv(traj));
  arts.write_all(cfg);
  if (!quiet) {
    std::cout << "f_deficit exponent=" << format_double(power.exponent) << '\n';
  }
  return 0;
}

int mode_verify_monotone(const ExperimentConfig& cfg, bool quiet) {
  const GridPtr grid = build_grid(cfg.grid);
  const RadialDensity init = as_density(build_initial(cfg, grid));
  const FlowTrajectory traj = run_flow(cfg, grid, init);
  int viol_f = 0, viol_h = 0;
  for (std::size_t i = 1; i < traj.diagnostics.size(); ++i) {
    const auto& a = traj.diagnostics[i - 1];
    const auto& b = traj.diagnostics[i];
    const double tol_f = 1e-8 * std::abs(a.log_hls) + 1e-10;
    const double tol_h = 1e-8 * std::abs(a.fd_entropy) + 1e-10;
    if (b.log_hls > a.log_hls + tol_f) ++viol_f;
    if (b.fd_entropy > a.fd_entropy + tol_h) ++viol_h;
  }
  const bool pass = viol_f == 0 && viol_h == 0 && !traj.aborted;
  ArtifactSet arts;
  arts.add("diagnostics.csv", diagnostics_csv(traj));
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["violations_F"] = viol_f;
  j["violations_H"] = viol_h;
  j["samples"] = traj.diagnostics.size();
  arts.add("summary.json", j.dump(2) + "\n");
  arts.write_all(cfg);
  if (!quiet) {
    std::cout << (pass ? "PASS" : "FAIL") << " monotone (F viol " << viol_f
              << ", H viol " << viol_h << ")\n";
  }
  return pass ? 0 : 3;
}

int mode_verify_w2(const ExperimentConfig& cfg, bool quiet, bool interp) {
  const GridPtr grid = build_grid(cfg.grid);
  const RadialDensity init = as_density(build_initial(cfg, grid));
  const FlowTrajectory traj = run_flow(cfg, grid, init);
  const double h0 = traj.diagnostics.front().fd_entropy;
  std::ostringstream csv;
  bool pass = !traj.aborted;
  double k_bound = 0.0;
  if (interp) {
    for (const auto& s : traj.states) {
      std::vector<double> f(s.values.size());
      for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = std::pow(s.values[i], cfg.probes.q + 1.0);
      }
      k_bound = std::max(k_bound, integrate(RadialDensity(s.grid, std::move(f),
                                                          Kind::density)));
    }
    k_bound *= 1.05;
    csv << "s,t,lhs,rhs,slack,w2\n";
  } else {
    csv << "s,t,w2_sq,bound,slack\n";
  }
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    for (std::size_t j = i + 1; j < traj.states.size(); ++j) {
      const double ts = traj.times[i], tt = traj.times[j];
      if (interp) {
        const InterpolationRecord rec = interpolation_check(
            traj.states[i], traj.states[j], cfg.probes.q, k_bound);
        if (rec.slack < 0.0) pass = false;
        csv << format_double(ts) << ',' << format_double(tt) << ','
            << format_double(rec.lhs) << ',' << format_double(rec.rhs) << ','
            << format_double(rec.slack) << ',' << format_double(rec.w2) << '\n';
      } else {
        const double w2sq = w2_radial(traj.states[i], traj.states[j]).w2_sq;
        const double bound = h0 * (tt - ts) + 1e-9;
        if (w2sq > bound) pass = false;
        csv << format_double(ts) << ',' << format_double(tt) << ','
            << format_double(w2sq) << ',' << format_double(bound) << ','
            << format_double(bound - w2sq) << '\n';
      }
    }
  }
  ArtifactSet arts;
  arts.add(interp ? "interp.csv" : "w2.csv", csv.str());
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["pairs"] = traj.states.size() * (traj.states.size() - 1) / 2;
  if (interp) j["k_bound"] = k_bound;
  arts.add("summary.json", j.dump(2) + "\n");
  arts.write_all(cfg);
  if (!quiet) std::cout << (pass ? "PASS " : "FAIL ") << (interp ? "interp" : "w2") << '\n';
  return pass ? 0 : 3;
}

int mode_verify_continuity(const ExperimentConfig& cfg, bool quiet) {
  const GridPtr grid = build_grid(cfg.grid);
  const double kappa = cfg.initial.kappa, mass = cfg.initial.mass;
  std::mt19937_64 rng(cfg.probes.seed);
  std::uniform_int_distribution<int> shape_pick(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Class bounds fixed from the base family with headroom.
  const RadialDensity base = sample_sigma(grid, kappa, mass);
  const MomentsReport base_m = moments_entropy(base, {cfg.probes.p});
  ClassParams cls;
  cls.p = cfg.probes.p;
  cls.q = cfg.probes.q;
  cls.A = 2.0 * base_m.moment.at(cfg.probes.p);
  {
    std::vector<double> fq(base.values.size());
    for (std::size_t i = 0; i < fq.size(); ++i) fq[i] = std::pow(base.values[i], cls.q);
    cls.B = 2.0 * integrate(RadialDensity(grid, std::move(fq), Kind::density));
  }

  std::ostringstream csv;
  csv << "pair,l1,dF,dS,dU\n";
  std::vector<double> lx, ly;
  double c_entropy = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double eps = 0.002 * std::pow(50.0, unit(rng));  // 0.002 .. 0.1
    const int sh_a = shape_pick(rng), sh_b = shape_pick(rng);
    const RadialDensity rho = perturbed_sigma(grid, kappa, mass, sh_a, eps);
    const RadialDensity sig =
        perturbed_sigma(grid, kappa, mass, sh_b, 0.35 * eps);
    const ContinuityRecord rec = continuity_probe(rho, sig, cls);
    csv << k << ',' << format_double(rec.l1_distance) << ','
        << format_double(rec.d_log_hls) << ',' << format_double(rec.d_entropy)
        << ',' << format_double(rec.d_interaction) << '\n';
    if (rec.l1_distance > 0.0 && rec.d_log_hls > 0.0) {
      lx.push_back(std::log(rec.l1_distance));
      ly.push_back(std::log(rec.d_log_hls));
    }
    if (rec.l1_distance > 0.0 && rec.l1_distance < 0.5) {
      c_entropy = std::max(
          c_entropy, rec.d_entropy / (rec.l1_distance *
                                      std::abs(std::log(rec.l1_distance))));
    }
  }
  const LineFit fit = fit_line(lx, ly);
  const bool pass = fit.slope >= 0.9 && std::isfinite(c_entropy);
  ArtifactSet arts;
  arts.add("continuity.csv", csv.str());
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["loglog_slope"] = fit.slope;
  j["entropy_modulus_C"] = c_entropy;
  j["pairs_used"] = lx.size();
  j["class"] = {{"p", cls.p}, {"q", cls.q}, {"A", cls.A}, {"B", cls.B}};
  arts.add("summary.json", j.dump(2) + "\n");
  arts.write_all(cfg);
  if (!quiet) {
    std::cout << (pass ? "PASS" : "FAIL") << " continuity slope="
              << format_double(fit.slope) << '\n';
  }
  return pass ? 0 : 3;
}

int mode_verify_stability(const ExperimentConfig& cfg, bool quiet) {
  const GridPtr grid = build_grid(cfg.grid);
  const std::vector<double> eps_list = {0.05, 0.025, 0.0125};
  std::ostringstream csv;
  csv << "shape,eps,deficit6,dist6,ratio6,deficit4,dist4,ratio4,hls_deficit,"
         "hls_dist,hls_ratio\n";
  const double exp6 = 0.5;
  const double exp4 = (cfg.probes.p - 1.0) / (4.0 * cfg.probes.p);
  const double exp_hls = (1.0 - cfg.probes.eps) / 20.0;
  double worst_spread = 0.0;
  bool pass = true;
  for (int shape = 1; shape <= 3; ++shape) {
    std::vector<double> r6, r4, rh;
    for (double eps : eps_list) {
      const RadialDensity u_raw = perturbed_v(grid, shape, eps);
      const RadialDensity u6 = normalize_sixth(u_raw);
      const DeficitReport d6 = gns_deficit(u6);
      const OptimizerFit f6 = fit_nearest_sixth(u6);
      const double ratio6 = f6.distance_l1 / std::pow(d6.value, exp6);

      const RadialDensity u4 = normalize_fourth(u_raw);
      const DeficitReport d4 = gns_deficit(u4);
      const OptimizerFit f4 = fit_nearest_fourth(u4);
      const double ratio4 = f4.distance_l1 / std::pow(d4.value, exp4);

      const RadialDensity rho =
          perturbed_sigma(grid, cfg.initial.kappa, cfg.initial.mass, shape, eps);
      const StabilityProbe hp = hls_fit(rho, cfg.probes.eps);

      csv << shape << ',' << format_double(eps) << ','
          << format_double(d6.value) << ',' << format_double(f6.distance_l1)
          << ',' << format_double(ratio6) << ',' << format_double(d4.value)
          << ',' << format_double(f4.distance_l1) << ','
          << format_double(ratio4) << ',' << format_double(hp.deficit) << ','
          << format_double(hp.distance_l1) << ',' << format_double(hp.ratio)
          << '\n';
      r6.push_back(ratio6);
      r4.push_back(ratio4);
      rh.push_back(hp.ratio);
    }
    for (const auto& rs : {r6, r4, rh}) {
      const double spread = *std::max_element(rs.begin(), rs.end()) /
                            *std::min_element(rs.begin(), rs.end());
      worst_spread = std::max(worst_spread, spread);
      if (spread >= 5.0) pass = false;
    }
  }
  ArtifactSet arts;
  arts.add("stability.csv", csv.str());
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["worst_ratio_spread"] = worst_spread;
  j["exponents"] = {{"sixth", exp6}, {"fourth", exp4}, {"hls", exp_hls}};
  arts.add("summary.json", j.dump(2) + "\n");
  arts.write_all(cfg);
  if (!quiet) {
    std::cout << (pass ? "PASS" : "FAIL") << " stability spread="
              << format_double(worst_spread) << '\n';
  }
  return pass ? 0 : 3;
}
}  // namespace

int run_experiment(const ExperimentConfig& cfg, const std::string& mode,
                   bool quiet) {
  cfg.validate();
  try {
    if (mode == "deficit") return mode_deficit(cfg, quiet);
    if (mode == "lift") return mode_lift(cfg, quiet);
    if (mode == "fit-sixth") return mode_fit(cfg, "sixth", quiet);
    if (mode == "fit-fourth") return mode_fit(cfg, "fourth", quiet);
    if (mode == "fit-hls") return mode_fit(cfg, "hls", quiet);
    if (mode == "evolve-fd" || mode == "evolve-ks") return mode_evolve(cfg, quiet);
    if (mode == "rates") return mode_rates(cfg, quiet);
    if (mode == "verify-monotone") return mode_verify_monotone(cfg, quiet);
    if (mode == "verify-w2") return mode_verify_w2(cfg, quiet, false);
    if (mode == "verify-interp") return mode_verify_w2(cfg, quiet, true);
    if (mode == "verify-continuity") return mode_verify_continuity(cfg, quiet);
    if (mode == "verify-stability") return mode_verify_stability(cfg, quiet);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    if (!quiet) std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  throw ValidationError("mode", "unknown experiment mode: " + mode);
}

}  // namespace gns

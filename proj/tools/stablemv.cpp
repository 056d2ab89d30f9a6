// Batch front end: validates experiment configs, dispatches the rate
// studies and writes CSV/JSON artifacts plus a run manifest.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stablemv/config.hpp"
#include "stablemv/harness.hpp"

namespace fs = std::filesystem;
using namespace stablemv;

namespace {

constexpr const char* kVersion = "stablemv 0.1.0";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string timestamp_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool dump_paths = false;
  bool have_seed = false;
  std::uint64_t seed = 0;
  int threads = 0;
};

std::string resolve_out_dir(const Options& opt) {
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (const char* env = std::getenv("STABLEMV_OUT_DIR")) return env;
  return ".";
}

RunConfig load(const Options& opt) {
  std::vector<std::string> ov = opt.overrides;
  if (opt.have_seed) ov.push_back("system.seed=" + std::to_string(opt.seed));
  if (opt.threads > 0) ov.push_back("system.threads=" + std::to_string(opt.threads));
  if (opt.config_path.empty()) {
    // minimal empty document; everything from defaults and overrides
    return parse_config("{}", ov);
  }
  return load_config(opt.config_path, ov);
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path().empty() ? "." : p.parent_path());
  // write to a temp name, then rename: artifacts appear atomically
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
  }
  fs::rename(tmp, p);
}

void write_manifest(const std::string& command, const RunConfig& cfg,
                    const std::vector<std::string>& artifacts, const fs::path& dir,
                    const std::string& stem, double wall_seconds) {
  RunManifest m;
  m.command = command;
  m.config_echo = resolved_config_json(cfg);
  m.seed = cfg.study.base.seed;
  m.artifacts = artifacts;
  m.wall_seconds = wall_seconds;
  m.version = kVersion;
  write_file(dir / (stem + ".manifest.json"), m.to_json() + "\n");
}

int emit_study(const std::string& name, const RunConfig& cfg, const StudyReport& rep,
               const Options& opt, double wall_seconds) {
  fs::path dir = resolve_out_dir(opt);
  std::string stem = name + "-" + timestamp_now() + "-" + std::to_string(rep.seed);
  write_file(dir / (stem + ".csv"), rep.to_csv());
  write_file(dir / (stem + ".json"), rep.to_json() + "\n");
  write_manifest(name, cfg, {stem + ".csv", stem + ".json"}, dir, stem, wall_seconds);
  std::cout << name << ": " << (rep.pass ? "PASS" : "FAIL")
            << (rep.degenerate ? " (degenerate)" : "") << "  slope=" << rep.slope
            << " theory=" << rep.theory_slope << "\n";
  return rep.pass ? 0 : 1;
}

int run_study(const std::string& name, const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load(opt);
  StudyReport rep;
  if (name == "study-dt")
    rep = stepsize_study(cfg.study);
  else if (name == "study-n")
    rep = chaos_study(cfg.study);
  else if (name == "study-moment")
    rep = moment_study(cfg.study);
  else if (name == "study-emprate")
    rep = empirical_rate_study(cfg.study);
  else
    rep = mollification_study(cfg.study);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return emit_study(name, cfg, rep, opt, wall);
}

int run_noise_check(const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load(opt);
  const StableParams& p = cfg.study.base.noise;
  p.validate();
  const int samples = 200000;
  std::vector<double> flat(static_cast<std::size_t>(samples) * p.dim);
  for (int i = 0; i < samples; ++i) {
    NoiseStream s{cfg.study.base.seed, static_cast<std::uint64_t>(i)};
    sample_increment(p, 1.0, s, 0, flat.data() + static_cast<std::size_t>(i) * p.dim);
  }
  // fixed 8-point grid along the first axis and the diagonal
  static const double mags[] = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  std::ostringstream csv;
  csv << "u,empirical_cf,theoretical_cf\n";
  std::vector<double> u(p.dim, 0.0);
  for (double m : mags) {
    for (int i = 0; i < p.dim; ++i) u[i] = i == 0 ? m : 0.0;
    if (p.dim > 1) u[1] = m / 2.0;
    double emp = empirical_cf(flat, p.dim, u.data());
    double theo = std::exp(-characteristic_exponent(p, u.data()));
    csv << fmt_double(m) << ',' << fmt_double(emp) << ',' << fmt_double(theo) << '\n';
  }
  fs::path dir = resolve_out_dir(opt);
  std::string stem =
      "noise-check-" + timestamp_now() + "-" + std::to_string(cfg.study.base.seed);
  write_file(dir / (stem + ".csv"), csv.str());
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest("noise-check", cfg, {stem + ".csv"}, dir, stem, wall);
  std::cout << "noise-check: wrote " << (dir / (stem + ".csv")).string() << "\n";
  return 0;
}

EmpiricalMeasure read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<double> flat;
  int dim = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        numeric = false;  // header row
        break;
      }
    }
    if (!numeric) continue;
    if (dim == -1) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim)
      throw std::invalid_argument("ragged rows in " + path);
    flat.insert(flat.end(), row.begin(), row.end());
  }
  if (dim < 1 || flat.empty()) throw std::invalid_argument("no points in " + path);
  return EmpiricalMeasure(dim, std::move(flat));
}

int run_simulate(const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load(opt);
  LatticePath path = simulate_interacting(cfg.study.base);

  nlohmann::json j;
  j["adjusted_horizon"] = cfg.study.base.adjusted_horizon();
  j["config"] = nlohmann::json::parse(resolved_config_json(cfg));
  // terminal empirical moments per coordinate
  std::vector<double> mean(path.dim, 0.0), absmean(path.dim, 0.0);
  for (int i = 0; i < path.particles; ++i) {
    const double* x = path.state(path.steps, i);
    for (int c = 0; c < path.dim; ++c) {
      mean[c] += x[c];
      absmean[c] += std::fabs(x[c]);
    }
  }
  for (int c = 0; c < path.dim; ++c) {
    mean[c] /= path.particles;
    absmean[c] /= path.particles;
  }
  j["terminal_mean"] = mean;
  j["terminal_abs_mean"] = absmean;

  fs::path dir = resolve_out_dir(opt);
  std::string stem =
      "simulate-" + timestamp_now() + "-" + std::to_string(cfg.study.base.seed);
  std::vector<std::string> artifacts{stem + ".json"};
  write_file(dir / (stem + ".json"), j.dump(2) + "\n");
  if (opt.dump_paths) {
    std::ostringstream csv;
    csv << "time,particle";
    for (int c = 0; c < path.dim; ++c) csv << ",x" << c;
    csv << '\n';
    for (int k = 0; k <= path.steps; ++k)
      for (int i = 0; i < path.particles; ++i) {
        csv << fmt_double(k * path.delta) << ',' << i;
        const double* x = path.state(k, i);
        for (int c = 0; c < path.dim; ++c) csv << ',' << fmt_double(x[c]);
        csv << '\n';
      }
    write_file(dir / (stem + ".paths.csv"), csv.str());
    artifacts.push_back(stem + ".paths.csv");
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest("simulate", cfg, artifacts, dir, stem, wall);
  std::cout << "simulate: wrote " << (dir / (stem + ".json")).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interacting-particle Euler-Maruyama simulator for "
               "distribution-dependent SDEs driven by symmetric alpha-stable noise"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Options opt;
  app.add_option("--config", opt.config_path, "Config JSON path");
  app.add_option("--set", opt.overrides, "Override key=value (repeatable)");
  app.add_option("--out-dir", opt.out_dir, "Artifact directory (env STABLEMV_OUT_DIR)");
  app.add_option("--threads", opt.threads, "Worker threads");
  auto* seed_opt = app.add_option("--seed", opt.seed, "RNG seed (overrides config)");
  app.add_flag("--dump-paths", opt.dump_paths, "Dump full trajectories (large)");

  app.add_subcommand("noise-check", "Empirical vs theoretical characteristic function");
  auto* wass = app.add_subcommand("wasserstein", "Exact W_p between two CSV point clouds");
  std::string cloud_a, cloud_b;
  double wp = 1.0;
  wass->add_option("a", cloud_a, "First cloud CSV")->required();
  wass->add_option("b", cloud_b, "Second cloud CSV")->required();
  wass->add_option("-p", wp, "Exponent p >= 1");
  app.add_subcommand("simulate", "Run the N-interacting EM scheme");
  app.add_subcommand("study-dt", "Step-size strong-rate study");
  app.add_subcommand("study-n", "Propagation-of-chaos study");
  app.add_subcommand("study-moment", "Lattice increment moment study");
  app.add_subcommand("study-emprate", "Empirical-measure Wasserstein rate study");
  app.add_subcommand("study-mollify", "Mollified-drift coupling study");
  app.add_subcommand("validate", "Validate config and exit");
  // global flags may appear after the subcommand name
  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  opt.have_seed = seed_opt->count() > 0;

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "validate") {
      RunConfig cfg = load(opt);
      cfg.study.validate();
      std::cout << "config ok\n";
      return 0;
    }
    if (cmd == "noise-check") return run_noise_check(opt);
    if (cmd == "simulate") return run_simulate(opt);
    if (cmd == "wasserstein") {
      EmpiricalMeasure a = read_cloud_csv(cloud_a);
      EmpiricalMeasure b = read_cloud_csv(cloud_b);
      std::cout << fmt_double(wasserstein_exact(wp, a, b)) << "\n";
      return 0;
    }
    return run_study(cmd, opt);
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    if (msg.find("2*beta + alpha > 2") != std::string::npos)
      msg += " (drift regularity condition (H2))";
    std::cerr << "config error: " << msg << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

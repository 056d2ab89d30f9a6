#include "stablemv/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stablemv {

namespace {

using nlohmann::json;

SpectralMode parse_mode(const std::string& s) {
  if (s == "isotropic") return SpectralMode::Isotropic;
  if (s == "per_axis") return SpectralMode::PerAxis;
  throw std::invalid_argument("config: noise.mode must be isotropic or per_axis");
}

DriftKind parse_kind(const std::string& s) {
  if (s == "zero") return DriftKind::Zero;
  if (s == "holder_mean") return DriftKind::HolderMean;
  throw std::invalid_argument("config: drift.kind must be zero or holder_mean");
}

InitKind parse_init(const std::string& s) {
  if (s == "point") return InitKind::PointMass;
  if (s == "gaussian") return InitKind::Gaussian;
  if (s == "uniform") return InitKind::Uniform;
  throw std::invalid_argument("config: system.init must be point, gaussian or uniform");
}

json parse_override_value(const std::string& v) {
  // try JSON first (numbers, arrays, booleans), fall back to string
  try {
    return json::parse(v);
  } catch (const json::parse_error&) {
    return json(v);
  }
}

void apply_override(json& root, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must be key=value: " + kv);
  std::string key = kv.substr(0, eq);
  json* node = &root;
  std::size_t pos = 0;
  for (;;) {
    auto dot = key.find('.', pos);
    std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (part.empty()) throw std::invalid_argument("bad override key: " + kv);
    if (dot == std::string::npos) {
      (*node)[part] = parse_override_value(kv.substr(eq + 1));
      return;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

std::vector<double> as_vector(const json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

}  // namespace

RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  for (const auto& kv : overrides) apply_override(root, kv);

  RunConfig cfg;
  SystemConfig& sys = cfg.study.base;

  const json noise = root.value("noise", json::object());
  sys.noise.dim = noise.value("dim", 1);
  sys.noise.alpha = noise.value("alpha", 1.5);
  sys.noise.mode = parse_mode(noise.value("mode", std::string("isotropic")));
  sys.noise.scale = noise.value("scale", 1.0);

  const json drift = root.value("drift", json::object());
  sys.drift.dim = sys.noise.dim;
  sys.drift.kind = parse_kind(drift.value("kind", std::string("zero")));
  sys.drift.holder_amp = drift.value("a", 0.0);
  sys.drift.interaction_amp = drift.value("c", 0.0);
  sys.drift.beta = drift.value("beta", 0.75);
  sys.drift.kappa = drift.value("kappa", 1.0);
  cfg.mollify_n = drift.value("mollify_n", 0);

  const json system = root.value("system", json::object());
  if (!system.contains("seed"))
    throw std::invalid_argument("config: system.seed is required");
  sys.seed = system["seed"].get<std::uint64_t>();
  sys.particle_count = system.value("particles", 256);
  sys.step = system.value("step", 1.0 / 64);
  sys.horizon = system.value("horizon", 1.0);
  sys.fine_substeps = system.value("fine_substeps", 1);
  sys.threads = system.value("threads", 1);
  if (system.contains("init")) {
    const json init = system["init"];
    sys.init.kind = parse_init(init.value("kind", std::string("gaussian")));
    sys.init.a = as_vector(init.value("a", json(0.0)));
    if (init.contains("b")) sys.init.b = as_vector(init["b"]);
  } else {
    sys.init.kind = InitKind::Gaussian;
    sys.init.a = {0.0};
    sys.init.b = {1.0};
  }
  if (sys.init.b.empty()) sys.init.b = {1.0};

  const json study = root.value("study", json::object());
  if (study.contains("grid")) cfg.study.grid = study["grid"].get<std::vector<double>>();
  cfg.study.error_p = study.value("p", 1.0);
  cfg.study.moment_q = study.value("q", 0.0);
  cfg.study.replications = study.value("replications", 8);
  cfg.study.groups = study.value("groups", 8);
  cfg.study.reference = study.value("reference", 0.0);

  if (cfg.mollify_n > 0) sys.drift = mollify_drift(sys.drift, cfg.mollify_n);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string resolved_config_json(const RunConfig& cfg) {
  const SystemConfig& sys = cfg.study.base;
  json j;
  j["noise"] = {{"dim", sys.noise.dim},
                {"alpha", sys.noise.alpha},
                {"mode", sys.noise.mode == SpectralMode::Isotropic ? "isotropic" : "per_axis"},
                {"scale", sys.noise.scale}};
  const DriftSpec& d = sys.drift.kind == DriftKind::Mollified ? *sys.drift.base : sys.drift;
  j["drift"] = {{"kind", d.kind == DriftKind::Zero ? "zero" : "holder_mean"},
                {"a", d.holder_amp},
                {"c", d.interaction_amp},
                {"beta", d.beta},
                {"kappa", d.kappa},
                {"mollify_n", cfg.mollify_n}};
  json init;
  switch (sys.init.kind) {
    case InitKind::PointMass: init["kind"] = "point"; break;
    case InitKind::Gaussian: init["kind"] = "gaussian"; break;
    case InitKind::Uniform: init["kind"] = "uniform"; break;
  }
  init["a"] = sys.init.a;
  init["b"] = sys.init.b;
  j["system"] = {{"seed", sys.seed},
                 {"particles", sys.particle_count},
                 {"step", sys.step},
                 {"horizon", sys.horizon},
                 {"adjusted_horizon", sys.adjusted_horizon()},
                 {"fine_substeps", sys.fine_substeps},
                 {"threads", sys.threads},
                 {"init", init}};
  j["study"] = {{"grid", cfg.study.grid},
                {"p", cfg.study.error_p},
                {"q", cfg.study.resolved_q()},
                {"replications", cfg.study.replications},
                {"groups", cfg.study.groups},
                {"reference", cfg.study.reference}};
  return j.dump(2);
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["artifacts"] = artifacts;
  j["wall_seconds"] = wall_seconds;
  j["version"] = version;
  j["config"] = nlohmann::json::parse(config_echo.empty() ? "{}" : config_echo);
  return j.dump(2);
}

}  // namespace stablemv

#ifndef STABLEMV_CONFIG_HPP
#define STABLEMV_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "stablemv/harness.hpp"

namespace stablemv {

/// Experiment configuration file: one JSON object with tables `noise`,
/// `drift`, `system`, `study`. Every field has a default except
/// system.seed.
struct RunConfig {
  StudyConfig study;

  /// mollify_n > 0 wraps the drift before any run.
  int mollify_n = 0;
};

/// Parse a config JSON document; `overrides` are dotted key=value pairs
/// (e.g. "system.step=0.03125") applied after the file. Throws
/// std::invalid_argument on malformed input or missing seed.
RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides = {});

/// Written alongside every artifact; enough to re-run bit-identically.
struct RunManifest {
  std::string command;
  std::string config_echo;  // resolved config as JSON text
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
  std::string version;

  std::string to_json() const;
};

std::string resolved_config_json(const RunConfig& cfg);

}  // namespace stablemv

#endif

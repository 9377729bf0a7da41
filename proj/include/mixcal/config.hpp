#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixcal/virtual_lab.hpp"

namespace mixcal {

struct SweepSettings {
  std::vector<double> detunings_hz;
  Line line = Line::drive;
  double pulse_duration_s = 10e-6;
  double ramsey_delay_s = 1e-6;
};

// Everything a CLI run needs. Keys in the document carry their unit as a
// suffix (_hz, _v, _s, ...); dimensionless keys have none.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::string channel_id = "default";
  VirtualSetup setup;
  CalibrationPlan plan;
  SweepSettings sweep;

  void validate() const;
};

// Parses a YAML (or JSON) document. Missing keys keep their defaults; unknown
// keys and wrongly typed values raise ConfigError with the offending line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Fully resolved configuration as a JSON document with a fixed key order.
std::string canonical_config(const RunConfig& config);
// Hex SHA-256 of canonical_config.
std::string config_digest(const RunConfig& config);

}  // namespace mixcal

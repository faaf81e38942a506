#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hbship/inference.hpp"
#include "hbship/physics.hpp"
#include "hbship/synthetic.hpp"
#include "hbship/telemetry.hpp"

namespace hbship {

struct EnvelopeConfig {
  double speed_min = 2.0;
  double speed_max = 12.0;
  int speed_points = 50;
  std::uint64_t seed = 1;
  bool include_hyper_noise = true;
  bool include_observation_noise = false;
  /// cos(alpha) U_R^2 for the curves. Unset: median of the ship's own data for
  /// ship-specific envelopes when telemetry or reports are configured, else 0.
  std::optional<double> wind_effect;
};

struct DiagnosticsConfig {
  double lowess_frac = 0.3;
  int lowess_iterations = 2;
  int kde_points = 512;
  std::vector<double> quantile_probs{0.025, 0.25, 0.5, 0.75, 0.975};
  /// Use lwl*(B+2T)*factor when a ship lacks a wetted surface (flagged in output).
  bool heuristic_wetted_surface = false;
  double wetted_surface_factor = 1.0;
};

struct RunPaths {
  std::string telemetry;
  std::string noon;
  std::string characteristics;
  std::string posterior;
  std::string output_dir;
};

/// Everything the command-line pipeline needs. Precedence: command line > file > defaults.
struct RunConfig {
  RunPaths paths;
  SamplerConfig sampler;
  AggregationConfig aggregation;
  WaterProperties water;
  EnvelopeConfig envelope;
  DiagnosticsConfig diagnostics;
};

/// INI-style documents: `[section]` headers, `key = value` lines, `;` or `#` comments.
/// Unknown sections or keys are rejected so typos do not pass silently.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);

/// Set one `section.key` entry with the same parsing and checks as a config file.
void set_run_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
void set_fleet_spec_value(FleetSpec& spec, const std::string& key, const std::string& value);

/// Sampler settings alone, from a `[sampler]` section.
SamplerConfig parse_sampler_config(std::istream& in);
SamplerConfig load_sampler_config(const std::filesystem::path& path);

/// Generator settings from `[fleet]`, `[hyper]`, `[noise]`, `[speed]`, `[wind]` sections.
FleetSpec parse_fleet_spec(std::istream& in);
FleetSpec load_fleet_spec(const std::filesystem::path& path);

}  // namespace hbship

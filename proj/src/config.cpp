#include "hbship/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hbship/error.hpp"

namespace hbship {

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(const std::string&)>;
using Binder = std::map<std::string, Setter>;  // "section.key" -> setter

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw InvalidArgument("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw InvalidArgument("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v.front() == '-')
    throw InvalidArgument("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("config: '" + key + "' expects true/false, got '" + v + "'");
}

template <typename T>
Setter number(const std::string& key, T& field) {
  if constexpr (std::is_same_v<T, double>) {
    return [&field, key](const std::string& v) { field = to_double(key, v); };
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    return [&field, key](const std::string& v) { field = to_seed(key, v); };
  } else {
    return [&field, key](const std::string& v) { field = static_cast<T>(to_int(key, v)); };
  }
}

Setter flag(const std::string& key, bool& field) {
  return [&field, key](const std::string& v) { field = to_bool(key, v); };
}

Setter text(std::string& field) {
  return [&field](const std::string& v) { field = v; };
}

void apply_ini(std::istream& in, const Binder& binder) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidArgument("config: key '" + section + "' must appear inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = binder.find(full);
      if (it == binder.end()) throw InvalidArgument("config: unknown setting '" + full + "'");
      it->second(value.data());
    }
  }
}

void bind_sampler(Binder& b, SamplerConfig& s) {
  b["sampler.chains"] = number("sampler.chains", s.chains);
  b["sampler.iterations"] = number("sampler.iterations", s.iterations);
  b["sampler.warmup"] = number("sampler.warmup", s.warmup);
  b["sampler.seed"] = number("sampler.seed", s.seed);
  b["sampler.a_bound_multiplier"] = number("sampler.a_bound_multiplier", s.bounds.a);
  b["sampler.b_bound_multiplier"] = number("sampler.b_bound_multiplier", s.bounds.b);
  b["sampler.sigma_bound_multiplier"] = number("sampler.sigma_bound_multiplier", s.bounds.sigma);
  b["sampler.freeze_variances"] = flag("sampler.freeze_variances", s.freeze_variances);
  b["sampler.threads"] = number("sampler.threads", s.threads);
}

std::ifstream open_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return in;
}

Binder run_binder(RunConfig& cfg) {
  Binder b;
  b["paths.telemetry"] = text(cfg.paths.telemetry);
  b["paths.noon"] = text(cfg.paths.noon);
  b["paths.characteristics"] = text(cfg.paths.characteristics);
  b["paths.posterior"] = text(cfg.paths.posterior);
  b["paths.output_dir"] = text(cfg.paths.output_dir);
  bind_sampler(b, cfg.sampler);
  b["aggregation.interval_hours"] = number("aggregation.interval_hours", cfg.aggregation.interval_hours);
  b["aggregation.min_coverage"] = number("aggregation.min_coverage", cfg.aggregation.min_coverage);
  b["aggregation.speed_floor"] = number("aggregation.speed_floor", cfg.aggregation.speed_floor);
  b["aggregation.nominal_cadence_s"] = [&cfg](const std::string& v) {
    cfg.aggregation.nominal_cadence = to_double("aggregation.nominal_cadence_s", v);
  };
  b["water.density"] = number("water.density", cfg.water.density);
  b["water.kinematic_viscosity"] = number("water.kinematic_viscosity", cfg.water.kinematic_viscosity);
  b["envelope.speed_min"] = number("envelope.speed_min", cfg.envelope.speed_min);
  b["envelope.speed_max"] = number("envelope.speed_max", cfg.envelope.speed_max);
  b["envelope.speed_points"] = number("envelope.speed_points", cfg.envelope.speed_points);
  b["envelope.seed"] = number("envelope.seed", cfg.envelope.seed);
  b["envelope.include_hyper_noise"] = flag("envelope.include_hyper_noise", cfg.envelope.include_hyper_noise);
  b["envelope.include_observation_noise"] =
      flag("envelope.include_observation_noise", cfg.envelope.include_observation_noise);
  b["diagnostics.lowess_frac"] = number("diagnostics.lowess_frac", cfg.diagnostics.lowess_frac);
  b["diagnostics.lowess_iterations"] = number("diagnostics.lowess_iterations", cfg.diagnostics.lowess_iterations);
  b["diagnostics.kde_points"] = number("diagnostics.kde_points", cfg.diagnostics.kde_points);
  b["diagnostics.quantile_probs"] = [&cfg](const std::string& v) {
    cfg.diagnostics.quantile_probs.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto first = item.find_first_not_of(' ');
      const auto last = item.find_last_not_of(' ');
      if (first == std::string::npos) continue;
      cfg.diagnostics.quantile_probs.push_back(
          to_double("diagnostics.quantile_probs", item.substr(first, last - first + 1)));
    }
  };
  b["diagnostics.heuristic_wetted_surface"] =
      flag("diagnostics.heuristic_wetted_surface", cfg.diagnostics.heuristic_wetted_surface);
  b["diagnostics.wetted_surface_factor"] =
      number("diagnostics.wetted_surface_factor", cfg.diagnostics.wetted_surface_factor);
  b["envelope.wind_effect"] = [&cfg](const std::string& v) {
    cfg.envelope.wind_effect = to_double("envelope.wind_effect", v);
  };
  return b;
}

Binder fleet_binder(FleetSpec& s) {
  Binder b;

  b["fleet.n_ships"] = number("fleet.n_ships", s.n_ships);
  b["fleet.gt_min"] = number("fleet.gt_min", s.gt_min);
  b["fleet.gt_max"] = number("fleet.gt_max", s.gt_max);
  b["fleet.days"] = number("fleet.days", s.days);
  b["fleet.records_per_day"] = number("fleet.records_per_day", s.records_per_day);
  b["fleet.start_time"] = number("fleet.start_time", s.start_time);
  b["fleet.seed"] = number("fleet.seed", s.seed);
  b["fleet.c_r"] = number("fleet.c_r", s.c_r);
  b["fleet.wetted_surface_factor"] = number("fleet.wetted_surface_factor", s.wetted_surface_factor);
  b["fleet.max_rejections"] = number("fleet.max_rejections", s.max_rejections);
  b["hyper.lambda1"] = number("hyper.lambda1", s.hyper.lambda1);
  b["hyper.lambda2"] = number("hyper.lambda2", s.hyper.lambda2);
  b["hyper.lambda3"] = number("hyper.lambda3", s.hyper.lambda3);
  b["hyper.lambda4"] = number("hyper.lambda4", s.hyper.lambda4);
  b["hyper.sigma_a"] = number("hyper.sigma_a", s.hyper.sigma_a);
  b["hyper.sigma_b"] = number("hyper.sigma_b", s.hyper.sigma_b);
  b["noise.sigma_min"] = number("noise.sigma_min", s.sigma_min);
  b["noise.sigma_max"] = number("noise.sigma_max", s.sigma_max);
  b["speed.mean"] = number("speed.mean", s.speed_mean);
  b["speed.sd"] = number("speed.sd", s.speed_sd);
  b["speed.min"] = number("speed.min", s.speed_min);
  b["speed.max"] = number("speed.max", s.speed_max);
  b["speed.jitter"] = number("speed.jitter", s.speed_jitter);
  b["wind.scale"] = number("wind.scale", s.wind_scale);
  b["wind.angle_jitter"] = number("wind.angle_jitter", s.wind_angle_jitter);
  return b;
}

void set_one(const Binder& b, const std::string& key, const std::string& value) {
  const auto it = b.find(key);
  if (it == b.end()) throw InvalidArgument("config: unknown setting '" + key + "'");
  it->second(value);
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  apply_ini(in, run_binder(cfg));
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  auto in = open_config(path);
  return parse_run_config(in);
}

SamplerConfig parse_sampler_config(std::istream& in) {
  SamplerConfig s;
  Binder b;
  bind_sampler(b, s);
  apply_ini(in, b);
  return s;
}

SamplerConfig load_sampler_config(const std::filesystem::path& path) {
  auto in = open_config(path);
  return parse_sampler_config(in);
}

void set_run_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  set_one(run_binder(cfg), key, value);
}

void set_fleet_spec_value(FleetSpec& spec, const std::string& key, const std::string& value) {
  set_one(fleet_binder(spec), key, value);
}

FleetSpec parse_fleet_spec(std::istream& in) {
  FleetSpec s;
  apply_ini(in, fleet_binder(s));
  s.validate();
  return s;
}

FleetSpec load_fleet_spec(const std::filesystem::path& path) {
  auto in = open_config(path);
  return parse_fleet_spec(in);
}

}  // namespace hbship

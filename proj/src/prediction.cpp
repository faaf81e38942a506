#include "hbship/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hbship/csv_io.hpp"
#include "hbship/error.hpp"
#include "hbship/rng.hpp"
#include "hbship/stats.hpp"

namespace hbship {

const char* to_string(EnvelopeSource s) {
  return s == EnvelopeSource::ShipSpecific ? "ship-specific" : "prior-based";
}

bool SpeedPowerEnvelope::nested() const {
  for (std::size_t j = 0; j < speeds.size(); ++j)
    if (!(band95_lo[j] <= band50_lo[j] && band50_lo[j] <= median[j] && median[j] <= band50_hi[j] &&
          band50_hi[j] <= band95_hi[j]))
      return false;
  return true;
}

std::vector<double> speed_grid(double lo, double hi, int n) {
  if (n < 2 || !(lo < hi) || !(lo >= 0.0) || !std::isfinite(hi))
    throw InvalidArgument("speed grid needs n >= 2 and 0 <= lo < hi");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  return g;
}

double median_wind_effect(std::span<const double> effects) {
  if (effects.empty()) throw InvalidArgument("median wind effect of empty data");
  return median(effects);
}

std::vector<double> wind_effects(std::span<const TelemetryRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(std::cos(r.wind_angle) * r.wind_speed * r.wind_speed);
  return out;
}

std::vector<double> wind_effects(std::span<const NoonReport> reports) {
  std::vector<double> out;
  for (const auto& r : reports) {
    const double v = std::cbrt(r.mean_x_hydro);
    if (v > 0.0) out.push_back(r.mean_x_aero / v);
  }
  return out;
}

double predict_point(const ShipParameters& params, double speed, double wind_speed, double wind_angle) {
  return greybox_power(params, speed, wind_speed, wind_angle);
}

double power_at_wind_effect(double a, double b, double speed, double wind_effect) {
  return a * speed * speed * speed + b * wind_effect * speed;
}

ShipParameters hyper_line_at(const PosteriorChains& chains, std::size_t chain, std::size_t draw, double gt) {
  const std::size_t l1 = chains.require("lambda1"), l2 = chains.require("lambda2");
  const std::size_t l3 = chains.require("lambda3"), l4 = chains.require("lambda4");
  return {chains.at(chain, draw, l1) + chains.at(chain, draw, l2) * gt,
          chains.at(chain, draw, l3) + chains.at(chain, draw, l4) * gt, 0.0};
}

SpeedPowerEnvelope envelope_from_curves(std::span<const double> speeds, const std::vector<std::vector<double>>& curves) {
  if (curves.empty()) throw InvalidArgument("envelope needs at least one curve");
  for (std::size_t j = 1; j < speeds.size(); ++j)
    if (!(speeds[j] > speeds[j - 1])) throw InvalidArgument("speed grid must be strictly increasing");
  SpeedPowerEnvelope env;
  env.speeds.assign(speeds.begin(), speeds.end());
  std::vector<double> column(curves.size());
  for (std::size_t j = 0; j < speeds.size(); ++j) {
    for (std::size_t k = 0; k < curves.size(); ++k) column[k] = curves[k][j];
    std::sort(column.begin(), column.end());
    env.band95_lo.push_back(quantile_sorted(column, 0.025));
    env.band50_lo.push_back(quantile_sorted(column, 0.25));
    env.median.push_back(quantile_sorted(column, 0.5));
    env.band50_hi.push_back(quantile_sorted(column, 0.75));
    env.band95_hi.push_back(quantile_sorted(column, 0.975));
  }
  return env;
}

namespace {

void check_speeds(std::span<const double> speeds) {
  if (speeds.empty()) throw InvalidArgument("empty speed grid");
  for (double v : speeds)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("speeds must be finite and >= 0");
}

}  // namespace

SpeedPowerEnvelope predict_prior_based(const PosteriorChains& chains, double gt, std::span<const double> speeds,
                                       double wind_effect, const PriorPredictionOptions& options) {
  if (!(gt > 0.0) || !std::isfinite(gt)) throw InvalidArgument("gross tonnage must be positive");
  if (!std::isfinite(wind_effect)) throw InvalidArgument("wind effect must be finite");
  check_speeds(speeds);
  for (const char* name : kHyperNames)
    if (!chains.index_of(name))
      throw NotFound(std::string("posterior lacks hyper-parameter '") + name + "' (hierarchical fit required)");
  const std::size_t ia = chains.require("sigma_a"), ib = chains.require("sigma_b");

  CounterRng rng(derive_seed(options.seed, "predict/hyper-noise"));
  std::vector<std::vector<double>> curves;
  curves.reserve(chains.n_chains * chains.n_draws);
  for (std::size_t c = 0; c < chains.n_chains; ++c)
    for (std::size_t d = 0; d < chains.n_draws; ++d) {
      auto p = hyper_line_at(chains, c, d, gt);
      if (options.include_hyper_noise) {
        const double inf = std::numeric_limits<double>::infinity();
        p.a = truncated_normal(rng, p.a, chains.at(c, d, ia), std::numeric_limits<double>::min(), inf);
        p.b = truncated_normal(rng, p.b, chains.at(c, d, ib), 0.0, inf);
      }
      std::vector<double> curve;
      curve.reserve(speeds.size());
      for (double v : speeds) curve.push_back(power_at_wind_effect(p.a, p.b, v, wind_effect));
      curves.push_back(std::move(curve));
    }
  auto env = envelope_from_curves(speeds, curves);
  env.source = EnvelopeSource::PriorBased;
  env.gross_tonnage = gt;
  env.wind_effect = wind_effect;
  env.seed = options.seed;
  env.include_noise = options.include_hyper_noise;
  return env;
}

SpeedPowerEnvelope predict_ship_specific(const PosteriorChains& chains, const std::string& ship_id,
                                         std::span<const double> speeds, double wind_effect,
                                         const ShipPredictionOptions& options) {
  if (!std::isfinite(wind_effect)) throw InvalidArgument("wind effect must be finite");
  check_speeds(speeds);
  const auto ia = chains.index_of(param_a(ship_id));
  const auto ib = chains.index_of(param_b(ship_id));
  if (!ia || !ib) throw NotFound("unknown ship '" + ship_id + "'");
  std::size_t is = 0;
  if (options.include_observation_noise) is = chains.require(param_sigma(ship_id));

  CounterRng rng(derive_seed(options.seed, "predict/observation-noise"));
  std::vector<std::vector<double>> curves;
  curves.reserve(chains.n_chains * chains.n_draws);
  for (std::size_t c = 0; c < chains.n_chains; ++c)
    for (std::size_t d = 0; d < chains.n_draws; ++d) {
      const double a = chains.at(c, d, *ia), b = chains.at(c, d, *ib);
      std::vector<double> curve;
      curve.reserve(speeds.size());
      for (double v : speeds) {
        double p = power_at_wind_effect(a, b, v, wind_effect);
        if (options.include_observation_noise) p += chains.at(c, d, is) * rng.normal();
        curve.push_back(p);
      }
      curves.push_back(std::move(curve));
    }
  auto env = envelope_from_curves(speeds, curves);
  env.source = EnvelopeSource::ShipSpecific;
  env.ship_id = ship_id;
  env.wind_effect = wind_effect;
  env.seed = options.seed;
  env.include_noise = options.include_observation_noise;
  return env;
}

void write_envelope_csv(std::ostream& out, const SpeedPowerEnvelope& env) {
  out << "# source=" << to_string(env.source) << '\n';
  if (!env.ship_id.empty()) out << "# ship_id=" << env.ship_id << '\n';
  if (env.gross_tonnage) out << "# gross_tonnage=" << format_double(*env.gross_tonnage) << '\n';
  out << "# wind_effect=" << format_double(env.wind_effect) << '\n';
  out << "# seed=" << env.seed << '\n';
  out << "# " << (env.source == EnvelopeSource::PriorBased ? "include_hyper_noise" : "include_observation_noise") << '='
      << (env.include_noise ? "true" : "false") << '\n';
  out << "speed_mps,median_w,p25_w,p75_w,p025_w,p975_w\n";
  for (std::size_t j = 0; j < env.speeds.size(); ++j)
    out << format_double(env.speeds[j]) << ',' << format_double(env.median[j]) << ','
        << format_double(env.band50_lo[j]) << ',' << format_double(env.band50_hi[j]) << ','
        << format_double(env.band95_lo[j]) << ',' << format_double(env.band95_hi[j]) << '\n';
}

SpeedPowerEnvelope read_envelope_csv(std::istream& in) {
  SpeedPowerEnvelope env;
  std::string line;
  bool header = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      if (key == "source") env.source = value == "ship-specific" ? EnvelopeSource::ShipSpecific : EnvelopeSource::PriorBased;
      else if (key == "ship_id") env.ship_id = value;
      else if (key == "gross_tonnage") env.gross_tonnage = std::stod(value);
      else if (key == "wind_effect") env.wind_effect = std::stod(value);
      else if (key == "seed") env.seed = std::stoull(value);
      else if (key.rfind("include_", 0) == 0) env.include_noise = value == "true";
      continue;
    }
    if (!header) {
      if (line != "speed_mps,median_w,p25_w,p75_w,p025_w,p975_w") throw DataError("unexpected envelope header", line_no);
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 6) throw DataError("expected 6 envelope fields", line_no);
    env.speeds.push_back(v[0]);
    env.median.push_back(v[1]);
    env.band50_lo.push_back(v[2]);
    env.band50_hi.push_back(v[3]);
    env.band95_lo.push_back(v[4]);
    env.band95_hi.push_back(v[5]);
  }
  if (!header) throw DataError("missing envelope header");
  return env;
}

}  // namespace hbship

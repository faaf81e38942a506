#include "hbship/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "hbship/error.hpp"
#include "hbship/stats.hpp"

namespace hbship {

std::string TelemetryRecord::violation() const {
  if (ship_id.empty()) return "empty ship_id";
  if (!std::isfinite(speed) || speed < 0.0) return "stw must be finite and >= 0";
  if (!std::isfinite(wind_speed) || wind_speed < 0.0) return "relative wind speed must be finite and >= 0";
  if (!std::isfinite(wind_angle) || wind_angle < 0.0 || wind_angle >= 2.0 * M_PI)
    return "relative wind angle must be in [0, 2*pi)";
  if (!std::isfinite(power)) return "power must be finite";
  return {};
}

std::string NoonReport::violation() const {
  if (ship_id.empty()) return "empty ship_id";
  if (interval_end <= interval_start) return "interval_end must be after interval_start";
  if (!std::isfinite(mean_x_hydro) || !std::isfinite(mean_x_aero) || !std::isfinite(mean_power))
    return "means must be finite";
  if (sample_count < 1) return "sample_count must be >= 1";
  if (!(coverage > 0.0 && coverage <= 1.0)) return "coverage must be in (0, 1]";
  return {};
}

FeatureRow featurize(const TelemetryRecord& rec) {
  if (!std::isfinite(rec.speed) || !std::isfinite(rec.wind_speed) || !std::isfinite(rec.wind_angle) ||
      !std::isfinite(rec.power))
    throw InvalidArgument("featurize: non-finite telemetry field for ship '" + rec.ship_id + "'");
  const double v = rec.speed;
  return {v * v * v, std::cos(rec.wind_angle) * rec.wind_speed * rec.wind_speed * v, rec.power, 1.0};
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void aggregate_ship(std::vector<const TelemetryRecord*>& recs, const AggregationConfig& cfg,
                    std::vector<NoonReport>& out) {
  // Full-key order keeps the floating-point sums independent of input order.
  std::sort(recs.begin(), recs.end(), [](const TelemetryRecord* l, const TelemetryRecord* r) {
    return std::tie(l->timestamp, l->speed, l->wind_speed, l->wind_angle, l->power) <
           std::tie(r->timestamp, r->speed, r->wind_speed, r->wind_angle, r->power);
  });

  const auto interval = static_cast<std::int64_t>(std::llround(cfg.interval_hours * 3600.0));
  double cadence = static_cast<double>(interval);
  if (cfg.nominal_cadence) {
    cadence = *cfg.nominal_cadence;
  } else if (recs.size() >= 2) {
    std::vector<double> gaps;
    gaps.reserve(recs.size() - 1);
    for (std::size_t k = 1; k < recs.size(); ++k) {
      const auto gap = recs[k]->timestamp - recs[k - 1]->timestamp;
      if (gap > 0) gaps.push_back(static_cast<double>(gap));
    }
    if (!gaps.empty()) cadence = median(gaps);
  }
  const double expected = std::max(1.0, static_cast<double>(interval) / cadence);

  const std::int64_t anchor = floor_div(recs.front()->timestamp, 86400) * 86400;
  std::size_t k = 0;
  while (k < recs.size()) {
    const std::int64_t slot = floor_div(recs[k]->timestamp - anchor, interval);
    const std::int64_t start = anchor + slot * interval;
    double sh = 0.0, sa = 0.0, sp = 0.0;
    std::int64_t n = 0;
    for (; k < recs.size() && recs[k]->timestamp < start + interval; ++k) {
      const FeatureRow f = featurize(*recs[k]);
      sh += f.x_hydro;
      sa += f.x_aero;
      sp += f.y;
      ++n;
    }
    const double coverage = std::min(1.0, static_cast<double>(n) / expected);
    if (coverage < cfg.min_coverage) continue;
    const double dn = static_cast<double>(n);
    out.push_back({recs.front()->ship_id, start, start + interval, sh / dn, sa / dn, sp / dn, n, coverage});
  }
}

}  // namespace

std::vector<NoonReport> aggregate(std::span<const TelemetryRecord> records, const AggregationConfig& config) {
  if (!(config.interval_hours > 0.0) || !std::isfinite(config.interval_hours))
    throw InvalidArgument("interval_hours must be > 0");
  if (!(config.min_coverage >= 0.0 && config.min_coverage <= 1.0))
    throw InvalidArgument("min_coverage must be in [0, 1]");
  if (config.nominal_cadence && !(*config.nominal_cadence > 0.0))
    throw InvalidArgument("nominal cadence must be > 0");
  if (std::llround(config.interval_hours * 3600.0) < 1) throw InvalidArgument("interval shorter than one second");

  std::map<std::string, std::vector<const TelemetryRecord*>> by_ship;
  for (const auto& r : records) {
    if (r.speed < config.speed_floor) continue;
    by_ship[r.ship_id].push_back(&r);
  }
  std::vector<NoonReport> out;
  for (auto& [id, recs] : by_ship) aggregate_ship(recs, config, out);
  return out;
}

}  // namespace hbship

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hbship {

/// One momentary observation. Angles in radians, 0 = head-on relative wind.
struct TelemetryRecord {
  std::string ship_id;
  std::int64_t timestamp = 0;  // UTC epoch seconds
  double speed = 0.0;          // speed through water [m/s]
  double wind_speed = 0.0;     // relative wind speed [m/s]
  double wind_angle = 0.0;     // [rad], in [0, 2*pi)
  double power = 0.0;          // propulsion power [W]

  /// Empty string when the record satisfies its invariants, else the reason.
  std::string violation() const;
};

/// Regressors of the grey-box power model for one observation.
struct FeatureRow {
  double x_hydro = 0.0;  // V^3
  double x_aero = 0.0;   // cos(alpha) U_R^2 V
  double y = 0.0;        // observed power [W]
  double weight = 1.0;   // raw samples behind this row
};

/// Interval-averaged features of one ship (noon-report style).
struct NoonReport {
  std::string ship_id;
  std::int64_t interval_start = 0;
  std::int64_t interval_end = 0;
  double mean_x_hydro = 0.0;
  double mean_x_aero = 0.0;
  double mean_power = 0.0;
  std::int64_t sample_count = 0;
  double coverage = 0.0;

  std::string violation() const;
  FeatureRow feature() const {
    return {mean_x_hydro, mean_x_aero, mean_power, static_cast<double>(sample_count)};
  }
};

FeatureRow featurize(const TelemetryRecord& rec);

struct AggregationConfig {
  double interval_hours = 24.0;
  double min_coverage = 0.8;
  /// Records slower than this are treated as maneuvering and dropped before averaging.
  double speed_floor = 2.0;
  /// Expected sampling gap in seconds; when unset the median gap of each ship is used.
  std::optional<double> nominal_cadence;
};

/// Average records into consecutive fixed intervals per ship.
///
/// Records are grouped by ship and sorted by timestamp. Intervals start at 00:00 UTC
/// of each ship's first retained record. Coverage is the retained sample count over the
/// count expected at the nominal cadence, capped at 1; intervals below `min_coverage`
/// are dropped. Output is ordered by ship id, then interval start.
std::vector<NoonReport> aggregate(std::span<const TelemetryRecord> records,
                                  const AggregationConfig& config = {});

}  // namespace hbship

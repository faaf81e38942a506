#pragma once

#include <cstdint>
#include <vector>

#include "hbship/physics.hpp"
#include "hbship/rng.hpp"
#include "hbship/telemetry.hpp"

namespace hbship {

/// Hyper-lines a = lambda1 + lambda2 GT + eta_a, b = lambda3 + lambda4 GT + eta_b.
struct HyperParameters {
  double lambda1 = 5000.0;
  double lambda2 = 0.15;
  double lambda3 = 100.0;
  double lambda4 = 0.005;
  double sigma_a = 1500.0;
  double sigma_b = 60.0;
};

/// Generator settings. Defaults give a 20-ship cruise-like fleet with 100 days of
/// 15-minute telemetry; they are test-harness choices, not measured values.
struct FleetSpec {
  int n_ships = 20;
  double gt_min = 30000.0;
  double gt_max = 150000.0;
  HyperParameters hyper;
  double sigma_min = 3.0e5;  // momentary noise range [W]
  double sigma_max = 8.0e5;
  int days = 100;
  int records_per_day = 96;
  double speed_mean = 8.0;    // daily mean STW ~ N(mean, sd) truncated to [min, max]
  double speed_sd = 1.5;
  double speed_min = 4.0;
  double speed_max = 11.0;
  double speed_jitter = 0.3;  // within-day s.d. around the daily mean
  double wind_scale = 6.0;    // Rayleigh scale of relative wind speed [m/s]
  /// Within-day s.d. of the relative wind angle around a uniform daily direction.
  /// Negative: independent uniform angle per record.
  double wind_angle_jitter = 0.5;
  std::int64_t start_time = 1577836800;  // 2020-01-01T00:00:00Z
  double c_r = 1.0e-3;
  double wetted_surface_factor = 1.0;
  std::uint64_t seed = 1;
  int max_rejections = 1000;

  void validate() const;
};

struct SyntheticShip {
  VesselCharacteristics chars;
  ShipParameters truth;
};

/// Rough cruise-ship dimensions for a gross tonnage; wetted surface from the
/// heuristic, C_R as given.
VesselCharacteristics synthetic_characteristics(const std::string& ship_id, double gt, double c_r,
                                                double wetted_surface_factor);

/// (a, b) from the hyper-lines plus Gaussian noise, resampled until a > 0 and b >= 0.
ShipParameters draw_ship_parameters(const HyperParameters& hyper, double gt, CounterRng& rng, int max_rejections);

std::vector<SyntheticShip> generate_fleet(const FleetSpec& spec);

/// Uniform-cadence records for one ship; power includes N(0, sigma) noise.
std::vector<TelemetryRecord> simulate_telemetry(const SyntheticShip& ship, const FleetSpec& spec,
                                                std::uint64_t stream);

struct SyntheticFleet {
  std::vector<SyntheticShip> ships;
  std::vector<TelemetryRecord> telemetry;  // ship-major, time-ordered
};

SyntheticFleet generate(const FleetSpec& spec);

}  // namespace hbship

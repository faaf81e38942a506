#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hbship/chains.hpp"
#include "hbship/physics.hpp"
#include "hbship/telemetry.hpp"

namespace hbship {

enum class EnvelopeSource { ShipSpecific, PriorBased };

const char* to_string(EnvelopeSource s);

/// Pointwise posterior quantile bands of a speed-power curve.
struct SpeedPowerEnvelope {
  std::vector<double> speeds;
  std::vector<double> median;
  std::vector<double> band50_lo, band50_hi;
  std::vector<double> band95_lo, band95_hi;
  EnvelopeSource source = EnvelopeSource::PriorBased;
  // Metadata echoed into the CSV header.
  std::string ship_id;
  std::optional<double> gross_tonnage;
  double wind_effect = 0.0;
  std::uint64_t seed = 0;
  bool include_noise = false;

  /// True when 95-lo <= 50-lo <= median <= 50-hi <= 95-hi at every grid point.
  bool nested() const;
};

/// Uniform grid of `n` speeds on [lo, hi]. Defaults cover typical cruise speeds.
std::vector<double> speed_grid(double lo = 2.0, double hi = 12.0, int n = 50);

/// Sample median of wind effects cos(alpha) U_R^2 (even count: mean of the central pair).
double median_wind_effect(std::span<const double> effects);
/// cos(alpha) U_R^2 of each record.
std::vector<double> wind_effects(std::span<const TelemetryRecord> records);
/// mean_x_aero / mean_x_hydro^(1/3) of each report; an approximation of the interval's wind effect.
std::vector<double> wind_effects(std::span<const NoonReport> reports);

/// Grey-box point prediction for given wind conditions (same model as greybox_power).
double predict_point(const ShipParameters& params, double speed, double wind_speed, double wind_angle);
/// Grey-box power for a wind effect cos(alpha) U_R^2: a V^3 + b e V.
double power_at_wind_effect(double a, double b, double speed, double wind_effect);

/// Hyper-line coefficients (a, b) at a gross tonnage for one posterior draw.
ShipParameters hyper_line_at(const PosteriorChains& chains, std::size_t chain, std::size_t draw, double gt);

struct PriorPredictionOptions {
  /// Redraw (eta_a, eta_b) per posterior draw with that draw's scales, restricted to a > 0, b >= 0.
  bool include_hyper_noise = true;
  std::uint64_t seed = 1;
};

/// Envelope for a vessel known only by its gross tonnage.
SpeedPowerEnvelope predict_prior_based(const PosteriorChains& chains, double gt, std::span<const double> speeds,
                                       double wind_effect, const PriorPredictionOptions& options = {});

struct ShipPredictionOptions {
  /// Add observation noise N(0, sigma_i) to every curve point (data-overlay use only).
  bool include_observation_noise = false;
  std::uint64_t seed = 1;
};

/// Envelope over the ship's own (a_i, b_i) posterior draws.
SpeedPowerEnvelope predict_ship_specific(const PosteriorChains& chains, const std::string& ship_id,
                                         std::span<const double> speeds, double wind_effect,
                                         const ShipPredictionOptions& options = {});

/// Bands from an explicit set of curves, `curves[k][j]` = power of curve k at speed j.
SpeedPowerEnvelope envelope_from_curves(std::span<const double> speeds, const std::vector<std::vector<double>>& curves);

void write_envelope_csv(std::ostream& out, const SpeedPowerEnvelope& env);
/// Parses the numeric table of an envelope CSV; metadata lines are skipped.
SpeedPowerEnvelope read_envelope_csv(std::istream& in);

}  // namespace hbship

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hbship/physics.hpp"
#include "hbship/telemetry.hpp"

namespace hbship {

enum class ModelTag { Steam2, PriorBased, ShipSpecific };
const char* to_string(ModelTag tag);

/// One evaluable data point: features plus the speed used for plotting and white-box models.
struct Observation {
  double speed = 0.0;
  FeatureRow features;
};

std::vector<Observation> observations(std::span<const TelemetryRecord> records);
/// Interval reports use the cube-mean speed mean_x_hydro^(1/3).
std::vector<Observation> observations(std::span<const NoonReport> reports);

/// A power model bound to one ship.
struct ModelEvaluator {
  std::string ship_id;
  ModelTag tag = ModelTag::ShipSpecific;
  std::function<double(const Observation&)> power;
};

/// a x_hydro + b x_aero, exact for momentary and interval-averaged rows alike.
ModelEvaluator greybox_model(const std::string& ship_id, ModelTag tag, double a, double b);
/// White-box power at the observation speed. Throws NotFound when S or C_R are missing.
ModelEvaluator steam2_model(const VesselCharacteristics& chars, const WaterProperties& water);

struct ResidualSeries {
  std::string ship_id;
  ModelTag tag = ModelTag::ShipSpecific;
  std::vector<double> speeds;
  std::vector<double> residuals;  // observed - predicted [W]
};

ResidualSeries residuals(const std::string& ship_id, std::span<const Observation> data, const ModelEvaluator& model);

struct SmoothedCurve {
  std::vector<double> x;
  std::vector<double> y;
  double frac = 0.3;
  int iterations = 2;
};

/// Robust locally weighted linear regression (tricube neighbourhood weights,
/// bisquare robustness weights between passes).
///
/// Each fit uses the ceil(frac * n) nearest points. The curve is evaluated on
/// `grid`, or on 100 uniform points over the observed x range when `grid` is empty.
/// Robustness residuals come from fits at every datum for n <= 2000 and from
/// linear interpolation between 500 anchor fits above that.
SmoothedCurve lowess(std::span<const double> x, std::span<const double> y, double frac = 0.3, int iterations = 2,
                     std::span<const double> grid = {});

struct DensityCurve {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// 0.9 * min(sd, IQR/1.34) * n^(-1/5); falls back to whichever spread is positive, then to 1.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian kernel density on `points` grid nodes spanning min - 4h .. max + 4h.
DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt, int points = 512);

/// Trapezoid rule over a tabulated curve.
double trapezoid(std::span<const double> x, std::span<const double> y);

struct QuantileRow {
  std::string ship_id;  // "ALL" for the pooled cross-ship summary
  ModelTag tag = ModelTag::ShipSpecific;
  double prob = 0.5;
  double value = 0.0;
};

/// Per-series quantiles (linear interpolation between order statistics), followed by
/// a pooled "ALL" row per model tag and probability.
std::vector<QuantileRow> residual_quantiles(std::span<const ResidualSeries> series, std::span<const double> probs);

struct ComparisonRow {
  std::string ship_id;
  ModelTag tag = ModelTag::ShipSpecific;
  double median = 0.0, p025 = 0.0, p975 = 0.0, rmse = 0.0;
  std::string status = "ok";  // ok | unavailable | heuristic_wetted_surface
};

ComparisonRow summarize(const ResidualSeries& series);

}  // namespace hbship

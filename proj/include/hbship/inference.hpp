#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hbship/chains.hpp"
#include "hbship/physics.hpp"
#include "hbship/telemetry.hpp"

namespace hbship {

struct ShipData {
  VesselCharacteristics chars;
  std::vector<FeatureRow> rows;
};

/// Sufficient statistics of one ship's linear model y = a x_hydro + b x_aero + e.
struct ShipStats {
  Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();  // X'X
  Eigen::Vector2d xty = Eigen::Vector2d::Zero();   // X'y
  Eigen::Vector2d least_squares = Eigen::Vector2d::Zero();
  double sse_min = 0.0;  // residual sum of squares at the least-squares point
  double n = 0.0;
  double y_sd = 0.0;
  bool aero_identifiable = true;
  bool ill_conditioned = false;

  static ShipStats compute(const std::vector<FeatureRow>& rows);
  /// Residual sum of squares at (a, b), computed around the least-squares point.
  double sse(double a, double b) const;
};

/// Scale factors for the data-driven prior box.
struct BoundMultipliers {
  double a = 10.0;
  double b = 10.0;
  double sigma = 10.0;
};

/// Box of the flat priors. Hyper slopes/intercepts are bounded in the uncentered form.
struct PriorBounds {
  double a_hi = 0.0;  // a in (0, a_hi]
  double b_hi = 0.0;  // b in [0, b_hi]
  std::vector<double> sigma_lo, sigma_hi;  // per ship
  double sigma_a_lo = 0.0, sigma_a_hi = 0.0;
  double sigma_b_lo = 0.0, sigma_b_hi = 0.0;
  std::array<double, 4> lambda_lo{}, lambda_hi{};

  std::string describe() const;
};

/// Ships, their observations and the prior box. Immutable after construction.
class FleetModel {
 public:
  /// Bounds are derived from the data using `mult`.
  explicit FleetModel(std::vector<ShipData> ships, const BoundMultipliers& mult = {});
  FleetModel(std::vector<ShipData> ships, PriorBounds bounds);

  std::size_t size() const { return ships_.size(); }
  const std::vector<ShipData>& ships() const { return ships_; }
  const ShipStats& stats(std::size_t i) const { return stats_[i]; }
  const PriorBounds& bounds() const { return bounds_; }
  /// Fleet-mean gross tonnage; the hyper-lines are sampled in (GT - center).
  double gt_center() const { return gt_center_; }
  /// Index of a ship id, throwing NotFound.
  std::size_t ship_index(const std::string& ship_id) const;

  /// a[...], b[...], sigma[...] per ship, then lambda1..4, sigma_a, sigma_b.
  std::vector<std::string> param_names() const;
  std::size_t n_params() const { return 3 * ships_.size() + 6; }
  /// Identifiability and conditioning notes gathered from the data.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  void init();

  std::vector<ShipData> ships_;
  std::vector<ShipStats> stats_;
  PriorBounds bounds_;
  double gt_center_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Build a fleet from characteristics and noon reports (ships without reports are skipped).
std::vector<ShipData> ships_from_reports(const std::vector<VesselCharacteristics>& chars,
                                         const std::vector<NoonReport>& reports);
/// Build a fleet from characteristics and momentary telemetry.
std::vector<ShipData> ships_from_telemetry(const std::vector<VesselCharacteristics>& chars,
                                           const std::vector<TelemetryRecord>& records);

/// Unpacked parameter vector in the uncentered parameterisation.
struct FleetState {
  std::vector<double> a, b, sigma;
  std::array<double, 4> lambda{};
  double sigma_a = 1.0, sigma_b = 1.0;

  std::vector<double> to_theta() const;
  static FleetState from_theta(const FleetModel& fleet, const std::vector<double>& theta);
};

bool inside_prior_box(const FleetModel& fleet, const FleetState& s);

/// Gaussian log-likelihood of all ships' observations.
double log_likelihood(const FleetModel& fleet, const FleetState& s);
double log_likelihood_ship(const FleetModel& fleet, std::size_t ship, double a, double b, double sigma);
/// Log density of the (a_i, b_i) around the hyper-lines.
double log_hyper_density(const FleetModel& fleet, const FleetState& s);
/// Joint log posterior up to the flat-prior constant (taken as 0); -inf outside the box.
double log_posterior(const FleetModel& fleet, const std::vector<double>& theta);

struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Untruncated full conditional of (a_i, b_i) given hyper-parameters and scales.
GaussianConditional ship_block_conditional(const FleetModel& fleet, const FleetState& s, std::size_t ship);
/// Untruncated full conditional of (lambda1, lambda2) (line = 0) or (lambda3, lambda4) (line = 1).
/// Requires at least two distinct gross tonnages.
GaussianConditional hyper_line_conditional(const FleetModel& fleet, const FleetState& s, int line);

struct SamplerConfig {
  int chains = 4;
  int iterations = 2000;  // including warmup
  int warmup = 1000;
  std::uint64_t seed = 1;
  BoundMultipliers bounds;
  /// Hold sigma_i, sigma_a, sigma_b at their starting values.
  bool freeze_variances = false;
  /// Upper limit on concurrently running chains; 0 = one per hardware thread.
  int threads = 0;
  /// Start every chain here instead of the dispersed data-driven initialisation.
  std::optional<FleetState> initial_state;

  void validate() const;
  std::string describe() const;
};

/// Joint posterior of ship coefficients, hyper-lines and scales by blocked
/// Gibbs sampling: bivariate Gaussian (a_i, b_i) draws, Gaussian hyper-line
/// draws (both truncated to the prior box) and slice-sampled scales.
PosteriorChains fit_hierarchical(const FleetModel& fleet, const SamplerConfig& config);

/// Each ship on its own with flat priors only; one PosteriorChains per ship,
/// parameters a[...], b[...], sigma[...].
std::vector<PosteriorChains> fit_independent(const FleetModel& fleet, const SamplerConfig& config);

/// Least-squares (a, b) per ship; helper for bounds, initialisation and tests.
Eigen::Vector2d least_squares_fit(const std::vector<FeatureRow>& rows);

}  // namespace hbship

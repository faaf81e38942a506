#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hbship/chains.hpp"
#include "hbship/config.hpp"
#include "hbship/diagnostics.hpp"
#include "hbship/inference.hpp"
#include "hbship/prediction.hpp"
#include "hbship/synthetic.hpp"

namespace hbship {

// File-level steps behind the command-line tool. Each step reads the inputs named in
// RunConfig::paths and writes fixed file names into paths.output_dir. A missing output
// directory is an error unless `make_dirs` is set.

inline constexpr const char* kTelemetryFile = "telemetry.csv";
inline constexpr const char* kCharacteristicsFile = "characteristics.csv";
inline constexpr const char* kTruthFile = "truth.csv";
inline constexpr const char* kNoonFile = "noon.csv";
inline constexpr const char* kPosteriorFile = "posterior.csv";
inline constexpr const char* kFitReportFile = "fit_report.csv";
inline constexpr const char* kCompareFile = "compare.csv";

enum class FitMode { Hierarchical, Independent };

/// Telemetry, characteristics and truth CSVs; one summary line per ship.
std::vector<std::string> run_generate(const FleetSpec& spec, const std::filesystem::path& out_dir, bool make_dirs);

/// paths.telemetry -> output_dir/noon.csv. Returns the number of reports written.
std::size_t run_aggregate(const RunConfig& cfg, bool make_dirs);

/// Ships with data: noon reports when paths.noon is set, otherwise telemetry at or
/// above the aggregation speed floor. Characteristics are required.
std::vector<ShipData> load_fleet_data(const RunConfig& cfg);

struct FitOutcome {
  PosteriorChains chains;
  ChainDiagnostics diagnostics;
};

/// Posterior of the requested model; warnings end up in chains.warnings.
FitOutcome fit_fleet(const std::vector<ShipData>& ships, const SamplerConfig& sampler, FitMode mode);

/// Summary table: param,mean,sd,p025,p50,p975,rhat,ess, preceded by '# warning:' lines.
void write_fit_report(std::ostream& out, const FitOutcome& fit);

/// Fit and write output_dir/posterior.csv and output_dir/fit_report.csv.
FitOutcome run_fit(const RunConfig& cfg, FitMode mode, bool make_dirs);

struct PredictTarget {
  std::optional<double> gross_tonnage;
  std::optional<std::string> ship_id;
};

/// Envelope from paths.posterior (default output_dir/posterior.csv).
SpeedPowerEnvelope predict_envelope(const RunConfig& cfg, const PredictTarget& target);

struct PredictOutcome {
  SpeedPowerEnvelope envelope;
  std::filesystem::path path;
};

/// Same, written to output_dir/envelope_<ship id or gt_<GT>>.csv.
PredictOutcome run_predict(const RunConfig& cfg, const PredictTarget& target, bool make_dirs);

struct ModelResiduals {
  std::vector<ResidualSeries> series;
  /// Comparison rows, including steam2 rows marked unavailable.
  std::vector<ComparisonRow> summary;
};

/// Residuals of steam2, prior-based and ship-specific models for every ship with data.
/// Data-based models use posterior means of the coefficients.
ModelResiduals model_residuals(const RunConfig& cfg);

/// residuals.csv, quantiles.csv, kde/<tag>/<ship>.csv, lowess/<tag>/<ship>.csv.
ModelResiduals run_diagnose(const RunConfig& cfg, bool make_dirs);

/// compare.csv: ship_id,model_tag,median_w,p025_w,p975_w,rmse_w,status.
std::vector<ComparisonRow> run_compare(const RunConfig& cfg, bool make_dirs);

}  // namespace hbship

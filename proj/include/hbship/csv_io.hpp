#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hbship/chains.hpp"
#include "hbship/physics.hpp"
#include "hbship/telemetry.hpp"

namespace hbship {

/// Column layouts of the on-disk formats. Headers must match exactly.
inline constexpr const char* kTelemetryHeader =
    "ship_id,timestamp_utc,stw_mps,rel_wind_speed_mps,rel_wind_angle_rad,propulsion_power_w";
inline constexpr const char* kNoonHeader =
    "ship_id,interval_start_utc,interval_end_utc,mean_x_hydro,mean_x_aero,mean_power_w,sample_count,coverage";
inline constexpr const char* kCharacteristicsHeader =
    "ship_id,gross_tonnage,lwl_m,breadth_m,draft_m,wetted_surface_m2,c_r";
inline constexpr const char* kTruthHeader = "ship_id,a_true,b_true,sigma_true";
inline constexpr const char* kPosteriorHeader = "chain,draw,param,value";

/// Strict mode turns invariant violations and duplicate keys into DataError.
/// Otherwise offending rows are skipped and described (with line numbers) in `skipped`.
/// Malformed rows (wrong field count, unparseable numbers) are always fatal.
struct CsvReadOptions {
  bool strict = true;
  std::vector<std::string>* skipped = nullptr;
};

std::vector<TelemetryRecord> read_telemetry_csv(std::istream& in, const CsvReadOptions& opt = {});
std::vector<TelemetryRecord> load_telemetry_csv(const std::filesystem::path& path, const CsvReadOptions& opt = {});
void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRecord>& records);

std::vector<NoonReport> read_noon_csv(std::istream& in, const CsvReadOptions& opt = {});
std::vector<NoonReport> load_noon_csv(const std::filesystem::path& path, const CsvReadOptions& opt = {});
void write_noon_csv(std::ostream& out, const std::vector<NoonReport>& reports);

std::vector<VesselCharacteristics> read_characteristics_csv(std::istream& in);
std::vector<VesselCharacteristics> load_characteristics_csv(const std::filesystem::path& path);
void write_characteristics_csv(std::ostream& out, const std::vector<VesselCharacteristics>& ships);

struct TruthRow {
  std::string ship_id;
  ShipParameters params;
};
std::vector<TruthRow> read_truth_csv(std::istream& in);
void write_truth_csv(std::ostream& out, const std::vector<TruthRow>& rows);

/// Long format, one row per (chain, draw, parameter); chain and draw are 0-based.
void write_posterior_csv(std::ostream& out, const PosteriorChains& chains);
PosteriorChains read_posterior_csv(std::istream& in);
PosteriorChains load_posterior_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Open a file for writing, throwing IoError on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace hbship

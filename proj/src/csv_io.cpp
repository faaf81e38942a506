#include "hbship/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hbship/error.hpp"

namespace hbship {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, long line, const char* column) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(std::string("cannot parse ") + column + " value '" + std::string(s) + "'", line);
  return v;
}

std::int64_t parse_int(std::string_view s, long line, const char* column) {
  std::int64_t v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(std::string("cannot parse integer ") + column + " value '" + std::string(s) + "'", line);
  return v;
}

// Reads a header-led CSV and calls `row(fields, line_no)` for each non-blank line.
template <typename RowFn>
void read_table(std::istream& in, std::string_view expected_header, RowFn&& row) {
  std::string line;
  long line_no = 0;
  bool have_header = false;
  const auto n_cols = split_fields(expected_header).size();
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (!have_header) {
      if (view != expected_header)
        throw DataError("unexpected header '" + std::string(view) + "', expected '" + std::string(expected_header) + "'",
                        line_no);
      have_header = true;
      continue;
    }
    const auto fields = split_fields(view);
    if (fields.size() != n_cols)
      throw DataError("expected " + std::to_string(n_cols) + " fields, found " + std::to_string(fields.size()), line_no);
    row(fields, line_no);
  }
  if (in.bad()) throw IoError("read error");
  if (!have_header) throw DataError("missing header row, expected '" + std::string(expected_header) + "'");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

void reject_or_skip(const CsvReadOptions& opt, const std::string& what, long line) {
  if (opt.strict) throw DataError(what, line);
  if (opt.skipped) opt.skipped->push_back("line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::vector<TelemetryRecord> read_telemetry_csv(std::istream& in, const CsvReadOptions& opt) {
  std::vector<TelemetryRecord> out;
  std::set<std::pair<std::string, std::int64_t>> seen;
  read_table(in, kTelemetryHeader, [&](const std::vector<std::string_view>& f, long line) {
    TelemetryRecord r;
    r.ship_id = std::string(f[0]);
    r.timestamp = parse_int(f[1], line, "timestamp_utc");
    r.speed = parse_double(f[2], line, "stw_mps");
    r.wind_speed = parse_double(f[3], line, "rel_wind_speed_mps");
    r.wind_angle = parse_double(f[4], line, "rel_wind_angle_rad");
    r.power = parse_double(f[5], line, "propulsion_power_w");
    if (auto why = r.violation(); !why.empty()) return reject_or_skip(opt, why, line);
    if (!seen.emplace(r.ship_id, r.timestamp).second)
      return reject_or_skip(opt, "duplicate (ship_id, timestamp) for ship '" + r.ship_id + "'", line);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<TelemetryRecord> load_telemetry_csv(const std::filesystem::path& path, const CsvReadOptions& opt) {
  auto in = open_input(path);
  try {
    return read_telemetry_csv(in, opt);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRecord>& records) {
  out << kTelemetryHeader << '\n';
  for (const auto& r : records)
    out << r.ship_id << ',' << r.timestamp << ',' << format_double(r.speed) << ',' << format_double(r.wind_speed)
        << ',' << format_double(r.wind_angle) << ',' << format_double(r.power) << '\n';
}

std::vector<NoonReport> read_noon_csv(std::istream& in, const CsvReadOptions& opt) {
  std::vector<NoonReport> out;
  std::set<std::pair<std::string, std::int64_t>> seen;
  read_table(in, kNoonHeader, [&](const std::vector<std::string_view>& f, long line) {
    NoonReport r;
    r.ship_id = std::string(f[0]);
    r.interval_start = parse_int(f[1], line, "interval_start_utc");
    r.interval_end = parse_int(f[2], line, "interval_end_utc");
    r.mean_x_hydro = parse_double(f[3], line, "mean_x_hydro");
    r.mean_x_aero = parse_double(f[4], line, "mean_x_aero");
    r.mean_power = parse_double(f[5], line, "mean_power_w");
    r.sample_count = parse_int(f[6], line, "sample_count");
    r.coverage = parse_double(f[7], line, "coverage");
    if (auto why = r.violation(); !why.empty()) return reject_or_skip(opt, why, line);
    if (!seen.emplace(r.ship_id, r.interval_start).second)
      return reject_or_skip(opt, "duplicate (ship_id, interval_start) for ship '" + r.ship_id + "'", line);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<NoonReport> load_noon_csv(const std::filesystem::path& path, const CsvReadOptions& opt) {
  auto in = open_input(path);
  try {
    return read_noon_csv(in, opt);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_noon_csv(std::ostream& out, const std::vector<NoonReport>& reports) {
  out << kNoonHeader << '\n';
  for (const auto& r : reports)
    out << r.ship_id << ',' << r.interval_start << ',' << r.interval_end << ',' << format_double(r.mean_x_hydro) << ','
        << format_double(r.mean_x_aero) << ',' << format_double(r.mean_power) << ',' << r.sample_count << ','
        << format_double(r.coverage) << '\n';
}

std::vector<VesselCharacteristics> read_characteristics_csv(std::istream& in) {
  std::vector<VesselCharacteristics> out;
  std::set<std::string> seen;
  read_table(in, kCharacteristicsHeader, [&](const std::vector<std::string_view>& f, long line) {
    VesselCharacteristics c;
    c.ship_id = std::string(f[0]);
    c.gross_tonnage = parse_double(f[1], line, "gross_tonnage");
    c.lwl = parse_double(f[2], line, "lwl_m");
    c.breadth = parse_double(f[3], line, "breadth_m");
    c.draft = parse_double(f[4], line, "draft_m");
    if (!f[5].empty()) c.wetted_surface = parse_double(f[5], line, "wetted_surface_m2");
    if (!f[6].empty()) c.residual_coeff = parse_double(f[6], line, "c_r");
    try {
      c.validate();
    } catch (const DataError& e) {
      throw DataError(e.what(), line);
    }
    if (!seen.insert(c.ship_id).second) throw DataError("duplicate ship_id '" + c.ship_id + "'", line);
    out.push_back(std::move(c));
  });
  return out;
}

std::vector<VesselCharacteristics> load_characteristics_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_characteristics_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_characteristics_csv(std::ostream& out, const std::vector<VesselCharacteristics>& ships) {
  out << kCharacteristicsHeader << '\n';
  for (const auto& c : ships) {
    out << c.ship_id << ',' << format_double(c.gross_tonnage) << ',' << format_double(c.lwl) << ','
        << format_double(c.breadth) << ',' << format_double(c.draft) << ',';
    if (c.wetted_surface) out << format_double(*c.wetted_surface);
    out << ',';
    if (c.residual_coeff) out << format_double(*c.residual_coeff);
    out << '\n';
  }
}

std::vector<TruthRow> read_truth_csv(std::istream& in) {
  std::vector<TruthRow> out;
  read_table(in, kTruthHeader, [&](const std::vector<std::string_view>& f, long line) {
    out.push_back({std::string(f[0]),
                   {parse_double(f[1], line, "a_true"), parse_double(f[2], line, "b_true"),
                    parse_double(f[3], line, "sigma_true")}});
  });
  return out;
}

void write_truth_csv(std::ostream& out, const std::vector<TruthRow>& rows) {
  out << kTruthHeader << '\n';
  for (const auto& r : rows)
    out << r.ship_id << ',' << format_double(r.params.a) << ',' << format_double(r.params.b) << ','
        << format_double(r.params.sigma) << '\n';
}

void write_posterior_csv(std::ostream& out, const PosteriorChains& chains) {
  chains.check_shape();
  out << kPosteriorHeader << '\n';
  for (std::size_t c = 0; c < chains.n_chains; ++c)
    for (std::size_t d = 0; d < chains.n_draws; ++d)
      for (std::size_t p = 0; p < chains.n_params(); ++p)
        out << c << ',' << d << ',' << chains.param_names[p] << ',' << format_double(chains.at(c, d, p)) << '\n';
}

PosteriorChains read_posterior_csv(std::istream& in) {
  struct Cell {
    std::int64_t chain, draw;
    std::size_t param;
    double value;
  };
  std::vector<Cell> cells;
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
  std::int64_t max_chain = -1, max_draw = -1;
  read_table(in, kPosteriorHeader, [&](const std::vector<std::string_view>& f, long line) {
    const auto chain = parse_int(f[0], line, "chain");
    const auto draw = parse_int(f[1], line, "draw");
    if (chain < 0 || draw < 0) throw DataError("negative chain/draw index", line);
    const std::string name(f[2]);
    if (name.empty()) throw DataError("empty parameter name", line);
    auto [it, fresh] = index.emplace(name, names.size());
    if (fresh) names.push_back(name);
    cells.push_back({chain, draw, it->second, parse_double(f[3], line, "value")});
    max_chain = std::max(max_chain, chain);
    max_draw = std::max(max_draw, draw);
  });
  PosteriorChains out;
  out.param_names = names;
  out.n_chains = static_cast<std::size_t>(max_chain + 1);
  out.n_draws = static_cast<std::size_t>(max_draw + 1);
  if (cells.size() != out.n_chains * out.n_draws * names.size())
    throw DataError("posterior CSV is not a complete chain x draw x param table");
  out.values.assign(cells.size(), 0.0);
  std::vector<char> filled(cells.size(), 0);
  for (const auto& cell : cells) {
    const std::size_t k =
        (static_cast<std::size_t>(cell.chain) * out.n_draws + static_cast<std::size_t>(cell.draw)) * names.size() +
        cell.param;
    if (filled[k]) throw DataError("duplicate posterior cell for parameter '" + names[cell.param] + "'");
    filled[k] = 1;
    out.values[k] = cell.value;
  }
  return out;
}

PosteriorChains load_posterior_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_posterior_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace hbship

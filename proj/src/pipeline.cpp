#include "hbship/pipeline.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "hbship/csv_io.hpp"
#include "hbship/error.hpp"
#include "hbship/stats.hpp"

namespace hbship {

namespace fs = std::filesystem;

namespace {

fs::path prepare_dir(const fs::path& dir, bool make_dirs) {
  if (dir.empty()) throw InvalidArgument("no output directory configured");
  std::error_code ec;
  if (fs::is_directory(dir, ec)) return dir;
  if (fs::exists(dir, ec)) throw IoError("output path '" + dir.string() + "' is not a directory");
  if (!make_dirs) throw IoError("output directory '" + dir.string() + "' does not exist (use --mkdir)");
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& body) {
  auto out = open_output(path);
  out << body;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

const std::string& require_path(const std::string& p, const char* what) {
  if (p.empty()) throw InvalidArgument(std::string("no ") + what + " path configured");
  return p;
}

fs::path posterior_path(const RunConfig& cfg) {
  if (!cfg.paths.posterior.empty()) return cfg.paths.posterior;
  if (cfg.paths.output_dir.empty()) throw InvalidArgument("no posterior path configured");
  return fs::path(cfg.paths.output_dir) / kPosteriorFile;
}

std::vector<TelemetryRecord> load_moving(const RunConfig& cfg) {
  auto recs = load_telemetry_csv(cfg.paths.telemetry);
  std::erase_if(recs, [&](const TelemetryRecord& r) { return r.speed < cfg.aggregation.speed_floor; });
  return recs;
}

/// Observations per ship from the configured data source.
std::map<std::string, std::vector<Observation>> load_observations(const RunConfig& cfg) {
  std::map<std::string, std::vector<Observation>> out;
  if (!cfg.paths.noon.empty()) {
    std::map<std::string, std::vector<NoonReport>> by_ship;
    for (auto& r : load_noon_csv(cfg.paths.noon)) by_ship[r.ship_id].push_back(std::move(r));
    for (const auto& [id, reps] : by_ship) out[id] = observations(reps);
  } else {
    require_path(cfg.paths.telemetry, "telemetry or noon-report");
    std::map<std::string, std::vector<TelemetryRecord>> by_ship;
    for (auto& r : load_moving(cfg)) by_ship[r.ship_id].push_back(std::move(r));
    for (const auto& [id, recs] : by_ship) out[id] = observations(recs);
  }
  return out;
}

/// Wind effects of one ship's data, for the default envelope wind effect.
std::optional<double> data_wind_effect(const RunConfig& cfg, const std::string& ship_id) {
  std::vector<double> effects;
  if (!cfg.paths.noon.empty()) {
    std::vector<NoonReport> mine;
    for (auto& r : load_noon_csv(cfg.paths.noon))
      if (r.ship_id == ship_id) mine.push_back(std::move(r));
    effects = wind_effects(mine);
  } else if (!cfg.paths.telemetry.empty()) {
    std::vector<TelemetryRecord> mine;
    for (auto& r : load_moving(cfg))
      if (r.ship_id == ship_id) mine.push_back(std::move(r));
    effects = wind_effects(mine);
  }
  if (effects.empty()) return std::nullopt;
  return median_wind_effect(effects);
}

std::string file_stem(const std::string& id) {
  std::string s = id;
  for (char& ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
  if (s.empty() || s == "." || s == "..") s = "_" + s;
  return s;
}

ComparisonRow unavailable(const std::string& ship_id, ModelTag tag) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {ship_id, tag, nan, nan, nan, nan, "unavailable"};
}

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace

std::vector<std::string> run_generate(const FleetSpec& spec, const fs::path& out_dir, bool make_dirs) {
  spec.validate();
  prepare_dir(out_dir, make_dirs);
  const auto fleet = generate(spec);

  std::vector<VesselCharacteristics> chars;
  std::vector<TruthRow> truth;
  std::vector<std::string> lines;
  for (const auto& s : fleet.ships) {
    chars.push_back(s.chars);
    truth.push_back({s.chars.ship_id, s.truth});
    std::ostringstream line;
    line << s.chars.ship_id << " gt=" << format_double(s.chars.gross_tonnage) << " a=" << format_double(s.truth.a)
         << " b=" << format_double(s.truth.b) << " sigma=" << format_double(s.truth.sigma)
         << " records=" << static_cast<long long>(spec.days) * spec.records_per_day;
    lines.push_back(line.str());
  }
  std::ostringstream tel, ch, tr;
  write_telemetry_csv(tel, fleet.telemetry);
  write_characteristics_csv(ch, chars);
  write_truth_csv(tr, truth);
  write_file(out_dir / kTelemetryFile, tel.str());
  write_file(out_dir / kCharacteristicsFile, ch.str());
  write_file(out_dir / kTruthFile, tr.str());
  return lines;
}

std::size_t run_aggregate(const RunConfig& cfg, bool make_dirs) {
  const auto records = load_telemetry_csv(require_path(cfg.paths.telemetry, "telemetry"));
  const auto reports = aggregate(records, cfg.aggregation);
  const auto dir = prepare_dir(cfg.paths.output_dir, make_dirs);
  std::ostringstream out;
  write_noon_csv(out, reports);
  write_file(dir / kNoonFile, out.str());
  return reports.size();
}

std::vector<ShipData> load_fleet_data(const RunConfig& cfg) {
  const auto chars = load_characteristics_csv(require_path(cfg.paths.characteristics, "characteristics"));
  std::vector<ShipData> ships;
  if (!cfg.paths.noon.empty())
    ships = ships_from_reports(chars, load_noon_csv(cfg.paths.noon));
  else
    ships = ships_from_telemetry(chars, load_moving(cfg));
  if (ships.empty()) throw DataError("no ship has both characteristics and observations");
  return ships;
}

FitOutcome fit_fleet(const std::vector<ShipData>& ships, const SamplerConfig& sampler, FitMode mode) {
  FitOutcome out;
  const FleetModel fleet(ships, sampler.bounds);
  out.chains = mode == FitMode::Hierarchical ? fit_hierarchical(fleet, sampler)
                                             : merge_columns(fit_independent(fleet, sampler));
  out.diagnostics = diagnose(out.chains);
  for (std::size_t p = 0; p < out.chains.n_params(); ++p) {
    const double r = out.diagnostics.rhat[p];
    if (!(r < 1.05))
      out.chains.warnings.push_back("split R-hat of " + out.chains.param_names[p] + " is " + format_double(r) +
                                    " (>= 1.05)");
  }
  return out;
}

void write_fit_report(std::ostream& out, const FitOutcome& fit) {
  for (const auto& w : fit.chains.warnings) out << "# warning: " << w << '\n';
  out << "param,mean,sd,p025,p50,p975,rhat,ess\n";
  const double probs[] = {0.025, 0.5, 0.975};
  for (std::size_t p = 0; p < fit.chains.n_params(); ++p) {
    const auto col = fit.chains.column(p);
    const auto q = quantiles(col, probs);
    out << fit.chains.param_names[p] << ',' << format_double(mean(col)) << ',' << format_double(stddev(col)) << ','
        << format_double(q[0]) << ',' << format_double(q[1]) << ',' << format_double(q[2]) << ','
        << cell(fit.diagnostics.rhat[p]) << ',' << cell(fit.diagnostics.ess[p]) << '\n';
  }
}

FitOutcome run_fit(const RunConfig& cfg, FitMode mode, bool make_dirs) {
  cfg.sampler.validate();
  const auto dir = prepare_dir(cfg.paths.output_dir, make_dirs);
  auto fit = fit_fleet(load_fleet_data(cfg), cfg.sampler, mode);
  std::ostringstream post, report;
  write_posterior_csv(post, fit.chains);
  write_fit_report(report, fit);
  write_file(dir / kPosteriorFile, post.str());
  write_file(dir / kFitReportFile, report.str());
  return fit;
}

SpeedPowerEnvelope predict_envelope(const RunConfig& cfg, const PredictTarget& target) {
  if (target.gross_tonnage.has_value() == target.ship_id.has_value())
    throw InvalidArgument("predict needs exactly one of a gross tonnage or a ship id");
  const auto chains = load_posterior_csv(posterior_path(cfg));
  const auto grid = speed_grid(cfg.envelope.speed_min, cfg.envelope.speed_max, cfg.envelope.speed_points);
  if (target.gross_tonnage) {
    const double wind = cfg.envelope.wind_effect.value_or(0.0);
    return predict_prior_based(chains, *target.gross_tonnage, grid, wind,
                               {cfg.envelope.include_hyper_noise, cfg.envelope.seed});
  }
  const auto& id = *target.ship_id;
  if (!chains.index_of(param_a(id))) throw NotFound("unknown ship '" + id + "'");
  double wind = 0.0;
  if (cfg.envelope.wind_effect)
    wind = *cfg.envelope.wind_effect;
  else if (auto w = data_wind_effect(cfg, id))
    wind = *w;
  return predict_ship_specific(chains, id, grid, wind, {cfg.envelope.include_observation_noise, cfg.envelope.seed});
}

PredictOutcome run_predict(const RunConfig& cfg, const PredictTarget& target, bool make_dirs) {
  auto env = predict_envelope(cfg, target);
  const auto dir = prepare_dir(cfg.paths.output_dir, make_dirs);
  const std::string name = target.ship_id ? "envelope_" + file_stem(*target.ship_id) + ".csv"
                                          : "envelope_gt_" + format_double(*target.gross_tonnage) + ".csv";
  std::ostringstream out;
  write_envelope_csv(out, env);
  write_file(dir / name, out.str());
  return {std::move(env), dir / name};
}

ModelResiduals model_residuals(const RunConfig& cfg) {
  const auto chars = load_characteristics_csv(require_path(cfg.paths.characteristics, "characteristics"));
  const auto chains = load_posterior_csv(posterior_path(cfg));
  const auto data = load_observations(cfg);
  bool hierarchical = true;
  for (const char* name : kHyperNames) hierarchical = hierarchical && chains.index_of(name).has_value();

  ModelResiduals out;
  auto add = [&](const std::string& id, const std::vector<Observation>& obs, const ModelEvaluator& model,
                 const std::string& status) {
    out.series.push_back(residuals(id, obs, model));
    auto row = summarize(out.series.back());
    row.status = status;
    out.summary.push_back(row);
  };

  for (const auto& c : chars) {
    const auto it = data.find(c.ship_id);
    if (it == data.end() || it->second.empty()) continue;
    const auto& obs = it->second;

    if (c.wetted_surface && c.residual_coeff) {
      add(c.ship_id, obs, steam2_model(c, cfg.water), "ok");
    } else if (cfg.diagnostics.heuristic_wetted_surface && c.residual_coeff) {
      auto guessed = c;
      guessed.wetted_surface = heuristic_wetted_surface(c, cfg.diagnostics.wetted_surface_factor);
      add(c.ship_id, obs, steam2_model(guessed, cfg.water), "heuristic_wetted_surface");
    } else {
      out.summary.push_back(unavailable(c.ship_id, ModelTag::Steam2));
    }

    if (hierarchical) {
      double a = 0.0, b = 0.0;
      for (std::size_t ch = 0; ch < chains.n_chains; ++ch)
        for (std::size_t d = 0; d < chains.n_draws; ++d) {
          const auto p = hyper_line_at(chains, ch, d, c.gross_tonnage);
          a += p.a;
          b += p.b;
        }
      const double n = static_cast<double>(chains.n_chains * chains.n_draws);
      add(c.ship_id, obs, greybox_model(c.ship_id, ModelTag::PriorBased, a / n, b / n), "ok");
    } else {
      out.summary.push_back(unavailable(c.ship_id, ModelTag::PriorBased));
    }

    const auto ia = chains.index_of(param_a(c.ship_id));
    const auto ib = chains.index_of(param_b(c.ship_id));
    if (ia && ib)
      add(c.ship_id, obs, greybox_model(c.ship_id, ModelTag::ShipSpecific, chains.mean_of(*ia), chains.mean_of(*ib)),
          "ok");
    else
      out.summary.push_back(unavailable(c.ship_id, ModelTag::ShipSpecific));
  }
  if (out.summary.empty()) throw DataError("no ship has both characteristics and observations");
  return out;
}

ModelResiduals run_diagnose(const RunConfig& cfg, bool make_dirs) {
  const auto& dc = cfg.diagnostics;
  auto res = model_residuals(cfg);
  const auto dir = prepare_dir(cfg.paths.output_dir, make_dirs);

  std::ostringstream resid;
  resid << "ship_id,model_tag,speed_mps,residual_w\n";
  for (const auto& s : res.series)
    for (std::size_t k = 0; k < s.residuals.size(); ++k)
      resid << s.ship_id << ',' << to_string(s.tag) << ',' << format_double(s.speeds[k]) << ','
            << format_double(s.residuals[k]) << '\n';
  write_file(dir / "residuals.csv", resid.str());

  std::ostringstream quant;
  quant << "ship_id,model_tag,prob,value_w\n";
  for (const auto& q : residual_quantiles(res.series, dc.quantile_probs))
    quant << q.ship_id << ',' << to_string(q.tag) << ',' << format_double(q.prob) << ',' << format_double(q.value)
          << '\n';
  write_file(dir / "quantiles.csv", quant.str());

  for (const auto& s : res.series) {
    const auto tag_dir = std::string(to_string(s.tag));
    const auto kde_dir = prepare_dir(dir / "kde" / tag_dir, true);
    const auto density = kde(s.residuals, std::nullopt, dc.kde_points);
    std::ostringstream k;
    k << "value,density\n";
    for (std::size_t j = 0; j < density.x.size(); ++j)
      k << format_double(density.x[j]) << ',' << format_double(density.density[j]) << '\n';
    write_file(kde_dir / (file_stem(s.ship_id) + ".csv"), k.str());

    // A smoother needs a neighbourhood of at least two points.
    if (std::ceil(dc.lowess_frac * static_cast<double>(s.residuals.size())) < 2.0) continue;
    const auto lowess_dir = prepare_dir(dir / "lowess" / tag_dir, true);
    const auto curve = lowess(s.speeds, s.residuals, dc.lowess_frac, dc.lowess_iterations);
    std::ostringstream l;
    l << "speed_mps,residual_w_fit\n";
    for (std::size_t j = 0; j < curve.x.size(); ++j) l << format_double(curve.x[j]) << ',' << format_double(curve.y[j]) << '\n';
    write_file(lowess_dir / (file_stem(s.ship_id) + ".csv"), l.str());
  }
  return res;
}

std::vector<ComparisonRow> run_compare(const RunConfig& cfg, bool make_dirs) {
  auto res = model_residuals(cfg);
  const auto dir = prepare_dir(cfg.paths.output_dir, make_dirs);
  std::ostringstream out;
  out << "ship_id,model_tag,median_w,p025_w,p975_w,rmse_w,status\n";
  for (const auto& r : res.summary)
    out << r.ship_id << ',' << to_string(r.tag) << ',' << cell(r.median) << ',' << cell(r.p025) << ','
        << cell(r.p975) << ',' << cell(r.rmse) << ',' << r.status << '\n';
  write_file(dir / kCompareFile, out.str());
  return res.summary;
}

}  // namespace hbship

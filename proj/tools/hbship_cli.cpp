// Command-line front end. Talks to the library only through hbship.h.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "hbship/hbship.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

int exit_code(hbs_status s) {
  switch (s) {
    case HBS_OK: return kOk;
    case HBS_ERR_INVALID_ARGUMENT:
    case HBS_ERR_IO: return kUsage;
    case HBS_ERR_DATA:
    case HBS_ERR_NOT_FOUND: return kData;
    case HBS_ERR_INTERNAL: break;
  }
  return kInternal;
}

struct Failure {
  hbs_status status;
};

void check(hbs_status s) {
  if (s != HBS_OK) {
    std::fprintf(stderr, "error: %s\n", hbs_last_error());
    throw Failure{s};
  }
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Config = Handle<hbs_config, hbs_config_free>;
using Spec = Handle<hbs_fleet_spec, hbs_fleet_spec_free>;
using Posterior = Handle<hbs_posterior, hbs_posterior_free>;
using Envelope = Handle<hbs_envelope, hbs_envelope_free>;
using Strings = Handle<hbs_strings, hbs_strings_free>;
using Table = Handle<hbs_comparison, hbs_comparison_free>;

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Settings shared by the run-config subcommands, applied as `section.key` overrides.
struct RunOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::uint64_t> seed;
  bool mkdir = false;

  void add_path(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  }
  template <typename T>
  void add_value(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<T>(
        flag, [this, key](const T& v) { overrides.emplace_back(key, CLI::detail::to_string(v)); }, help);
  }
  void add_flag(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& value,
                const std::string& help) {
    cmd->add_flag_callback(flag, [this, key, value] { overrides.emplace_back(key, value); }, help);
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "INI run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--set", sets, "Override a setting, section.key=value (repeatable)");
    cmd->add_option("--seed", seed, "Master seed for sampling and envelopes");
    add_value<int>(cmd, "--threads", "sampler.threads", "Cap on concurrently running chains");
    add_path(cmd, "-o,--output-dir", "paths.output_dir", "Output directory");
    add_path(cmd, "--telemetry", "paths.telemetry", "Telemetry CSV");
    add_path(cmd, "--noon", "paths.noon", "Noon-report CSV (preferred over telemetry when given)");
    add_path(cmd, "--characteristics", "paths.characteristics", "Vessel characteristics CSV");
    add_path(cmd, "--posterior", "paths.posterior", "Posterior CSV (default <output-dir>/posterior.csv)");
    cmd->add_flag("--mkdir", mkdir, "Create the output directory when missing");
  }

  /// defaults < config file < --set < dedicated flags
  void build(Config& cfg) const {
    if (config_file.empty())
      check(hbs_config_new(cfg.out()));
    else
      check(hbs_config_load(config_file.c_str(), cfg.out()));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n", s.c_str());
        throw Failure{HBS_ERR_INVALID_ARGUMENT};
      }
      check(hbs_config_set(cfg.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
    }
    for (const auto& [k, v] : overrides) check(hbs_config_set(cfg.get(), k.c_str(), v.c_str()));
    if (seed) {
      const auto s = std::to_string(*seed);
      check(hbs_config_set(cfg.get(), "sampler.seed", s.c_str()));
      check(hbs_config_set(cfg.get(), "envelope.seed", s.c_str()));
    }
  }
};

void print_table(const hbs_comparison* table) {
  std::printf("%-16s %-14s %14s %14s %14s %14s %s\n", "ship_id", "model_tag", "median_w", "p025_w", "p975_w",
              "rmse_w", "status");
  for (size_t i = 0; i < hbs_comparison_size(table); ++i) {
    hbs_comparison_row r;
    check(hbs_comparison_row_at(table, i, &r));
    std::printf("%-16s %-14s %14s %14s %14s %14s %s\n", r.ship_id, r.model_tag, num(r.median_w).c_str(),
                num(r.p025_w).c_str(), num(r.p975_w).c_str(), num(r.rmse_w).c_str(), r.status);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical Bayesian speed-power models for ship fleets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hbs_version());

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic fleet: telemetry, characteristics and truth CSVs");
  std::string spec_file, gen_out;
  std::vector<std::string> spec_sets;
  std::optional<std::uint64_t> gen_seed;
  bool gen_mkdir = false;
  gen->add_option("-s,--spec", spec_file, "INI fleet specification")->check(CLI::ExistingFile);
  gen->add_option("-o,--output-dir", gen_out, "Output directory")->required();
  gen->add_option("--set", spec_sets, "Override a spec setting, section.key=value (repeatable)");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_flag("--mkdir", gen_mkdir, "Create the output directory when missing");

  // aggregate
  RunOptions agg_opt;
  auto* agg = app.add_subcommand("aggregate", "Average telemetry into interval (noon-report) records");
  agg_opt.attach(agg);
  agg_opt.add_value<double>(agg, "--interval-hours", "aggregation.interval_hours", "Interval length [h]");
  agg_opt.add_value<double>(agg, "--min-coverage", "aggregation.min_coverage", "Minimum interval coverage");
  agg_opt.add_value<double>(agg, "--speed-floor", "aggregation.speed_floor", "Drop records below this STW [m/s]");
  agg_opt.add_value<double>(agg, "--cadence", "aggregation.nominal_cadence_s", "Nominal sampling gap [s]");

  // fit
  RunOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "Sample the posterior and write posterior.csv and fit_report.csv");
  fit_opt.attach(fit);
  bool hierarchical = false, independent = false;
  auto* h_flag = fit->add_flag("--hierarchical", hierarchical, "Fleet model with hyper-lines (default)");
  fit->add_flag("--independent", independent, "Each ship on its own, flat priors")->excludes(h_flag);
  fit_opt.add_value<int>(fit, "--chains", "sampler.chains", "Number of chains");
  fit_opt.add_value<int>(fit, "--iterations", "sampler.iterations", "Iterations per chain, warmup included");
  fit_opt.add_value<int>(fit, "--warmup", "sampler.warmup", "Warmup iterations per chain");
  fit_opt.add_flag(fit, "--freeze-variances", "sampler.freeze_variances", "true", "Hold the scales fixed");

  // predict
  RunOptions pred_opt;
  auto* pred = app.add_subcommand("predict", "Speed-power envelope for a ship or a gross tonnage");
  pred_opt.attach(pred);
  std::optional<double> gt;
  std::optional<std::string> ship_id;
  auto* gt_opt = pred->add_option("--gt", gt, "Gross tonnage (prior-based envelope)");
  pred->add_option("--ship-id", ship_id, "Observed ship (ship-specific envelope)")->excludes(gt_opt);
  pred_opt.add_value<double>(pred, "--wind-effect", "envelope.wind_effect", "cos(alpha) U_R^2 [m^2/s^2]");
  pred_opt.add_value<double>(pred, "--speed-min", "envelope.speed_min", "Grid start [m/s]");
  pred_opt.add_value<double>(pred, "--speed-max", "envelope.speed_max", "Grid end [m/s]");
  pred_opt.add_value<int>(pred, "--speed-points", "envelope.speed_points", "Grid size");
  pred_opt.add_flag(pred, "--no-hyper-noise", "envelope.include_hyper_noise", "false",
                    "Prior-based: hyper-line uncertainty only");
  pred_opt.add_flag(pred, "--observation-noise", "envelope.include_observation_noise", "true",
                    "Ship-specific: add observation noise");

  // diagnose / compare
  RunOptions diag_opt, cmp_opt;
  auto* diag = app.add_subcommand("diagnose", "Residual, quantile, KDE and LOWESS CSVs per ship and model");
  diag_opt.attach(diag);
  diag_opt.add_flag(diag, "--heuristic-wetted-surface", "diagnostics.heuristic_wetted_surface", "true",
                    "Estimate missing wetted surfaces (flagged in output)");
  auto* cmp = app.add_subcommand("compare", "Residual summary per ship across steam2, prior-based and ship-specific");
  cmp_opt.attach(cmp);
  cmp_opt.add_flag(cmp, "--heuristic-wetted-surface", "diagnostics.heuristic_wetted_surface", "true",
                   "Estimate missing wetted surfaces (flagged in output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) {
      Spec spec;
      if (spec_file.empty())
        check(hbs_fleet_spec_new(spec.out()));
      else
        check(hbs_fleet_spec_load(spec_file.c_str(), spec.out()));
      for (const auto& s : spec_sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
          std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n", s.c_str());
          return kUsage;
        }
        check(hbs_fleet_spec_set(spec.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
      }
      if (gen_seed) check(hbs_fleet_spec_set(spec.get(), "fleet.seed", std::to_string(*gen_seed).c_str()));
      Strings summary;
      check(hbs_generate(spec.get(), gen_out.c_str(), gen_mkdir ? 1 : 0, summary.out()));
      for (size_t i = 0; i < hbs_strings_size(summary.get()); ++i) std::printf("%s\n", hbs_strings_get(summary.get(), i));
    } else if (agg->parsed()) {
      Config cfg;
      agg_opt.build(cfg);
      size_t n = 0;
      check(hbs_aggregate(cfg.get(), agg_opt.mkdir ? 1 : 0, &n));
      std::printf("wrote %zu interval records\n", n);
    } else if (fit->parsed()) {
      Config cfg;
      fit_opt.build(cfg);
      Posterior post;
      check(hbs_fit(cfg.get(), independent ? HBS_FIT_INDEPENDENT : HBS_FIT_HIERARCHICAL, fit_opt.mkdir ? 1 : 0,
                    post.out()));
      double max_rhat = 0.0, min_ess = HUGE_VAL;
      for (size_t p = 0; p < hbs_posterior_n_params(post.get()); ++p) {
        double r = 0.0, e = 0.0;
        check(hbs_posterior_rhat(post.get(), p, &r));
        check(hbs_posterior_ess(post.get(), p, &e));
        if (!(r <= max_rhat)) max_rhat = r;
        if (e < min_ess) min_ess = e;
      }
      std::printf("%zu parameters, %zu chains x %zu draws; max split R-hat %s, min ESS %s\n",
                  hbs_posterior_n_params(post.get()), hbs_posterior_n_chains(post.get()),
                  hbs_posterior_n_draws(post.get()), num(max_rhat).c_str(), num(min_ess).c_str());
      for (size_t i = 0; i < hbs_posterior_n_warnings(post.get()); ++i)
        std::fprintf(stderr, "warning: %s\n", hbs_posterior_warning(post.get(), i));
    } else if (pred->parsed()) {
      if (!gt && !ship_id) {
        std::fprintf(stderr, "error: predict needs --gt or --ship-id\n");
        return kUsage;
      }
      Config cfg;
      pred_opt.build(cfg);
      Envelope env;
      Strings path;
      check(hbs_run_predict(cfg.get(), ship_id ? ship_id->c_str() : nullptr, gt.value_or(NAN),
                            pred_opt.mkdir ? 1 : 0, env.out(), path.out()));
      std::printf("wrote %s (%zu speeds)\n", hbs_strings_get(path.get(), 0), hbs_envelope_size(env.get()));
    } else if (diag->parsed()) {
      Config cfg;
      diag_opt.build(cfg);
      Table table;
      check(hbs_diagnose(cfg.get(), diag_opt.mkdir ? 1 : 0, table.out()));
      print_table(table.get());
    } else if (cmp->parsed()) {
      Config cfg;
      cmp_opt.build(cfg);
      Table table;
      check(hbs_compare(cfg.get(), cmp_opt.mkdir ? 1 : 0, table.out()));
      print_table(table.get());
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return kOk;
}

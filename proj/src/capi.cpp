#include "hbship/hbship.h"

#include <cmath>
#include <exception>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include "hbship/config.hpp"
#include "hbship/csv_io.hpp"
#include "hbship/error.hpp"
#include "hbship/physics.hpp"
#include "hbship/pipeline.hpp"

struct hbs_strings {
  std::vector<std::string> items;
};

struct hbs_config {
  hbship::RunConfig cfg;
};

struct hbs_fleet_spec {
  hbship::FleetSpec spec;
};

struct hbs_posterior {
  hbship::PosteriorChains chains;
};

struct hbs_envelope {
  hbship::SpeedPowerEnvelope env;
};

struct hbs_comparison {
  std::vector<hbship::ComparisonRow> rows;
};

namespace {

thread_local std::string g_last_error;

hbs_status status_of(hbship::ErrorKind kind) {
  switch (kind) {
    case hbship::ErrorKind::InvalidArgument: return HBS_ERR_INVALID_ARGUMENT;
    case hbship::ErrorKind::Io: return HBS_ERR_IO;
    case hbship::ErrorKind::Data: return HBS_ERR_DATA;
    case hbship::ErrorKind::NotFound: return HBS_ERR_NOT_FOUND;
    case hbship::ErrorKind::Internal: break;
  }
  return HBS_ERR_INTERNAL;
}

hbs_status fail(hbs_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

/// Run `fn`, translating exceptions into status codes and the thread's last error.
template <typename Fn>
hbs_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return HBS_OK;
  } catch (const hbship::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HBS_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(HBS_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(HBS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HBS_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (!p) throw hbship::InvalidArgument(std::string(what) + " must not be NULL");
}

std::optional<double> opt(double v) {
  if (std::isnan(v)) return std::nullopt;
  return v;
}

hbship::PredictTarget target_of(const char* ship_id, double gt) {
  hbship::PredictTarget t;
  if (ship_id)
    t.ship_id = ship_id;
  else
    t.gross_tonnage = gt;
  return t;
}

}  // namespace

extern "C" {

const char* hbs_last_error(void) { return g_last_error.c_str(); }

const char* hbs_status_name(hbs_status status) {
  switch (status) {
    case HBS_OK: return "ok";
    case HBS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HBS_ERR_IO: return "i/o error";
    case HBS_ERR_DATA: return "data error";
    case HBS_ERR_NOT_FOUND: return "not found";
    case HBS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hbs_version(void) { return "1.0.0"; }

hbs_status hbs_greybox_power(double a, double b, double speed, double wind_speed, double wind_angle, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = hbship::greybox_power(a, b, speed, wind_speed, wind_angle);
  });
}

hbs_status hbs_ittc_friction_coefficient(double reynolds, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = hbship::ittc_friction_coefficient(reynolds);
  });
}

hbs_status hbs_steam2_power(const hbs_vessel* vessel, double density, double kinematic_viscosity, double speed,
                            double* out) {
  return guarded([&] {
    need(vessel, "vessel");
    need(out, "out");
    hbship::VesselCharacteristics c;
    c.ship_id = "vessel";
    c.gross_tonnage = vessel->gross_tonnage;
    c.lwl = vessel->lwl;
    c.breadth = vessel->breadth;
    c.draft = vessel->draft;
    c.wetted_surface = opt(vessel->wetted_surface);
    c.residual_coeff = opt(vessel->residual_coeff);
    c.validate();
    *out = hbship::steam2_power(c, {density, kinematic_viscosity}, speed);
  });
}

size_t hbs_strings_size(const hbs_strings* list) { return list ? list->items.size() : 0; }

const char* hbs_strings_get(const hbs_strings* list, size_t i) {
  return list && i < list->items.size() ? list->items[i].c_str() : nullptr;
}

void hbs_strings_free(hbs_strings* list) { delete list; }

hbs_status hbs_config_new(hbs_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new hbs_config{};
  });
}

hbs_status hbs_config_load(const char* path, hbs_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new hbs_config{hbship::load_run_config(path)};
  });
}

hbs_status hbs_config_set(hbs_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    hbship::set_run_config_value(cfg->cfg, key, value);
  });
}

void hbs_config_free(hbs_config* cfg) { delete cfg; }

hbs_status hbs_fleet_spec_new(hbs_fleet_spec** out) {
  return guarded([&] {
    need(out, "out");
    *out = new hbs_fleet_spec{};
  });
}

hbs_status hbs_fleet_spec_load(const char* path, hbs_fleet_spec** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new hbs_fleet_spec{hbship::load_fleet_spec(path)};
  });
}

hbs_status hbs_fleet_spec_set(hbs_fleet_spec* spec, const char* key, const char* value) {
  return guarded([&] {
    need(spec, "spec");
    need(key, "key");
    need(value, "value");
    hbship::set_fleet_spec_value(spec->spec, key, value);
  });
}

void hbs_fleet_spec_free(hbs_fleet_spec* spec) { delete spec; }

hbs_status hbs_generate(const hbs_fleet_spec* spec, const char* out_dir, int make_dirs, hbs_strings** summary) {
  return guarded([&] {
    need(spec, "spec");
    need(out_dir, "out_dir");
    auto lines = hbship::run_generate(spec->spec, out_dir, make_dirs != 0);
    if (summary) *summary = new hbs_strings{std::move(lines)};
  });
}

hbs_status hbs_aggregate(const hbs_config* cfg, int make_dirs, size_t* n_reports) {
  return guarded([&] {
    need(cfg, "cfg");
    const auto n = hbship::run_aggregate(cfg->cfg, make_dirs != 0);
    if (n_reports) *n_reports = n;
  });
}

hbs_status hbs_fit(const hbs_config* cfg, hbs_fit_mode mode, int make_dirs, hbs_posterior** out) {
  return guarded([&] {
    need(cfg, "cfg");
    if (mode != HBS_FIT_HIERARCHICAL && mode != HBS_FIT_INDEPENDENT)
      throw hbship::InvalidArgument("unknown fit mode");
    auto fit = hbship::run_fit(
        cfg->cfg, mode == HBS_FIT_HIERARCHICAL ? hbship::FitMode::Hierarchical : hbship::FitMode::Independent,
        make_dirs != 0);
    if (out) *out = new hbs_posterior{std::move(fit.chains)};
  });
}

hbs_status hbs_posterior_load(const char* path, hbs_posterior** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new hbs_posterior{hbship::load_posterior_csv(path)};
  });
}

hbs_status hbs_posterior_write(const hbs_posterior* post, const char* path) {
  return guarded([&] {
    need(post, "post");
    need(path, "path");
    auto f = hbship::open_output(path);
    hbship::write_posterior_csv(f, post->chains);
    if (!f) throw hbship::IoError(std::string("write failed for '") + path + "'");
  });
}

size_t hbs_posterior_n_params(const hbs_posterior* post) { return post ? post->chains.n_params() : 0; }
size_t hbs_posterior_n_chains(const hbs_posterior* post) { return post ? post->chains.n_chains : 0; }
size_t hbs_posterior_n_draws(const hbs_posterior* post) { return post ? post->chains.n_draws : 0; }

const char* hbs_posterior_param_name(const hbs_posterior* post, size_t param) {
  return post && param < post->chains.n_params() ? post->chains.param_names[param].c_str() : nullptr;
}

hbs_status hbs_posterior_value(const hbs_posterior* post, size_t chain, size_t draw, size_t param, double* out) {
  return guarded([&] {
    need(post, "post");
    need(out, "out");
    const auto& c = post->chains;
    if (chain >= c.n_chains || draw >= c.n_draws || param >= c.n_params())
      throw hbship::InvalidArgument("posterior index out of range");
    *out = c.at(chain, draw, param);
  });
}

hbs_status hbs_posterior_rhat(const hbs_posterior* post, size_t param, double* out) {
  return guarded([&] {
    need(post, "post");
    need(out, "out");
    if (param >= post->chains.n_params()) throw hbship::InvalidArgument("parameter index out of range");
    *out = hbship::split_rhat(post->chains.per_chain(param));
  });
}

hbs_status hbs_posterior_ess(const hbs_posterior* post, size_t param, double* out) {
  return guarded([&] {
    need(post, "post");
    need(out, "out");
    if (param >= post->chains.n_params()) throw hbship::InvalidArgument("parameter index out of range");
    *out = hbship::effective_sample_size(post->chains.per_chain(param));
  });
}

size_t hbs_posterior_n_warnings(const hbs_posterior* post) { return post ? post->chains.warnings.size() : 0; }

const char* hbs_posterior_warning(const hbs_posterior* post, size_t i) {
  return post && i < post->chains.warnings.size() ? post->chains.warnings[i].c_str() : nullptr;
}

void hbs_posterior_free(hbs_posterior* post) { delete post; }

hbs_status hbs_predict(const hbs_config* cfg, const char* ship_id, double gross_tonnage, hbs_envelope** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new hbs_envelope{hbship::predict_envelope(cfg->cfg, target_of(ship_id, gross_tonnage))};
  });
}

hbs_status hbs_run_predict(const hbs_config* cfg, const char* ship_id, double gross_tonnage, int make_dirs,
                           hbs_envelope** out, hbs_strings** path) {
  return guarded([&] {
    need(cfg, "cfg");
    auto res = hbship::run_predict(cfg->cfg, target_of(ship_id, gross_tonnage), make_dirs != 0);
    if (out) *out = new hbs_envelope{std::move(res.envelope)};
    if (path) *path = new hbs_strings{{res.path.string()}};
  });
}

size_t hbs_envelope_size(const hbs_envelope* env) { return env ? env->env.speeds.size() : 0; }

hbs_status hbs_envelope_row(const hbs_envelope* env, size_t i, double row[6]) {
  return guarded([&] {
    need(env, "env");
    need(row, "row");
    const auto& e = env->env;
    if (i >= e.speeds.size()) throw hbship::InvalidArgument("envelope row out of range");
    row[0] = e.speeds[i];
    row[1] = e.median[i];
    row[2] = e.band50_lo[i];
    row[3] = e.band50_hi[i];
    row[4] = e.band95_lo[i];
    row[5] = e.band95_hi[i];
  });
}

int hbs_envelope_nested(const hbs_envelope* env) { return env && env->env.nested() ? 1 : 0; }

hbs_status hbs_envelope_write(const hbs_envelope* env, const char* path) {
  return guarded([&] {
    need(env, "env");
    need(path, "path");
    auto f = hbship::open_output(path);
    hbship::write_envelope_csv(f, env->env);
    if (!f) throw hbship::IoError(std::string("write failed for '") + path + "'");
  });
}

void hbs_envelope_free(hbs_envelope* env) { delete env; }

hbs_status hbs_diagnose(const hbs_config* cfg, int make_dirs, hbs_comparison** out) {
  return guarded([&] {
    need(cfg, "cfg");
    auto res = hbship::run_diagnose(cfg->cfg, make_dirs != 0);
    if (out) *out = new hbs_comparison{std::move(res.summary)};
  });
}

hbs_status hbs_compare(const hbs_config* cfg, int make_dirs, hbs_comparison** out) {
  return guarded([&] {
    need(cfg, "cfg");
    auto rows = hbship::run_compare(cfg->cfg, make_dirs != 0);
    if (out) *out = new hbs_comparison{std::move(rows)};
  });
}

size_t hbs_comparison_size(const hbs_comparison* table) { return table ? table->rows.size() : 0; }

hbs_status hbs_comparison_row_at(const hbs_comparison* table, size_t i, hbs_comparison_row* row) {
  return guarded([&] {
    need(table, "table");
    need(row, "row");
    if (i >= table->rows.size()) throw hbship::InvalidArgument("comparison row out of range");
    const auto& r = table->rows[i];
    row->ship_id = r.ship_id.c_str();
    row->model_tag = hbship::to_string(r.tag);
    row->median_w = r.median;
    row->p025_w = r.p025;
    row->p975_w = r.p975;
    row->rmse_w = r.rmse;
    row->status = r.status.c_str();
  });
}

void hbs_comparison_free(hbs_comparison* table) { delete table; }

}  // extern "C"

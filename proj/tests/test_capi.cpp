#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "hbship/hbship.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hbship_capi_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string last_error() { return hbs_last_error(); }

}  // namespace

TEST_CASE("physics through the C interface") {
  double out = 0.0;
  CHECK(hbs_greybox_power(20000, 400, 10, 0, 0, &out) == HBS_OK);
  CHECK(out == 2e7);
  CHECK(hbs_greybox_power(20000, 400, -1, 0, 0, &out) == HBS_ERR_INVALID_ARGUMENT);
  CHECK_FALSE(last_error().empty());
  CHECK(hbs_greybox_power(1, 1, 1, 1, 1, nullptr) == HBS_ERR_INVALID_ARGUMENT);
  CHECK(hbs_ittc_friction_coefficient(1e9, &out) == HBS_OK);
  CHECK(std::abs(out - 0.075 / 49.0) <= 1e-15);

  hbs_vessel v{60000, 250, 32, 8, 9000, 1e-3};
  CHECK(hbs_steam2_power(&v, 1025, 1.188e-6, 10, &out) == HBS_OK);
  CHECK(out > 0.0);
  v.wetted_surface = NAN;
  CHECK(hbs_steam2_power(&v, 1025, 1.188e-6, 10, &out) == HBS_ERR_NOT_FOUND);
  CHECK(hbs_steam2_power(nullptr, 1025, 1.188e-6, 10, &out) == HBS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("status names and version") {
  CHECK(std::string(hbs_status_name(HBS_OK)) == "ok");
  CHECK(std::string(hbs_status_name(HBS_ERR_NOT_FOUND)) == "not found");
  CHECK(std::strlen(hbs_version()) > 0);
}

TEST_CASE("configuration handles") {
  hbs_config* cfg = nullptr;
  REQUIRE(hbs_config_new(&cfg) == HBS_OK);
  CHECK(hbs_config_set(cfg, "sampler.chains", "3") == HBS_OK);
  CHECK(hbs_config_set(cfg, "sampler.nope", "3") == HBS_ERR_INVALID_ARGUMENT);
  CHECK(last_error().find("sampler.nope") != std::string::npos);
  CHECK(hbs_config_set(cfg, nullptr, "3") == HBS_ERR_INVALID_ARGUMENT);
  hbs_config_free(cfg);
  hbs_config_free(nullptr);

  hbs_config* missing = nullptr;
  CHECK(hbs_config_load("/nonexistent/run.ini", &missing) == HBS_ERR_IO);
  CHECK(missing == nullptr);
  CHECK(hbs_config_new(nullptr) == HBS_ERR_INVALID_ARGUMENT);

  hbs_fleet_spec* spec = nullptr;
  REQUIRE(hbs_fleet_spec_new(&spec) == HBS_OK);
  CHECK(hbs_fleet_spec_set(spec, "fleet.n_ships", "0") == HBS_OK);
  CHECK(hbs_generate(spec, scratch("badspec").c_str(), 1, nullptr) == HBS_ERR_INVALID_ARGUMENT);
  hbs_fleet_spec_free(spec);
}

TEST_CASE("pipeline through the C interface") {
  const auto dir = scratch("pipeline");
  hbs_fleet_spec* spec = nullptr;
  REQUIRE(hbs_fleet_spec_new(&spec) == HBS_OK);
  REQUIRE(hbs_fleet_spec_set(spec, "fleet.n_ships", "4") == HBS_OK);
  REQUIRE(hbs_fleet_spec_set(spec, "fleet.days", "30") == HBS_OK);

  CHECK(hbs_generate(spec, dir.c_str(), 0, nullptr) == HBS_ERR_IO);
  hbs_strings* summary = nullptr;
  REQUIRE(hbs_generate(spec, dir.c_str(), 1, &summary) == HBS_OK);
  CHECK(hbs_strings_size(summary) == 4);
  CHECK(std::string(hbs_strings_get(summary, 0)).rfind("SHIP", 0) == 0);
  CHECK(hbs_strings_get(summary, 99) == nullptr);
  hbs_strings_free(summary);
  hbs_fleet_spec_free(spec);
  CHECK(fs::exists(dir / "telemetry.csv"));
  CHECK(fs::exists(dir / "truth.csv"));

  hbs_config* cfg = nullptr;
  REQUIRE(hbs_config_new(&cfg) == HBS_OK);
  hbs_config_set(cfg, "paths.telemetry", (dir / "telemetry.csv").c_str());
  hbs_config_set(cfg, "paths.characteristics", (dir / "characteristics.csv").c_str());
  hbs_config_set(cfg, "paths.output_dir", dir.c_str());
  size_t n_reports = 0;
  REQUIRE(hbs_aggregate(cfg, 0, &n_reports) == HBS_OK);
  CHECK(n_reports == 120);
  hbs_config_set(cfg, "paths.noon", (dir / "noon.csv").c_str());
  hbs_config_set(cfg, "sampler.iterations", "600");
  hbs_config_set(cfg, "sampler.warmup", "200");

  hbs_posterior* post = nullptr;
  REQUIRE(hbs_fit(cfg, HBS_FIT_HIERARCHICAL, 0, &post) == HBS_OK);
  CHECK(hbs_posterior_n_params(post) == 18);
  CHECK(hbs_posterior_n_chains(post) == 4);
  CHECK(hbs_posterior_n_draws(post) == 400);
  CHECK(std::string(hbs_posterior_param_name(post, 0)) == "a[SHIP001]");
  double value = 0.0, rhat = 0.0, ess = 0.0;
  CHECK(hbs_posterior_value(post, 3, 399, 17, &value) == HBS_OK);
  CHECK(value > 0.0);
  CHECK(hbs_posterior_value(post, 4, 0, 0, &value) == HBS_ERR_INVALID_ARGUMENT);
  CHECK(hbs_posterior_rhat(post, 0, &rhat) == HBS_OK);
  CHECK(hbs_posterior_ess(post, 0, &ess) == HBS_OK);
  CHECK(rhat < 1.1);
  CHECK(ess > 0.0);
  CHECK(ess <= 1600.0);

  hbs_posterior* loaded = nullptr;
  REQUIRE(hbs_posterior_load((dir / "posterior.csv").c_str(), &loaded) == HBS_OK);
  double again = 0.0;
  hbs_posterior_value(loaded, 3, 399, 17, &again);
  CHECK(again == value);
  hbs_posterior_free(loaded);
  hbs_posterior_free(post);

  hbs_envelope* env = nullptr;
  REQUIRE(hbs_predict(cfg, nullptr, 80000, &env) == HBS_OK);
  CHECK(hbs_envelope_size(env) == 50);
  CHECK(hbs_envelope_nested(env) == 1);
  double row[6];
  REQUIRE(hbs_envelope_row(env, 10, row) == HBS_OK);
  CHECK(row[4] <= row[2]);
  CHECK(row[2] <= row[1]);
  CHECK(row[1] <= row[3]);
  CHECK(row[3] <= row[5]);
  CHECK(hbs_envelope_row(env, 50, row) == HBS_ERR_INVALID_ARGUMENT);
  hbs_envelope_free(env);

  env = nullptr;
  CHECK(hbs_predict(cfg, "NOPE", NAN, &env) == HBS_ERR_NOT_FOUND);
  CHECK(last_error().find("unknown ship 'NOPE'") != std::string::npos);
  CHECK(env == nullptr);

  hbs_strings* path = nullptr;
  REQUIRE(hbs_run_predict(cfg, "SHIP002", NAN, 0, &env, &path) == HBS_OK);
  CHECK(fs::exists(hbs_strings_get(path, 0)));
  hbs_strings_free(path);
  hbs_envelope_free(env);

  hbs_comparison* table = nullptr;
  REQUIRE(hbs_compare(cfg, 0, &table) == HBS_OK);
  CHECK(hbs_comparison_size(table) == 12);
  hbs_comparison_row r{};
  REQUIRE(hbs_comparison_row_at(table, 0, &r) == HBS_OK);
  CHECK(std::string(r.ship_id) == "SHIP001");
  CHECK(std::string(r.status) == "ok");
  CHECK(std::isfinite(r.rmse_w));
  hbs_comparison_free(table);
  CHECK(fs::exists(dir / "compare.csv"));

  REQUIRE(hbs_diagnose(cfg, 0, nullptr) == HBS_OK);
  CHECK(fs::exists(dir / "residuals.csv"));
  CHECK(fs::exists(dir / "quantiles.csv"));
  CHECK(fs::exists(dir / "kde" / "ship-specific" / "SHIP001.csv"));
  CHECK(fs::exists(dir / "lowess" / "steam2" / "SHIP004.csv"));

  hbs_config_set(cfg, "paths.noon", (dir / "missing.csv").c_str());
  CHECK(hbs_fit(cfg, HBS_FIT_INDEPENDENT, 0, nullptr) == HBS_ERR_IO);
  hbs_config_free(cfg);
  fs::remove_all(dir);
}

TEST_CASE("malformed input maps to the data status") {
  const auto dir = scratch("baddata");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "telemetry.csv") << "ship_id,timestamp_utc,stw_mps,rel_wind_speed_mps,rel_wind_angle_rad,"
                                            "propulsion_power_w\nS1,0,-1,0,0,5\n";
  }
  hbs_config* cfg = nullptr;
  REQUIRE(hbs_config_new(&cfg) == HBS_OK);
  hbs_config_set(cfg, "paths.telemetry", (dir / "telemetry.csv").c_str());
  hbs_config_set(cfg, "paths.output_dir", dir.c_str());
  CHECK(hbs_aggregate(cfg, 0, nullptr) == HBS_ERR_DATA);
  CHECK(last_error().find("line 2") != std::string::npos);
  hbs_config_free(cfg);
  fs::remove_all(dir);
}

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hbship/error.hpp"
#include "hbship/physics.hpp"
#include "hbship/rng.hpp"
#include "hbship/telemetry.hpp"

using namespace hbship;
using doctest::Approx;

namespace {

TelemetryRecord rec(const std::string& id, std::int64_t t, double v, double u, double al, double p) {
  return {id, t, v, u, al, p};
}

std::vector<TelemetryRecord> one_day(double v, double u, double al, int per_day = 96, std::int64_t t0 = 1577836800) {
  std::vector<TelemetryRecord> out;
  const std::int64_t step = 86400 / per_day;
  for (int k = 0; k < per_day; ++k) out.push_back(rec("S1", t0 + k * step, v, u, al, 3e7));
  return out;
}

}  // namespace

TEST_CASE("featurize examples") {
  auto f = featurize(rec("S", 0, 10, 0, 1.0, 3e7));
  CHECK(f.x_hydro == 1000.0);
  CHECK(f.x_aero == 0.0);
  CHECK(f.y == 3e7);
  CHECK(f.weight == 1.0);
  f = featurize(rec("S", 0, 5, 10, 0, 42));
  CHECK(f.x_hydro == 125.0);
  CHECK(f.x_aero == 500.0);
  CHECK(f.y == 42.0);
  f = featurize(rec("S", 0, 5, 10, M_PI, 42));
  CHECK(f.x_aero == Approx(-500.0).epsilon(1e-15));
  CHECK_THROWS_AS(featurize(rec("S", 0, NAN, 1, 0, 1)), InvalidArgument);
}

TEST_CASE("record invariants") {
  CHECK(rec("S", 0, 1, 1, 0, 1).violation().empty());
  CHECK_FALSE(rec("S", 0, -1, 1, 0, 1).violation().empty());
  CHECK_FALSE(rec("S", 0, 1, -1, 0, 1).violation().empty());
  CHECK_FALSE(rec("S", 0, 1, 1, 2 * M_PI, 1).violation().empty());
  CHECK_FALSE(rec("S", 0, 1, 1, 0, INFINITY).violation().empty());
  CHECK_FALSE(rec("", 0, 1, 1, 0, 1).violation().empty());
}

TEST_CASE("aggregate a constant day") {
  const auto recs = one_day(10, 0, 0.3);
  const auto out = aggregate(recs);
  REQUIRE(out.size() == 1);
  CHECK(out[0].mean_x_hydro == Approx(1000.0).epsilon(1e-15));
  CHECK(out[0].mean_x_aero == 0.0);
  CHECK(out[0].coverage == 1.0);
  CHECK(out[0].sample_count == 96);
  CHECK(out[0].interval_start == 1577836800);
  CHECK(out[0].interval_end == 1577836800 + 86400);
}

TEST_CASE("aggregate anchors at midnight UTC of the first record") {
  auto recs = one_day(8, 0, 0, 96, 1577836800 + 86400 + 3600 * 5);  // starts 05:00 on day 2
  AggregationConfig cfg;
  cfg.min_coverage = 0.0;
  const auto out = aggregate(recs, cfg);
  REQUIRE(out.size() == 2);
  CHECK(out[0].interval_start == 1577836800 + 86400);
  CHECK(out[1].interval_start == 1577836800 + 2 * 86400);
  CHECK(out[0].sample_count + out[1].sample_count == 96);
}

TEST_CASE("aggregate drops intervals below min coverage") {
  auto recs = one_day(10, 3, 0.5);
  recs.resize(96 - 29);  // 67 of 96 left: coverage ~0.698
  CHECK(aggregate(recs).empty());
  AggregationConfig cfg;
  cfg.min_coverage = 0.6;
  const auto out = aggregate(recs, cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].coverage == Approx(67.0 / 96.0));
  // An explicit cadence overrides the median gap.
  cfg.nominal_cadence = 450.0;
  CHECK(aggregate(recs, cfg).empty());
  cfg.min_coverage = 0.3;
  REQUIRE(aggregate(recs, cfg).size() == 1);
  CHECK(aggregate(recs, cfg).front().coverage == Approx(67.0 / 192.0));
}

TEST_CASE("aggregate applies the speed floor") {
  auto recs = one_day(10, 0, 0);
  for (int k = 0; k < 10; ++k) recs[k].speed = 1.0;
  AggregationConfig cfg;
  cfg.min_coverage = 0.0;
  const auto out = aggregate(recs, cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].sample_count == 86);
  CHECK(out[0].mean_x_hydro == Approx(1000.0));
}

TEST_CASE("singleton interval equals featurize") {
  const auto r = rec("S9", 1577840000, 7.3, 4.1, 2.2, 1.23e6);
  AggregationConfig cfg;
  cfg.min_coverage = 0.0;
  const auto out = aggregate(std::vector<TelemetryRecord>{r}, cfg);
  REQUIRE(out.size() == 1);
  const auto f = featurize(r);
  CHECK(out[0].mean_x_hydro == f.x_hydro);
  CHECK(out[0].mean_x_aero == f.x_aero);
  CHECK(out[0].mean_power == f.y);
}

TEST_CASE("noise-free means stay on the model and are order invariant") {
  CounterRng rng(3);
  const double a = 21000.0, b = 410.0;
  std::vector<TelemetryRecord> recs;
  for (int d = 0; d < 5; ++d)
    for (int k = 0; k < 96; ++k) {
      const double v = 4 + 7 * rng.uniform(), u = 10 * rng.uniform(), al = 6.28 * rng.uniform();
      recs.push_back(rec(d % 2 ? "B" : "A", 1577836800 + d * 86400 + k * 900, v, u, al, greybox_power(a, b, v, u, al)));
    }
  const auto out = aggregate(recs);
  REQUIRE(out.size() == 5);
  for (const auto& r : out) CHECK(r.mean_power == Approx(a * r.mean_x_hydro + b * r.mean_x_aero).epsilon(1e-13));

  auto shuffled = recs;
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 37, shuffled.end());
  const auto again = aggregate(shuffled);
  REQUIRE(again.size() == out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(again[i].ship_id == out[i].ship_id);
    CHECK(again[i].mean_x_hydro == out[i].mean_x_hydro);
    CHECK(again[i].mean_x_aero == out[i].mean_x_aero);
    CHECK(again[i].mean_power == out[i].mean_power);
  }
  // Ordered by ship, then interval start.
  CHECK(out[0].ship_id == "A");
  CHECK(out[3].ship_id == "B");
  CHECK(out[0].interval_start < out[1].interval_start);
}

TEST_CASE("aggregate edge cases") {
  CHECK(aggregate(std::vector<TelemetryRecord>{}).empty());
  AggregationConfig bad;
  bad.interval_hours = 0;
  CHECK_THROWS_AS(aggregate(one_day(5, 0, 0), bad), InvalidArgument);
  bad = {};
  bad.min_coverage = 1.5;
  CHECK_THROWS_AS(aggregate(one_day(5, 0, 0), bad), InvalidArgument);
}

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "hbship/error.hpp"
#include "hbship/physics.hpp"
#include "hbship/prediction.hpp"
#include "hbship/rng.hpp"

using namespace hbship;
using doctest::Approx;

namespace {

PosteriorChains hyper_chains(std::size_t chains, std::size_t draws, const std::vector<double>& hyper,
                             double jitter = 0.0, std::uint64_t seed = 1) {
  PosteriorChains pc;
  pc.param_names = {"a[S1]", "b[S1]", "sigma[S1]", "lambda1", "lambda2", "lambda3", "lambda4", "sigma_a", "sigma_b"};
  pc.n_chains = chains;
  pc.n_draws = draws;
  CounterRng rng(seed);
  for (std::size_t k = 0; k < chains * draws; ++k) {
    pc.values.push_back(20000 * (1 + jitter * rng.normal()));
    pc.values.push_back(400 * (1 + jitter * rng.normal()));
    pc.values.push_back(1e5);
    for (double h : hyper) pc.values.push_back(h * (1 + jitter * rng.normal()));
  }
  return pc;
}

const std::vector<double> kHyper{5000, 0.15, 100, 0.005, 1500, 60};

// Order statistics by insertion into a sorted buffer, then type-7 interpolation.
double oracle_quantile(const std::vector<double>& xs, double p) {
  std::vector<double> sorted;
  for (double x : xs) sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), x), x);
  const double h = (sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

}  // namespace

TEST_CASE("median wind effect") {
  CHECK(median_wind_effect(std::vector<double>{1, 2, 3}) == 2.0);
  CHECK(median_wind_effect(std::vector<double>{1, 3}) == 2.0);
  CHECK(median_wind_effect(std::vector<double>{-500, 0, 500, 500}) == 250.0);
  CHECK(median_wind_effect(std::vector<double>{500, -500, 500, 0}) == 250.0);
  CHECK_THROWS_AS(median_wind_effect(std::vector<double>{}), InvalidArgument);
  std::vector<TelemetryRecord> recs{{"S", 0, 5, 10, 0, 1}, {"S", 1, 5, 2, M_PI, 1}};
  const auto e = wind_effects(recs);
  CHECK(e[0] == 100.0);
  CHECK(e[1] == Approx(-4.0));
}

TEST_CASE("point prediction shares the grey-box model") {
  CHECK(predict_point({20000, 400, 0}, 10, 0, 0) == greybox_power(20000, 400, 10, 0, 0));
  CHECK(predict_point({20000, 400, 0}, 5, 10, 0) == 20000 * 125 + 400 * 500);
  CHECK(predict_point({1, 2, 0}, 3, 4, 1.1) == greybox_power(1, 2, 3, 4, 1.1));
  CHECK(power_at_wind_effect(2, 3, 2, 5) == 2 * 8 + 3 * 5 * 2);
}

TEST_CASE("degenerate posteriors collapse the envelope") {
  const auto pc = hyper_chains(2, 50, kHyper);
  const auto speeds = speed_grid(0.0, 12.0, 13);
  PriorPredictionOptions opt;
  opt.include_hyper_noise = false;
  const auto env = predict_prior_based(pc, 80000, speeds, 30.0, opt);
  const double a = 5000 + 0.15 * 80000, b = 100 + 0.005 * 80000;
  for (std::size_t j = 0; j < speeds.size(); ++j) {
    CHECK(env.band95_hi[j] - env.band95_lo[j] == 0.0);
    CHECK(env.median[j] == Approx(power_at_wind_effect(a, b, speeds[j], 30.0)).epsilon(1e-14));
  }
  CHECK(env.median[0] == 0.0);
  CHECK(env.source == EnvelopeSource::PriorBased);

  const auto ship = predict_ship_specific(pc, "S1", speeds, 0.0);
  for (std::size_t j = 0; j < speeds.size(); ++j) {
    CHECK(ship.band95_lo[j] == ship.band95_hi[j]);
    CHECK(ship.median[j] == Approx(20000 * std::pow(speeds[j], 3)).epsilon(1e-14));
  }
  CHECK(ship.source == EnvelopeSource::ShipSpecific);
}

TEST_CASE("envelopes are nested and match an independent quantile oracle") {
  const auto pc = hyper_chains(3, 40, kHyper, 0.2, 5);
  const auto speeds = speed_grid(1.0, 11.0, 6);
  const auto env = predict_ship_specific(pc, "S1", speeds, 25.0);
  CHECK(env.nested());
  const auto ia = pc.require("a[S1]"), ib = pc.require("b[S1]");
  for (std::size_t j = 0; j < speeds.size(); ++j) {
    std::vector<double> curve;
    for (std::size_t c = 0; c < pc.n_chains; ++c)
      for (std::size_t d = 0; d < pc.n_draws; ++d)
        curve.push_back(power_at_wind_effect(pc.at(c, d, ia), pc.at(c, d, ib), speeds[j], 25.0));
    CHECK(env.median[j] == Approx(oracle_quantile(curve, 0.5)).epsilon(1e-12));
    CHECK(env.band50_lo[j] == Approx(oracle_quantile(curve, 0.25)).epsilon(1e-12));
    CHECK(env.band50_hi[j] == Approx(oracle_quantile(curve, 0.75)).epsilon(1e-12));
    CHECK(env.band95_lo[j] == Approx(oracle_quantile(curve, 0.025)).epsilon(1e-12));
    CHECK(env.band95_hi[j] == Approx(oracle_quantile(curve, 0.975)).epsilon(1e-12));
  }
  // Median strictly increasing in V for a > 0, wind effect >= 0.
  for (std::size_t j = 1; j < speeds.size(); ++j) CHECK(env.median[j] > env.median[j - 1]);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CHECK(predict_ship_specific(hyper_chains(2, 30, kHyper, 0.5, seed), "S1", speeds, -40.0).nested());
    CHECK(predict_prior_based(hyper_chains(2, 30, kHyper, 0.5, seed), 6e4, speeds, 10.0).nested());
  }
}

TEST_CASE("wider posteriors give wider envelopes") {
  const auto speeds = speed_grid(2.0, 12.0, 5);
  const auto narrow = predict_ship_specific(hyper_chains(2, 500, kHyper, 0.05, 3), "S1", speeds, 0.0);
  const auto wide = predict_ship_specific(hyper_chains(2, 500, kHyper, 0.2, 3), "S1", speeds, 0.0);
  for (std::size_t j = 0; j < speeds.size(); ++j) {
    CHECK(wide.band95_hi[j] - wide.band95_lo[j] > narrow.band95_hi[j] - narrow.band95_lo[j]);
    CHECK(wide.band50_hi[j] - wide.band50_lo[j] > narrow.band50_hi[j] - narrow.band50_lo[j]);
  }
}

TEST_CASE("hyper noise never narrows the prior-based envelope") {
  const auto pc = hyper_chains(4, 1000, kHyper, 0.02, 9);
  const auto speeds = speed_grid(2.0, 12.0, 6);
  PriorPredictionOptions off;
  off.include_hyper_noise = false;
  const auto base = predict_prior_based(pc, 9e4, speeds, 20.0, off);
  const auto noisy = predict_prior_based(pc, 9e4, speeds, 20.0);
  for (std::size_t j = 0; j < speeds.size(); ++j) {
    CHECK(noisy.band95_hi[j] - noisy.band95_lo[j] >= 0.99 * (base.band95_hi[j] - base.band95_lo[j]));
    CHECK(noisy.band50_hi[j] - noisy.band50_lo[j] >= 0.99 * (base.band50_hi[j] - base.band50_lo[j]));
  }
  // Reproducible for a fixed seed.
  CHECK(predict_prior_based(pc, 9e4, speeds, 20.0).band95_hi == noisy.band95_hi);
}

TEST_CASE("prediction errors") {
  const auto pc = hyper_chains(2, 10, kHyper);
  const auto speeds = speed_grid();
  CHECK_THROWS_AS(predict_ship_specific(pc, "NOPE", speeds, 0.0), NotFound);
  CHECK_THROWS_AS(predict_prior_based(pc, -1.0, speeds, 0.0), InvalidArgument);
  PosteriorChains no_hyper = pc;
  no_hyper.param_names = {"a[S1]", "b[S1]", "sigma[S1]", "x", "y", "z", "u", "v", "w"};
  CHECK_THROWS_AS(predict_prior_based(no_hyper, 5e4, speeds, 0.0), NotFound);
  CHECK_THROWS(speed_grid(5.0, 4.0, 10));
}

TEST_CASE("envelope CSV round trip") {
  const auto env = predict_ship_specific(hyper_chains(2, 20, kHyper, 0.1), "S1", speed_grid(2, 10, 5), 12.5);
  std::stringstream s;
  write_envelope_csv(s, env);
  CHECK(s.str().find("S1") != std::string::npos);
  const auto back = read_envelope_csv(s);
  CHECK(back.speeds == env.speeds);
  CHECK(back.median == env.median);
  CHECK(back.band95_hi == env.band95_hi);
}

#include "hbship/synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "hbship/error.hpp"

namespace hbship {

void FleetSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("fleet spec: ") + what);
  };
  require(n_ships >= 1, "n_ships must be >= 1");
  require(gt_min > 0.0 && gt_min <= gt_max && std::isfinite(gt_max), "gt range must be positive and nonempty");
  require(hyper.sigma_a >= 0.0 && hyper.sigma_b >= 0.0, "hyper scales must be >= 0");
  require(sigma_min >= 0.0 && sigma_min <= sigma_max && std::isfinite(sigma_max), "noise range must be nonempty");
  require(days >= 1, "days must be >= 1");
  require(records_per_day >= 1 && 86400 % records_per_day == 0,
          "records_per_day must be positive and divide a day into whole seconds");
  require(speed_min >= 0.0 && speed_min <= speed_max, "speed range must be nonempty");
  require(speed_sd >= 0.0 && speed_jitter >= 0.0, "speed spreads must be >= 0");
  require(wind_scale >= 0.0, "wind_scale must be >= 0");
  require(c_r > 0.0 && wetted_surface_factor > 0.0, "c_r and wetted_surface_factor must be > 0");
  require(max_rejections >= 1, "max_rejections must be >= 1");
}

VesselCharacteristics synthetic_characteristics(const std::string& ship_id, double gt, double c_r,
                                                double wetted_surface_factor) {
  VesselCharacteristics c;
  c.ship_id = ship_id;
  c.gross_tonnage = gt;
  c.lwl = 8.5 * std::pow(gt, 0.305);
  c.breadth = c.lwl / 7.8;
  c.draft = c.breadth / 4.4;
  c.wetted_surface = heuristic_wetted_surface(c, wetted_surface_factor);
  c.residual_coeff = c_r;
  return c;
}

ShipParameters draw_ship_parameters(const HyperParameters& hyper, double gt, CounterRng& rng, int max_rejections) {
  const double ma = hyper.lambda1 + hyper.lambda2 * gt;
  const double mb = hyper.lambda3 + hyper.lambda4 * gt;
  ShipParameters p;
  int tries = 0;
  do {
    if (++tries > max_rejections) throw InvalidArgument("fleet spec: hyper-line gives a <= 0 too often");
    p.a = ma + hyper.sigma_a * rng.normal();
  } while (!(p.a > 0.0));
  tries = 0;
  do {
    if (++tries > max_rejections) throw InvalidArgument("fleet spec: hyper-line gives b < 0 too often");
    p.b = mb + hyper.sigma_b * rng.normal();
  } while (!(p.b >= 0.0));
  return p;
}

std::vector<SyntheticShip> generate_fleet(const FleetSpec& spec) {
  spec.validate();
  std::vector<SyntheticShip> ships;
  for (int i = 0; i < spec.n_ships; ++i) {
    CounterRng rng(derive_seed(spec.seed, "fleet/ship", static_cast<std::uint64_t>(i)));
    char id[32];
    std::snprintf(id, sizeof id, "SHIP%03d", i + 1);
    const double gt = spec.gt_min + (spec.gt_max - spec.gt_min) * rng.uniform();
    SyntheticShip s{synthetic_characteristics(id, gt, spec.c_r, spec.wetted_surface_factor),
                    draw_ship_parameters(spec.hyper, gt, rng, spec.max_rejections)};
    s.truth.sigma = spec.sigma_min + (spec.sigma_max - spec.sigma_min) * rng.uniform();
    ships.push_back(std::move(s));
  }
  return ships;
}

std::vector<TelemetryRecord> simulate_telemetry(const SyntheticShip& ship, const FleetSpec& spec,
                                                std::uint64_t stream) {
  spec.validate();
  CounterRng rng(derive_seed(spec.seed, "telemetry", stream));
  const std::int64_t cadence = 86400 / spec.records_per_day;
  const double two_pi = 2.0 * M_PI;
  auto wrap = [two_pi](double a) {
    a = std::fmod(a, two_pi);
    if (a < 0.0) a += two_pi;
    return a >= two_pi ? 0.0 : a;
  };

  std::vector<TelemetryRecord> out;
  out.reserve(static_cast<std::size_t>(spec.days) * static_cast<std::size_t>(spec.records_per_day));
  for (int day = 0; day < spec.days; ++day) {
    const double v_day = truncated_normal(rng, spec.speed_mean, spec.speed_sd, spec.speed_min, spec.speed_max);
    const double base_angle = two_pi * rng.uniform();
    for (int k = 0; k < spec.records_per_day; ++k) {
      TelemetryRecord r;
      r.ship_id = ship.chars.ship_id;
      r.timestamp = spec.start_time + static_cast<std::int64_t>(day) * 86400 + k * cadence;
      r.speed = spec.speed_jitter > 0.0
                    ? truncated_normal(rng, v_day, spec.speed_jitter, spec.speed_min, spec.speed_max)
                    : v_day;
      r.wind_speed = spec.wind_scale * std::sqrt(-2.0 * std::log(rng.uniform()));
      r.wind_angle = spec.wind_angle_jitter < 0.0 ? wrap(two_pi * rng.uniform())
                                                  : wrap(base_angle + spec.wind_angle_jitter * rng.normal());
      r.power = greybox_power(ship.truth, r.speed, r.wind_speed, r.wind_angle) + ship.truth.sigma * rng.normal();
      out.push_back(std::move(r));
    }
  }
  return out;
}

SyntheticFleet generate(const FleetSpec& spec) {
  SyntheticFleet f;
  f.ships = generate_fleet(spec);
  const std::size_t n = f.ships.size();

  // Ships have independent streams, so workers may take them in any order.
  std::vector<std::vector<TelemetryRecord>> per_ship(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        per_ship[i] = simulate_telemetry(f.ships[i], spec, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t total = 0;
  for (const auto& r : per_ship) total += r.size();
  f.telemetry.reserve(total);
  for (auto& r : per_ship)
    f.telemetry.insert(f.telemetry.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  return f;
}

}  // namespace hbship

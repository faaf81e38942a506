#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "hbship/rng.hpp"
#include "hbship/stats.hpp"

using namespace hbship;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(CounterRng::block({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(CounterRng::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(CounterRng::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("derive_seed separates labels and indices and is stable") {
  std::set<std::uint64_t> seen;
  for (const char* label : {"fit/hierarchical/chain", "fit/independent/chain", "ship", "hyper"})
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(7, label, i));
  CHECK(seen.size() == 200);
  CHECK(derive_seed(7, "ship", 3) == derive_seed(7, "ship", 3));
  CHECK(derive_seed(7, "ship", 3) != derive_seed(8, "ship", 3));
}

TEST_CASE("streams are reproducible and uniform lies in (0, 1)") {
  CounterRng a(derive_seed(1, "x")), b(derive_seed(1, "x"));
  for (int i = 0; i < 1000; ++i) CHECK(a() == b());
  CounterRng u(3);
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
  }
}

TEST_CASE("normal and exponential moments") {
  CounterRng rng(11);
  std::vector<double> z, e;
  for (int i = 0; i < 200000; ++i) {
    z.push_back(rng.normal());
    e.push_back(rng.exponential());
  }
  CHECK(std::abs(mean(z)) < 0.01);
  CHECK(std::abs(stddev(z) - 1.0) < 0.01);
  CHECK(std::abs(mean(e) - 1.0) < 0.01);
}

TEST_CASE("truncated normal respects bounds and matches moments") {
  CounterRng rng(5);
  // One-sided truncation at the mean: half-normal, mean sqrt(2/pi).
  std::vector<double> h;
  for (int i = 0; i < 100000; ++i) {
    const double x = truncated_normal(rng, 0.0, 1.0, 0.0, INFINITY);
    REQUIRE(x >= 0.0);
    h.push_back(x);
  }
  CHECK(std::abs(mean(h) - std::sqrt(2.0 / M_PI)) < 0.01);

  // Far tail: N(0,1) restricted to [10, inf) has mean ~ 10.098.
  std::vector<double> t;
  for (int i = 0; i < 20000; ++i) {
    const double x = truncated_normal(rng, 0.0, 1.0, 10.0, INFINITY);
    REQUIRE(x >= 10.0);
    t.push_back(x);
  }
  CHECK(std::abs(mean(t) - 10.0980) < 0.005);

  // Narrow two-sided interval in the upper tail.
  for (int i = 0; i < 1000; ++i) {
    const double x = truncated_normal(rng, 2.0, 0.5, 5.0, 5.1);
    REQUIRE(x >= 5.0);
    REQUIRE(x <= 5.1);
  }
  // Lower-tail interval, mirrored.
  for (int i = 0; i < 1000; ++i) {
    const double x = truncated_normal(rng, 0.0, 1.0, -INFINITY, -12.0);
    REQUIRE(x <= -12.0);
  }
}

#include "hbship/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

namespace hbship {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index * 0x9e3779b97f4a7c15ULL);
}

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> CounterRng::block(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t key, std::uint64_t counter_hi)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
      ctr_{0, 0, static_cast<std::uint32_t>(counter_hi), static_cast<std::uint32_t>(counter_hi >> 32)} {}

void CounterRng::refill() {
  buf_ = block(ctr_, key_);
  pos_ = 0;
  if (++ctr_[0] == 0 && ++ctr_[1] == 0 && ++ctr_[2] == 0) ++ctr_[3];
}

CounterRng::result_type CounterRng::operator()() {
  if (pos_ == 4) refill();
  return buf_[pos_++];
}

double CounterRng::uniform() {
  const std::uint64_t hi = (*this)();
  const std::uint64_t lo = (*this)();
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * M_PI * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

double CounterRng::exponential() { return -std::log(uniform()); }

namespace {

// Standard normal truncated to [l, u] with 0 <= l < u (upper tail).
double upper_tail(CounterRng& rng, double l, double u) {
  if (l > 8.0) {
    // Robert (1995) exponential proposal with optimal rate.
    const double rate = 0.5 * (l + std::sqrt(l * l + 4.0));
    for (;;) {
      const double z = l + rng.exponential() / rate;
      const double d = z - rate;
      if (z <= u && std::log(rng.uniform()) <= -0.5 * d * d) return z;
    }
  }
  const double ql = 0.5 * std::erfc(l / M_SQRT2);
  const double qu = std::isinf(u) ? 0.0 : 0.5 * std::erfc(u / M_SQRT2);
  const double p = ql - rng.uniform() * (ql - qu);
  const double z = M_SQRT2 * boost::math::erfc_inv(2.0 * p);
  return std::clamp(z, l, u);
}

}  // namespace

double truncated_normal(CounterRng& rng, double mean, double sd, double lo, double hi) {
  if (!(lo <= hi)) return std::numeric_limits<double>::quiet_NaN();
  if (sd <= 0.0 || !std::isfinite(sd)) return std::clamp(mean, lo, hi);
  const double l = (lo - mean) / sd;
  const double u = (hi - mean) / sd;
  if (u - l < 1e-10) return lo + rng.uniform() * (hi - lo);
  double z;
  if (l >= 0.0) {
    z = upper_tail(rng, l, u);
  } else if (u <= 0.0) {
    z = -upper_tail(rng, -u, -l);
  } else if (u - l > 2.0 && l < -3.0 && u > 3.0) {
    // Mostly untruncated: plain rejection is cheap.
    do {
      z = rng.normal();
    } while (z < l || z > u);
  } else {
    const double pl = std::isinf(l) ? 0.0 : 0.5 * std::erfc(-l / M_SQRT2);
    const double pu = std::isinf(u) ? 1.0 : 0.5 * std::erfc(-u / M_SQRT2);
    const double p = pl + rng.uniform() * (pu - pl);
    z = std::clamp(-M_SQRT2 * boost::math::erfc_inv(2.0 * p), l, u);
  }
  return std::clamp(mean + sd * z, lo, hi);
}

}  // namespace hbship

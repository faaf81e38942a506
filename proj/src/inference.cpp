#include "hbship/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "hbship/error.hpp"
#include "hbship/rng.hpp"
#include "hbship/stats.hpp"

namespace hbship {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// Lower end of every scale box, relative to its upper end. Keeps the flat-prior
// posterior proper when a ship's data are fitted exactly.
constexpr double kScaleFloorRatio = 1e-9;
// Lower end of the a-box relative to its upper end (a must stay strictly positive).
constexpr double kCoeffFloorRatio = 1e-12;
constexpr int kMaxJointRejections = 32;

double gaussian_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * kLog2Pi - std::log(sd) - 0.5 * z * z;
}

}  // namespace

Eigen::Vector2d least_squares_fit(const std::vector<FeatureRow>& rows) {
  return ShipStats::compute(rows).least_squares;
}

ShipStats ShipStats::compute(const std::vector<FeatureRow>& rows) {
  ShipStats s;
  if (rows.empty()) throw InvalidArgument("ship has no observations");
  std::vector<double> ys;
  ys.reserve(rows.size());
  for (const auto& r : rows) {
    const Eigen::Vector2d x(r.x_hydro, r.x_aero);
    s.gram += x * x.transpose();
    s.xty += x * r.y;
    ys.push_back(r.y);
  }
  s.n = static_cast<double>(rows.size());
  s.y_sd = stddev(ys);

  const double g00 = s.gram(0, 0), g11 = s.gram(1, 1), g01 = s.gram(0, 1);
  s.aero_identifiable = g11 > 0.0;
  if (g00 > 0.0 && g11 > 0.0) {
    const double c = std::abs(g01) / std::sqrt(g00 * g11);
    if (1.0 - c < 1e-10) {
      s.ill_conditioned = true;
      s.aero_identifiable = false;
    }
  } else if (g00 <= 0.0) {
    s.ill_conditioned = true;
  }

  Eigen::JacobiSVD<Eigen::Matrix2d> svd(s.gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-12);
  s.least_squares = svd.solve(s.xty);

  double sse = 0.0;
  for (const auto& r : rows) {
    const double e = r.y - s.least_squares[0] * r.x_hydro - s.least_squares[1] * r.x_aero;
    sse += e * e;
  }
  s.sse_min = sse;
  return s;
}

double ShipStats::sse(double a, double b) const {
  const Eigen::Vector2d d(a - least_squares[0], b - least_squares[1]);
  return sse_min + std::max(0.0, d.dot(gram * d));
}

std::string PriorBounds::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << "a in (0, " << a_hi << "], b in [0, " << b_hi << "], sigma_a in [" << sigma_a_lo << ", " << sigma_a_hi
     << "], sigma_b in [" << sigma_b_lo << ", " << sigma_b_hi << "]";
  for (int k = 0; k < 4; ++k) os << ", lambda" << (k + 1) << " in [" << lambda_lo[k] << ", " << lambda_hi[k] << "]";
  return os.str();
}

FleetModel::FleetModel(std::vector<ShipData> ships, const BoundMultipliers& mult) : ships_(std::move(ships)) {
  if (!(mult.a > 0.0 && mult.b > 0.0 && mult.sigma > 0.0))
    throw InvalidArgument("prior bound multipliers must be positive");
  init();

  const std::size_t n = ships_.size();
  double a_max = 0.0;
  double b_ref = 0.0;
  double w_min = std::numeric_limits<double>::infinity(), w_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& st = stats_[i];
    double a_est = st.least_squares[0];
    if (!(a_est > 0.0)) {
      double sy = 0.0, sx = 0.0;
      for (const auto& r : ships_[i].rows) {
        sy += r.y;
        sx += r.x_hydro;
      }
      a_est = sx > 0.0 ? std::abs(sy / sx) : 0.0;
    }
    a_max = std::max(a_max, a_est);
    if (st.aero_identifiable) b_ref = std::max(b_ref, std::abs(st.least_squares[1]));
    w_min = std::min(w_min, ships_[i].chars.gross_tonnage);
    w_max = std::max(w_max, ships_[i].chars.gross_tonnage);
  }
  if (!(a_max > 0.0)) throw DataError("cannot derive a prior bound for a: no positive hydrodynamic signal");
  if (!(b_ref > 0.0)) b_ref = a_max;

  bounds_.a_hi = mult.a * a_max;
  bounds_.b_hi = mult.b * b_ref;
  for (std::size_t i = 0; i < n; ++i) {
    // Constant power series: fall back to its magnitude, then to 1 W.
    double scale = stats_[i].y_sd;
    if (!(scale > 0.0)) scale = std::abs(ships_[i].rows.front().y);
    if (!(scale > 0.0)) scale = 1.0;
    bounds_.sigma_hi.push_back(mult.sigma * scale);
    bounds_.sigma_lo.push_back(kScaleFloorRatio * mult.sigma * scale);
  }
  bounds_.sigma_a_hi = bounds_.a_hi;
  bounds_.sigma_a_lo = kScaleFloorRatio * bounds_.a_hi;
  bounds_.sigma_b_hi = bounds_.b_hi;
  bounds_.sigma_b_lo = kScaleFloorRatio * bounds_.b_hi;

  double dw = w_max - w_min;
  if (!(dw > 0.1 * gt_center_)) dw = std::max(dw, 0.1 * gt_center_);
  const double reach = 1.0 + w_max / dw;
  bounds_.lambda_lo = {-bounds_.a_hi * reach, -bounds_.a_hi / dw, -bounds_.b_hi * reach, -bounds_.b_hi / dw};
  bounds_.lambda_hi = {bounds_.a_hi * reach, bounds_.a_hi / dw, bounds_.b_hi * reach, bounds_.b_hi / dw};
}

FleetModel::FleetModel(std::vector<ShipData> ships, PriorBounds bounds)
    : ships_(std::move(ships)), bounds_(std::move(bounds)) {
  init();
  if (bounds_.sigma_lo.size() != ships_.size() || bounds_.sigma_hi.size() != ships_.size())
    throw InvalidArgument("prior bounds: one sigma interval per ship required");
  auto nonempty = [](double lo, double hi) { return std::isfinite(lo) && std::isfinite(hi) && lo < hi; };
  bool ok = bounds_.a_hi > 0.0 && bounds_.b_hi > 0.0 && nonempty(bounds_.sigma_a_lo, bounds_.sigma_a_hi) &&
            nonempty(bounds_.sigma_b_lo, bounds_.sigma_b_hi) && bounds_.sigma_a_lo > 0.0 && bounds_.sigma_b_lo > 0.0;
  for (std::size_t i = 0; i < ships_.size(); ++i)
    ok = ok && bounds_.sigma_lo[i] > 0.0 && nonempty(bounds_.sigma_lo[i], bounds_.sigma_hi[i]);
  for (int k = 0; k < 4; ++k) ok = ok && nonempty(bounds_.lambda_lo[k], bounds_.lambda_hi[k]);
  if (!ok) throw InvalidArgument("prior bounds must define a nonempty box with positive scale bounds");
}

void FleetModel::init() {
  if (ships_.empty()) throw InvalidArgument("fleet must contain at least one ship");
  std::set<std::string> ids;
  double gt_sum = 0.0;
  for (const auto& s : ships_) {
    s.chars.validate();
    if (!ids.insert(s.chars.ship_id).second) throw InvalidArgument("duplicate ship id '" + s.chars.ship_id + "'");
    if (s.rows.empty()) throw InvalidArgument("ship '" + s.chars.ship_id + "' has no observations");
    for (const auto& r : s.rows)
      if (!std::isfinite(r.x_hydro) || !std::isfinite(r.x_aero) || !std::isfinite(r.y))
        throw DataError("ship '" + s.chars.ship_id + "': non-finite feature row");
    stats_.push_back(ShipStats::compute(s.rows));
    gt_sum += s.chars.gross_tonnage;
    const auto& st = stats_.back();
    if (st.ill_conditioned)
      warnings_.push_back("ship '" + s.chars.ship_id + "': ill-conditioned regressors (features collinear or constant)");
    else if (!st.aero_identifiable)
      warnings_.push_back("ship '" + s.chars.ship_id + "': x_aero identically zero, b is not identifiable from its data");
  }
  gt_center_ = gt_sum / static_cast<double>(ships_.size());
}

std::size_t FleetModel::ship_index(const std::string& ship_id) const {
  for (std::size_t i = 0; i < ships_.size(); ++i)
    if (ships_[i].chars.ship_id == ship_id) return i;
  throw NotFound("unknown ship '" + ship_id + "'");
}

std::vector<std::string> FleetModel::param_names() const {
  std::vector<std::string> names;
  for (const auto& s : ships_) {
    names.push_back(param_a(s.chars.ship_id));
    names.push_back(param_b(s.chars.ship_id));
    names.push_back(param_sigma(s.chars.ship_id));
  }
  for (const char* h : kHyperNames) names.emplace_back(h);
  return names;
}

std::vector<ShipData> ships_from_reports(const std::vector<VesselCharacteristics>& chars,
                                         const std::vector<NoonReport>& reports) {
  std::map<std::string, std::vector<FeatureRow>> rows;
  for (const auto& r : reports) rows[r.ship_id].push_back(r.feature());
  std::vector<ShipData> out;
  for (const auto& c : chars)
    if (auto it = rows.find(c.ship_id); it != rows.end()) out.push_back({c, std::move(it->second)});
  return out;
}

std::vector<ShipData> ships_from_telemetry(const std::vector<VesselCharacteristics>& chars,
                                           const std::vector<TelemetryRecord>& records) {
  std::map<std::string, std::vector<FeatureRow>> rows;
  for (const auto& r : records) rows[r.ship_id].push_back(featurize(r));
  std::vector<ShipData> out;
  for (const auto& c : chars)
    if (auto it = rows.find(c.ship_id); it != rows.end()) out.push_back({c, std::move(it->second)});
  return out;
}

std::vector<double> FleetState::to_theta() const {
  std::vector<double> theta;
  for (std::size_t i = 0; i < a.size(); ++i) {
    theta.push_back(a[i]);
    theta.push_back(b[i]);
    theta.push_back(sigma[i]);
  }
  theta.insert(theta.end(), lambda.begin(), lambda.end());
  theta.push_back(sigma_a);
  theta.push_back(sigma_b);
  return theta;
}

FleetState FleetState::from_theta(const FleetModel& fleet, const std::vector<double>& theta) {
  if (theta.size() != fleet.n_params())
    throw InvalidArgument("parameter vector has " + std::to_string(theta.size()) + " entries, fleet expects " +
                          std::to_string(fleet.n_params()));
  FleetState s;
  const std::size_t n = fleet.size();
  for (std::size_t i = 0; i < n; ++i) {
    s.a.push_back(theta[3 * i]);
    s.b.push_back(theta[3 * i + 1]);
    s.sigma.push_back(theta[3 * i + 2]);
  }
  for (int k = 0; k < 4; ++k) s.lambda[k] = theta[3 * n + k];
  s.sigma_a = theta[3 * n + 4];
  s.sigma_b = theta[3 * n + 5];
  return s;
}

bool inside_prior_box(const FleetModel& fleet, const FleetState& s) {
  const auto& bx = fleet.bounds();
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    if (!(s.a[i] > 0.0 && s.a[i] <= bx.a_hi)) return false;
    if (!(s.b[i] >= 0.0 && s.b[i] <= bx.b_hi)) return false;
    if (!(s.sigma[i] >= bx.sigma_lo[i] && s.sigma[i] <= bx.sigma_hi[i])) return false;
  }
  for (int k = 0; k < 4; ++k)
    if (!(s.lambda[k] >= bx.lambda_lo[k] && s.lambda[k] <= bx.lambda_hi[k])) return false;
  return s.sigma_a >= bx.sigma_a_lo && s.sigma_a <= bx.sigma_a_hi && s.sigma_b >= bx.sigma_b_lo &&
         s.sigma_b <= bx.sigma_b_hi;
}

double log_likelihood_ship(const FleetModel& fleet, std::size_t ship, double a, double b, double sigma) {
  const auto& st = fleet.stats(ship);
  return -0.5 * st.n * kLog2Pi - st.n * std::log(sigma) - st.sse(a, b) / (2.0 * sigma * sigma);
}

double log_likelihood(const FleetModel& fleet, const FleetState& s) {
  double lp = 0.0;
  for (std::size_t i = 0; i < fleet.size(); ++i) lp += log_likelihood_ship(fleet, i, s.a[i], s.b[i], s.sigma[i]);
  return lp;
}

double log_hyper_density(const FleetModel& fleet, const FleetState& s) {
  double lp = 0.0;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const double w = fleet.ships()[i].chars.gross_tonnage;
    lp += gaussian_logpdf(s.a[i], s.lambda[0] + s.lambda[1] * w, s.sigma_a);
    lp += gaussian_logpdf(s.b[i], s.lambda[2] + s.lambda[3] * w, s.sigma_b);
  }
  return lp;
}

double log_posterior(const FleetModel& fleet, const std::vector<double>& theta) {
  const FleetState s = FleetState::from_theta(fleet, theta);
  if (!inside_prior_box(fleet, s)) return -std::numeric_limits<double>::infinity();
  return log_likelihood(fleet, s) + log_hyper_density(fleet, s);
}

namespace {

struct BlockSystem {
  Eigen::Matrix2d precision;
  Eigen::Vector2d linear;  // precision * mean
};

BlockSystem ship_block_system(const FleetModel& fleet, const FleetState& s, std::size_t i, bool hierarchical) {
  const auto& st = fleet.stats(i);
  const double inv_var = 1.0 / (s.sigma[i] * s.sigma[i]);
  BlockSystem sys{st.gram * inv_var, st.xty * inv_var};
  if (hierarchical) {
    const double w = fleet.ships()[i].chars.gross_tonnage;
    const double pa = 1.0 / (s.sigma_a * s.sigma_a);
    const double pb = 1.0 / (s.sigma_b * s.sigma_b);
    sys.precision(0, 0) += pa;
    sys.precision(1, 1) += pb;
    sys.linear[0] += pa * (s.lambda[0] + s.lambda[1] * w);
    sys.linear[1] += pb * (s.lambda[2] + s.lambda[3] * w);
  }
  return sys;
}

struct LineMoments {
  double mu_hat, slope_hat, sd_mu, sd_slope;  // centered parameterisation
  bool slope_identified;
};

LineMoments line_moments(const FleetModel& fleet, const std::vector<double>& v, double sigma) {
  const double center = fleet.gt_center();
  const auto n = static_cast<double>(v.size());
  double mv = 0.0, szz = 0.0, szv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) mv += v[i];
  mv /= n;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double z = fleet.ships()[i].chars.gross_tonnage - center;
    szz += z * z;
    szv += z * v[i];
  }
  const bool ident = szz > 1e-12 * center * center * n;
  return {mv, ident ? szv / szz : 0.0, sigma / std::sqrt(n), ident ? sigma / std::sqrt(szz) : 0.0, ident};
}

}  // namespace

GaussianConditional ship_block_conditional(const FleetModel& fleet, const FleetState& s, std::size_t ship) {
  const auto sys = ship_block_system(fleet, s, ship, true);
  const Eigen::Matrix2d cov = sys.precision.inverse();
  return {cov * sys.linear, cov};
}

GaussianConditional hyper_line_conditional(const FleetModel& fleet, const FleetState& s, int line) {
  const auto& v = line == 0 ? s.a : s.b;
  const auto m = line_moments(fleet, v, line == 0 ? s.sigma_a : s.sigma_b);
  if (!m.slope_identified) throw InvalidArgument("hyper-line slope needs at least two distinct gross tonnages");
  const double c = fleet.gt_center();
  Eigen::Matrix2d t;
  t << 1.0, -c, 0.0, 1.0;
  const Eigen::Vector2d centered_mean(m.mu_hat, m.slope_hat);
  const Eigen::Matrix2d centered_cov = Eigen::Vector2d(m.sd_mu * m.sd_mu, m.sd_slope * m.sd_slope).asDiagonal();
  return {t * centered_mean, t * centered_cov * t.transpose()};
}

void SamplerConfig::validate() const {
  if (iterations <= 0) throw InvalidArgument("iterations must be positive");
  if (chains < 2) throw InvalidArgument("at least 2 chains are required");
  if (warmup < 0) throw InvalidArgument("warmup must be non-negative");
  if (iterations < warmup + 100) throw InvalidArgument("iterations must be at least warmup + 100");
  if (threads < 0) throw InvalidArgument("threads must be non-negative");
  if (!(bounds.a > 0.0 && bounds.b > 0.0 && bounds.sigma > 0.0))
    throw InvalidArgument("prior bound multipliers must be positive");
}

std::string SamplerConfig::describe() const {
  std::ostringstream os;
  os << "chains=" << chains << " iterations=" << iterations << " warmup=" << warmup << " seed=" << seed
     << " a_bound_multiplier=" << bounds.a << " b_bound_multiplier=" << bounds.b
     << " sigma_bound_multiplier=" << bounds.sigma << " freeze_variances=" << (freeze_variances ? "true" : "false");
  return os.str();
}

namespace {

struct Interval {
  double lo, hi;
};

// (a, b) ~ N(precision^-1 linear, precision^-1) restricted to a box. Joint draws with
// rejection first; if the box holds too little mass, coordinate-wise truncated
// normal updates from the current point (both kernels leave the target invariant and
// the choice between them does not depend on the current state).
void sample_pair(CounterRng& rng, const BlockSystem& sys, const Interval (&box)[2], Eigen::Vector2d& x) {
  const auto& q = sys.precision;
  const bool pd = q(0, 0) > 0.0 && q(1, 1) > 0.0 && q.determinant() > 1e-12 * q(0, 0) * q(1, 1);
  if (pd) {
    Eigen::LLT<Eigen::Matrix2d> llt(q);
    if (llt.info() == Eigen::Success) {
      const Eigen::Vector2d m = llt.solve(sys.linear);
      const Eigen::Matrix2d upper = llt.matrixU();
      for (int t = 0; t < kMaxJointRejections; ++t) {
        const Eigen::Vector2d z(rng.normal(), rng.normal());
        const Eigen::Vector2d y = m + upper.triangularView<Eigen::Upper>().solve(z);
        if (y[0] >= box[0].lo && y[0] <= box[0].hi && y[1] >= box[1].lo && y[1] <= box[1].hi) {
          x = y;
          return;
        }
      }
    }
  }
  for (int sweep = 0; sweep < 2; ++sweep)
    for (int k = 0; k < 2; ++k) {
      const int j = 1 - k;
      if (q(k, k) > 0.0) {
        const double mk = (sys.linear[k] - q(k, j) * x[j]) / q(k, k);
        x[k] = truncated_normal(rng, mk, 1.0 / std::sqrt(q(k, k)), box[k].lo, box[k].hi);
      } else {
        x[k] = box[k].lo + rng.uniform() * (box[k].hi - box[k].lo);
      }
    }
}

// Hyper-line (intercept, slope) given the coefficients and their scale. Sampled in
// the GT-centered parameterisation, boxed in the uncentered one.
void sample_line(CounterRng& rng, const LineMoments& m, double center, const Interval& int_box,
                 const Interval& slope_box, double& intercept, double& slope) {
  if (m.slope_identified) {
    for (int t = 0; t < kMaxJointRejections; ++t) {
      const double mu = m.mu_hat + m.sd_mu * rng.normal();
      const double s = m.slope_hat + m.sd_slope * rng.normal();
      const double l1 = mu - s * center;
      if (l1 >= int_box.lo && l1 <= int_box.hi && s >= slope_box.lo && s <= slope_box.hi) {
        intercept = l1;
        slope = s;
        return;
      }
    }
  }
  double mu = intercept + slope * center;
  for (int sweep = 0; sweep < 2; ++sweep) {
    const double s_lo = std::max(slope_box.lo, (mu - int_box.hi) / center);
    const double s_hi = std::min(slope_box.hi, (mu - int_box.lo) / center);
    if (s_lo < s_hi) {
      slope = m.slope_identified ? truncated_normal(rng, m.slope_hat, m.sd_slope, s_lo, s_hi)
                                 : s_lo + rng.uniform() * (s_hi - s_lo);
    }
    const double mu_lo = int_box.lo + slope * center;
    const double mu_hi = int_box.hi + slope * center;
    if (mu_lo < mu_hi) mu = truncated_normal(rng, m.mu_hat, m.sd_mu, mu_lo, mu_hi);
  }
  intercept = mu - slope * center;
}

// Univariate slice sampler on log(sigma) (stepping out, then shrinkage).
// `log_density` is the density of sigma itself; the log-Jacobian is added here.
class ScaleSlice {
 public:
  template <typename LogDensity>
  double step(CounterRng& rng, LogDensity&& log_density, double sigma, double lo, double hi) {
    const double u_lo = std::log(lo), u_hi = std::log(hi);
    auto f = [&](double u) {
      if (u < u_lo || u > u_hi) return -std::numeric_limits<double>::infinity();
      return log_density(std::exp(u)) + u;
    };
    const double u0 = std::log(sigma);
    const double level = f(u0) - rng.exponential();
    double left = u0 - width_ * rng.uniform();
    double right = left + width_;
    int j = static_cast<int>(std::floor(kMaxSteps * rng.uniform()));
    int k = kMaxSteps - 1 - j;
    while (j-- > 0 && left > u_lo && f(left) > level) left -= width_;
    while (k-- > 0 && right < u_hi && f(right) > level) right += width_;
    left = std::max(left, u_lo);
    right = std::min(right, u_hi);
    double u1 = u0;
    for (int guard = 0; guard < 200; ++guard) {
      u1 = left + rng.uniform() * (right - left);
      if (f(u1) > level) break;
      if (u1 < u0)
        left = u1;
      else
        right = u1;
      u1 = u0;
    }
    sum_abs_ += std::abs(u1 - u0);
    ++count_;
    return std::clamp(std::exp(u1), lo, hi);
  }

  // Width follows the recent mean jump size; only called during warmup.
  void adapt() {
    if (count_ == 0) return;
    const double mean_jump = sum_abs_ / count_;
    if (mean_jump > 0.0) width_ = std::clamp(3.0 * mean_jump, 1e-4, 10.0);
    sum_abs_ = 0.0;
    count_ = 0;
  }
  void reset_stats() {
    sum_abs_ = 0.0;
    count_ = 0;
  }

 private:
  static constexpr int kMaxSteps = 32;
  double width_ = 1.0;
  double sum_abs_ = 0.0;
  int count_ = 0;
};

constexpr int kAdaptInterval = 50;

class GibbsChain {
 public:
  GibbsChain(const FleetModel& fleet, const SamplerConfig& cfg, bool hierarchical, std::uint64_t chain_seed)
      : fleet_(fleet),
        cfg_(cfg),
        hierarchical_(hierarchical),
        hyper_rng_(derive_seed(chain_seed, "hyper")),
        ship_slices_(fleet.size()) {
    for (std::size_t i = 0; i < fleet.size(); ++i) ship_rngs_.emplace_back(derive_seed(chain_seed, "ship", i));
    CounterRng init_rng(derive_seed(chain_seed, "init"));
    state_ = cfg.initial_state ? *cfg.initial_state : initial_state(init_rng);
    if (cfg.initial_state) {
      (void)FleetState::from_theta(fleet, state_.to_theta());
      if (!inside_prior_box(fleet, state_)) throw InvalidArgument("initial state lies outside the prior box");
    }
  }

  void iterate() {
    const auto& bx = fleet_.bounds();
    const Interval ab_box[2] = {{kCoeffFloorRatio * bx.a_hi, bx.a_hi}, {0.0, bx.b_hi}};
    for (std::size_t i = 0; i < fleet_.size(); ++i) {
      Eigen::Vector2d x(state_.a[i], state_.b[i]);
      sample_pair(ship_rngs_[i], ship_block_system(fleet_, state_, i, hierarchical_), ab_box, x);
      state_.a[i] = x[0];
      state_.b[i] = x[1];
    }
    if (hierarchical_) {
      const double c = fleet_.gt_center();
      sample_line(hyper_rng_, line_moments(fleet_, state_.a, state_.sigma_a), c,
                  {bx.lambda_lo[0], bx.lambda_hi[0]}, {bx.lambda_lo[1], bx.lambda_hi[1]}, state_.lambda[0],
                  state_.lambda[1]);
      sample_line(hyper_rng_, line_moments(fleet_, state_.b, state_.sigma_b), c,
                  {bx.lambda_lo[2], bx.lambda_hi[2]}, {bx.lambda_lo[3], bx.lambda_hi[3]}, state_.lambda[2],
                  state_.lambda[3]);
    }
    if (cfg_.freeze_variances) return;

    for (std::size_t i = 0; i < fleet_.size(); ++i) {
      const double n = fleet_.stats(i).n;
      const double sse = fleet_.stats(i).sse(state_.a[i], state_.b[i]);
      state_.sigma[i] = ship_slices_[i].step(
          ship_rngs_[i], [&](double s) { return -n * std::log(s) - sse / (2.0 * s * s); }, state_.sigma[i],
          bx.sigma_lo[i], bx.sigma_hi[i]);
    }
    if (hierarchical_) {
      double ssa = 0.0, ssb = 0.0;
      for (std::size_t i = 0; i < fleet_.size(); ++i) {
        const double w = fleet_.ships()[i].chars.gross_tonnage;
        const double ea = state_.a[i] - state_.lambda[0] - state_.lambda[1] * w;
        const double eb = state_.b[i] - state_.lambda[2] - state_.lambda[3] * w;
        ssa += ea * ea;
        ssb += eb * eb;
      }
      const auto n = static_cast<double>(fleet_.size());
      state_.sigma_a = slice_a_.step(
          hyper_rng_, [&](double s) { return -n * std::log(s) - ssa / (2.0 * s * s); }, state_.sigma_a,
          bx.sigma_a_lo, bx.sigma_a_hi);
      state_.sigma_b = slice_b_.step(
          hyper_rng_, [&](double s) { return -n * std::log(s) - ssb / (2.0 * s * s); }, state_.sigma_b,
          bx.sigma_b_lo, bx.sigma_b_hi);
    }
  }

  void adapt() {
    for (auto& s : ship_slices_) s.adapt();
    slice_a_.adapt();
    slice_b_.adapt();
  }

  const FleetState& state() const { return state_; }

 private:
  FleetState initial_state(CounterRng& rng) const {
    const auto& bx = fleet_.bounds();
    const bool jitter_scales = !cfg_.freeze_variances;
    const std::size_t n = fleet_.size();
    FleetState s;

    std::vector<double> b_pos;
    for (std::size_t i = 0; i < n; ++i)
      if (fleet_.stats(i).aero_identifiable && fleet_.stats(i).least_squares[1] > 0.0)
        b_pos.push_back(fleet_.stats(i).least_squares[1]);
    const double b_ref = b_pos.empty() ? 0.01 * bx.b_hi : median(b_pos);

    for (std::size_t i = 0; i < n; ++i) {
      const auto& st = fleet_.stats(i);
      const double a0 = st.least_squares[0] > 0.0 ? st.least_squares[0] : 0.05 * bx.a_hi;
      const double b0 = st.aero_identifiable && st.least_squares[1] > 0.0 ? st.least_squares[1] : b_ref;
      s.a.push_back(std::clamp(a0 * std::exp(0.05 * rng.normal()), kCoeffFloorRatio * bx.a_hi * 10.0, bx.a_hi));
      s.b.push_back(std::clamp(b0 * std::exp(0.3 * rng.normal()), 0.0, bx.b_hi));
      double sig = std::sqrt(st.sse(s.a[i], s.b[i]) / std::max(1.0, st.n - 2.0));
      if (jitter_scales) sig *= std::exp(0.3 * rng.normal());
      s.sigma.push_back(std::clamp(sig, 10.0 * bx.sigma_lo[i], bx.sigma_hi[i]));
    }

    auto line_init = [&](const std::vector<double>& v, double lo_scale, double& l1, double& l2, double& sd,
                         double sd_lo, double sd_hi) {
      const auto m = line_moments(fleet_, v, 1.0);
      l2 = m.slope_identified ? m.slope_hat : 0.0;
      l1 = m.mu_hat - l2 * fleet_.gt_center();
      sd = std::max(stddev(v), lo_scale);
      if (jitter_scales) sd *= std::exp(0.3 * rng.normal());
      sd = std::clamp(sd, 10.0 * sd_lo, sd_hi);
    };
    line_init(s.a, 1e-3 * bx.a_hi, s.lambda[0], s.lambda[1], s.sigma_a, bx.sigma_a_lo, bx.sigma_a_hi);
    line_init(s.b, 1e-3 * bx.b_hi, s.lambda[2], s.lambda[3], s.sigma_b, bx.sigma_b_lo, bx.sigma_b_hi);
    for (int k = 0; k < 4; ++k) s.lambda[k] = std::clamp(s.lambda[k], bx.lambda_lo[k], bx.lambda_hi[k]);
    return s;
  }

  const FleetModel& fleet_;
  const SamplerConfig& cfg_;
  bool hierarchical_;
  FleetState state_;
  std::vector<CounterRng> ship_rngs_;
  CounterRng hyper_rng_;
  std::vector<ScaleSlice> ship_slices_;
  ScaleSlice slice_a_, slice_b_;
};

// Runs `job(c)` for every chain, at most `threads` at a time. Output slots are disjoint.
template <typename Job>
void run_chains(int n_chains, int threads, Job&& job) {
  int cap = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  cap = std::min(cap, n_chains);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));
  for (int first = 0; first < n_chains; first += cap) {
    std::vector<std::thread> pool;
    for (int c = first; c < std::min(n_chains, first + cap); ++c)
      pool.emplace_back([&, c] {
        try {
          job(c);
        } catch (...) {
          errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <typename Record>
void sample_chain(GibbsChain& chain, const SamplerConfig& cfg, Record&& record) {
  for (int it = 0; it < cfg.iterations; ++it) {
    const bool warm = it < cfg.warmup;
    chain.iterate();
    if (warm && (it + 1) % kAdaptInterval == 0) chain.adapt();
    if (!warm) record(static_cast<std::size_t>(it - cfg.warmup), chain.state());
  }
}

}  // namespace

PosteriorChains fit_hierarchical(const FleetModel& fleet, const SamplerConfig& config) {
  config.validate();
  PosteriorChains out;
  out.param_names = fleet.param_names();
  out.n_chains = static_cast<std::size_t>(config.chains);
  out.n_draws = static_cast<std::size_t>(config.iterations - config.warmup);
  out.values.assign(out.n_chains * out.n_draws * out.n_params(), 0.0);
  out.seed = config.seed;
  out.config_snapshot = "mode=hierarchical " + config.describe() + " gt_center=" + std::to_string(fleet.gt_center()) +
                        "; prior box: " + fleet.bounds().describe();
  for (const auto& w : fleet.warnings()) out.warnings.push_back(w + "; b follows the hyper-prior");

  run_chains(config.chains, config.threads, [&](int c) {
    GibbsChain chain(fleet, config, true, derive_seed(config.seed, "fit/hierarchical/chain", static_cast<std::uint64_t>(c)));
    sample_chain(chain, config, [&](std::size_t d, const FleetState& s) {
      const auto theta = s.to_theta();
      std::copy(theta.begin(), theta.end(),
                out.values.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(c) * out.n_draws + d) *
                                                                 out.n_params()));
    });
  });
  return out;
}

std::vector<PosteriorChains> fit_independent(const FleetModel& fleet, const SamplerConfig& config) {
  config.validate();
  const std::size_t n = fleet.size();
  std::vector<PosteriorChains> out(n);
  const auto draws = static_cast<std::size_t>(config.iterations - config.warmup);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = fleet.ships()[i].chars.ship_id;
    auto& pc = out[i];
    pc.param_names = {param_a(id), param_b(id), param_sigma(id)};
    pc.n_chains = static_cast<std::size_t>(config.chains);
    pc.n_draws = draws;
    pc.values.assign(pc.n_chains * draws * 3, 0.0);
    pc.seed = config.seed;
    pc.config_snapshot = "mode=independent " + config.describe() + "; prior box: " + fleet.bounds().describe();
    const auto& st = fleet.stats(i);
    if (st.ill_conditioned)
      pc.warnings.push_back("ship '" + id + "': ill-conditioned regressors; b is non-identifiable and its posterior "
                            "is the flat prior along the degenerate direction");
    else if (!st.aero_identifiable)
      pc.warnings.push_back("ship '" + id + "': x_aero identically zero; b is non-identifiable (posterior = flat prior)");
  }

  run_chains(config.chains, config.threads, [&](int c) {
    GibbsChain chain(fleet, config, false, derive_seed(config.seed, "fit/independent/chain", static_cast<std::uint64_t>(c)));
    sample_chain(chain, config, [&](std::size_t d, const FleetState& s) {
      for (std::size_t i = 0; i < n; ++i) {
        auto& pc = out[i];
        pc.at(static_cast<std::size_t>(c), d, 0) = s.a[i];
        pc.at(static_cast<std::size_t>(c), d, 1) = s.b[i];
        pc.at(static_cast<std::size_t>(c), d, 2) = s.sigma[i];
      }
    });
  });
  return out;
}

}  // namespace hbship

#include "hbship/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "hbship/error.hpp"
#include "hbship/stats.hpp"

namespace hbship {

const char* to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::Steam2: return "steam2";
    case ModelTag::PriorBased: return "prior-based";
    case ModelTag::ShipSpecific: return "ship-specific";
  }
  return "unknown";
}

std::vector<Observation> observations(std::span<const TelemetryRecord> records) {
  std::vector<Observation> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.speed, featurize(r)});
  return out;
}

std::vector<Observation> observations(std::span<const NoonReport> reports) {
  std::vector<Observation> out;
  out.reserve(reports.size());
  for (const auto& r : reports) out.push_back({std::cbrt(r.mean_x_hydro), r.feature()});
  return out;
}

ModelEvaluator greybox_model(const std::string& ship_id, ModelTag tag, double a, double b) {
  return {ship_id, tag, [a, b](const Observation& o) { return a * o.features.x_hydro + b * o.features.x_aero; }};
}

ModelEvaluator steam2_model(const VesselCharacteristics& chars, const WaterProperties& water) {
  if (!chars.wetted_surface || !chars.residual_coeff)
    throw NotFound("white-box inputs unavailable for ship '" + chars.ship_id + "'");
  return {chars.ship_id, ModelTag::Steam2,
          [chars, water](const Observation& o) { return o.speed > 0.0 ? steam2_power(chars, water, o.speed) : 0.0; }};
}

ResidualSeries residuals(const std::string& ship_id, std::span<const Observation> data, const ModelEvaluator& model) {
  if (model.ship_id != ship_id)
    throw InvalidArgument("model for ship '" + model.ship_id + "' applied to data of ship '" + ship_id + "'");
  ResidualSeries s{ship_id, model.tag, {}, {}};
  s.speeds.reserve(data.size());
  s.residuals.reserve(data.size());
  for (const auto& o : data) {
    const double r = o.features.y - model.power(o);
    if (!std::isfinite(r)) throw DataError("non-finite residual for ship '" + ship_id + "'");
    s.speeds.push_back(o.speed);
    s.residuals.push_back(r);
  }
  return s;
}

namespace {

constexpr std::size_t kExactRobustnessLimit = 2000;
constexpr int kRobustnessAnchors = 500;
// The k-th neighbour sits just inside the tricube support so that it keeps a small
// positive weight; two neighbours then always determine the local line.
constexpr double kRadiusInflation = 1.001;

struct SortedPoints {
  std::vector<double> x, y;
};

// Local linear fit at x0 over the k nearest points (x sorted ascending).
double local_fit(const SortedPoints& p, const std::vector<double>& robust, std::size_t k, double x0) {
  const std::size_t n = p.x.size();
  std::size_t lo = static_cast<std::size_t>(std::lower_bound(p.x.begin(), p.x.end(), x0) - p.x.begin());
  std::size_t hi = lo;  // window [lo, hi)
  while (hi - lo < k) {
    if (lo == 0) {
      ++hi;
    } else if (hi == n) {
      --lo;
    } else if (x0 - p.x[lo - 1] <= p.x[hi] - x0) {
      --lo;
    } else {
      ++hi;
    }
  }
  const double radius = std::max(x0 - p.x[lo], p.x[hi - 1] - x0) * kRadiusInflation;

  std::vector<double> w;
  w.reserve(k);
  double wsum = 0.0, xmin = 0.0, xmax = 0.0;
  bool any = false;
  for (std::size_t j = lo; j < hi; ++j) {
    double wj;
    const double d = std::abs(p.x[j] - x0);
    if (radius <= 0.0) {
      wj = 1.0;
    } else {
      const double r = d / radius;
      const double t = 1.0 - r * r * r;
      wj = r < 1.0 ? t * t * t : 0.0;
    }
    wj *= robust[j];
    w.push_back(wj);
    if (wj > 0.0) {
      wsum += wj;
      xmin = any ? std::min(xmin, p.x[j]) : p.x[j];
      xmax = any ? std::max(xmax, p.x[j]) : p.x[j];
      any = true;
    }
  }
  if (!any || wsum <= 0.0) {
    // Every neighbour was downweighted to zero; fall back to the plain neighbourhood mean.
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += p.y[j];
    return s / static_cast<double>(hi - lo);
  }
  const double span = p.x.back() - p.x.front();
  if (xmax - xmin <= 1e-12 * std::max(span, 1.0)) {
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += w[j - lo] * p.y[j];
    return s / wsum;
  }
  // Weighted least squares in the local coordinate x - x0, solved by QR on sqrt(w) rows.
  Eigen::MatrixXd design(static_cast<Eigen::Index>(hi - lo), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(hi - lo));
  for (std::size_t j = lo; j < hi; ++j) {
    const double sw = std::sqrt(w[j - lo]);
    const auto row = static_cast<Eigen::Index>(j - lo);
    design(row, 0) = sw;
    design(row, 1) = sw * (p.x[j] - x0);
    rhs(row) = sw * p.y[j];
  }
  const Eigen::Vector2d coef = design.householderQr().solve(rhs);
  return coef[0];
}

std::vector<double> fits_at_data(const SortedPoints& p, const std::vector<double>& robust, std::size_t k) {
  const std::size_t n = p.x.size();
  std::vector<double> fitted(n);
  if (n <= kExactRobustnessLimit) {
    for (std::size_t i = 0; i < n; ++i) fitted[i] = local_fit(p, robust, k, p.x[i]);
    return fitted;
  }
  const double x0 = p.x.front(), x1 = p.x.back();
  std::vector<double> ax(kRobustnessAnchors), ay(kRobustnessAnchors);
  for (int a = 0; a < kRobustnessAnchors; ++a) {
    ax[static_cast<std::size_t>(a)] = x0 + (x1 - x0) * a / (kRobustnessAnchors - 1);
    ay[static_cast<std::size_t>(a)] = local_fit(p, robust, k, ax[static_cast<std::size_t>(a)]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::upper_bound(ax.begin(), ax.end(), p.x[i]);
    std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(it - ax.begin()), ax.size() - 1);
    std::size_t l = r == 0 ? 0 : r - 1;
    if (l == r) {
      fitted[i] = ay[l];
      continue;
    }
    const double t = (p.x[i] - ax[l]) / (ax[r] - ax[l]);
    fitted[i] = ay[l] + t * (ay[r] - ay[l]);
  }
  return fitted;
}

}  // namespace

SmoothedCurve lowess(std::span<const double> x, std::span<const double> y, double frac, int iterations,
                     std::span<const double> grid) {
  if (x.size() != y.size()) throw InvalidArgument("lowess: x and y differ in length");
  if (x.size() < 2) throw InvalidArgument("lowess needs at least 2 points");
  if (!(frac > 0.0 && frac <= 1.0)) throw InvalidArgument("lowess: frac must be in (0, 1]");
  if (iterations < 0) throw InvalidArgument("lowess: iterations must be >= 0");
  const std::size_t n = x.size();
  const auto k = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-12));
  if (k < 2) throw InvalidArgument("lowess: frac too small, neighbourhood holds fewer than 2 points");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return x[l] < x[r] || (x[l] == x[r] && y[l] < y[r]);
  });
  SortedPoints p;
  for (std::size_t i : order) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidArgument("lowess: non-finite input");
    p.x.push_back(x[i]);
    p.y.push_back(y[i]);
  }

  std::vector<double> robust(n, 1.0);
  for (int it = 0; it < iterations; ++it) {
    const auto fitted = fits_at_data(p, robust, k);
    std::vector<double> abs_res(n);
    for (std::size_t i = 0; i < n; ++i) abs_res[i] = std::abs(p.y[i] - fitted[i]);
    // A perfect fit except for a few points has zero median residual; scale by the mean instead.
    const double tiny = 1e-12 * (std::abs(mean(p.y)) + 1.0);
    double s = median(abs_res);
    if (!(s > tiny)) s = mean(abs_res);
    if (!(s > tiny)) break;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = abs_res[i] / (6.0 * s);
      robust[i] = u < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
    }
  }

  SmoothedCurve out;
  out.frac = frac;
  out.iterations = iterations;
  if (grid.empty()) {
    const double lo = p.x.front(), hi = p.x.back();
    if (hi > lo) {
      for (int g = 0; g < 100; ++g) out.x.push_back(lo + (hi - lo) * g / 99.0);
    } else {
      out.x.push_back(lo);
    }
  } else {
    for (std::size_t g = 1; g < grid.size(); ++g)
      if (!(grid[g] > grid[g - 1])) throw InvalidArgument("lowess: grid must be strictly increasing");
    out.x.assign(grid.begin(), grid.end());
  }
  for (double gx : out.x) out.y.push_back(local_fit(p, robust, k, gx));
  return out;
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("bandwidth of empty sample");
  const double sd = stddev(values);
  const double probs[] = {0.25, 0.75};
  const auto q = quantiles(values, probs);
  const double iqr = (q[1] - q[0]) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  if (!(spread > 0.0)) return 1.0;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth, int points) {
  if (values.empty()) throw InvalidArgument("kde needs at least one value");
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth)))
    throw InvalidArgument("kde bandwidth must be positive");
  if (points < 2) throw InvalidArgument("kde needs at least 2 grid points");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("kde: non-finite value");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(values);
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - 4.0 * h, hi = *mx + 4.0 * h;
  DensityCurve out;
  out.bandwidth = h;
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * M_PI));
  for (int g = 0; g < points; ++g) {
    const double gx = lo + (hi - lo) * g / (points - 1);
    double s = 0.0;
    for (double v : values) {
      const double z = (gx - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    out.x.push_back(gx);
    out.density.push_back(s * norm);
  }
  return out;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("trapezoid: length mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

std::vector<QuantileRow> residual_quantiles(std::span<const ResidualSeries> series, std::span<const double> probs) {
  for (double p : probs)
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile probabilities must lie in (0, 1)");
  std::vector<QuantileRow> rows;
  std::map<ModelTag, std::vector<double>> pooled;
  for (const auto& s : series) {
    if (s.residuals.empty()) throw InvalidArgument("empty residual series for ship '" + s.ship_id + "'");
    const auto q = quantiles(s.residuals, probs);
    for (std::size_t k = 0; k < probs.size(); ++k) rows.push_back({s.ship_id, s.tag, probs[k], q[k]});
    auto& all = pooled[s.tag];
    all.insert(all.end(), s.residuals.begin(), s.residuals.end());
  }
  for (const auto& [tag, values] : pooled) {
    const auto q = quantiles(values, probs);
    for (std::size_t k = 0; k < probs.size(); ++k) rows.push_back({"ALL", tag, probs[k], q[k]});
  }
  return rows;
}

ComparisonRow summarize(const ResidualSeries& series) {
  if (series.residuals.empty()) throw InvalidArgument("empty residual series for ship '" + series.ship_id + "'");
  const double probs[] = {0.5, 0.025, 0.975};
  const auto q = quantiles(series.residuals, probs);
  double ss = 0.0;
  for (double r : series.residuals) ss += r * r;
  return {series.ship_id, series.tag, q[0], q[1], q[2], std::sqrt(ss / static_cast<double>(series.residuals.size())),
          "ok"};
}

}  // namespace hbship

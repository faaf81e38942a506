#include "hbship/chains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hbship/error.hpp"
#include "hbship/stats.hpp"

namespace hbship {

std::string param_a(const std::string& ship_id) { return "a[" + ship_id + "]"; }
std::string param_b(const std::string& ship_id) { return "b[" + ship_id + "]"; }
std::string param_sigma(const std::string& ship_id) { return "sigma[" + ship_id + "]"; }

std::optional<std::size_t> PosteriorChains::index_of(const std::string& name) const {
  const auto it = std::find(param_names.begin(), param_names.end(), name);
  if (it == param_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - param_names.begin());
}

std::size_t PosteriorChains::require(const std::string& name) const {
  if (auto idx = index_of(name)) return *idx;
  throw NotFound("parameter '" + name + "' not present in posterior");
}

std::vector<double> PosteriorChains::column(std::size_t param) const {
  std::vector<double> out;
  out.reserve(n_chains * n_draws);
  for (std::size_t c = 0; c < n_chains; ++c)
    for (std::size_t d = 0; d < n_draws; ++d) out.push_back(at(c, d, param));
  return out;
}

std::vector<std::vector<double>> PosteriorChains::per_chain(std::size_t param) const {
  std::vector<std::vector<double>> out(n_chains);
  for (std::size_t c = 0; c < n_chains; ++c) {
    out[c].reserve(n_draws);
    for (std::size_t d = 0; d < n_draws; ++d) out[c].push_back(at(c, d, param));
  }
  return out;
}

double PosteriorChains::mean_of(std::size_t param) const { return mean(column(param)); }

void PosteriorChains::check_shape() const {
  if (values.size() != n_chains * n_draws * param_names.size())
    throw InvalidArgument("posterior draw array does not match chains x draws x params");
}

std::vector<std::string> ships_in(const PosteriorChains& chains) {
  std::vector<std::string> ids;
  for (const auto& name : chains.param_names)
    if (name.size() > 3 && name.rfind("a[", 0) == 0 && name.back() == ']')
      ids.push_back(name.substr(2, name.size() - 3));
  return ids;
}

PosteriorChains merge_columns(const std::vector<PosteriorChains>& parts) {
  if (parts.empty()) throw InvalidArgument("merge_columns: nothing to merge");
  PosteriorChains out;
  out.n_chains = parts.front().n_chains;
  out.n_draws = parts.front().n_draws;
  out.seed = parts.front().seed;
  out.config_snapshot = parts.front().config_snapshot;
  for (const auto& p : parts) {
    if (p.n_chains != out.n_chains || p.n_draws != out.n_draws)
      throw InvalidArgument("merge_columns: chain shapes differ");
    out.param_names.insert(out.param_names.end(), p.param_names.begin(), p.param_names.end());
    out.warnings.insert(out.warnings.end(), p.warnings.begin(), p.warnings.end());
  }
  out.values.resize(out.n_chains * out.n_draws * out.param_names.size());
  for (std::size_t c = 0; c < out.n_chains; ++c)
    for (std::size_t d = 0; d < out.n_draws; ++d) {
      std::size_t offset = 0;
      for (const auto& p : parts) {
        for (std::size_t k = 0; k < p.n_params(); ++k) out.at(c, d, offset + k) = p.at(c, d, k);
        offset += p.n_params();
      }
    }
  return out;
}

namespace {

void check_chains(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw InvalidArgument("convergence diagnostics need at least 2 chains");
  for (const auto& c : chains) {
    if (c.size() < 4) throw InvalidArgument("convergence diagnostics need at least 4 draws per chain");
    if (c.size() != chains.front().size()) throw InvalidArgument("chains have unequal length");
  }
}

std::vector<std::vector<double>> split(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return halves;
}

struct VarianceParts {
  double within = 0.0;
  double var_plus = 0.0;
};

VarianceParts variance_parts(const std::vector<std::vector<double>>& chains) {
  const auto n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(mean(c));
    vars.push_back(variance(c));
  }
  const double w = mean(vars);
  const double b = n * variance(means);
  return {w, (n - 1.0) / n * w + b / n};
}

// Biased autocovariance at lag t.
double autocov(const std::vector<double>& x, double m, std::size_t t) {
  double s = 0.0;
  for (std::size_t i = 0; i + t < x.size(); ++i) s += (x[i] - m) * (x[i + t] - m);
  return s / static_cast<double>(x.size());
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  check_chains(chains);
  const auto parts = variance_parts(split(chains));
  if (parts.within <= 0.0) return parts.var_plus <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(parts.var_plus / parts.within);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  check_chains(chains);
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  const double total = static_cast<double>(m * n);
  const auto parts = variance_parts(chains);
  if (parts.var_plus <= 0.0) return total;

  std::vector<double> means;
  for (const auto& c : chains) means.push_back(mean(c));
  auto rho = [&](std::size_t t) {
    double acov = 0.0;
    for (std::size_t j = 0; j < m; ++j) acov += autocov(chains[j], means[j], t);
    acov /= static_cast<double>(m);
    return 1.0 - (parts.within - acov) / parts.var_plus;
  };

  // Geyer: sum pairs (rho_2k + rho_2k+1) while positive, forced monotone non-increasing.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double r0 = k == 0 ? 1.0 : rho(2 * k);
    double pair = r0 + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  if (tau <= 0.0) return total;
  return std::clamp(total / tau, std::numeric_limits<double>::min(), total);
}

std::vector<double> rhat(const PosteriorChains& chains) {
  std::vector<double> out;
  for (std::size_t p = 0; p < chains.n_params(); ++p) out.push_back(split_rhat(chains.per_chain(p)));
  return out;
}

std::vector<double> ess(const PosteriorChains& chains) {
  std::vector<double> out;
  for (std::size_t p = 0; p < chains.n_params(); ++p) out.push_back(effective_sample_size(chains.per_chain(p)));
  return out;
}

ChainDiagnostics diagnose(const PosteriorChains& chains) { return {rhat(chains), ess(chains), 0}; }

double mcse_mean(const std::vector<std::vector<double>>& chains) {
  std::vector<double> all;
  for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
  return stddev(all) / std::sqrt(effective_sample_size(chains));
}

}  // namespace hbship

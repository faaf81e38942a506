#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hbship {

/// Post-warmup MCMC draws, stored chain-major: values[(c * draws + d) * n_params + p].
struct PosteriorChains {
  std::vector<std::string> param_names;
  std::size_t n_chains = 0;
  std::size_t n_draws = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string config_snapshot;
  std::vector<std::string> warnings;

  std::size_t n_params() const { return param_names.size(); }
  double at(std::size_t chain, std::size_t draw, std::size_t param) const {
    return values[(chain * n_draws + draw) * param_names.size() + param];
  }
  double& at(std::size_t chain, std::size_t draw, std::size_t param) {
    return values[(chain * n_draws + draw) * param_names.size() + param];
  }
  std::optional<std::size_t> index_of(const std::string& name) const;
  /// Index of `name`, throwing NotFound when absent.
  std::size_t require(const std::string& name) const;
  /// All draws of one parameter, chains concatenated.
  std::vector<double> column(std::size_t param) const;
  std::vector<std::vector<double>> per_chain(std::size_t param) const;
  double mean_of(std::size_t param) const;

  /// Throws when the draw array does not match the declared shape.
  void check_shape() const;
};

/// Canonical parameter names. Ship ids are embedded verbatim: "a[SHIP01]".
std::string param_a(const std::string& ship_id);
std::string param_b(const std::string& ship_id);
std::string param_sigma(const std::string& ship_id);
inline constexpr const char* kHyperNames[] = {"lambda1", "lambda2", "lambda3", "lambda4", "sigma_a", "sigma_b"};

/// Ship ids that appear as a[...] parameters, in parameter order.
std::vector<std::string> ships_in(const PosteriorChains& chains);

/// Concatenate parameter columns of chains with identical (n_chains, n_draws).
PosteriorChains merge_columns(const std::vector<PosteriorChains>& parts);

struct ChainDiagnostics {
  std::vector<double> rhat;
  std::vector<double> ess;
  int divergent_count = 0;  // Gibbs has no divergences; reserved
};

/// Split potential scale reduction of one parameter. Each chain is halved
/// (the middle draw of odd-length chains is dropped). Needs >= 2 chains of >= 4 draws.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Multi-chain effective sample size with Geyer's initial monotone positive
/// sequence truncation of the autocorrelation sum. Result lies in (0, total draws].
double effective_sample_size(const std::vector<std::vector<double>>& chains);

std::vector<double> rhat(const PosteriorChains& chains);
std::vector<double> ess(const PosteriorChains& chains);
ChainDiagnostics diagnose(const PosteriorChains& chains);

/// Monte Carlo standard error of the posterior mean: sd / sqrt(ess).
double mcse_mean(const std::vector<std::vector<double>>& chains);

}  // namespace hbship

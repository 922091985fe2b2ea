#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "slm/family.hpp"
#include "slm/marginal.hpp"
#include "slm/prior.hpp"
#include "slm/random.hpp"
#include "slm/structure.hpp"

namespace slm {

struct ChainConfig {
  long steps = 10000;
  long burn_in = 1000;
  long thin = 10;
  PriorConfig prior;
  std::uint64_t seed = 0;
  /// Iterations of the conditional Q chain per retained draw; 0 disables Q draws.
  int q_steps = 100;
  /// Throws ConfigError unless steps > burn_in >= 0 and thin >= 1.
  void validate() const;
};

struct ChainState {
  Structure structure;
  double log_marginal = 0.0;
  double log_prior_weight = 0.0;
  long iteration = 0;
};

struct ChainDiagnostics {
  long proposals = 0;
  long accepted = 0;
  long zero_mass_rejections = 0;
  long self_proposals = 0;
  /// Post burn-in visits per model index (every iteration, before thinning).
  std::map<ModelIndex, long> visits;
  int spot_checks = 0;
  double max_cache_residual = 0.0;
  /// Indices whose prior weight used the unfiltered |Z_tau|.
  std::vector<ModelIndex> unfiltered_counts;

  double acceptance_rate() const { return proposals == 0 ? 0.0 : double(accepted) / double(proposals); }
  nlohmann::json to_json() const;
};

struct ChainDraw {
  long iter = 0;
  Structure structure;
  double log_marginal = 0.0;
  Eigen::VectorXd q;  // empty when Q draws are disabled
};

struct ChainResult {
  std::vector<ChainDraw> draws;
  ChainDiagnostics diagnostics;
  ChainState final_state;
};

/// Collapsed target over (tau, Z) for one data set. Caches log marginals by
/// structure and ln|Z-bar_tau| by index.
class CollapsedTarget {
 public:
  CollapsedTarget(const ModelFamily& family, Eigen::VectorXd y, PriorConfig prior);

  const ModelFamily& family() const { return context_.family(); }
  const Eigen::VectorXd& y() const { return context_.y(); }
  const PriorConfig& prior() const { return prior_; }

  /// Log marginal of Z, or nullopt when Z is outside Z-bar.
  std::optional<double> log_marginal(const Structure& z);
  /// -D eps - ln|Z-bar_tau| (count source: closed form, enumeration, or the unfiltered count).
  double log_prior_weight(const ModelIndex& tau);
  /// Whether the prior weight of tau uses the unfiltered count.
  bool unfiltered(const ModelIndex& tau);
  /// Fresh generic-route recomputation (no cache, materialized design).
  double recompute_log_marginal(const Structure& z) const;

  ChainState make_state(const Structure& z);

 private:
  MarginalContext context_;
  PriorConfig prior_;
  std::unordered_map<std::string, std::optional<double>> marginal_cache_;
  std::map<ModelIndex, std::pair<double, bool>> count_cache_;
};

/// Structures up to this count are enumerated to get the exact |Z-bar_tau|.
inline constexpr std::size_t kCountEnumerationLimit = 100000;

/// One Metropolis-Hastings move.
ChainState collapsed_mh_step(const ChainState& state, CollapsedTarget& target, Rng& rng,
                             ChainDiagnostics* diag = nullptr);

/// Burn-in then retained draws, thinned, with conditional Q draws. Chain moves
/// use substream (seed, chain, 0) and Q draws (seed, chain, 1). When `jsonl` is
/// given each retained draw is also written as one JSON line.
ChainResult run_chain(const ModelFamily& family, const Eigen::VectorXd& y, const ChainConfig& config,
                      std::uint64_t chain = 0, std::ostream* jsonl = nullptr,
                      const std::optional<Structure>& start = std::nullopt);

/// Independent chains run in parallel; result order follows the chain index.
std::vector<ChainResult> run_chains(const ModelFamily& family, const Eigen::VectorXd& y, const ChainConfig& config,
                                    int chains, int jobs);

nlohmann::json draw_to_json(const ChainDraw& draw);

/// Posterior over model indices from post burn-in visit counts.
std::map<ModelIndex, double> visit_frequencies(const ChainDiagnostics& diag);

}  // namespace slm

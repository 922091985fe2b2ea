#include "slm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slm/error.hpp"
#include "slm/instances.hpp"
#include "slm/io.hpp"
#include "slm/parallel.hpp"

namespace slm {

void ChainConfig::validate() const {
  prior.validate();
  if (burn_in < 0 || steps <= burn_in) throw ConfigError("chain requires steps > burn_in >= 0");
  if (thin < 1) throw ConfigError("chain requires thin >= 1");
  if (q_steps < 0) throw ConfigError("chain requires q_steps >= 0");
}

nlohmann::json ChainDiagnostics::to_json() const {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& [tau, c] : visits) v.push_back({{"tau", slm::to_json(tau)}, {"count", c}});
  nlohmann::json u = nlohmann::json::array();
  for (const auto& tau : unfiltered_counts) u.push_back(slm::to_json(tau));
  return {{"proposals", proposals},
          {"accepted", accepted},
          {"acceptance_rate", acceptance_rate()},
          {"zero_mass_rejections", zero_mass_rejections},
          {"self_proposals", self_proposals},
          {"visits", v},
          {"spot_checks", spot_checks},
          {"max_cache_residual", max_cache_residual},
          {"unfiltered_count_indices", u}};
}

CollapsedTarget::CollapsedTarget(const ModelFamily& family, Eigen::VectorXd y, PriorConfig prior)
    : context_(family, std::move(y)), prior_(prior) {
  prior_.validate();
}

std::optional<double> CollapsedTarget::log_marginal(const Structure& z) {
  const std::string key = structure_key(z);
  if (auto it = marginal_cache_.find(key); it != marginal_cache_.end()) return it->second;
  std::optional<double> v;
  if (const auto st = context_.stats(z)) v = slm::log_marginal(*st, prior_.lambda);
  marginal_cache_.emplace(key, v);
  return v;
}

double CollapsedTarget::log_prior_weight(const ModelIndex& tau) {
  auto it = count_cache_.find(tau);
  if (it == count_cache_.end()) {
    const ModelFamily& f = family();
    double lc = 0.0;
    bool flagged = false;
    if (const auto closed = log_valid_count_closed_form(f, tau)) {
      lc = *closed;
    } else if (structure_count(f, tau) <= kCountEnumerationLimit) {
      const auto all = enumerate_structures(f, tau, kCountEnumerationLimit);
      const auto kept = std::count_if(all.begin(), all.end(),
                                      [](const Structure& z) { return z.membership == Membership::member; });
      lc = kept > 0 ? std::log(static_cast<double>(kept)) : std::numeric_limits<double>::infinity();
    } else {
      lc = log_structure_count(f, tau);
      flagged = true;
    }
    it = count_cache_.emplace(tau, std::make_pair(slm::log_prior_weight(f, tau, prior_, lc), flagged)).first;
  }
  return it->second.first;
}

bool CollapsedTarget::unfiltered(const ModelIndex& tau) {
  log_prior_weight(tau);
  return count_cache_.at(tau).second;
}

double CollapsedTarget::recompute_log_marginal(const Structure& z) const {
  return slm::log_marginal(build_design(family(), z), y(), prior_.lambda);
}

ChainState CollapsedTarget::make_state(const Structure& z) {
  const auto lm = log_marginal(z);
  if (!lm) throw CollinearStructure("starting structure " + structure_key(z) + " is not identifiable");
  return ChainState{z, *lm, log_prior_weight(z.tau), 0};
}

ChainState collapsed_mh_step(const ChainState& state, CollapsedTarget& target, Rng& rng, ChainDiagnostics* diag) {
  ChainDiagnostics scratch;
  ChainDiagnostics& d = diag ? *diag : scratch;
  ChainState next = state;
  ++next.iteration;
  ++d.proposals;
  Proposal prop = propose_move(target.family(), state.structure, rng);
  if (prop.self) {
    ++d.self_proposals;
    ++d.accepted;
    return next;
  }
  if (!target.family().contains(prop.candidate.tau)) {
    ++d.zero_mass_rejections;
    return next;
  }
  const auto lm = target.log_marginal(prop.candidate);
  if (!lm) {
    ++d.zero_mass_rejections;
    return next;
  }
  const double lp = target.log_prior_weight(prop.candidate.tau);
  const double log_alpha = (lp - state.log_prior_weight) + (*lm - state.log_marginal) + prop.log_ratio;
  if (log_alpha >= 0.0 || std::log(rng.uniform_open()) < log_alpha) {
    ++d.accepted;
    next.structure = std::move(prop.candidate);
    next.structure.membership = Membership::member;
    next.log_marginal = *lm;
    next.log_prior_weight = lp;
  }
  return next;
}

namespace {

Structure initial_structure(const ModelFamily& family, const PriorConfig& prior, Rng& rng) {
  const IndexPmf pmf = model_index_log_pmf(family, prior);
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t pick = pmf.tau.size() - 1;
  for (std::size_t i = 0; i < pmf.tau.size(); ++i) {
    acc += std::exp(pmf.log_prob[i]);
    if (u < acc) {
      pick = i;
      break;
    }
  }
  return sample_valid_structure(family, pmf.tau[pick], rng);
}

}  // namespace

ChainResult run_chain(const ModelFamily& family, const Eigen::VectorXd& y, const ChainConfig& config,
                      std::uint64_t chain, std::ostream* jsonl, const std::optional<Structure>& start) {
  config.validate();
  Rng rng = Rng::substream(config.seed, {chain, 0});
  Rng q_rng = Rng::substream(config.seed, {chain, 1});
  CollapsedTarget target(family, y, config.prior);

  ChainResult res;
  ChainDiagnostics& d = res.diagnostics;
  ChainState state = target.make_state(start ? *start : initial_structure(family, config.prior, rng));

  std::string op_key;
  std::optional<DesignOperator> op;
  for (long i = 0; i < config.steps; ++i) {
    state = collapsed_mh_step(state, target, rng, &d);
    if ((i + 1) % 1000 == 0) {
      const double fresh = target.recompute_log_marginal(state.structure);
      d.max_cache_residual = std::max(d.max_cache_residual, std::abs(fresh - state.log_marginal));
      ++d.spot_checks;
    }
    if (i < config.burn_in) continue;
    ++d.visits[state.structure.tau];
    if ((i - config.burn_in) % config.thin != 0) continue;
    ChainDraw draw{i, state.structure, state.log_marginal, {}};
    if (config.q_steps > 0) {
      const std::string key = structure_key(state.structure);
      if (!op || key != op_key) {
        op.emplace(build_design(family, state.structure));
        op_key = key;
      }
      draw.q = sample_q_conditional(*op, y, config.prior.lambda, q_rng, config.q_steps);
    }
    if (jsonl) *jsonl << draw_to_json(draw).dump() << '\n';
    res.draws.push_back(std::move(draw));
  }
  for (const auto& [tau, c] : d.visits)
    if (target.unfiltered(tau)) d.unfiltered_counts.push_back(tau);
  res.final_state = state;
  return res;
}

std::vector<ChainResult> run_chains(const ModelFamily& family, const Eigen::VectorXd& y, const ChainConfig& config,
                                    int chains, int jobs) {
  std::vector<ChainResult> out(static_cast<std::size_t>(std::max(chains, 0)));
  parallel_for(out.size(), jobs, [&](std::size_t c) { out[c] = run_chain(family, y, config, c); });
  return out;
}

nlohmann::json draw_to_json(const ChainDraw& draw) {
  nlohmann::json j{{"iter", draw.iter},
                   {"tau", to_json(draw.structure.tau)},
                   {"structure", payload_to_json(draw.structure.payload)},
                   {"q", to_json(draw.q)},
                   {"log_marginal", draw.log_marginal}};
  return j;
}

std::map<ModelIndex, double> visit_frequencies(const ChainDiagnostics& diag) {
  long total = 0;
  for (const auto& [tau, c] : diag.visits) total += c;
  std::map<ModelIndex, double> out;
  for (const auto& [tau, c] : diag.visits) out[tau] = total == 0 ? 0.0 : double(c) / double(total);
  return out;
}

}  // namespace slm

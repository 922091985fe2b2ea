#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "slm/error.hpp"
#include "slm/instances.hpp"
#include "slm/marginal.hpp"
#include "slm/sampler.hpp"

using namespace slm;

namespace {

Eigen::VectorXd random_vector(int n, Rng& rng, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

// Data with some structure so the posterior is not flat: a prior draw's signal plus noise.
Eigen::VectorXd planted_data(const ModelFamily& f, Rng& rng, double scale) {
  const auto& taus = f.index_set();
  for (;;) {
    const ModelIndex tau = taus[rng.index(taus.size())];
    if (!has_valid_structures(f, tau)) continue;
    const Structure z = sample_uniform_structure(f, tau, rng);
    if (!is_member(f, z)) continue;
    const Eigen::VectorXd q = random_vector(complexity(f, tau).ell, rng, scale);
    return signal(f, z, q) + random_vector(f.observation_dim(), rng);
  }
}

double tv(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  std::map<std::string, double> diff = a;
  for (const auto& [k, v] : b) diff[k] -= v;
  double s = 0.0;
  for (const auto& [k, v] : diff) s += std::abs(v);
  return 0.5 * s;
}

ChainConfig quick_config(long steps, long burn, long thin, std::uint64_t seed) {
  ChainConfig c;
  c.steps = steps;
  c.burn_in = burn;
  c.thin = thin;
  c.seed = seed;
  c.q_steps = 0;
  return c;
}

}  // namespace

TEST(ChainConfig, Validation) {
  ChainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.burn_in = c.steps;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ChainConfig{};
  c.thin = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ChainConfig{};
  c.prior.lambda = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(CollapsedMh, SelfProposalsAreAccepted) {
  const auto f = ModelFamily::sobolev_sequence(1);
  CollapsedTarget target(f, Eigen::VectorXd::Ones(1), {});
  ChainState s = target.make_state(Structure{{1, 0}, Prefix{1}});
  ChainDiagnostics d;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) s = collapsed_mh_step(s, target, rng, &d);
  EXPECT_EQ(d.proposals, 100);
  EXPECT_EQ(d.self_proposals, 100);
  EXPECT_EQ(d.accepted, 100);
  EXPECT_EQ(s.structure, (Structure{{1, 0}, Prefix{1}}));
  EXPECT_EQ(s.iteration, 100);
}

TEST(CollapsedMh, CollinearCandidatesAreZeroMassRejections) {
  Eigen::MatrixXd x = make_design("gaussian", 10, 3, 2);
  x.col(1) = x.col(0);
  const auto f = ModelFamily::sparse_regression(x);
  Rng rng(2);
  const Eigen::VectorXd y = random_vector(10, rng);
  const ChainResult r = run_chain(f, y, quick_config(5000, 100, 1, 3), 0, nullptr, Structure{{1, 0}, Support{{0}}});
  EXPECT_GT(r.diagnostics.zero_mass_rejections, 0);
  for (const auto& d : r.draws) {
    const auto& s = std::get<Support>(d.structure.payload).idx;
    EXPECT_FALSE(std::find(s.begin(), s.end(), 0) != s.end() && std::find(s.begin(), s.end(), 1) != s.end());
  }
}

// Sobolev n = 2 has one structure per index; the chain is a two-state Markov
// chain whose stationary vector follows from its 2x2 transition matrix.
TEST(CollapsedMh, TwoStateChainMatchesHandStationaryVector) {
  const auto f = ModelFamily::sobolev_sequence(2);
  const Eigen::VectorXd y = Eigen::Vector2d(0.9, 0.35);
  const PriorConfig prior{1.0, 0.3};
  const PosteriorTable table = exact_posterior_table(f, y, prior, 10);
  ASSERT_EQ(table.entries.size(), 2u);
  const double w1 = std::exp(table.entries[0].log_weight), w2 = std::exp(table.entries[1].log_weight);
  // P(1 -> 2) = 1/2 min(1, w2 / w1), P(2 -> 1) = 1/2 min(1, w1 / w2); stationary (P21, P12) / sum
  const double p12 = 0.5 * std::min(1.0, w2 / w1), p21 = 0.5 * std::min(1.0, w1 / w2);
  const double pi1 = p21 / (p12 + p21);
  EXPECT_NEAR(pi1, w1, 1e-12);
  ASSERT_GT(std::min(w1, w2), 0.1);

  ChainConfig cfg = quick_config(101000, 1000, 1, 4);
  cfg.prior = prior;
  const ChainResult r = run_chain(f, y, cfg);
  const auto freq = visit_frequencies(r.diagnostics);
  const double f1 = freq.count({1, 0}) ? freq.at({1, 0}) : 0.0;
  EXPECT_LT(std::abs(f1 - pi1), 0.02);
}

TEST(RunChain, Bookkeeping) {
  const auto f = ModelFamily::sparse_regression(make_design("gaussian", 12, 5, 1));
  Rng rng(5);
  const Eigen::VectorXd y = random_vector(12, rng);
  const ChainResult one = run_chain(f, y, quick_config(101, 100, 1, 1));
  ASSERT_EQ(one.draws.size(), 1u);
  EXPECT_EQ(one.draws[0].iter, 100);

  ChainConfig cfg = quick_config(5000, 1000, 10, 2);
  cfg.q_steps = 20;
  std::ostringstream jsonl;
  const ChainResult r = run_chain(f, y, cfg, 0, &jsonl);
  EXPECT_EQ(r.draws.size(), 400u);
  EXPECT_EQ(r.diagnostics.proposals, 5000);
  long visits = 0;
  for (const auto& [tau, c] : r.diagnostics.visits) visits += c;
  EXPECT_EQ(visits, 4000);
  EXPECT_EQ(r.diagnostics.spot_checks, 5);
  EXPECT_LT(r.diagnostics.max_cache_residual, 1e-9);
  EXPECT_GT(r.diagnostics.acceptance_rate(), 0.0);

  std::istringstream is(jsonl.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"iter", "tau", "structure", "q", "log_marginal"}) ASSERT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["q"].size(), static_cast<std::size_t>(j["tau"].get<int>()));
    ++lines;
  }
  EXPECT_EQ(lines, r.draws.size());
  for (std::size_t i = 1; i < r.draws.size(); ++i) EXPECT_EQ(r.draws[i].iter - r.draws[i - 1].iter, 10);
}

TEST(RunChain, IdenticalSeedsGiveIdenticalOutput) {
  const auto f = ModelFamily::sbm(6);
  Rng rng(6);
  const Eigen::VectorXd y = random_vector(30, rng);
  ChainConfig cfg = quick_config(3000, 500, 5, 9);
  cfg.q_steps = 10;
  const ChainResult a = run_chain(f, y, cfg), b = run_chain(f, y, cfg);
  ASSERT_EQ(a.draws.size(), b.draws.size());
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    EXPECT_EQ(a.draws[i].structure, b.draws[i].structure);
    EXPECT_EQ(a.draws[i].log_marginal, b.draws[i].log_marginal);
    EXPECT_EQ(a.draws[i].q, b.draws[i].q);
  }
  EXPECT_EQ(a.diagnostics.to_json(), b.diagnostics.to_json());

  const auto chains = run_chains(f, y, cfg, 3, 2);
  ASSERT_EQ(chains.size(), 3u);
  EXPECT_EQ(chains[0].diagnostics.to_json(), a.diagnostics.to_json());
  const ChainResult c2 = run_chain(f, y, cfg, 2);
  EXPECT_EQ(chains[2].diagnostics.to_json(), c2.diagnostics.to_json());
  EXPECT_NE(chains[1].diagnostics.to_json(), a.diagnostics.to_json());
}

TEST(CollapsedTarget, CountSources) {
  const auto sbm = ModelFamily::sbm(8);
  CollapsedTarget a(sbm, Eigen::VectorXd::Zero(56), {});
  EXPECT_FALSE(a.unfiltered({3, 0}));

  const auto sp = ModelFamily::sparse_regression(make_design("gaussian", 40, 30, 7), 5);
  CollapsedTarget b(sp, Eigen::VectorXd::Zero(40), {});
  EXPECT_FALSE(b.unfiltered({2, 0}));
  EXPECT_TRUE(b.unfiltered({5, 0}));  // C(30, 5) = 142506 exceeds the enumeration limit
  EXPECT_NEAR(b.log_prior_weight({5, 0}), -2.0 * complexity(sp, {5, 0}).epsilon - log_structure_count(sp, {5, 0}),
              1e-12);
}

// For pairs connected by one move, pi(a) q(a->b) alpha(a->b) = pi(b) q(b->a) alpha(b->a)
// with pi from the exact table, q from the enumerated kernel and alpha from the
// sampler's own target and proposal ratio.
TEST(CollapsedMh, DetailedBalanceAgainstExactTable) {
  Rng rng(7);
  const std::vector<ModelFamily> families = {
      ModelFamily::sbm(6), ModelFamily::sparse_regression(make_design("gaussian", 10, 6, 3)),
      ModelFamily::group_two_level(3, 3), ModelFamily::dictionary(3, 2), ModelFamily::biclustering(4, 3)};
  for (const auto& f : families) {
    const Eigen::VectorXd y = planted_data(f, rng, 1.5);
    const PriorConfig prior{};
    const PosteriorTable table = exact_posterior_table(f, y, prior, 1000000);
    std::map<std::string, double> logpi;
    std::vector<const PosteriorEntry*> entries;
    for (const auto& e : table.entries) {
      logpi[structure_key(e.structure)] = e.log_weight;
      entries.push_back(&e);
    }
    CollapsedTarget target(f, y, prior);
    int checked = 0;
    for (int trial = 0; trial < 2000 && checked < 300; ++trial) {
      const Structure& a = entries[rng.index(entries.size())]->structure;
      const Proposal pr = propose_move(f, a, rng);
      if (pr.self || !logpi.count(structure_key(pr.candidate))) continue;
      const Structure& b = pr.candidate;
      const double la = target.log_prior_weight(a.tau) + *target.log_marginal(a);
      const double lb = target.log_prior_weight(b.tau) + *target.log_marginal(b);
      const double log_alpha_ab = std::min(0.0, lb - la + pr.log_ratio);
      const double log_alpha_ba = std::min(0.0, la - lb - pr.log_ratio);
      double qab = 0.0, qba = 0.0;
      for (const auto& o : enumerate_moves(f, a))
        if (o.candidate == b) qab += o.probability;
      for (const auto& o : enumerate_moves(f, b))
        if (o.candidate == a) qba += o.probability;
      const double lhs = logpi[structure_key(a)] + std::log(qab) + log_alpha_ab;
      const double rhs = logpi[structure_key(b)] + std::log(qba) + log_alpha_ba;
      ASSERT_NEAR(lhs, rhs, 1e-12 * std::max({1.0, std::abs(la), std::abs(lb)}))
          << to_string(f.kind()) << " " << structure_key(a) << " <-> " << structure_key(b);
      ++checked;
    }
    EXPECT_GT(checked, 50) << to_string(f.kind());
  }
}

TEST(RunChain, SparseStructureFrequenciesMatchTable) {
  const auto f = ModelFamily::sparse_regression(make_design("gaussian", 40, 8, 11));
  Rng rng(8);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(8);
  beta[1] = 0.6;
  beta[4] = -0.5;
  const Eigen::VectorXd y = f.design() * beta + random_vector(40, rng);
  const PosteriorTable table = exact_posterior_table(f, y, {}, 1000);
  std::map<std::string, double> exact, chain;
  for (const auto& e : table.entries) exact[structure_key(e.structure)] = std::exp(e.log_weight);
  const ChainResult r = run_chain(f, y, quick_config(101000, 1000, 1, 12));
  for (const auto& d : r.draws) chain[structure_key(d.structure)] += 1.0 / r.draws.size();
  EXPECT_LT(tv(chain, exact), 0.05);
}

TEST(RunChain, IndexMarginalConvergesOnEveryFamily) {
  Rng rng(9);
  const std::vector<ModelFamily> families = {
      ModelFamily::sbm(6),
      ModelFamily::biclustering(4, 4),
      ModelFamily::sparse_regression(make_design("gaussian", 12, 6, 1)),
      ModelFamily::group_sparsity(make_design("gaussian", 8, 5, 2), 2),
      ModelFamily::group_two_level(3, 3),
      ModelFamily::multi_task(make_design("gaussian", 6, 2, 3), 5),
      ModelFamily::dictionary(3, 3),
      ModelFamily::sobolev_sequence(8),
      ModelFamily::besov_level(3, 16),
      ModelFamily::aggregation_regression(make_design("gaussian", 6, 8, 4)),
  };
  std::uint64_t seed = 20;
  for (const auto& f : families) {
    const Eigen::VectorXd y = planted_data(f, rng, 1.0);
    const PriorConfig prior{1.0, 0.5};
    std::map<std::string, double> exact, chain;
    for (const auto& [tau, p] : index_posterior(exact_posterior_table(f, y, prior, 2000000)))
      exact[to_string(tau)] = p;
    ChainConfig cfg = quick_config(101000, 1000, 1, seed++);
    cfg.prior = prior;
    const ChainResult r = run_chain(f, y, cfg);
    for (const auto& [tau, p] : visit_frequencies(r.diagnostics)) chain[to_string(tau)] = p;
    EXPECT_LT(tv(chain, exact), 0.05) << to_string(f.kind());
    EXPECT_GT(r.diagnostics.acceptance_rate(), 0.0) << to_string(f.kind());
    EXPECT_LT(r.diagnostics.max_cache_residual, 1e-9) << to_string(f.kind());
  }
}

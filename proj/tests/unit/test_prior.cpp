#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/gamma.hpp>

#include "oracles.hpp"
#include "slm/error.hpp"
#include "slm/instances.hpp"
#include "slm/numeric.hpp"
#include "slm/prior.hpp"

using namespace slm;

namespace {

double pmf_at(const IndexPmf& pmf, const ModelIndex& tau) {
  for (std::size_t i = 0; i < pmf.tau.size(); ++i)
    if (pmf.tau[i] == tau) return pmf.log_prob[i];
  return -INFINITY;
}

std::vector<ModelFamily> prior_families() {
  return {
      ModelFamily::sbm(8),
      ModelFamily::biclustering(5, 4),
      ModelFamily::sparse_regression(make_design("gaussian", 10, 8, 1)),
      ModelFamily::group_sparsity(make_design("gaussian", 6, 5, 2), 3),
      ModelFamily::group_two_level(4, 3),
      ModelFamily::multi_task(make_design("gaussian", 5, 2, 3), 4),
      ModelFamily::dictionary(4, 5),
      ModelFamily::sobolev_sequence(30),
      ModelFamily::besov_level(3, 64),
      ModelFamily::aggregation_regression(make_design("gaussian", 6, 9, 4)),
  };
}

}  // namespace

TEST(LogCorrection, Examples) {
  EXPECT_NEAR(log_correction(2), 0.0, 1e-15);
  EXPECT_NEAR(log_correction(4), std::log(6.0), 1e-14);
  EXPECT_NEAR(log_correction(1), -0.5 * std::log(std::numbers::pi), 1e-14);
  EXPECT_NEAR(log_correction(1), -0.572365, 1e-6);
  for (int ell : {3, 10, 1000, 1000000}) {
    const double want = std::lgamma(double(ell)) - std::lgamma(ell / 2.0);
    EXPECT_NEAR(log_correction(ell), want, 1e-12 * std::abs(want)) << ell;
  }
}

TEST(ModelIndexPmf, SingletonIndexSet) {
  const auto pmf = model_index_log_pmf(ModelFamily::sobolev_sequence(1), {});
  ASSERT_EQ(pmf.tau.size(), 1u);
  EXPECT_EQ(pmf.log_prob[0], 0.0);
}

TEST(ModelIndexPmf, SobolevRatio) {
  const auto pmf = model_index_log_pmf(ModelFamily::sobolev_sequence(2), PriorConfig{1.0, 1.0});
  const double want = std::lgamma(2.0) - std::lgamma(1.0) - 4.0 - (std::lgamma(1.0) - std::lgamma(0.5) - 2.0);
  EXPECT_NEAR(pmf_at(pmf, {2, 0}) - pmf_at(pmf, {1, 0}), want, 1e-13);
  EXPECT_NEAR(std::exp(want), std::sqrt(std::numbers::pi) * std::exp(-2.0), 1e-15);
}

TEST(ModelIndexPmf, AggregationFullRankWeightIsLinearInRank) {
  const auto f = ModelFamily::aggregation_regression(make_design("gaussian", 8, 3, 6));
  ASSERT_EQ(f.design_rank(), 3);
  const PriorConfig cfg{1.0, 0.7};
  const auto pmf = model_index_log_pmf(f, cfg);
  // subtract each index's unnormalized weight; what is left is the common normalizer
  const double base1 = pmf_at(pmf, {1, 0}) - (log_correction(1) - cfg.D * 2.0 * std::log(std::exp(1.0) * 3 / 1));
  const double base2 = pmf_at(pmf, {2, 0}) - (log_correction(2) - cfg.D * 2.0 * 2 * std::log(std::exp(1.0) * 3 / 2));
  const double base3 = pmf_at(pmf, {3, 0}) - (log_correction(3) - cfg.D * 2.0 * 3);
  EXPECT_NEAR(base1, base2, 1e-13);
  EXPECT_NEAR(base1, base3, 1e-13);
}

TEST(ModelIndexPmf, NormalizedForEveryFamily) {
  for (const auto& f : prior_families())
    for (double D : {0.5, 2.0}) {
      const auto pmf = model_index_log_pmf(f, PriorConfig{1.0, D});
      EXPECT_NEAR(log_sum_exp(pmf.log_prob), 0.0, 1e-12) << to_string(f.kind());
      for (const auto& tau : pmf.tau) EXPECT_TRUE(has_valid_structures(f, tau));
    }
}

TEST(ModelIndexPmf, ExcludesEmptyIndicesAndFailsWhenNoneRemain) {
  const auto sbm = ModelFamily::sbm(5);
  const auto pmf = model_index_log_pmf(sbm, {});
  for (const auto& tau : pmf.tau) EXPECT_LE(2 * tau.first, 5);
  EXPECT_EQ(pmf.tau.size(), 2u);

  const auto zero = ModelFamily::sparse_regression(Eigen::MatrixXd::Zero(4, 3));
  EXPECT_THROW(model_index_log_pmf(zero, {}), NoValidModels);
}

TEST(PriorConfig, Validation) {
  EXPECT_THROW((PriorConfig{0.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((PriorConfig{1.0, -1.0}.validate()), ConfigError);
  EXPECT_NO_THROW((PriorConfig{0.5, 0.5}.validate()));
}

TEST(EllipticalLaplace, RadiusMeans) {
  Rng rng(1);
  const DesignOperator one(Eigen::MatrixXd::Ones(1, 1));
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += std::abs(sample_elliptical_laplace(one, 1.0, rng)[0]);
  EXPECT_NEAR(sum / 100000, 1.0, 0.02);

  const DesignOperator x(make_design("gaussian", 7, 3, 3));
  sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += x.apply(sample_elliptical_laplace(x, 2.0, rng)).norm();
  EXPECT_NEAR(sum / 100000, 1.5, 0.02);
}

TEST(EllipticalLaplace, DegenerateDesignThrows) {
  Eigen::MatrixXd x = make_design("gaussian", 5, 2, 1);
  x.col(1) = 2.0 * x.col(0);
  EXPECT_THROW(DesignOperator{x}, CollinearStructure);
}

TEST(EllipticalLaplace, RadiusIsGammaDistributed) {
  Rng rng(2);
  for (int ell : {1, 2, 3, 5, 10}) {
    const DesignOperator x(make_design("gaussian", 12, ell, 10 + ell));
    const double lambda = 1.3;
    std::vector<double> r(100000);
    for (double& v : r) v = x.apply(sample_elliptical_laplace(x, lambda, rng)).norm();
    const boost::math::gamma_distribution<double> g(ell, 1.0 / lambda);
    EXPECT_GT(oracle::ks_pvalue(r, [&](double v) { return boost::math::cdf(g, v); }), 0.01) << ell;
  }
}

TEST(EllipticalLaplace, DirectionIsUniformForOrthonormalDesign) {
  Rng rng(3);
  const int ell = 4, draws = 100000;
  const DesignOperator x(make_design("identity", 6, 6, 0).leftCols(ell));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd v = x.apply(sample_elliptical_laplace(x, 1.0, rng));
    mean += v / v.norm();
  }
  mean /= draws;
  for (int j = 0; j < 6; ++j) EXPECT_LT(std::abs(mean[j]), 4.0 / std::sqrt(double(draws))) << j;
}

TEST(EllipticalLaplaceDensity, Examples) {
  const DesignOperator one(Eigen::MatrixXd::Ones(1, 1));
  EXPECT_NEAR(elliptical_laplace_log_density(one, 1.0, Eigen::VectorXd::Zero(1)), std::log(0.5), 1e-14);
  const DesignOperator x(make_design("gaussian", 5, 2, 7));
  const Eigen::VectorXd q = Eigen::Vector2d(0.3, -0.8);
  const double r = x.apply(q).norm();
  const double lambda = 1.7;
  const double a = elliptical_laplace_log_density(x, lambda, q);
  const double b = elliptical_laplace_log_density(x, lambda, q * ((r + 1.0) / r));
  EXPECT_NEAR(a - b, lambda, 1e-12);
  EXPECT_THROW(elliptical_laplace_log_density(x, lambda, Eigen::VectorXd::Zero(3)), DomainError);
}

// Importance sampling in t = R Q with a spherical proposal whose radius is
// Gamma(ell, lambda / 2): the weights stay bounded.
TEST(EllipticalLaplaceDensity, IntegratesToOne) {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> normal;
  for (int ell : {1, 2, 3}) {
    const double lambda = 0.8;
    const DesignOperator x(make_design("gaussian", 6, ell, 20 + ell));
    const Eigen::MatrixXd& R = x.gram_factor();
    const double rate = lambda / 2;
    std::gamma_distribution<double> radius(ell, 1.0 / rate);
    const double log_surface = std::log(2.0) + 0.5 * ell * std::log(std::numbers::pi) - std::lgamma(ell / 2.0);
    const double log_det_r = R.diagonal().array().abs().log().sum();
    const long samples = 1000000;
    double s = 0.0, s2 = 0.0;
    for (long i = 0; i < samples; ++i) {
      Eigen::VectorXd u(ell);
      for (int a = 0; a < ell; ++a) u[a] = normal(gen);
      const double r = radius(gen);
      const Eigen::VectorXd t = u * (r / u.norm());
      const Eigen::VectorXd q = R.triangularView<Eigen::Upper>().solve(t);
      // proposal density of t is rate^ell e^{-rate r} / (Gamma(ell) |S^{ell-1}|); Q density adds det R
      const double log_g = ell * std::log(rate) - rate * r - std::lgamma(double(ell)) - log_surface + log_det_r;
      const double w = std::exp(elliptical_laplace_log_density(x, lambda, q) - log_g);
      s += w;
      s2 += w * w;
    }
    const double mean = s / samples, se = std::sqrt((s2 / samples - mean * mean) / samples);
    EXPECT_LT(std::abs(mean - 1.0), 3.0 * se + 1e-12) << ell << " mean " << mean << " se " << se;
  }
}

TEST(SamplePrior, SingletonFamilyHasOneFreeCoordinate) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const PriorDraw d = sample_prior(ModelFamily::sobolev_sequence(1), {}, rng);
    EXPECT_EQ(d.q.size(), 1);
    EXPECT_EQ(d.signal.size(), 1);
  }
}

// n = 4 is the smallest graph where k = 2 has identifiable labelings (both
// clusters need two nodes), six of the sixteen label vectors.
TEST(SamplePrior, SbmStructuresUniformGivenIndex) {
  Rng rng(5);
  const auto sbm = ModelFamily::sbm(4);
  std::map<std::string, long> counts;
  long k2 = 0;
  for (int i = 0; i < 100000; ++i) {
    const PriorDraw d = sample_prior(sbm, PriorConfig{1.0, 0.05}, rng);
    if (d.structure.tau.first != 2) continue;
    ++k2;
    ++counts[structure_key(d.structure)];
  }
  ASSERT_GT(k2, 10000);
  ASSERT_EQ(counts.size(), 6u);
  double chi2 = 0.0;
  for (const auto& [k, c] : counts) chi2 += (c - k2 / 6.0) * (c - k2 / 6.0) / (k2 / 6.0);
  EXPECT_LT(chi2, 20.5);  // chi-square(5) upper 0.001 point
}

// Direct label samplers against the enumerated member set.
TEST(SampleValidStructure, LabelFamiliesUniformOverMembers) {
  Rng rng(15);
  const std::vector<std::pair<ModelFamily, ModelIndex>> cases{
      {ModelFamily::sbm(7), {3, 0}},
      {ModelFamily::sbm(6), {1, 0}},
      {ModelFamily::multi_task(make_design("gaussian", 4, 2, 3), 5), {3, 0}},
      {ModelFamily::biclustering(4, 3), {2, 2}},
  };
  for (const auto& [f, tau] : cases) {
    std::map<std::string, long> counts;
    for (const auto& z : enumerate_structures(f, tau, 100000))
      if (z.membership == Membership::member) counts[structure_key(z)] = 0;
    const long cells = static_cast<long>(counts.size());
    ASSERT_GT(cells, 0);
    const long draws = 200 * cells;
    for (long i = 0; i < draws; ++i) {
      const Structure z = sample_valid_structure(f, tau, rng);
      ASSERT_TRUE(is_member(f, z)) << structure_key(z);
      auto it = counts.find(structure_key(z));
      ASSERT_NE(it, counts.end()) << structure_key(z);
      ++it->second;
    }
    double chi2 = 0.0;
    for (const auto& [k, c] : counts) chi2 += (c - 200.0) * (c - 200.0) / 200.0;
    if (cells > 1) {
      const boost::math::chi_squared_distribution<double> dist(double(cells - 1));
      EXPECT_LT(chi2, boost::math::quantile(boost::math::complement(dist, 0.001))) << to_string(f.kind()) << " " << cells;
    }
  }
}

TEST(SampleValidStructure, LargeSbmIndexIsFast) {
  Rng rng(16);
  const auto f = ModelFamily::sbm(24);
  for (int k : {1, 6, 12}) {
    const Structure z = sample_valid_structure(f, {k, 0}, rng);
    EXPECT_TRUE(is_member(f, z)) << k;
  }
}

TEST(SamplePrior, SignalNormIsGammaPerIndex) {
  Rng rng(6);
  const auto f = ModelFamily::sparse_regression(make_design("gaussian", 10, 6, 9), 3);
  const PriorConfig cfg{1.5, 0.2};
  std::map<int, std::vector<double>> by_ell;
  for (int i = 0; i < 60000; ++i) {
    const PriorDraw d = sample_prior(f, cfg, rng);
    by_ell[d.structure.tau.first].push_back(d.signal.norm());
  }
  for (auto& [ell, r] : by_ell) {
    if (r.size() < 500) continue;
    const boost::math::gamma_distribution<double> g(ell, 1.0 / cfg.lambda);
    EXPECT_GT(oracle::ks_pvalue(r, [&](double v) { return boost::math::cdf(g, v); }), 0.01) << ell;
  }
}

TEST(SamplePrior, IndexFrequenciesFollowPmf) {
  Rng rng(7);
  const auto f = ModelFamily::sobolev_sequence(6);
  const PriorConfig cfg{1.0, 0.3};
  const auto pmf = model_index_log_pmf(f, cfg);
  std::map<int, long> counts;
  const long draws = 50000;
  for (long i = 0; i < draws; ++i) ++counts[sample_prior(f, cfg, rng).structure.tau.first];
  for (std::size_t i = 0; i < pmf.tau.size(); ++i) {
    const double p = std::exp(pmf.log_prob[i]);
    EXPECT_NEAR(counts[pmf.tau[i].first] / double(draws), p, 4.0 * std::sqrt(p * (1 - p) / draws) + 1e-9);
  }
}

TEST(SamplePrior, JsonRecord) {
  Rng rng(8);
  const auto f = ModelFamily::sparse_regression(make_design("gaussian", 5, 4, 1));
  const PriorDraw d = sample_prior(f, {}, rng);
  const nlohmann::json j = to_json(d);
  for (const char* key : {"tau", "structure", "q", "signal"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["signal"].size(), 5u);
  EXPECT_EQ(structure_from_json(f, j), d.structure);
}

#include <cmath>

#include <gtest/gtest.h>

#include "slm/error.hpp"
#include "slm/family.hpp"
#include "slm/instances.hpp"

using namespace slm;

namespace {

std::vector<ModelFamily> desk_families() {
  return {
      ModelFamily::sbm(10),
      ModelFamily::biclustering(6, 6),
      ModelFamily::sparse_regression(make_design("gaussian", 20, 10, 1)),
      ModelFamily::group_sparsity(make_design("gaussian", 12, 6, 2), 3),
      ModelFamily::group_two_level(6, 3),
      ModelFamily::multi_task(make_design("gaussian", 10, 2, 3), 5),
      ModelFamily::dictionary(3, 4),
      ModelFamily::sobolev_sequence(50),
      ModelFamily::besov_level(4, 100),
      ModelFamily::aggregation_regression(make_design("gaussian", 12, 8, 4)),
  };
}

}  // namespace

TEST(Complexity, ExamplesByFamily) {
  const auto sbm10 = ModelFamily::sbm(10);
  EXPECT_DOUBLE_EQ(complexity(sbm10, {1, 0}).epsilon, 1.0);
  EXPECT_EQ(complexity(sbm10, {1, 0}).ell, 1);
  EXPECT_NEAR(complexity(ModelFamily::sbm(4), {2, 0}).epsilon, 4.0 + 4.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(complexity(ModelFamily::sbm(4), {2, 0}).epsilon, 6.772589, 1e-6);
  const auto sp = ModelFamily::sparse_regression(make_design("identity", 10, 10, 0));
  EXPECT_NEAR(complexity(sp, {1, 0}).epsilon, 2.0 * (1.0 + std::log(10.0)), 1e-12);
  EXPECT_NEAR(complexity(sp, {1, 0}).epsilon, 6.605170, 1e-6);

  const auto bi = ModelFamily::biclustering(5, 7);
  const auto cb = complexity(bi, {2, 3});
  EXPECT_NEAR(cb.epsilon, 6 + 5 * std::log(2.0) + 7 * std::log(3.0), 1e-12);
  EXPECT_EQ(cb.ell, 6);
  const auto gr = ModelFamily::group_sparsity(make_design("identity", 8, 8, 0), 3);
  EXPECT_NEAR(complexity(gr, {2, 0}).epsilon, 2 * (3 + std::log(std::exp(1.0) * 8 / 2)), 1e-12);
  EXPECT_EQ(complexity(gr, {2, 0}).ell, 6);
  const auto mt = ModelFamily::multi_task(make_design("identity", 3, 3, 0), 4);
  EXPECT_NEAR(complexity(mt, {2, 0}).epsilon, 3 * 2 + 4 * std::log(2.0), 1e-12);
  EXPECT_EQ(complexity(mt, {2, 0}).ell, 6);
  const auto dict = ModelFamily::dictionary(2, 3);
  EXPECT_NEAR(complexity(dict, {2, 1}).epsilon, 3 * (2 * 2 + 3 * 1 * std::log(std::exp(1.0) * 2)), 1e-12);
  EXPECT_EQ(complexity(dict, {2, 1}).ell, 4);
  const auto sob = ModelFamily::sobolev_sequence(5);
  EXPECT_DOUBLE_EQ(complexity(sob, {3, 0}).epsilon, 6.0);
  const auto bes = ModelFamily::besov_level(3, 50);
  EXPECT_NEAR(complexity(bes, {2, 0}).epsilon, 4 * std::log(std::exp(1.0) * 8 / 2), 1e-12);
}

TEST(Complexity, AggregationFullRankUsesLinearPenalty) {
  const auto agg = ModelFamily::aggregation_regression(make_design("gaussian", 10, 4, 9));
  ASSERT_EQ(agg.design_rank(), 4);
  EXPECT_DOUBLE_EQ(complexity(agg, {4, 0}).epsilon, 8.0);
  EXPECT_NEAR(complexity(agg, {2, 0}).epsilon, 4 * std::log(std::exp(1.0) * 4 / 2), 1e-12);
  EXPECT_DOUBLE_EQ(complexity(agg, {4, 0}).log_count, 0.0);
}

TEST(Complexity, UnknownIndexIsDomainError) {
  EXPECT_THROW(complexity(ModelFamily::sbm(4), {5, 0}), DomainError);
  EXPECT_THROW(complexity(ModelFamily::sbm(4), {0, 0}), DomainError);
}

TEST(LogStructureCount, Examples) {
  const auto sp = ModelFamily::sparse_regression(make_design("identity", 10, 10, 0));
  EXPECT_DOUBLE_EQ(log_structure_count(sp, {0, 0}), 0.0);
  EXPECT_NEAR(log_structure_count(sp, {2, 0}), std::log(45.0), 1e-12);
  EXPECT_NEAR(log_structure_count(ModelFamily::sbm(3), {2, 0}), 3 * std::log(2.0), 1e-12);
  EXPECT_NEAR(log_structure_count(ModelFamily::sbm(3), {2, 0}), 2.079442, 1e-6);
}

TEST(LogStructureCount, AgreesWithExactCountEverywhere) {
  for (const auto& f : desk_families())
    for (const auto& tau : f.index_set()) {
      const double exact = log_big(structure_count(f, tau));
      EXPECT_NEAR(log_structure_count(f, tau), exact, 1e-10 * std::max(1.0, exact))
          << to_string(f.kind()) << " " << to_string(tau);
    }
}

TEST(LogStructureCount, DictionaryClosedForm) {
  const auto dict = ModelFamily::dictionary(2, 3);
  // per column: sum_{t <= s} C(a, t) 2^t
  EXPECT_NEAR(log_structure_count(dict, {2, 1}), 3 * std::log(1.0 + 2 * 2), 1e-12);
  EXPECT_NEAR(log_structure_count(dict, {2, 2}), 3 * std::log(1.0 + 4 + 4), 1e-12);
}

TEST(CheckLarger, PassesOnEveryFamily) {
  for (const auto& f : desk_families()) EXPECT_TRUE(check_larger(f).passed) << to_string(f.kind());
}

TEST(CheckLarger, HalvedComplexityFailsStrictlyInsideTheRange) {
  // at s = 1 half of 2 ln(ep) equals 1 + ln p exactly, and at s = p half of 2p
  // still covers ell = p with a single structure
  const auto sp = ModelFamily::sparse_regression(make_design("gaussian", 20, 10, 5));
  const auto report = check_larger(sp, [&](const ModelIndex& tau) { return 0.5 * complexity(sp, tau).epsilon; });
  EXPECT_FALSE(report.passed);
  ASSERT_EQ(report.violations.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(report.violations[i].tau.first, int(i) + 2);
}

TEST(CheckCapacity, Examples) {
  EXPECT_TRUE(check_capacity(ModelFamily::sobolev_sequence(50), 100).passed);
  EXPECT_TRUE(check_capacity(ModelFamily::sbm(10), 200).passed);
  EXPECT_TRUE(check_capacity(ModelFamily::biclustering(6, 6), 200).passed);
  for (const auto& f : desk_families()) EXPECT_TRUE(check_capacity(f, 200).passed) << to_string(f.kind());
}

TEST(CheckCapacity, SobolevBinsHoldOneIndexEach) {
  const auto report = check_capacity(ModelFamily::sobolev_sequence(10), 30);
  int total = 0;
  for (const auto& [t, c] : report.bin_counts) {
    EXPECT_LE(c, 1);
    total += c;
  }
  EXPECT_EQ(total, 10);
}

TEST(CheckGrowth, LemmaBoundsHoldForEveryFamily) {
  for (const auto& f : desk_families()) {
    const auto r = check_growth(f, 2.0, 20);
    EXPECT_TRUE(r.passed) << to_string(f.kind()) << ": " << (r.failures.empty() ? "" : r.failures.front());
  }
}

TEST(IndexSet, FiniteWithPositiveDimension) {
  for (const auto& f : desk_families()) {
    EXPECT_FALSE(f.index_set().empty());
    for (const auto& tau : f.index_set()) {
      EXPECT_GE(complexity(f, tau).ell, 1);
      EXPECT_TRUE(std::isfinite(complexity(f, tau).log_count));
    }
  }
}

TEST(IndexSet, SparseTruncatedAtObservationCount) {
  const auto sp = ModelFamily::sparse_regression(make_design("gaussian", 4, 10, 1));
  EXPECT_EQ(sp.index_set().back().first, 4);
  const auto dict = ModelFamily::dictionary(2, 5);
  for (const auto& tau : dict.index_set()) EXPECT_LE(tau.first, 2);
}

TEST(FamilyJson, RoundTrip) {
  const nlohmann::json j = {{"family", "sparse_regression"}, {"design", {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}}};
  const auto f = ModelFamily::from_json(j);
  EXPECT_EQ(f.kind(), FamilyKind::sparse_regression);
  EXPECT_EQ(f.n(), 3);
  EXPECT_EQ(f.p(), 2);
  EXPECT_DOUBLE_EQ(f.design()(2, 1), 1.0);
  const auto g = ModelFamily::from_json(f.to_json());
  EXPECT_EQ(g.design(), f.design());
  EXPECT_EQ(g.index_set(), f.index_set());
  const auto h = ModelFamily::from_json(
      {{"family", "sparse_regression"}, {"design", {{"generate", "orthogonal"}, {"rows", 8}, {"cols", 4}, {"seed", 1}}}});
  EXPECT_TRUE(h.gram().isApprox(8.0 * Eigen::MatrixXd::Identity(4, 4), 1e-12));
}

TEST(FamilyJson, MalformedDescriptorIsConfigError) {
  EXPECT_THROW(ModelFamily::from_json({{"family", "nonsense"}}), ConfigError);
  EXPECT_THROW(ModelFamily::from_json({{"family", "sbm"}}), ConfigError);
}

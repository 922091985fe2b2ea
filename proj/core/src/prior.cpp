#include "slm/prior.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "slm/error.hpp"
#include "slm/instances.hpp"
#include "slm/numeric.hpp"

namespace slm {

void PriorConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
  if (!(D > 0.0) || !std::isfinite(D)) throw ConfigError("D must be positive");
}

double log_correction(int ell) {
  if (ell < 1) throw DomainError("ell must be >= 1");
  return log_gamma(ell) - log_gamma(0.5 * ell);
}

IndexPmf model_index_log_pmf(const ModelFamily& f, const PriorConfig& config) {
  config.validate();
  IndexPmf pmf;
  for (const auto& tau : f.index_set()) {
    if (!has_valid_structures(f, tau)) continue;
    const ComplexityValue cv = complexity(f, tau);
    double w = log_correction(cv.ell) - config.D * cv.epsilon;
    // per-structure prior: the index carries the mass of all its structures
    if (f.per_structure_prior()) w += cv.log_count;
    pmf.tau.push_back(tau);
    pmf.log_prob.push_back(w);
  }
  if (pmf.tau.empty()) throw NoValidModels("no model index has an identifiable structure");
  const double norm = log_sum_exp(pmf.log_prob);
  for (double& w : pmf.log_prob) w -= norm;
  return pmf;
}

Eigen::VectorXd sample_elliptical_laplace(const DesignOperator& design, double lambda, Rng& rng) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const int ell = design.dim();
  Eigen::VectorXd u(ell);
  double norm = 0.0;
  do {
    for (int i = 0; i < ell; ++i) u(i) = rng.normal();
    norm = u.norm();
  } while (norm == 0.0);
  const double radius = rng.gamma(ell, lambda);
  return design.unwhiten(u * (radius / norm));
}

double elliptical_laplace_log_density(const DesignOperator& design, double lambda, const Eigen::VectorXd& q) {
  if (q.size() != design.dim()) throw DomainError("parameter dimension does not match the design");
  const int ell = design.dim();
  return 0.5 * design.log_det_gram() + ell * std::log(lambda / std::sqrt(M_PI)) + log_gamma(0.5 * ell) -
         log_gamma(ell) - std::log(2.0) - lambda * design.apply(q).norm();
}

namespace {

// Uniform labeling of len items onto all k labels, each label used at least min_use (1 or 2) times.
// With T(i,j) the number of such labelings of i items: the last item's label either already
// appears often enough among the others, T(i,j) = j T(i-1,j) + ..., or (min_use = 1) appears
// nowhere else, j T(i-1,j-1), or (min_use = 2) exactly once more, j (i-1) T(i-2,j-1).
std::vector<int> sample_labeling(int len, int k, int min_use, Rng& rng) {
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> lt(len + 1, std::vector<double>(k + 1, ninf));
  lt[0][0] = 0.0;
  for (int i = 1; i <= len; ++i)
    for (int j = 1; j <= k; ++j) {
      const double keep = std::log(double(j)) + lt[i - 1][j];
      double fresh = ninf;
      if (min_use == 1) fresh = std::log(double(j)) + lt[i - 1][j - 1];
      else if (i >= 2) fresh = std::log(double(j)) + std::log(double(i - 1)) + lt[i - 2][j - 1];
      const double terms[2] = {keep, fresh};
      lt[i][j] = log_sum_exp(terms);
    }
  if (lt[len][k] == ninf) throw NoValidModels("no labeling of " + std::to_string(len) + " items onto " +
                                             std::to_string(k) + " labels");
  std::vector<int> out(len, -1), items(len), labels(k);
  for (int i = 0; i < len; ++i) items[i] = i;
  for (int j = 0; j < k; ++j) labels[j] = j;
  int i = len, j = k;
  while (i > 0) {
    const int item = items.back();
    items.pop_back();
    const double p_keep = std::exp(std::log(double(j)) + lt[i - 1][j] - lt[i][j]);
    if (rng.uniform() < p_keep) {
      out[item] = labels[rng.index(j)];
      --i;
      continue;
    }
    // this label is retired: assign it and drop it from the pool
    const std::size_t c = rng.index(j);
    out[item] = labels[c];
    std::swap(labels[c], labels[j - 1]);
    if (min_use == 2) {
      const std::size_t partner = rng.index(items.size());
      out[items[partner]] = labels[j - 1];
      std::swap(items[partner], items.back());
      items.pop_back();
      --i;
    }
    --i;
    --j;
  }
  return out;
}

}  // namespace

Structure sample_valid_structure(const ModelFamily& f, const ModelIndex& tau, Rng& rng) {
  if (!f.contains(tau)) throw DomainError("model index " + to_string(tau) + " is not in the index set");
  Structure z;
  z.tau = tau;
  z.membership = Membership::member;
  switch (f.kind()) {
    case FamilyKind::sbm: z.payload = Labels{sample_labeling(f.n(), tau.first, 2, rng)}; return z;
    case FamilyKind::multi_task: z.payload = Labels{sample_labeling(f.m(), tau.first, 1, rng)}; return z;
    case FamilyKind::biclustering: {
      std::vector<int> rows = sample_labeling(f.n(), tau.first, 1, rng);
      z.payload = LabelPair{std::move(rows), sample_labeling(f.m(), tau.second, 1, rng)};
      return z;
    }
    default: break;
  }
  const BigInt count = structure_count(f, tau);
  const bool small = count <= 1'000'000;
  const long attempts = small ? 1000 : 10'000'000L;
  for (long i = 0; i < attempts; ++i) {
    Structure z = sample_uniform_structure(f, tau, rng);
    if (is_member(f, z)) {
      z.membership = Membership::member;
      return z;
    }
  }
  if (small) {
    std::vector<Structure> members;
    for (auto& z : enumerate_structures(f, tau, 1'000'000))
      if (z.membership == Membership::member) members.push_back(std::move(z));
    if (!members.empty()) return members[rng.index(members.size())];
  }
  throw NoValidModels("no identifiable structure found for tau = " + to_string(tau));
}

PriorDraw sample_prior(const ModelFamily& f, const PriorConfig& config, Rng& rng) {
  const IndexPmf pmf = model_index_log_pmf(f, config);
  double u = rng.uniform();
  std::size_t pick = pmf.tau.size() - 1;
  for (std::size_t i = 0; i < pmf.tau.size(); ++i) {
    const double pr = std::exp(pmf.log_prob[i]);
    if (u < pr) {
      pick = i;
      break;
    }
    u -= pr;
  }
  PriorDraw draw;
  draw.structure = sample_valid_structure(f, pmf.tau[pick], rng);
  const DesignOperator design = build_design(f, draw.structure);
  draw.q = sample_elliptical_laplace(design, config.lambda, rng);
  draw.signal = design.apply(draw.q);
  return draw;
}

nlohmann::json to_json(const PriorDraw& draw) {
  nlohmann::json j = structure_to_json(draw.structure);
  j["q"] = std::vector<double>(draw.q.data(), draw.q.data() + draw.q.size());
  j["signal"] = std::vector<double>(draw.signal.data(), draw.signal.data() + draw.signal.size());
  return j;
}

}  // namespace slm

#include <algorithm>
#include <cmath>

#include "slm/error.hpp"
#include "slm/experiments.hpp"
#include "slm/instances.hpp"

namespace slm {

std::vector<WeightedDraw> draws_from_chain(const ChainResult& chain) {
  std::vector<WeightedDraw> out;
  out.reserve(chain.draws.size());
  for (const auto& d : chain.draws) {
    if (d.q.size() == 0) throw DomainError("chain draws carry no Q; rerun with q_steps > 0");
    out.push_back({d.structure, d.q, 1.0});
  }
  return out;
}

std::vector<WeightedDraw> draws_from_table(const ModelFamily& f, const PosteriorTable& table, const Eigen::VectorXd& y,
                                           double lambda, int per_entry, Rng& rng, double min_weight) {
  if (per_entry < 1) throw DomainError("per_entry must be >= 1");
  std::vector<WeightedDraw> out;
  for (const auto& e : table.entries) {
    const double w = std::exp(e.log_weight);
    if (w <= min_weight) continue;
    const DesignOperator op = build_design(f, e.structure);
    for (int i = 0; i < per_entry; ++i)
      out.push_back({e.structure, sample_q_conditional(op, y, lambda, rng, 1), w / per_entry});
  }
  return out;
}

double weighted_quantile(std::vector<std::pair<double, double>> vw, double p) {
  if (vw.empty()) throw DomainError("weighted_quantile of an empty set");
  std::sort(vw.begin(), vw.end());
  double total = 0.0;
  for (const auto& [v, w] : vw) total += w;
  double acc = 0.0;
  for (const auto& [v, w] : vw) {
    acc += w;
    if (acc >= p * total * (1.0 - 1e-12)) return v;
  }
  return vw.back().first;
}

nlohmann::json LossReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"prediction_sq_mean", prediction_sq_mean},
          {"prediction_sq_median", prediction_sq_median},
          {"prediction_sq_q95", prediction_sq_q95},
          {"l2_sq_mean", opt(l2_sq_mean)},
          {"l1_sq_mean", opt(l1_sq_mean)},
          {"linf_mean", opt(linf_mean)},
          {"linf_median", opt(linf_median)},
          {"linf_q95", opt(linf_q95)},
          {"complexity_exceed", complexity_exceed},
          {"support_recovery", opt(support_recovery)}};
}

namespace {

bool same_support(const Structure& a, const Structure& b) {
  if (const auto* s = std::get_if<Support>(&a.payload)) {
    const auto* t = std::get_if<Support>(&b.payload);
    return t && s->idx == t->idx;
  }
  if (const auto* s = std::get_if<CellSet>(&a.payload)) {
    const auto* t = std::get_if<CellSet>(&b.payload);
    return t && s->cells == t->cells;
  }
  return false;
}

bool has_support(const Structure& z) {
  return std::holds_alternative<Support>(z.payload) || std::holds_alternative<CellSet>(z.payload);
}

}  // namespace

LossReport compute_losses(const ModelFamily& f, const std::vector<WeightedDraw>& draws, const TruthRecord& truth,
                          double delta) {
  if (draws.empty()) throw DomainError("compute_losses needs at least one draw");
  double total = 0.0;
  for (const auto& d : draws) {
    if (!(d.weight >= 0.0)) throw DomainError("draw weights must be nonnegative");
    total += d.weight;
  }
  if (!(total > 0.0)) throw DomainError("draw weights sum to zero");

  const double threshold = (1.0 + delta) * truth.epsilon_star;
  const bool coef = truth.coefficients.has_value();
  const bool support = truth.structure && has_support(*truth.structure);
  LossReport r;
  std::vector<std::pair<double, double>> pred, linf;
  double l2 = 0.0, l1 = 0.0, li = 0.0, rec = 0.0;
  for (const auto& d : draws) {
    const double w = d.weight / total;
    const double loss = (signal(f, d.structure, d.q) - truth.theta).squaredNorm();
    pred.emplace_back(loss, w);
    r.prediction_sq_mean += w * loss;
    if (complexity(f, d.structure.tau).epsilon > threshold) r.complexity_exceed += w;
    if (coef) {
      const auto b = coefficients(f, d.structure, d.q);
      if (b) {
        const Eigen::VectorXd diff = *b - *truth.coefficients;
        l2 += w * diff.squaredNorm();
        const double a1 = diff.lpNorm<1>();
        l1 += w * a1 * a1;
        const double ai = diff.lpNorm<Eigen::Infinity>();
        li += w * ai;
        linf.emplace_back(ai, w);
      }
    }
    if (support && same_support(d.structure, *truth.structure)) rec += w;
  }
  r.prediction_sq_median = weighted_quantile(pred, 0.5);
  r.prediction_sq_q95 = weighted_quantile(pred, 0.95);
  if (!linf.empty()) {
    r.l2_sq_mean = l2;
    r.l1_sq_mean = l1;
    r.linf_mean = li;
    r.linf_median = weighted_quantile(linf, 0.5);
    r.linf_q95 = weighted_quantile(linf, 0.95);
    r.linf_samples = std::move(linf);
  }
  if (support) r.support_recovery = rec;
  r.complexity_exceed = std::clamp(r.complexity_exceed, 0.0, 1.0);
  return r;
}

}  // namespace slm

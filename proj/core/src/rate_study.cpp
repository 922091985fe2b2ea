#include <algorithm>
#include <cmath>

#include "slm/error.hpp"
#include "slm/experiments.hpp"
#include "slm/instances.hpp"
#include "slm/io.hpp"
#include "slm/parallel.hpp"

namespace slm {

Estimator estimator_from_string(std::string_view s) {
  if (s == "exact") return Estimator::exact;
  if (s == "mcmc") return Estimator::mcmc;
  if (s == "auto") return Estimator::automatic;
  throw ConfigError("unknown estimator: " + std::string(s));
}

ReplicateResult run_replicate(const ModelFamily& f, const Scenario& sc, const EstimatorConfig& est,
                              std::uint64_t grid_index, std::uint64_t replicate) {
  ReplicateResult res;
  Rng truth_rng = Rng::substream(sc.seed, {grid_index, replicate, 0});
  res.truth = generate_truth(f, sc, truth_rng);
  Rng noise_rng = Rng::substream(sc.seed, {grid_index, replicate, 1});
  const Eigen::VectorXd y = generate_noise(sc.noise, res.truth.theta, noise_rng);

  bool exact = est.estimator == Estimator::exact;
  if (est.estimator == Estimator::automatic) {
    BigInt total = 0;
    for (const auto& tau : f.index_set()) total += structure_count(f, tau);
    exact = total <= est.cap;
  }
  std::vector<WeightedDraw> draws;
  if (exact) {
    const PosteriorTable table = exact_posterior_table(f, y, est.prior, est.cap);
    Rng q_rng = Rng::substream(sc.seed, {grid_index, replicate, 2});
    draws = draws_from_table(f, table, y, est.prior.lambda, est.table_q_draws, q_rng);
  } else {
    ChainConfig cc = est.chain;
    cc.prior = est.prior;
    cc.seed = mix_seed(sc.seed, {grid_index, replicate, 2});
    if (cc.q_steps == 0) cc.q_steps = 1;
    const ChainResult chain = run_chain(f, y, cc);
    res.used_mcmc = true;
    res.acceptance_rate = chain.diagnostics.acceptance_rate();
    draws = draws_from_chain(chain);
  }
  res.loss = compute_losses(f, draws, res.truth, est.delta);
  return res;
}

std::optional<std::pair<double, double>> log_log_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("log_log_fit: size mismatch");
  const std::size_t k = x.size();
  if (k < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx <= 0.0) return std::nullopt;
  const double slope = sxy / sxx;
  return std::make_pair(slope, my - slope * mx);
}

RateReport run_rate_study(const std::vector<Scenario>& grid, const EstimatorConfig& est, int jobs) {
  if (grid.empty()) throw ConfigError("rate study grid is empty");
  est.prior.validate();
  std::vector<ModelFamily> families;
  std::vector<std::pair<std::size_t, int>> work;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    grid[g].validate();
    families.push_back(ModelFamily::from_json(grid[g].family));
    for (int r = 0; r < grid[g].replicates; ++r) work.emplace_back(g, r);
  }
  std::vector<ReplicateResult> results(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    const auto [g, r] = work[i];
    results[i] = run_replicate(families[g], grid[g], est, g, static_cast<std::uint64_t>(r));
  });

  RateReport report;
  std::size_t next = 0;
  std::vector<double> xs, ys;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    RatePoint pt;
    pt.id = grid[g].id;
    std::vector<double> losses;
    for (int r = 0; r < grid[g].replicates; ++r, ++next) {
      losses.push_back(results[next].loss.prediction_sq_mean);
      pt.replicates.push_back(std::move(results[next]));
    }
    pt.epsilon_star = pt.replicates.front().truth.epsilon_star;
    std::sort(losses.begin(), losses.end());
    const std::size_t h = losses.size() / 2;
    pt.median_prediction = losses.size() % 2 ? losses[h] : 0.5 * (losses[h - 1] + losses[h]);
    pt.ratio = pt.median_prediction / pt.epsilon_star;
    xs.push_back(pt.epsilon_star);
    ys.push_back(pt.median_prediction);
    report.points.push_back(std::move(pt));
  }
  if (const auto fit = log_log_fit(xs, ys)) {
    report.slope = fit->first;
    report.intercept = fit->second;
  }
  return report;
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void write_replicates_csv(std::ostream& os, const RateReport& report) {
  write_csv_row(os, {"scenario_id", "replicate", "epsilon_star", "prediction_sq_mean", "prediction_sq_median",
                     "prediction_sq_q95", "l2_sq_mean", "l1_sq_mean", "linf_median", "linf_q95",
                     "complexity_exceed", "support_recovery", "estimator", "acceptance_rate"});
  for (const auto& pt : report.points)
    for (std::size_t r = 0; r < pt.replicates.size(); ++r) {
      const auto& rep = pt.replicates[r];
      const auto& l = rep.loss;
      write_csv_row(os, {pt.id, std::to_string(r), format_double(rep.truth.epsilon_star),
                         format_double(l.prediction_sq_mean), format_double(l.prediction_sq_median),
                         format_double(l.prediction_sq_q95), opt_field(l.l2_sq_mean), opt_field(l.l1_sq_mean),
                         opt_field(l.linf_median), opt_field(l.linf_q95), format_double(l.complexity_exceed),
                         opt_field(l.support_recovery), rep.used_mcmc ? "mcmc" : "exact",
                         format_double(rep.acceptance_rate)});
    }
}

void write_summary_csv(std::ostream& os, const RateReport& report) {
  write_csv_row(os, {"scenario_id", "epsilon_star", "median_prediction_loss", "ratio", "slope", "intercept"});
  for (const auto& pt : report.points)
    write_csv_row(os, {pt.id, format_double(pt.epsilon_star), format_double(pt.median_prediction),
                       format_double(pt.ratio), opt_field(report.slope), opt_field(report.intercept)});
}

nlohmann::json plot_data(const RateReport& report) {
  nlohmann::json x = nlohmann::json::array(), y = nlohmann::json::array(), ratio = nlohmann::json::array();
  for (const auto& pt : report.points) {
    x.push_back(pt.epsilon_star);
    y.push_back(pt.median_prediction);
    ratio.push_back(pt.ratio);
  }
  nlohmann::json j;
  j["series"] = nlohmann::json::array({{{"name", "median_prediction_loss"}, {"x", x}, {"y", y}},
                                       {{"name", "loss_over_epsilon"}, {"x", x}, {"y", ratio}}});
  j["slope"] = report.slope ? nlohmann::json(*report.slope) : nlohmann::json(nullptr);
  j["intercept"] = report.intercept ? nlohmann::json(*report.intercept) : nlohmann::json(nullptr);
  return j;
}

}  // namespace slm

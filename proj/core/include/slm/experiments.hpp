#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "slm/family.hpp"
#include "slm/marginal.hpp"
#include "slm/prior.hpp"
#include "slm/random.hpp"
#include "slm/sampler.hpp"
#include "slm/structure.hpp"

namespace slm {

enum class TruthKind { well_specified, graphon, weak_lq, approx_constant };
enum class NoiseKind { gaussian, rademacher, bernoulli_graph };

std::string_view to_string(TruthKind kind);
std::string_view to_string(NoiseKind kind);

/// One data-generating setting. `family` is the descriptor accepted by
/// ModelFamily::from_json; `tau_star` is the target index (well-specified
/// truths) or the oracle index used for exceedance (other truths).
struct Scenario {
  std::string id;
  nlohmann::json family;
  TruthKind truth = TruthKind::well_specified;
  NoiseKind noise = NoiseKind::gaussian;
  ModelIndex tau_star{1, 0};
  /// Signal strength: |theta* - c|^2 = snr^2 eps(tau*) (c = 1/2 for Bernoulli graphs, else 0).
  double snr = 1.0;
  double alpha = 1.0;      // graphon smoothness
  double graphon_scale = 1.0;
  double lq_q = 1.0;       // weak l_q exponent
  double lq_k = 1.0;       // weak l_q radius
  /// Cells per covered row for two-level truths (0: all m cells).
  int cells_per_row = 0;
  int replicates = 1;
  std::uint64_t seed = 0;

  /// Throws ConfigError on inconsistent combinations.
  void validate() const;
  static Scenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct TruthRecord {
  Eigen::VectorXd theta;
  ModelIndex tau_star;
  double epsilon_star = 0.0;
  std::optional<Structure> structure;
  Eigen::VectorXd q;
  std::optional<Eigen::VectorXd> coefficients;
  Eigen::VectorXd xi;  // graphon latent positions
};

/// Hölder graphon representative: L ((x-1/2)^2 + (y-1/2)^2)^{alpha/2} for alpha <= 1,
/// a smooth bump for alpha > 1; clipped to [0, 1].
double graphon_value(double x, double y, double alpha, double scale);

TruthRecord generate_truth(const ModelFamily& family, const Scenario& scenario, Rng& rng);
/// Y = theta + W. Bernoulli graphs return the symmetric adjacency itself
/// (theta is over ordered pairs of an n-node graph and must lie in [0, 1]).
Eigen::VectorXd generate_noise(NoiseKind kind, const Eigen::VectorXd& theta, Rng& rng);

/// A posterior sample with an (unnormalized) weight.
struct WeightedDraw {
  Structure structure;
  Eigen::VectorXd q;
  double weight = 1.0;
};

std::vector<WeightedDraw> draws_from_chain(const ChainResult& chain);
/// Entries with probability above min_weight, each with `per_entry` conditional Q draws.
std::vector<WeightedDraw> draws_from_table(const ModelFamily& family, const PosteriorTable& table,
                                           const Eigen::VectorXd& y, double lambda, int per_entry, Rng& rng,
                                           double min_weight = 1e-10);

struct LossReport {
  double prediction_sq_mean = 0.0;
  double prediction_sq_median = 0.0;
  double prediction_sq_q95 = 0.0;
  std::optional<double> l2_sq_mean;
  std::optional<double> l1_sq_mean;
  std::optional<double> linf_mean;
  std::optional<double> linf_median;
  std::optional<double> linf_q95;
  /// Posterior probability that eps(Z_tau) > (1 + delta) eps(Z_tau*).
  double complexity_exceed = 0.0;
  std::optional<double> support_recovery;
  /// (|beta - beta*|_inf, normalized weight) per draw, for pooling across replicates.
  std::vector<std::pair<double, double>> linf_samples;

  nlohmann::json to_json() const;
};

/// Weighted quantile: smallest value whose cumulative weight reaches p.
double weighted_quantile(std::vector<std::pair<double, double>> value_weight, double p);

LossReport compute_losses(const ModelFamily& family, const std::vector<WeightedDraw>& draws,
                          const TruthRecord& truth, double delta = 0.5);

struct RestrictedConstants {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  int support_size = 0;
};

/// Exact minimum over all supports of size floor((2 + delta) s*) (capped at p).
/// Throws CapExceeded when the number of supports exceeds cap.
RestrictedConstants restricted_constants(const Eigen::MatrixXd& x, int s_star, double delta,
                                         std::size_t cap = 1'000'000);

enum class Estimator { exact, mcmc, automatic };
Estimator estimator_from_string(std::string_view s);

struct EstimatorConfig {
  Estimator estimator = Estimator::automatic;
  PriorConfig prior;
  ChainConfig chain;
  std::size_t cap = 200'000;
  int table_q_draws = 20;
  double delta = 0.5;
};

struct ReplicateResult {
  TruthRecord truth;
  LossReport loss;
  bool used_mcmc = false;
  double acceptance_rate = 1.0;
};

/// One replicate with substreams (seed, grid_index, replicate, 0/1/2) for truth, noise and estimator.
ReplicateResult run_replicate(const ModelFamily& family, const Scenario& scenario, const EstimatorConfig& est,
                              std::uint64_t grid_index, std::uint64_t replicate);

struct RatePoint {
  std::string id;
  double epsilon_star = 0.0;
  double median_prediction = 0.0;
  double ratio = 0.0;  // median loss / eps*
  std::vector<ReplicateResult> replicates;
};

struct RateReport {
  std::vector<RatePoint> points;
  std::optional<double> slope;
  std::optional<double> intercept;
};

/// Least-squares slope and intercept of log(median loss) on log eps*; nullopt for fewer than two distinct x.
std::optional<std::pair<double, double>> log_log_fit(const std::vector<double>& x, const std::vector<double>& y);

RateReport run_rate_study(const std::vector<Scenario>& grid, const EstimatorConfig& est, int jobs = 1);

void write_replicates_csv(std::ostream& os, const RateReport& report);
void write_summary_csv(std::ostream& os, const RateReport& report);
/// {"series": [{"name", "x", "y"}], "slope", "intercept"}
nlohmann::json plot_data(const RateReport& report);

struct CheckResult {
  std::string name;
  std::string family;
  bool passed = true;
  std::string detail;
};

struct TheoryReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  nlohmann::json to_json() const;
};

struct TheoryOptions {
  double beta = 2.0;
  int alpha_max = 20;
  int capacity_t_max = 200;
  int pythagorean_trials = 100;
  double pythagorean_tol = 1e-10;
  std::uint64_t seed = 0;
};

/// Growth-sum, capacity and larger-condition checks per family, plus
/// Pythagorean residuals on random designs.
TheoryReport theory_checks(const std::vector<ModelFamily>& families, const TheoryOptions& options = {});

/// |Y - XQ|^2 - |Y - PY|^2 - |PY - XQ|^2, relative to |Y|^2 + |XQ|^2.
double pythagorean_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& q);

}  // namespace slm

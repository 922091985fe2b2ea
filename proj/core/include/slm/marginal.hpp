#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "slm/design.hpp"
#include "slm/family.hpp"
#include "slm/prior.hpp"
#include "slm/random.hpp"
#include "slm/structure.hpp"

namespace slm {

/// ln of the integral over R^d of exp(-|t - y|^2 / 2 - lambda |t|) with |y| = m.
double log_radial_integral(int d, double m, double lambda);

struct ProjectionStats {
  int ell = 0;
  double projected_sq = 0.0;  // |P_Z y|^2
  double residual_sq = 0.0;   // |(I - P_Z) y|^2
};

ProjectionStats projection_stats(const DesignOperator& design, const Eigen::VectorXd& y);

/// ell ln(lambda / sqrt(pi)) - residual / 2 + ln N(ell, |P y|, lambda).
double log_marginal(const ProjectionStats& stats, double lambda);
double log_marginal(const DesignOperator& design, const Eigen::VectorXd& y, double lambda);

/// Data-dependent sufficient statistics giving projection stats per structure
/// without materializing X_Z (block sums, sub-Gram solves, ...).
class MarginalContext {
 public:
  MarginalContext(const ModelFamily& family, Eigen::VectorXd y);

  const ModelFamily& family() const { return *family_; }
  const Eigen::VectorXd& y() const { return y_; }
  /// nullopt when the structure is not identifiable.
  std::optional<ProjectionStats> stats(const Structure& z) const;

 private:
  std::optional<ProjectionStats> support_stats(const std::vector<int>& s, int tasks) const;

  const ModelFamily* family_;
  Eigen::VectorXd y_;
  double total_sq_ = 0.0;
  Eigen::MatrixXd data_;   // y reshaped (sbm adjacency, biclustering matrix, ...)
  Eigen::MatrixXd cross_;  // X^T Y for design families
};

/// -D eps(tau) - ln|Z-bar_tau|, or -D eps(tau) for per-structure priors.
double log_prior_weight(const ModelFamily& family, const ModelIndex& tau, const PriorConfig& config,
                        double log_valid_count);

struct PosteriorEntry {
  Structure structure;
  double log_weight = 0.0;    // normalized
  double log_marginal = 0.0;
  double projected_norm = 0.0;
  double epsilon = 0.0;
};

struct PosteriorTable {
  std::vector<PosteriorEntry> entries;
  double log_normalizer = 0.0;
  std::map<ModelIndex, double> log_valid_count;
};

/// Enumerates every (tau, Z) with Z in Z-bar_tau. Throws CapExceeded when the
/// total number of structures exceeds cap, NoValidModels when none is valid.
PosteriorTable exact_posterior_table(const ModelFamily& family, const Eigen::VectorXd& y,
                                     const PriorConfig& config, std::size_t cap, int jobs = 1);

/// Posterior probability of each model index.
std::map<ModelIndex, double> index_posterior(const PosteriorTable& table);

/// Independence Metropolis chain for Q | Z, Y with proposal N(beta_hat, (X^T X)^{-1}).
/// Runs max(100, steps / 10) burn-in iterations and then `steps` more; returns the final state.
Eigen::VectorXd sample_q_conditional(const DesignOperator& design, const Eigen::VectorXd& y, double lambda,
                                     Rng& rng, int steps);

/// RFC-4180 CSV: tau, structure_json, log_weight, log_marginal, projected_norm.
void write_table_csv(std::ostream& os, const PosteriorTable& table);

}  // namespace slm

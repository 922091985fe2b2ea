#pragma once

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "slm/design.hpp"
#include "slm/family.hpp"
#include "slm/random.hpp"
#include "slm/structure.hpp"

namespace slm {

struct PriorConfig {
  double lambda = 1.0;
  double D = 2.0;
  /// Throws ConfigError unless lambda > 0 and D > 0.
  void validate() const;
};

/// ln Gamma(ell) - ln Gamma(ell / 2).
double log_correction(int ell);

struct IndexPmf {
  std::vector<ModelIndex> tau;
  std::vector<double> log_prob;
};

/// Step-one distribution over model indices with empty Z-bar excluded.
/// Throws NoValidModels when nothing remains.
IndexPmf model_index_log_pmf(const ModelFamily& family, const PriorConfig& config);

/// Radius ~ Gamma(ell, rate lambda), uniform direction, Gram whitening.
Eigen::VectorXd sample_elliptical_laplace(const DesignOperator& design, double lambda, Rng& rng);

double elliptical_laplace_log_density(const DesignOperator& design, double lambda, const Eigen::VectorXd& q);

/// Uniform draw from Z-bar_tau (rejection from Z_tau, enumeration fallback).
Structure sample_valid_structure(const ModelFamily& family, const ModelIndex& tau, Rng& rng);

struct PriorDraw {
  Structure structure;
  Eigen::VectorXd q;
  Eigen::VectorXd signal;
};

PriorDraw sample_prior(const ModelFamily& family, const PriorConfig& config, Rng& rng);

/// {tau, structure, q: [...], signal: [...]}
nlohmann::json to_json(const PriorDraw& draw);

}  // namespace slm

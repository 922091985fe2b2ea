#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "slm/numeric.hpp"

namespace slm {

enum class FamilyKind {
  sbm,
  biclustering,
  sparse_regression,
  group_sparsity,
  group_two_level,
  multi_task,
  dictionary,
  sobolev_sequence,
  besov_level,
  aggregation_regression,
};

std::string_view to_string(FamilyKind kind);
FamilyKind family_kind_from_string(std::string_view name);

/// Model index tau. Families with a scalar index leave `second` at zero.
struct ModelIndex {
  int first = 0;
  int second = 0;
  friend auto operator<=>(const ModelIndex&, const ModelIndex&) = default;
};

std::string to_string(const ModelIndex& tau);
nlohmann::json to_json(const ModelIndex& tau);

struct ComplexityValue {
  ModelIndex tau;
  double epsilon = 0.0;
  int ell = 0;
  double log_count = 0.0;
};

/// Immutable description of a structured linear model family.
///
/// Size parameters by family:
///   sbm                    n nodes, k_max
///   biclustering           n rows, m columns, k_max, l_max
///   sparse_regression      design N x p, s_max
///   group_sparsity         design n x p, m tasks, s_max
///   group_two_level        p rows, m columns (identity design), r_max
///   multi_task             design n x p, m tasks, k_max
///   dictionary             n x d data, p_max atoms
///   sobolev_sequence       n coefficients
///   besov_level            level j (2^j coefficients), sample size n
///   aggregation_regression design n x p
class ModelFamily {
 public:
  static ModelFamily sbm(int n, int k_max = 0);
  static ModelFamily biclustering(int n, int m, int k_max = 0, int l_max = 0);
  static ModelFamily sparse_regression(Eigen::MatrixXd design, int s_max = 0);
  static ModelFamily group_sparsity(Eigen::MatrixXd design, int tasks, int s_max = 0);
  static ModelFamily group_two_level(int p, int m, int r_max = 0);
  static ModelFamily multi_task(Eigen::MatrixXd design, int tasks, int k_max = 0);
  static ModelFamily dictionary(int n, int d, int p_max = 0);
  static ModelFamily sobolev_sequence(int n);
  static ModelFamily besov_level(int level, int n);
  static ModelFamily aggregation_regression(Eigen::MatrixXd design);

  /// Parses {"family": name, ...sizes, "design": [[...]] | {"generate": ...}}.
  static ModelFamily from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  FamilyKind kind() const { return kind_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int p() const { return p_; }
  int d() const { return d_; }
  int level() const { return level_; }
  int k_max() const { return cap1_; }
  int l_max() const { return cap2_; }
  int s_max() const { return cap1_; }
  int p_max() const { return cap1_; }
  int r_max() const { return cap1_; }

  /// Number of observations N.
  int observation_dim() const;

  bool has_design() const { return design_.size() > 0; }
  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  int design_rank() const { return rank_; }
  /// Aggregation: the first rank(X) linearly independent columns.
  const std::vector<int>& spanning_columns() const { return spanning_; }

  /// Multiplier of the identity design in sequence families (sqrt(n)); 1 elsewhere.
  double scale() const;

  /// The prior is placed on individual structures (two-level group sparsity)
  /// rather than uniformly within each index.
  bool per_structure_prior() const { return kind_ == FamilyKind::group_two_level; }

  const std::vector<ModelIndex>& index_set() const { return index_set_; }
  bool contains(const ModelIndex& tau) const;

 private:
  ModelFamily() = default;
  void finish();

  FamilyKind kind_ = FamilyKind::sbm;
  int n_ = 0, m_ = 0, p_ = 0, d_ = 0, level_ = 0, cap1_ = 0, cap2_ = 0;
  Eigen::MatrixXd design_;
  Eigen::MatrixXd gram_;
  int rank_ = 0;
  std::vector<int> spanning_;
  std::vector<ModelIndex> index_set_;
};

/// Throws DomainError when tau is not in the index set.
ComplexityValue complexity(const ModelFamily& family, const ModelIndex& tau);
double log_structure_count(const ModelFamily& family, const ModelIndex& tau);
BigInt structure_count(const ModelFamily& family, const ModelIndex& tau);

/// Fixed designs for configs and scenarios: "gaussian" (iid N(0,1)),
/// "orthogonal" (X^T X = rows * I) or "identity".
Eigen::MatrixXd make_design(std::string_view kind, int rows, int cols, std::uint64_t seed);
/// A nested array of rows, or {"generate", "rows", "cols", "seed"} passed to make_design.
Eigen::MatrixXd design_from_json(const nlohmann::json& j);

using ComplexityFn = std::function<double(const ModelIndex&)>;

struct LargerViolation {
  ModelIndex tau;
  double epsilon = 0.0;
  double bound = 0.0;  // ell + log_count
};

struct LargerReport {
  bool passed = true;
  std::vector<LargerViolation> violations;
};

/// Checks epsilon >= ell + log|Z_tau| over the index set. `override_epsilon`
/// replaces the family's complexity function when given.
LargerReport check_larger(const ModelFamily& family, const ComplexityFn& override_epsilon = {});

struct CapacityReport {
  bool passed = true;
  std::vector<std::pair<int, int>> bin_counts;   // (t, count)
  std::vector<std::pair<int, int>> violations;   // bins with count > t
};

CapacityReport check_capacity(const ModelFamily& family, int t_max);

struct GrowthReport {
  bool passed = true;
  std::vector<std::string> failures;
};

/// Growth-sum bounds for the family's epsilon sequence at beta, alpha = 1..alpha_max:
///   sum_{eps <= a} e^{beta eps}  <= 4 ceil(a) e^{beta ceil(a)}
///   sum_{eps >  a} e^{-beta eps} <= 4 a e^{-beta floor(a)}
///   sum_{eps <= a} e^{-beta eps} <= 6
GrowthReport check_growth(const ModelFamily& family, double beta, int alpha_max);

}  // namespace slm

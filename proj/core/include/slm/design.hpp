#pragma once

#include <Eigen/Dense>

namespace slm {

/// Relative pivot threshold for the rank test on Gram matrices.
inline constexpr double kPivotTolerance = 1e-10;

/// Cholesky-based rank test: succeeds when every squared pivot exceeds
/// kPivotTolerance times the largest diagonal entry. On success stores the
/// upper factor R with R^T R = gram.
bool gram_factor(const Eigen::MatrixXd& gram, Eigen::MatrixXd* upper = nullptr);

/// Realized linear map X_Z with cached factorization. Throws
/// CollinearStructure when X_Z^T X_Z fails the rank test.
class DesignOperator {
 public:
  explicit DesignOperator(Eigen::MatrixXd matrix);

  int rows() const { return static_cast<int>(matrix_.rows()); }
  int dim() const { return static_cast<int>(matrix_.cols()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  /// Upper triangular R with R^T R = X^T X.
  const Eigen::MatrixXd& gram_factor() const { return factor_; }
  double log_det_gram() const { return log_det_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& q) const { return matrix_ * q; }
  /// Coordinates of P y in the orthonormal basis X R^{-1}.
  Eigen::VectorXd whiten(const Eigen::VectorXd& y) const;
  /// R^{-1} t, the parameter whose image has whitened coordinates t.
  Eigen::VectorXd unwhiten(const Eigen::VectorXd& t) const;
  Eigen::VectorXd least_squares(const Eigen::VectorXd& y) const;
  Eigen::VectorXd project(const Eigen::VectorXd& y) const;
  double residual_sq(const Eigen::VectorXd& y) const;

 private:
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd factor_;
  double log_det_ = 0.0;
};

}  // namespace slm

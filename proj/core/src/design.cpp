#include "slm/design.hpp"

#include <cmath>

#include "slm/error.hpp"

namespace slm {

bool gram_factor(const Eigen::MatrixXd& gram, Eigen::MatrixXd* upper) {
  const Eigen::Index k = gram.rows();
  if (k == 0) return false;
  const double max_diag = gram.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::MatrixXd l = llt.matrixL();
  for (Eigen::Index i = 0; i < k; ++i) {
    const double pivot = l(i, i) * l(i, i);
    if (!(pivot > kPivotTolerance * max_diag)) return false;
  }
  if (upper) *upper = l.transpose();
  return true;
}

DesignOperator::DesignOperator(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  const Eigen::MatrixXd gram = matrix_.transpose() * matrix_;
  if (!::slm::gram_factor(gram, &factor_)) throw CollinearStructure("design has a singular Gram matrix");
  log_det_ = 2.0 * factor_.diagonal().array().log().sum();
}

Eigen::VectorXd DesignOperator::whiten(const Eigen::VectorXd& y) const {
  Eigen::VectorXd b = matrix_.transpose() * y;
  factor_.transpose().triangularView<Eigen::Lower>().solveInPlace(b);
  return b;
}

Eigen::VectorXd DesignOperator::unwhiten(const Eigen::VectorXd& t) const {
  return factor_.triangularView<Eigen::Upper>().solve(t);
}

Eigen::VectorXd DesignOperator::least_squares(const Eigen::VectorXd& y) const {
  return unwhiten(whiten(y));
}

Eigen::VectorXd DesignOperator::project(const Eigen::VectorXd& y) const {
  return matrix_ * least_squares(y);
}

double DesignOperator::residual_sq(const Eigen::VectorXd& y) const {
  return (y - project(y)).squaredNorm();
}

}  // namespace slm

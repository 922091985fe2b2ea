#include <algorithm>
#include <cmath>
#include <limits>

#include "slm/design.hpp"
#include "slm/error.hpp"
#include "slm/experiments.hpp"

namespace slm {

RestrictedConstants restricted_constants(const Eigen::MatrixXd& x, int s_star, double delta, std::size_t cap) {
  if (s_star < 1) throw DomainError("s_star must be >= 1");
  if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
  const int n = static_cast<int>(x.rows()), p = static_cast<int>(x.cols());
  const int t = std::min(p, static_cast<int>(std::floor((2.0 + delta) * s_star)));
  const BigInt supports = big_binomial(p, t);
  if (supports > cap) {
    const std::string c = supports.str();
    throw CapExceeded(c + " supports of size " + std::to_string(t) + " exceed the cap " + std::to_string(cap), c);
  }
  const Eigen::MatrixXd gram = x.transpose() * x;
  RestrictedConstants rc;
  rc.support_size = t;
  double min_eig = std::numeric_limits<double>::infinity();
  double max_quad = 0.0;  // max over supports and signs of sigma^T G_T^{-1} sigma
  bool singular = false;

  std::vector<int> c(t);
  for (int i = 0; i < t; ++i) c[i] = i;
  Eigen::MatrixXd g(t, t);
  Eigen::VectorXd sigma(t);
  for (;;) {
    for (int a = 0; a < t; ++a)
      for (int b = 0; b < t; ++b) g(a, b) = gram(c[a], c[b]);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues()[0]);
    Eigen::MatrixXd r;
    if (!gram_factor(g, &r)) {
      singular = true;
    } else if (!singular) {
      // first sign fixed to +1: sigma and -sigma give the same value
      for (long mask = 0; mask < (1L << (t - 1)); ++mask) {
        sigma[0] = 1.0;
        for (int a = 1; a < t; ++a) sigma[a] = (mask >> (a - 1)) & 1 ? -1.0 : 1.0;
        const double quad = r.transpose().triangularView<Eigen::Lower>().solve(sigma).squaredNorm();
        max_quad = std::max(max_quad, quad);
      }
    }
    int pos = t - 1;
    while (pos >= 0 && c[pos] == p - t + pos) --pos;
    if (pos < 0) break;
    ++c[pos];
    for (int i = pos + 1; i < t; ++i) c[i] = c[i - 1] + 1;
  }
  rc.kappa2 = std::sqrt(std::max(0.0, min_eig) / n);
  if (singular) {
    rc.kappa2 = 0.0;
    rc.kappa1 = 0.0;
  } else {
    rc.kappa1 = std::sqrt(s_star / (n * max_quad));
  }
  return rc;
}

}  // namespace slm

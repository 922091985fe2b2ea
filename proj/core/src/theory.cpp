#include <cmath>
#include <sstream>

#include "slm/design.hpp"
#include "slm/experiments.hpp"

namespace slm {

bool TheoryReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

nlohmann::json TheoryReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"family", c.family}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"passed", passed()}, {"checks", arr}};
}

double pythagorean_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& q) {
  const DesignOperator op(x);
  const Eigen::VectorXd py = op.project(y);
  const Eigen::VectorXd xq = x * q;
  const double lhs = (y - xq).squaredNorm();
  const double rhs = (y - py).squaredNorm() + (py - xq).squaredNorm();
  return std::abs(lhs - rhs) / (y.squaredNorm() + xq.squaredNorm());
}

TheoryReport theory_checks(const std::vector<ModelFamily>& families, const TheoryOptions& opt) {
  TheoryReport report;
  for (const auto& f : families) {
    const std::string name(to_string(f.kind()));

    const GrowthReport g = check_growth(f, opt.beta, opt.alpha_max);
    CheckResult growth{"growth", name, g.passed, ""};
    if (!g.passed) growth.detail = g.failures.front();
    report.checks.push_back(growth);

    const CapacityReport c = check_capacity(f, opt.capacity_t_max);
    CheckResult cap{"capacity", name, c.passed, ""};
    if (!c.passed) {
      std::ostringstream os;
      os << "bin t=" << c.violations.front().first << " holds " << c.violations.front().second << " indices";
      cap.detail = os.str();
    }
    report.checks.push_back(cap);

    const LargerReport l = check_larger(f);
    CheckResult larger{"larger", name, l.passed, ""};
    if (!l.passed) {
      std::ostringstream os;
      const auto& v = l.violations.front();
      os << "tau=" << to_string(v.tau) << " eps=" << v.epsilon << " < " << v.bound;
      larger.detail = os.str();
    }
    report.checks.push_back(larger);
  }

  Rng rng = Rng::substream(opt.seed, {7});
  double worst = 0.0;
  for (int trial = 0; trial < opt.pythagorean_trials; ++trial) {
    const int n = 5 + static_cast<int>(rng.index(30));
    const int k = 1 + static_cast<int>(rng.index(std::min(n, 10)));
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd y(n), q(k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) x(i, j) = rng.normal();
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    for (int j = 0; j < k; ++j) q[j] = rng.normal();
    worst = std::max(worst, pythagorean_residual(x, y, q));
  }
  std::ostringstream os;
  os << "max relative residual " << worst << " over " << opt.pythagorean_trials << " triples";
  report.checks.push_back({"pythagorean", "random_design", worst < opt.pythagorean_tol, os.str()});
  return report;
}

}  // namespace slm

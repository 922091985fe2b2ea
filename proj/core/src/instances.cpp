#include "slm/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "slm/error.hpp"

namespace slm {

int sbm_pair_index(int n, int i, int j) { return i * (n - 1) + (j < i ? j : j - 1); }

namespace {

std::vector<int> random_subset(int p, int s, Rng& rng) {
  std::vector<int> pool(p);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < s; ++i) {
    const int j = i + static_cast<int>(rng.index(p - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(s);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

Eigen::MatrixXd design_matrix(const ModelFamily& f, const Structure& z) {
  const int big_n = f.observation_dim();
  switch (f.kind()) {
    case FamilyKind::sbm: {
      const auto& lab = std::get<Labels>(z.payload).z;
      const int k = z.tau.first, n = f.n();
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big_n, k * k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) x(sbm_pair_index(n, i, j), lab[i] + k * lab[j]) = 1.0;
      return x;
    }
    case FamilyKind::biclustering: {
      const auto& lab = std::get<LabelPair>(z.payload);
      const int k = z.tau.first, l = z.tau.second, n = f.n();
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big_n, k * l);
      for (int j = 0; j < f.m(); ++j)
        for (int i = 0; i < n; ++i) x(i + n * j, lab.rows[i] + k * lab.cols[j]) = 1.0;
      return x;
    }
    case FamilyKind::sparse_regression:
    case FamilyKind::aggregation_regression: {
      const auto& s = std::get<Support>(z.payload).idx;
      Eigen::MatrixXd x(big_n, static_cast<Eigen::Index>(s.size()));
      for (std::size_t a = 0; a < s.size(); ++a) x.col(a) = f.design().col(s[a]);
      return x;
    }
    case FamilyKind::group_sparsity: {
      const auto& s = std::get<Support>(z.payload).idx;
      const int n = f.n(), m = f.m(), ss = static_cast<int>(s.size());
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big_n, ss * m);
      for (int t = 0; t < m; ++t)
        for (int a = 0; a < ss; ++a) x.block(n * t, a + ss * t, n, 1) = f.design().col(s[a]);
      return x;
    }
    case FamilyKind::multi_task: {
      const auto& lab = std::get<Labels>(z.payload).z;
      const int n = f.n(), p = f.p(), k = z.tau.first;
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big_n, p * k);
      for (int j = 0; j < f.m(); ++j) x.block(n * j, p * lab[j], n, p) = f.design();
      return x;
    }
    case FamilyKind::dictionary: {
      const auto& s = std::get<SignMatrix>(z.payload);
      const int n = f.n(), a_count = s.rows;
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big_n, n * a_count);
      for (int j = 0; j < f.d(); ++j)
        for (int a = 0; a < a_count; ++a) {
          const int v = s.at(a, j);
          if (v == 0) continue;
          for (int i = 0; i < n; ++i) x(i + n * j, i + n * a) = v;
        }
      return x;
    }
    case FamilyKind::group_two_level: {
      const auto& cells = std::get<CellSet>(z.payload).cells;
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big_n, static_cast<Eigen::Index>(cells.size()));
      for (std::size_t a = 0; a < cells.size(); ++a) {
        const int row = cells[a] / f.m(), col = cells[a] % f.m();
        x(row + f.p() * col, a) = 1.0;
      }
      return x;
    }
    case FamilyKind::sobolev_sequence: {
      const int k = std::get<Prefix>(z.payload).k;
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big_n, k);
      for (int j = 0; j < k; ++j) x(j, j) = f.scale();
      return x;
    }
    case FamilyKind::besov_level: {
      const auto& s = std::get<Support>(z.payload).idx;
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big_n, static_cast<Eigen::Index>(s.size()));
      for (std::size_t a = 0; a < s.size(); ++a) x(s[a], a) = f.scale();
      return x;
    }
  }
  return {};
}

bool is_member(const ModelFamily& f, const Structure& z) {
  const Eigen::MatrixXd x = design_matrix(f, z);
  return gram_factor(x.transpose() * x);
}

DesignOperator build_design(const ModelFamily& f, const Structure& z) {
  try {
    return DesignOperator(design_matrix(f, z));
  } catch (const CollinearStructure&) {
    throw CollinearStructure("structure " + structure_key(z) + " is not identifiable (singular X_Z^T X_Z)");
  }
}

std::optional<double> log_valid_count_closed_form(const ModelFamily& f, const ModelIndex& tau) {
  const int a = tau.first, b = tau.second;
  switch (f.kind()) {
    case FamilyKind::sbm:
      return log_big(big_factorial(a) * associated_stirling2(f.n(), a));
    case FamilyKind::biclustering:
      return log_big(big_factorial(a) * stirling2(f.n(), a) * big_factorial(b) * stirling2(f.m(), b));
    case FamilyKind::multi_task: return log_big(big_factorial(a) * stirling2(f.m(), a));
    case FamilyKind::sobolev_sequence:
    case FamilyKind::besov_level:
    case FamilyKind::group_two_level: return log_structure_count(f, tau);
    case FamilyKind::aggregation_regression:
      if (a == f.design_rank()) return 0.0;
      return std::nullopt;
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::dictionary: return std::nullopt;
  }
  return std::nullopt;
}

bool has_valid_structures(const ModelFamily& f, const ModelIndex& tau) {
  if (!f.contains(tau)) return false;
  switch (f.kind()) {
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::aggregation_regression: return tau.first <= f.design_rank();
    case FamilyKind::dictionary: return tau.first <= f.d();  // unit-vector columns give full row rank
    default: {
      const auto c = log_valid_count_closed_form(f, tau);
      return c && std::isfinite(*c);
    }
  }
}

Structure sample_uniform_structure(const ModelFamily& f, const ModelIndex& tau, Rng& rng) {
  if (!f.contains(tau)) throw DomainError("model index " + to_string(tau) + " is not in the index set");
  Structure z;
  z.tau = tau;
  auto labels = [&rng](int len, int k) {
    std::vector<int> v(len);
    for (int& x : v) x = static_cast<int>(rng.index(k));
    return v;
  };
  switch (f.kind()) {
    case FamilyKind::sbm: z.payload = Labels{labels(f.n(), tau.first)}; break;
    case FamilyKind::multi_task: z.payload = Labels{labels(f.m(), tau.first)}; break;
    case FamilyKind::biclustering:
      z.payload = LabelPair{labels(f.n(), tau.first), labels(f.m(), tau.second)};
      break;
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::besov_level: z.payload = Support{random_subset(f.p(), tau.first, rng)}; break;
    case FamilyKind::aggregation_regression:
      if (tau.first == f.design_rank())
        z.payload = Support{f.spanning_columns()};
      else
        z.payload = Support{random_subset(f.p(), tau.first, rng)};
      break;
    case FamilyKind::dictionary: {
      const int a = tau.first, s = tau.second;
      std::vector<double> weights;
      for (int t = 0; t <= s; ++t) weights.push_back(std::exp(log_binomial(a, t) + t * std::log(2.0)));
      const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      SignMatrix m{a, f.d(), std::vector<std::int8_t>(static_cast<std::size_t>(a) * f.d(), 0)};
      for (int j = 0; j < f.d(); ++j) {
        double u = rng.uniform() * total;
        int t = 0;
        while (t < s && u >= weights[t]) u -= weights[t++];
        for (int row : random_subset(a, t, rng))
          m.v[static_cast<std::size_t>(row) * f.d() + j] = rng.bernoulli(0.5) ? 1 : -1;
      }
      z.payload = std::move(m);
      break;
    }
    case FamilyKind::group_two_level: {
      const int r = tau.first, t = tau.second, m = f.m();
      for (long attempt = 0; attempt < 10'000'000L; ++attempt) {
        const std::vector<int> rows = random_subset(f.p(), r, rng);
        std::vector<int> picks = random_subset(r * m, t, rng);
        std::vector<int> cells;
        std::set<int> covered;
        for (int c : picks) {
          const int row = rows[c / m];
          covered.insert(row);
          cells.push_back(row * m + c % m);
        }
        if (static_cast<int>(covered.size()) != r) continue;
        std::sort(cells.begin(), cells.end());
        z.payload = CellSet{std::move(cells)};
        return z;
      }
      throw Error("uniform cell-set draw exceeded the rejection cap");
    }
    case FamilyKind::sobolev_sequence: z.payload = Prefix{tau.first}; break;
  }
  return z;
}

double effective_sparsity_root(double q, double k, int p, int n) {
  if (p < 1 || n < 1 || k < 0) throw DomainError("effective_sparsity needs p, n >= 1 and k >= 0");
  auto rhs = [&](double x) {
    if (q == 0.0) return k;
    if (x <= 0.0) return 0.0;
    return k * std::pow(n / std::log(std::exp(1.0) * p / x), q / 2.0);
  };
  auto g = [&](double x) { return x - rhs(x); };
  if (k == 0.0) return 0.0;
  if (g(p) <= 0.0) return p;
  double lo = 0.0, hi = p;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

int effective_sparsity(double q, double k, int p, int n) {
  const double root = effective_sparsity_root(q, k, p, n);
  auto rhs = [&](double x) {
    if (q == 0.0) return k;
    if (x <= 0.0) return 0.0;
    return k * std::pow(n / std::log(std::exp(1.0) * p / x), q / 2.0);
  };
  // resolve the ceiling at integers exactly instead of trusting the bisection tolerance
  const int j = static_cast<int>(std::floor(root + 1e-6));
  int best = 0;
  for (int c = std::max(0, j - 1); c <= std::min(p, j + 1); ++c)
    if (c - rhs(c) <= 0.0) best = std::max(best, c);
  // x* sits on an integer only when the root itself does; x = 0 always satisfies
  // the inequality when q > 0, so g(best) == 0 alone is not enough
  if (best == p || root <= best + 1e-9) return best;
  return best + 1;
}

double aggregation_rate(AggregationClass cls, int n, int p, int r, int s_star) {
  if (n < 1 || p < 1) throw DomainError("aggregation_rate needs n, p >= 1");
  const double nn = n, pp = p;
  const double c_rate = std::sqrt(std::log(1.0 + pp / std::sqrt(nn)) / nn);
  const double ls_rate = s_star >= 1 ? s_star * std::log(std::exp(1.0) * pp / s_star) / nn : 0.0;
  switch (cls) {
    case AggregationClass::MS: return std::log(pp) / nn;
    case AggregationClass::C: return c_rate;
    case AggregationClass::L: return static_cast<double>(r) / nn;
    case AggregationClass::Ls: return ls_rate;
    case AggregationClass::Cs: return std::min(c_rate, ls_rate);
  }
  return 0.0;
}

Eigen::VectorXd signal(const ModelFamily& f, const Structure& z, const Eigen::VectorXd& q) {
  return design_matrix(f, z) * q;
}

std::optional<Eigen::VectorXd> coefficients(const ModelFamily& f, const Structure& z,
                                            const Eigen::VectorXd& q) {
  switch (f.kind()) {
    case FamilyKind::sparse_regression:
    case FamilyKind::aggregation_regression:
    case FamilyKind::besov_level: {
      const auto& s = std::get<Support>(z.payload).idx;
      Eigen::VectorXd b = Eigen::VectorXd::Zero(f.p());
      for (std::size_t a = 0; a < s.size(); ++a) b(s[a]) = q(a);
      return b;
    }
    case FamilyKind::group_sparsity: {
      const auto& s = std::get<Support>(z.payload).idx;
      const int ss = static_cast<int>(s.size());
      Eigen::VectorXd b = Eigen::VectorXd::Zero(f.p() * f.m());
      for (int t = 0; t < f.m(); ++t)
        for (int a = 0; a < ss; ++a) b(s[a] + f.p() * t) = q(a + ss * t);
      return b;
    }
    case FamilyKind::group_two_level: {
      const auto& cells = std::get<CellSet>(z.payload).cells;
      Eigen::VectorXd b = Eigen::VectorXd::Zero(f.p() * f.m());
      for (std::size_t a = 0; a < cells.size(); ++a)
        b(cells[a] / f.m() + f.p() * (cells[a] % f.m())) = q(a);
      return b;
    }
    case FamilyKind::multi_task: {
      const auto& lab = std::get<Labels>(z.payload).z;
      Eigen::VectorXd b(f.p() * f.m());
      for (int j = 0; j < f.m(); ++j) b.segment(f.p() * j, f.p()) = q.segment(f.p() * lab[j], f.p());
      return b;
    }
    case FamilyKind::sobolev_sequence: {
      Eigen::VectorXd b = Eigen::VectorXd::Zero(f.n());
      b.head(q.size()) = q;
      return b;
    }
    default: return std::nullopt;
  }
}

}  // namespace slm

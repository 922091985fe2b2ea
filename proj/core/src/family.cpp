#include "slm/family.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slm/design.hpp"
#include "slm/error.hpp"
#include "slm/random.hpp"

namespace slm {

namespace {

struct KindName {
  FamilyKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {FamilyKind::sbm, "sbm"},
    {FamilyKind::biclustering, "biclustering"},
    {FamilyKind::sparse_regression, "sparse_regression"},
    {FamilyKind::group_sparsity, "group_sparsity"},
    {FamilyKind::group_two_level, "group_two_level"},
    {FamilyKind::multi_task, "multi_task"},
    {FamilyKind::dictionary, "dictionary"},
    {FamilyKind::sobolev_sequence, "sobolev_sequence"},
    {FamilyKind::besov_level, "besov_level"},
    {FamilyKind::aggregation_regression, "aggregation_regression"},
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

int cap_or(int cap, int limit) { return cap <= 0 ? limit : std::min(cap, limit); }

// Dictionary column count: sum_{t <= s} C(p, t) 2^t.
BigInt column_patterns(int p, int s) {
  BigInt total = 0;
  for (int t = 0; t <= s; ++t) total += big_binomial(p, t) * big_pow(2, t);
  return total;
}

}  // namespace

Eigen::MatrixXd design_from_json(const nlohmann::json& j) {
  try {
    if (j.is_object()) {
      const std::string kind = j.at("generate").get<std::string>();
      return make_design(kind, j.at("rows").get<int>(), j.at("cols").get<int>(),
                         j.value("seed", std::uint64_t{0}));
    }
    require(j.is_array() && !j.empty() && j[0].is_array(), "design must be a nested array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      require(j[i].size() == static_cast<std::size_t>(cols), "design rows have unequal lengths");
      for (Eigen::Index c = 0; c < cols; ++c) x(i, c) = j[i][c].get<double>();
    }
    return x;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("design: ") + e.what());
  }
}

std::string_view to_string(FamilyKind kind) {
  for (const auto& kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "unknown";
}

FamilyKind family_kind_from_string(std::string_view name) {
  for (const auto& kn : kKindNames)
    if (kn.name == name) return kn.kind;
  throw ConfigError("unknown family '" + std::string(name) + "'");
}

std::string to_string(const ModelIndex& tau) {
  std::ostringstream os;
  os << tau.first;
  if (tau.second != 0) os << ',' << tau.second;
  return os.str();
}

nlohmann::json to_json(const ModelIndex& tau) {
  if (tau.second == 0) return tau.first;
  return nlohmann::json::array({tau.first, tau.second});
}

Eigen::MatrixXd make_design(std::string_view kind, int rows, int cols, std::uint64_t seed) {
  require(rows >= 1 && cols >= 1, "design dimensions must be positive");
  if (kind == "identity") {
    require(rows == cols, "identity design must be square");
    return Eigen::MatrixXd::Identity(rows, cols);
  }
  Rng rng(seed);
  Eigen::MatrixXd g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int i = 0; i < rows; ++i) g(i, c) = rng.normal();
  if (kind == "gaussian") return g;
  if (kind == "orthogonal") {
    require(rows >= cols, "orthogonal design needs rows >= cols");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    return q * std::sqrt(static_cast<double>(rows));
  }
  throw ConfigError("unknown design generator '" + std::string(kind) + "'");
}

ModelFamily ModelFamily::sbm(int n, int k_max) {
  require(n >= 2, "sbm needs n >= 2");
  ModelFamily f;
  f.kind_ = FamilyKind::sbm;
  f.n_ = n;
  f.cap1_ = cap_or(k_max, n);
  f.finish();
  return f;
}

ModelFamily ModelFamily::biclustering(int n, int m, int k_max, int l_max) {
  require(n >= 1 && m >= 1, "biclustering needs n, m >= 1");
  ModelFamily f;
  f.kind_ = FamilyKind::biclustering;
  f.n_ = n;
  f.m_ = m;
  f.cap1_ = cap_or(k_max, n);
  f.cap2_ = cap_or(l_max, m);
  f.finish();
  return f;
}

ModelFamily ModelFamily::sparse_regression(Eigen::MatrixXd design, int s_max) {
  require(design.rows() >= 1 && design.cols() >= 1, "sparse_regression needs a design");
  ModelFamily f;
  f.kind_ = FamilyKind::sparse_regression;
  f.n_ = static_cast<int>(design.rows());
  f.p_ = static_cast<int>(design.cols());
  f.cap1_ = cap_or(s_max, std::min(f.p_, f.n_));
  f.design_ = std::move(design);
  f.finish();
  return f;
}

ModelFamily ModelFamily::group_sparsity(Eigen::MatrixXd design, int tasks, int s_max) {
  require(design.rows() >= 1 && design.cols() >= 1 && tasks >= 1, "group_sparsity needs a design and m >= 1");
  ModelFamily f;
  f.kind_ = FamilyKind::group_sparsity;
  f.n_ = static_cast<int>(design.rows());
  f.p_ = static_cast<int>(design.cols());
  f.m_ = tasks;
  f.cap1_ = cap_or(s_max, std::min(f.p_, f.n_));
  f.design_ = std::move(design);
  f.finish();
  return f;
}

ModelFamily ModelFamily::group_two_level(int p, int m, int r_max) {
  require(p >= 1 && m >= 1, "group_two_level needs p, m >= 1");
  ModelFamily f;
  f.kind_ = FamilyKind::group_two_level;
  f.p_ = p;
  f.m_ = m;
  f.cap1_ = cap_or(r_max, p);
  f.finish();
  return f;
}

ModelFamily ModelFamily::multi_task(Eigen::MatrixXd design, int tasks, int k_max) {
  require(design.rows() >= 1 && design.cols() >= 1 && tasks >= 1, "multi_task needs a design and m >= 1");
  ModelFamily f;
  f.kind_ = FamilyKind::multi_task;
  f.n_ = static_cast<int>(design.rows());
  f.p_ = static_cast<int>(design.cols());
  f.m_ = tasks;
  f.cap1_ = cap_or(k_max, tasks);
  f.design_ = std::move(design);
  f.finish();
  require(f.rank_ == f.p_, "multi_task design must have full column rank");
  return f;
}

ModelFamily ModelFamily::dictionary(int n, int d, int p_max) {
  require(n >= 1 && d >= 1, "dictionary needs n, d >= 1");
  ModelFamily f;
  f.kind_ = FamilyKind::dictionary;
  f.n_ = n;
  f.d_ = d;
  f.cap1_ = cap_or(p_max, std::min(n, d));
  f.finish();
  return f;
}

ModelFamily ModelFamily::sobolev_sequence(int n) {
  require(n >= 1, "sobolev_sequence needs n >= 1");
  ModelFamily f;
  f.kind_ = FamilyKind::sobolev_sequence;
  f.n_ = n;
  f.finish();
  return f;
}

ModelFamily ModelFamily::besov_level(int level, int n) {
  require(level >= 0 && level <= 20 && n >= 1, "besov_level needs 0 <= j <= 20 and n >= 1");
  ModelFamily f;
  f.kind_ = FamilyKind::besov_level;
  f.level_ = level;
  f.n_ = n;
  f.p_ = 1 << level;
  f.finish();
  return f;
}

ModelFamily ModelFamily::aggregation_regression(Eigen::MatrixXd design) {
  require(design.rows() >= 1 && design.cols() >= 1, "aggregation_regression needs a design");
  ModelFamily f;
  f.kind_ = FamilyKind::aggregation_regression;
  f.n_ = static_cast<int>(design.rows());
  f.p_ = static_cast<int>(design.cols());
  f.design_ = std::move(design);
  f.finish();
  require(f.rank_ >= 1, "aggregation design has rank 0");
  return f;
}

void ModelFamily::finish() {
  if (has_design()) {
    gram_ = design_.transpose() * design_;
    // greedy left-to-right selection of linearly independent columns
    spanning_.clear();
    for (int c = 0; c < p_; ++c) {
      std::vector<int> trial = spanning_;
      trial.push_back(c);
      Eigen::MatrixXd sub(trial.size(), trial.size());
      for (std::size_t a = 0; a < trial.size(); ++a)
        for (std::size_t b = 0; b < trial.size(); ++b) sub(a, b) = gram_(trial[a], trial[b]);
      if (gram_factor(sub)) spanning_ = std::move(trial);
    }
    rank_ = static_cast<int>(spanning_.size());
  }

  index_set_.clear();
  switch (kind_) {
    case FamilyKind::sbm:
    case FamilyKind::multi_task:
      for (int k = 1; k <= cap1_; ++k) index_set_.push_back({k, 0});
      break;
    case FamilyKind::biclustering:
      for (int k = 1; k <= cap1_; ++k)
        for (int l = 1; l <= cap2_; ++l) index_set_.push_back({k, l});
      break;
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
      for (int s = 1; s <= cap1_; ++s) index_set_.push_back({s, 0});
      break;
    case FamilyKind::group_two_level:
      for (int r = 1; r <= cap1_; ++r)
        for (int t = r; t <= r * m_; ++t) index_set_.push_back({r, t});
      break;
    case FamilyKind::dictionary:
      for (int a = 1; a <= cap1_; ++a)
        for (int s = 1; s <= a; ++s) index_set_.push_back({a, s});
      break;
    case FamilyKind::sobolev_sequence:
      for (int k = 1; k <= n_; ++k) index_set_.push_back({k, 0});
      break;
    case FamilyKind::besov_level:
      for (int s = 1; s <= p_; ++s) index_set_.push_back({s, 0});
      break;
    case FamilyKind::aggregation_regression:
      for (int s = 1; s <= rank_; ++s) index_set_.push_back({s, 0});
      break;
  }
}

int ModelFamily::observation_dim() const {
  switch (kind_) {
    case FamilyKind::sbm: return n_ * (n_ - 1);
    case FamilyKind::biclustering: return n_ * m_;
    case FamilyKind::sparse_regression:
    case FamilyKind::aggregation_regression: return n_;
    case FamilyKind::group_sparsity:
    case FamilyKind::multi_task: return n_ * m_;
    case FamilyKind::group_two_level: return p_ * m_;
    case FamilyKind::dictionary: return n_ * d_;
    case FamilyKind::sobolev_sequence: return n_;
    case FamilyKind::besov_level: return p_;
  }
  return 0;
}

double ModelFamily::scale() const {
  if (kind_ == FamilyKind::sobolev_sequence || kind_ == FamilyKind::besov_level)
    return std::sqrt(static_cast<double>(n_));
  return 1.0;
}

bool ModelFamily::contains(const ModelIndex& tau) const {
  return std::binary_search(index_set_.begin(), index_set_.end(), tau);
}

ModelFamily ModelFamily::from_json(const nlohmann::json& j) {
  try {
    require(j.is_object(), "family descriptor must be an object");
    const FamilyKind kind = family_kind_from_string(j.at("family").get<std::string>());
    auto opt = [&j](const char* key) { return j.value(key, 0); };
    switch (kind) {
      case FamilyKind::sbm: return sbm(j.at("n").get<int>(), opt("k_max"));
      case FamilyKind::biclustering:
        return biclustering(j.at("n").get<int>(), j.at("m").get<int>(), opt("k_max"), opt("l_max"));
      case FamilyKind::sparse_regression:
        return sparse_regression(design_from_json(j.at("design")), opt("s_max"));
      case FamilyKind::group_sparsity:
        return group_sparsity(design_from_json(j.at("design")), j.at("m").get<int>(), opt("s_max"));
      case FamilyKind::group_two_level:
        return group_two_level(j.at("p").get<int>(), j.at("m").get<int>(), opt("r_max"));
      case FamilyKind::multi_task:
        return multi_task(design_from_json(j.at("design")), j.at("m").get<int>(), opt("k_max"));
      case FamilyKind::dictionary:
        return dictionary(j.at("n").get<int>(), j.at("d").get<int>(), opt("p_max"));
      case FamilyKind::sobolev_sequence: return sobolev_sequence(j.at("n").get<int>());
      case FamilyKind::besov_level: return besov_level(j.at("j").get<int>(), j.at("n").get<int>());
      case FamilyKind::aggregation_regression:
        return aggregation_regression(design_from_json(j.at("design")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("family descriptor: ") + e.what());
  }
  throw ConfigError("family descriptor: unreachable");
}

nlohmann::json ModelFamily::to_json() const {
  nlohmann::json j;
  j["family"] = std::string(to_string(kind_));
  switch (kind_) {
    case FamilyKind::sbm: j["n"] = n_; j["k_max"] = cap1_; break;
    case FamilyKind::biclustering: j["n"] = n_; j["m"] = m_; j["k_max"] = cap1_; j["l_max"] = cap2_; break;
    case FamilyKind::sparse_regression: j["s_max"] = cap1_; break;
    case FamilyKind::group_sparsity: j["m"] = m_; j["s_max"] = cap1_; break;
    case FamilyKind::group_two_level: j["p"] = p_; j["m"] = m_; j["r_max"] = cap1_; break;
    case FamilyKind::multi_task: j["m"] = m_; j["k_max"] = cap1_; break;
    case FamilyKind::dictionary: j["n"] = n_; j["d"] = d_; j["p_max"] = cap1_; break;
    case FamilyKind::sobolev_sequence: j["n"] = n_; break;
    case FamilyKind::besov_level: j["j"] = level_; j["n"] = n_; break;
    case FamilyKind::aggregation_regression: break;
  }
  if (has_design()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < design_.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < design_.cols(); ++c) row.push_back(design_(i, c));
      rows.push_back(std::move(row));
    }
    j["design"] = std::move(rows);
  }
  return j;
}

ComplexityValue complexity(const ModelFamily& f, const ModelIndex& tau) {
  if (!f.contains(tau)) throw DomainError("model index " + to_string(tau) + " is not in the index set");
  ComplexityValue cv;
  cv.tau = tau;
  cv.log_count = log_structure_count(f, tau);
  const double e = std::exp(1.0);
  switch (f.kind()) {
    case FamilyKind::sbm: {
      const double k = tau.first;
      cv.epsilon = k * k + f.n() * std::log(k);
      cv.ell = tau.first * tau.first;
      break;
    }
    case FamilyKind::biclustering: {
      const double k = tau.first, l = tau.second;
      cv.epsilon = k * l + f.n() * std::log(k) + f.m() * std::log(l);
      cv.ell = tau.first * tau.second;
      break;
    }
    case FamilyKind::sparse_regression: {
      const double s = tau.first;
      cv.epsilon = 2.0 * s * std::log(e * f.p() / s);
      cv.ell = tau.first;
      break;
    }
    case FamilyKind::group_sparsity: {
      const double s = tau.first;
      cv.epsilon = s * (f.m() + std::log(e * f.p() / s));
      cv.ell = f.m() * tau.first;
      break;
    }
    case FamilyKind::group_two_level: {
      const double r = tau.first, t = tau.second;
      cv.epsilon = f.m() * r + r * std::log(e * f.p() / r) + t * std::log(e * f.m() * r / t);
      cv.ell = tau.second;
      break;
    }
    case FamilyKind::multi_task: {
      const double k = tau.first;
      cv.epsilon = f.p() * k + f.m() * std::log(k);
      cv.ell = f.p() * tau.first;
      break;
    }
    case FamilyKind::dictionary: {
      const double a = tau.first, s = tau.second;
      cv.epsilon = 3.0 * (f.n() * a + f.d() * s * std::log(e * a / s));
      cv.ell = f.n() * tau.first;
      break;
    }
    case FamilyKind::sobolev_sequence:
      cv.epsilon = 2.0 * tau.first;
      cv.ell = tau.first;
      break;
    case FamilyKind::besov_level: {
      const double s = tau.first;
      cv.epsilon = 2.0 * s * std::log(e * f.p() / s);
      cv.ell = tau.first;
      break;
    }
    case FamilyKind::aggregation_regression: {
      const double s = tau.first;
      cv.epsilon = tau.first == f.design_rank() ? 2.0 * s : 2.0 * s * std::log(e * f.p() / s);
      cv.ell = tau.first;
      break;
    }
  }
  return cv;
}

double log_structure_count(const ModelFamily& f, const ModelIndex& tau) {
  const int a = tau.first, b = tau.second;
  switch (f.kind()) {
    case FamilyKind::sbm: return f.n() * std::log(static_cast<double>(a));
    case FamilyKind::biclustering:
      return f.n() * std::log(static_cast<double>(a)) + f.m() * std::log(static_cast<double>(b));
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::besov_level: return log_binomial(f.p(), a);
    case FamilyKind::aggregation_regression: return a == f.design_rank() ? 0.0 : log_binomial(f.p(), a);
    case FamilyKind::multi_task: return f.m() * std::log(static_cast<double>(a));
    case FamilyKind::dictionary: {
      std::vector<double> terms;
      for (int t = 0; t <= b; ++t) terms.push_back(log_binomial(a, t) + t * std::log(2.0));
      return f.d() * log_sum_exp(terms);
    }
    case FamilyKind::sobolev_sequence: return 0.0;
    case FamilyKind::group_two_level: return log_big(structure_count(f, tau));
  }
  return 0.0;
}

BigInt structure_count(const ModelFamily& f, const ModelIndex& tau) {
  const int a = tau.first, b = tau.second;
  switch (f.kind()) {
    case FamilyKind::sbm: return big_pow(a, f.n());
    case FamilyKind::biclustering: return big_pow(a, f.n()) * big_pow(b, f.m());
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::besov_level: return big_binomial(f.p(), a);
    case FamilyKind::aggregation_regression: return a == f.design_rank() ? BigInt(1) : big_binomial(f.p(), a);
    case FamilyKind::multi_task: return big_pow(a, f.m());
    case FamilyKind::dictionary: {
      const BigInt col = column_patterns(a, b);
      BigInt total = 1;
      for (int j = 0; j < f.d(); ++j) total *= col;
      return total;
    }
    case FamilyKind::sobolev_sequence: return 1;
    case FamilyKind::group_two_level: {
      // cell sets of size t covering exactly r chosen rows: inclusion-exclusion over empty rows
      BigInt covering = 0;
      for (int i = 0; i <= a; ++i) {
        const BigInt term = big_binomial(a, i) * big_binomial((a - i) * f.m(), b);
        if (i % 2 == 0)
          covering += term;
        else
          covering -= term;
      }
      return big_binomial(f.p(), a) * covering;
    }
  }
  return 0;
}

LargerReport check_larger(const ModelFamily& f, const ComplexityFn& override_epsilon) {
  LargerReport report;
  for (const auto& tau : f.index_set()) {
    const ComplexityValue cv = complexity(f, tau);
    const double eps = override_epsilon ? override_epsilon(tau) : cv.epsilon;
    const double bound = cv.ell + cv.log_count;
    // tolerance only absorbs rounding in the log-count
    if (eps < bound - 1e-9 * std::max(1.0, bound)) report.violations.push_back({tau, eps, bound});
  }
  report.passed = report.violations.empty();
  return report;
}

CapacityReport check_capacity(const ModelFamily& f, int t_max) {
  if (t_max < 1) throw DomainError("t_max must be >= 1");
  CapacityReport report;
  std::vector<int> counts(t_max + 1, 0);
  for (const auto& tau : f.index_set()) {
    const double eps = complexity(f, tau).epsilon;
    const double bin = std::ceil(eps);
    if (bin >= 1 && bin <= t_max) ++counts[static_cast<int>(bin)];
  }
  for (int t = 1; t <= t_max; ++t) {
    report.bin_counts.emplace_back(t, counts[t]);
    if (counts[t] > t) report.violations.emplace_back(t, counts[t]);
  }
  report.passed = report.violations.empty();
  return report;
}

GrowthReport check_growth(const ModelFamily& f, double beta, int alpha_max) {
  GrowthReport report;
  std::vector<double> eps;
  for (const auto& tau : f.index_set()) eps.push_back(complexity(f, tau).epsilon);
  std::sort(eps.begin(), eps.end());
  for (int ai = 1; ai <= alpha_max; ++ai) {
    const double alpha = ai;
    // compare in log space; the first sum can be astronomically large
    std::vector<double> up, tail, low;
    for (double e : eps) {
      if (e <= alpha) {
        up.push_back(beta * e);
        low.push_back(-beta * e);
      } else if (-beta * e > std::log(1e-16)) {
        tail.push_back(-beta * e);
      }
    }
    const double lhs1 = log_sum_exp(up);
    const double rhs1 = std::log(4.0 * std::ceil(alpha)) + beta * std::ceil(alpha);
    const double lhs2 = log_sum_exp(tail);
    const double rhs2 = std::log(4.0 * alpha) - beta * std::floor(alpha);
    const double lhs3 = log_sum_exp(low);
    const double rhs3 = std::log(6.0);
    auto note = [&](int which, double l, double r) {
      if (l > r + 1e-12) {
        std::ostringstream os;
        os << "alpha=" << ai << " bound " << which << ": log lhs " << l << " > log rhs " << r;
        report.failures.push_back(os.str());
      }
    };
    if (!up.empty()) note(1, lhs1, rhs1);
    if (!tail.empty()) note(2, lhs2, rhs2);
    if (!low.empty()) note(3, lhs3, rhs3);
  }
  report.passed = report.failures.empty();
  return report;
}

}  // namespace slm

#include "slm/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slm/error.hpp"
#include "slm/instances.hpp"
#include "slm/io.hpp"
#include "slm/numeric.hpp"
#include "slm/parallel.hpp"

namespace slm {

ProjectionStats projection_stats(const DesignOperator& design, const Eigen::VectorXd& y) {
  if (y.size() != design.rows()) throw DomainError("data length does not match the design");
  ProjectionStats s;
  s.ell = design.dim();
  s.projected_sq = design.whiten(y).squaredNorm();
  s.residual_sq = design.residual_sq(y);
  return s;
}

double log_marginal(const ProjectionStats& s, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("log_marginal: lambda must be positive");
  return s.ell * (std::log(lambda) - 0.5 * std::log(std::numbers::pi)) - 0.5 * s.residual_sq +
         log_radial_integral(s.ell, std::sqrt(s.projected_sq), lambda);
}

double log_marginal(const DesignOperator& design, const Eigen::VectorXd& y, double lambda) {
  return log_marginal(projection_stats(design, y), lambda);
}

MarginalContext::MarginalContext(const ModelFamily& family, Eigen::VectorXd y) : family_(&family), y_(std::move(y)) {
  if (y_.size() != family.observation_dim())
    throw DomainError("data has length " + std::to_string(y_.size()) + ", expected " +
                      std::to_string(family.observation_dim()));
  total_sq_ = y_.squaredNorm();
  const int n = family.n();
  switch (family.kind()) {
    case FamilyKind::sbm:
      data_ = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) data_(i, j) = y_[sbm_pair_index(n, i, j)];
      break;
    case FamilyKind::biclustering: data_ = Eigen::Map<const Eigen::MatrixXd>(y_.data(), n, family.m()); break;
    case FamilyKind::sparse_regression:
    case FamilyKind::aggregation_regression: cross_ = family.design().transpose() * y_; break;
    case FamilyKind::group_sparsity:
    case FamilyKind::multi_task:
      cross_ = family.design().transpose() * Eigen::Map<const Eigen::MatrixXd>(y_.data(), n, family.m());
      break;
    case FamilyKind::dictionary: data_ = Eigen::Map<const Eigen::MatrixXd>(y_.data(), n, family.d()); break;
    default: break;
  }
}

std::optional<ProjectionStats> MarginalContext::support_stats(const std::vector<int>& s, int tasks) const {
  const int k = static_cast<int>(s.size());
  Eigen::MatrixXd g(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) g(a, b) = family_->gram()(s[a], s[b]);
  Eigen::MatrixXd r;
  if (!gram_factor(g, &r)) return std::nullopt;
  ProjectionStats st;
  st.ell = k * tasks;
  Eigen::VectorXd b(k);
  for (int t = 0; t < tasks; ++t) {
    for (int a = 0; a < k; ++a) b[a] = cross_(s[a], t);
    st.projected_sq += r.transpose().triangularView<Eigen::Lower>().solve(b).squaredNorm();
  }
  return st;
}

std::optional<ProjectionStats> MarginalContext::stats(const Structure& z) const {
  const ModelFamily& f = *family_;
  std::optional<ProjectionStats> out;
  switch (f.kind()) {
    case FamilyKind::sbm: {
      const auto& lab = std::get<Labels>(z.payload).z;
      const int k = z.tau.first, n = f.n();
      std::vector<int> size(k, 0);
      for (int x : lab) ++size[x];
      if (std::any_of(size.begin(), size.end(), [](int c) { return c < 2; })) return std::nullopt;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sums(lab[i], lab[j]) += data_(i, j);
      ProjectionStats st;
      st.ell = k * k;
      for (int u = 0; u < k; ++u)
        for (int v = 0; v < k; ++v) {
          const double cnt = u == v ? double(size[u]) * (size[u] - 1) : double(size[u]) * size[v];
          st.projected_sq += sums(u, v) * sums(u, v) / cnt;
        }
      out = st;
      break;
    }
    case FamilyKind::biclustering: {
      const auto& lab = std::get<LabelPair>(z.payload);
      const int k = z.tau.first, l = z.tau.second;
      std::vector<int> rs(k, 0), cs(l, 0);
      for (int x : lab.rows) ++rs[x];
      for (int x : lab.cols) ++cs[x];
      if (std::count(rs.begin(), rs.end(), 0) || std::count(cs.begin(), cs.end(), 0)) return std::nullopt;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, l);
      for (int j = 0; j < f.m(); ++j)
        for (int i = 0; i < f.n(); ++i) sums(lab.rows[i], lab.cols[j]) += data_(i, j);
      ProjectionStats st;
      st.ell = k * l;
      for (int u = 0; u < k; ++u)
        for (int v = 0; v < l; ++v) st.projected_sq += sums(u, v) * sums(u, v) / (double(rs[u]) * cs[v]);
      out = st;
      break;
    }
    case FamilyKind::sparse_regression:
    case FamilyKind::aggregation_regression:
      out = support_stats(std::get<Support>(z.payload).idx, 1);
      break;
    case FamilyKind::group_sparsity: out = support_stats(std::get<Support>(z.payload).idx, f.m()); break;
    case FamilyKind::multi_task: {
      const auto& lab = std::get<Labels>(z.payload).z;
      const int k = z.tau.first, p = f.p();
      Eigen::MatrixXd r;
      if (!gram_factor(f.gram(), &r)) return std::nullopt;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(p, k);
      std::vector<int> size(k, 0);
      for (int j = 0; j < f.m(); ++j) {
        sums.col(lab[j]) += cross_.col(j);
        ++size[lab[j]];
      }
      if (std::count(size.begin(), size.end(), 0)) return std::nullopt;
      ProjectionStats st;
      st.ell = p * k;
      const Eigen::MatrixXd w = r.transpose().triangularView<Eigen::Lower>().solve(sums);
      for (int c = 0; c < k; ++c) st.projected_sq += w.col(c).squaredNorm() / size[c];
      out = st;
      break;
    }
    case FamilyKind::dictionary: {
      const auto& s = std::get<SignMatrix>(z.payload);
      Eigen::MatrixXd code(s.rows, s.cols);
      for (int a = 0; a < s.rows; ++a)
        for (int j = 0; j < s.cols; ++j) code(a, j) = s.at(a, j);
      Eigen::MatrixXd r;
      if (!gram_factor(code * code.transpose(), &r)) return std::nullopt;
      ProjectionStats st;
      st.ell = f.n() * s.rows;
      const Eigen::MatrixXd w = code * data_.transpose();  // a x n, column i is Z y_i
      st.projected_sq = r.transpose().triangularView<Eigen::Lower>().solve(w).squaredNorm();
      out = st;
      break;
    }
    case FamilyKind::group_two_level: {
      const auto& cells = std::get<CellSet>(z.payload).cells;
      ProjectionStats st;
      st.ell = static_cast<int>(cells.size());
      for (int c : cells) {
        const double v = y_[c / f.m() + f.p() * (c % f.m())];
        st.projected_sq += v * v;
      }
      out = st;
      break;
    }
    case FamilyKind::sobolev_sequence: {
      ProjectionStats st;
      st.ell = std::get<Prefix>(z.payload).k;
      st.projected_sq = y_.head(st.ell).squaredNorm();
      out = st;
      break;
    }
    case FamilyKind::besov_level: {
      const auto& s = std::get<Support>(z.payload).idx;
      ProjectionStats st;
      st.ell = static_cast<int>(s.size());
      for (int j : s) st.projected_sq += y_[j] * y_[j];
      out = st;
      break;
    }
  }
  if (out) out->residual_sq = std::max(0.0, total_sq_ - out->projected_sq);
  return out;
}

double log_prior_weight(const ModelFamily& family, const ModelIndex& tau, const PriorConfig& config,
                        double log_valid_count) {
  const double eps = complexity(family, tau).epsilon;
  return -config.D * eps - (family.per_structure_prior() ? 0.0 : log_valid_count);
}

PosteriorTable exact_posterior_table(const ModelFamily& family, const Eigen::VectorXd& y, const PriorConfig& config,
                                     std::size_t cap, int jobs) {
  config.validate();
  if (y.size() != family.observation_dim()) throw DomainError("data length does not match the family");
  BigInt total = 0, largest = 0;
  ModelIndex arg{0, 0};
  for (const auto& tau : family.index_set()) {
    const BigInt c = structure_count(family, tau);
    total += c;
    if (c > largest) {
      largest = c;
      arg = tau;
    }
  }
  if (total > cap) {
    const std::string c = total.str();
    throw CapExceeded("total structure count " + c + " (largest |Z_tau| = " + largest.str() + " at tau = " +
                          to_string(arg) + ") exceeds the enumeration cap " + std::to_string(cap) +
                          "; use the MCMC sampler",
                      c);
  }

  PosteriorTable table;
  std::vector<double> prior_weight;
  for (const auto& tau : family.index_set()) {
    auto all = enumerate_structures(family, tau, cap);
    std::size_t kept = 0;
    for (auto& z : all)
      if (z.membership == Membership::member) {
        table.entries.push_back(PosteriorEntry{std::move(z)});
        ++kept;
      }
    if (kept == 0) continue;
    const double lc = std::log(static_cast<double>(kept));
    table.log_valid_count[tau] = lc;
    const double pw = log_prior_weight(family, tau, config, lc);
    const double eps = complexity(family, tau).epsilon;
    for (std::size_t i = table.entries.size() - kept; i < table.entries.size(); ++i) {
      table.entries[i].epsilon = eps;
      prior_weight.push_back(pw);
    }
  }
  if (table.entries.empty()) throw NoValidModels("no model index has an identifiable structure");

  parallel_for(table.entries.size(), jobs, [&](std::size_t i) {
    PosteriorEntry& e = table.entries[i];
    const DesignOperator op = build_design(family, e.structure);
    const ProjectionStats st = projection_stats(op, y);
    e.log_marginal = log_marginal(st, config.lambda);
    e.projected_norm = std::sqrt(st.projected_sq);
  });

  std::vector<double> raw(table.entries.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = prior_weight[i] + table.entries[i].log_marginal;
  table.log_normalizer = log_sum_exp(raw);
  for (std::size_t i = 0; i < raw.size(); ++i) table.entries[i].log_weight = raw[i] - table.log_normalizer;
  return table;
}

std::map<ModelIndex, double> index_posterior(const PosteriorTable& table) {
  std::map<ModelIndex, double> out;
  for (const auto& e : table.entries) out[e.structure.tau] += std::exp(e.log_weight);
  return out;
}

Eigen::VectorXd sample_q_conditional(const DesignOperator& design, const Eigen::VectorXd& y, double lambda, Rng& rng,
                                     int steps) {
  if (steps < 1) throw DomainError("sample_q_conditional: steps must be positive");
  if (!(lambda >= 0.0)) throw DomainError("sample_q_conditional: lambda must be nonnegative");
  const Eigen::VectorXd center = design.whiten(y);
  const Eigen::Index dim = center.size();
  auto draw = [&] {
    Eigen::VectorXd t(dim);
    for (Eigen::Index i = 0; i < dim; ++i) t[i] = center[i] + rng.normal();
    return t;
  };
  Eigen::VectorXd t = draw();
  double norm = t.norm();
  const int total = std::max(100, steps / 10) + steps;
  for (int it = 0; it < total; ++it) {
    Eigen::VectorXd cand = draw();
    const double cand_norm = cand.norm();
    const double log_alpha = -lambda * (cand_norm - norm);
    if (log_alpha >= 0.0 || std::log(rng.uniform_open()) < log_alpha) {
      t = std::move(cand);
      norm = cand_norm;
    }
  }
  return design.unwhiten(t);
}

void write_table_csv(std::ostream& os, const PosteriorTable& table) {
  write_csv_row(os, {"tau", "structure_json", "log_weight", "log_marginal", "projected_norm"});
  for (const auto& e : table.entries)
    write_csv_row(os, {to_json(e.structure.tau).dump(), payload_to_json(e.structure.payload).dump(),
                       format_double(e.log_weight), format_double(e.log_marginal), format_double(e.projected_norm)});
}

}  // namespace slm

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slm/error.hpp"
#include "slm/experiments.hpp"
#include "slm/instances.hpp"

namespace slm {

std::string_view to_string(TruthKind kind) {
  switch (kind) {
    case TruthKind::well_specified: return "well_specified";
    case TruthKind::graphon: return "graphon";
    case TruthKind::weak_lq: return "weak_lq";
    case TruthKind::approx_constant: return "approx_constant";
  }
  return "?";
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::rademacher: return "rademacher";
    case NoiseKind::bernoulli_graph: return "bernoulli_graph";
  }
  return "?";
}

namespace {

TruthKind truth_from_string(const std::string& s) {
  for (auto k : {TruthKind::well_specified, TruthKind::graphon, TruthKind::weak_lq, TruthKind::approx_constant})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown truth kind: " + s);
}

NoiseKind noise_from_string(const std::string& s) {
  for (auto k : {NoiseKind::gaussian, NoiseKind::rademacher, NoiseKind::bernoulli_graph})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown noise kind: " + s);
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

std::vector<int> balanced_labels(int len, int k, Rng& rng) {
  std::vector<int> z(len);
  for (int i = 0; i < len; ++i) z[i] = i % k;
  shuffle(z, rng);
  return z;
}

Eigen::VectorXd random_signs(Eigen::Index len, Rng& rng) {
  Eigen::VectorXd q(len);
  for (Eigen::Index i = 0; i < len; ++i) q[i] = rng.bernoulli(0.5) ? 1.0 : -1.0;
  return q;
}

int pair_node_count(Eigen::Index size) {
  const int n = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 4.0 * double(size))) / 2.0));
  if (static_cast<Eigen::Index>(n) * (n - 1) != size) throw DomainError("signal length is not n(n-1)");
  return n;
}

}  // namespace

void Scenario::validate() const {
  if (replicates < 1) throw ConfigError("scenario " + id + ": replicates must be >= 1");
  if (!(snr > 0.0)) throw ConfigError("scenario " + id + ": snr must be positive");
  const std::string fam = family.value("family", "");
  if (noise == NoiseKind::bernoulli_graph &&
      !(fam == "sbm" && (truth == TruthKind::well_specified || truth == TruthKind::graphon)))
    throw ConfigError("scenario " + id + ": bernoulli_graph noise needs an sbm family with a well_specified or graphon truth");
  if (truth == TruthKind::graphon && fam != "sbm") throw ConfigError("scenario " + id + ": graphon truth needs an sbm family");
  if (truth == TruthKind::graphon && !(alpha > 0.0)) throw ConfigError("scenario " + id + ": alpha must be positive");
  if (truth == TruthKind::weak_lq && fam != "sparse_regression" && fam != "aggregation_regression")
    throw ConfigError("scenario " + id + ": weak_lq truth needs a regression family");
  if (truth == TruthKind::weak_lq && (!(lq_q > 0.0) || !(lq_k > 0.0)))
    throw ConfigError("scenario " + id + ": weak_lq needs q > 0 and k > 0");
  if (cells_per_row < 0) throw ConfigError("scenario " + id + ": cells_per_row must be >= 0");
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.id = j.value("id", std::string("scenario"));
    s.family = j.at("family");
    s.truth = truth_from_string(j.value("truth", std::string("well_specified")));
    s.noise = noise_from_string(j.value("noise", std::string("gaussian")));
    if (j.contains("tau_star")) {
      const auto& t = j.at("tau_star");
      s.tau_star = t.is_array() ? ModelIndex{t.at(0).get<int>(), t.at(1).get<int>()} : ModelIndex{t.get<int>(), 0};
    }
    s.snr = j.value("snr", 1.0);
    s.alpha = j.value("alpha", 1.0);
    s.graphon_scale = j.value("graphon_scale", 1.0);
    s.lq_q = j.value("lq_q", 1.0);
    s.lq_k = j.value("lq_k", 1.0);
    s.cells_per_row = j.value("cells_per_row", 0);
    s.replicates = j.value("replicates", 1);
    s.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json Scenario::to_json() const {
  return {{"id", id},
          {"family", family},
          {"truth", to_string(truth)},
          {"noise", to_string(noise)},
          {"tau_star", slm::to_json(tau_star)},
          {"snr", snr},
          {"alpha", alpha},
          {"graphon_scale", graphon_scale},
          {"lq_q", lq_q},
          {"lq_k", lq_k},
          {"cells_per_row", cells_per_row},
          {"replicates", replicates},
          {"seed", seed}};
}

double graphon_value(double x, double y, double alpha, double scale) {
  const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
  const double v = alpha <= 1.0 ? scale * std::pow(r2, 0.5 * alpha) : scale * (0.2 + 0.6 * std::exp(-4.0 * r2));
  return std::clamp(v, 0.0, 1.0);
}

TruthRecord generate_truth(const ModelFamily& f, const Scenario& sc, Rng& rng) {
  sc.validate();
  TruthRecord t;
  t.tau_star = sc.tau_star;
  const int big_n = f.observation_dim();

  switch (sc.truth) {
    case TruthKind::graphon: {
      const int n = f.n();
      t.xi.resize(n);
      for (int i = 0; i < n; ++i) t.xi[i] = rng.uniform();
      t.theta.resize(big_n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) t.theta[sbm_pair_index(n, i, j)] = graphon_value(t.xi[i], t.xi[j], sc.alpha, sc.graphon_scale);
      t.epsilon_star = complexity(f, t.tau_star).epsilon;
      return t;
    }
    case TruthKind::weak_lq: {
      const int p = f.p();
      std::vector<int> pos(p);
      std::iota(pos.begin(), pos.end(), 0);
      shuffle(pos, rng);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
      for (int j = 1; j <= p; ++j) b[pos[j - 1]] = (j % 2 == 1 ? 1.0 : -1.0) * std::pow(sc.lq_k / j, 1.0 / sc.lq_q);
      t.coefficients = b;
      t.theta = f.design() * b;
      t.epsilon_star = complexity(f, t.tau_star).epsilon;
      return t;
    }
    case TruthKind::approx_constant: {
      t.epsilon_star = complexity(f, t.tau_star).epsilon;
      t.theta = Eigen::VectorXd::Constant(big_n, sc.snr * std::sqrt(t.epsilon_star / big_n));
      return t;
    }
    case TruthKind::well_specified: break;
  }

  ModelIndex tau = sc.tau_star;
  Structure z;
  switch (f.kind()) {
    case FamilyKind::sbm:
      z.payload = Labels{balanced_labels(f.n(), tau.first, rng)};
      break;
    case FamilyKind::multi_task:
      z.payload = Labels{balanced_labels(f.m(), tau.first, rng)};
      break;
    case FamilyKind::biclustering:
      z.payload = LabelPair{balanced_labels(f.n(), tau.first, rng), balanced_labels(f.m(), tau.second, rng)};
      break;
    case FamilyKind::group_two_level:
      if (sc.cells_per_row > 0) {
        const int m = f.m(), r = tau.first, per = std::min(sc.cells_per_row, m);
        std::vector<int> rows(f.p());
        std::iota(rows.begin(), rows.end(), 0);
        shuffle(rows, rng);
        std::vector<int> cells;
        for (int a = 0; a < r; ++a) {
          std::vector<int> cols(m);
          std::iota(cols.begin(), cols.end(), 0);
          shuffle(cols, rng);
          for (int c = 0; c < per; ++c) cells.push_back(rows[a] * m + cols[c]);
        }
        std::sort(cells.begin(), cells.end());
        tau = {r, r * per};
        z.payload = CellSet{cells};
        break;
      }
      [[fallthrough]];
    default: z = sample_valid_structure(f, tau, rng); break;
  }
  z.tau = tau;
  validate_structure(f, z);
  if (!is_member(f, z)) throw ConfigError("scenario " + sc.id + ": truth structure is not identifiable");
  z.membership = Membership::member;
  t.tau_star = tau;
  t.epsilon_star = complexity(f, tau).epsilon;

  const double target = sc.snr * std::sqrt(t.epsilon_star);
  const int ell = complexity(f, tau).ell;
  if (f.kind() == FamilyKind::sbm) {
    const int k = tau.first;
    const double c = sc.noise == NoiseKind::bernoulli_graph ? 0.5 : 0.0;
    double a = 2.0 * target / std::sqrt(double(big_n));
    if (sc.noise == NoiseKind::bernoulli_graph) a = std::min(a, 0.98);
    t.q.resize(k * k);
    for (int u = 0; u < k; ++u)
      for (int v = 0; v < k; ++v) t.q[u + k * v] = u == v ? c + 0.5 * a : c - 0.5 * a;
  } else {
    Eigen::VectorXd q = random_signs(ell, rng);
    const double norm = signal(f, z, q).norm();
    t.q = q * (target / norm);
  }
  t.theta = signal(f, z, t.q);
  t.coefficients = coefficients(f, z, t.q);
  t.structure = std::move(z);
  return t;
}

Eigen::VectorXd generate_noise(NoiseKind kind, const Eigen::VectorXd& theta, Rng& rng) {
  Eigen::VectorXd y = theta;
  switch (kind) {
    case NoiseKind::gaussian:
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += rng.normal();
      break;
    case NoiseKind::rademacher:
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += rng.bernoulli(0.5) ? 1.0 : -1.0;
      break;
    case NoiseKind::bernoulli_graph: {
      const int n = pair_node_count(theta.size());
      for (Eigen::Index i = 0; i < theta.size(); ++i)
        if (!(theta[i] >= 0.0 && theta[i] <= 1.0)) throw DomainError("bernoulli noise needs theta in [0, 1]");
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const double a = rng.bernoulli(theta[sbm_pair_index(n, i, j)]) ? 1.0 : 0.0;
          y[sbm_pair_index(n, i, j)] = a;
          y[sbm_pair_index(n, j, i)] = a;
        }
      break;
    }
  }
  return y;
}

}  // namespace slm

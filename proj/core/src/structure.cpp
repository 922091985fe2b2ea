#include "slm/structure.hpp"

#include <algorithm>
#include <set>

#include "slm/error.hpp"

namespace slm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

bool sorted_unique_in_range(const std::vector<int>& v, int limit) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] >= limit) return false;
    if (i > 0 && v[i] <= v[i - 1]) return false;
  }
  return true;
}

bool labels_in_range(const std::vector<int>& z, int k) {
  return std::all_of(z.begin(), z.end(), [k](int x) { return x >= 0 && x < k; });
}

int max_column_support(const SignMatrix& s) {
  int best = 0;
  for (int j = 0; j < s.cols; ++j) {
    int c = 0;
    for (int a = 0; a < s.rows; ++a) c += s.at(a, j) != 0;
    best = std::max(best, c);
  }
  return best;
}

}  // namespace

ModelIndex implied_index(const ModelFamily& f, const Payload& payload) {
  return std::visit(
      overloaded{
          [&](const Labels& l) {
            int k = 0;
            for (int x : l.z) k = std::max(k, x + 1);
            return ModelIndex{k, 0};
          },
          [&](const LabelPair& l) {
            int k = 0, m = 0;
            for (int x : l.rows) k = std::max(k, x + 1);
            for (int x : l.cols) m = std::max(m, x + 1);
            return ModelIndex{k, m};
          },
          [&](const Support& s) { return ModelIndex{static_cast<int>(s.idx.size()), 0}; },
          [&](const SignMatrix& s) { return ModelIndex{s.rows, max_column_support(s)}; },
          [&](const CellSet& c) {
            std::set<int> rows;
            for (int cell : c.cells) rows.insert(cell / f.m());
            return ModelIndex{static_cast<int>(rows.size()), static_cast<int>(c.cells.size())};
          },
          [&](const Prefix& p) { return ModelIndex{p.k, 0}; },
      },
      payload);
}

void validate_structure(const ModelFamily& f, const Structure& z) {
  const ModelIndex& tau = z.tau;
  switch (f.kind()) {
    case FamilyKind::sbm:
    case FamilyKind::multi_task: {
      const auto* l = std::get_if<Labels>(&z.payload);
      check(l != nullptr, "expected a label vector");
      const int len = f.kind() == FamilyKind::sbm ? f.n() : f.m();
      check(static_cast<int>(l->z.size()) == len, "label vector has the wrong length");
      check(labels_in_range(l->z, tau.first), "label outside [0, k)");
      break;
    }
    case FamilyKind::biclustering: {
      const auto* l = std::get_if<LabelPair>(&z.payload);
      check(l != nullptr, "expected a label pair");
      check(static_cast<int>(l->rows.size()) == f.n() && static_cast<int>(l->cols.size()) == f.m(),
            "label pair has the wrong lengths");
      check(labels_in_range(l->rows, tau.first) && labels_in_range(l->cols, tau.second),
            "label outside range");
      break;
    }
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::besov_level:
    case FamilyKind::aggregation_regression: {
      const auto* s = std::get_if<Support>(&z.payload);
      check(s != nullptr, "expected a support set");
      check(sorted_unique_in_range(s->idx, f.p()), "support must be sorted, unique and inside [0, p)");
      check(static_cast<int>(s->idx.size()) == tau.first, "support size differs from the index");
      if (f.kind() == FamilyKind::aggregation_regression && tau.first == f.design_rank())
        check(s->idx == f.spanning_columns(), "the full-rank aggregation structure is the spanning set");
      break;
    }
    case FamilyKind::dictionary: {
      const auto* s = std::get_if<SignMatrix>(&z.payload);
      check(s != nullptr, "expected a sign matrix");
      check(s->rows == tau.first && s->cols == f.d() &&
                s->v.size() == static_cast<std::size_t>(s->rows) * s->cols,
            "sign matrix has the wrong shape");
      check(std::all_of(s->v.begin(), s->v.end(), [](std::int8_t x) { return x >= -1 && x <= 1; }),
            "sign matrix entries must be in {-1, 0, 1}");
      check(max_column_support(*s) <= tau.second, "column support exceeds s");
      break;
    }
    case FamilyKind::group_two_level: {
      const auto* c = std::get_if<CellSet>(&z.payload);
      check(c != nullptr, "expected a cell set");
      check(sorted_unique_in_range(c->cells, f.p() * f.m()), "cells must be sorted, unique and in range");
      check(implied_index(f, z.payload) == tau, "cell set disagrees with its index");
      break;
    }
    case FamilyKind::sobolev_sequence: {
      const auto* p = std::get_if<Prefix>(&z.payload);
      check(p != nullptr, "expected a prefix length");
      check(p->k == tau.first, "prefix length differs from the index");
      break;
    }
  }
  check(f.contains(tau), "index " + to_string(tau) + " is not in the index set");
}

nlohmann::json payload_to_json(const Payload& payload) {
  return std::visit(
      overloaded{
          [](const Labels& l) { return nlohmann::json(l.z); },
          [](const LabelPair& l) { return nlohmann::json{{"rows", l.rows}, {"cols", l.cols}}; },
          [](const Support& s) { return nlohmann::json(s.idx); },
          [](const SignMatrix& s) {
            nlohmann::json rows = nlohmann::json::array();
            for (int a = 0; a < s.rows; ++a) {
              nlohmann::json row = nlohmann::json::array();
              for (int j = 0; j < s.cols; ++j) row.push_back(s.at(a, j));
              rows.push_back(std::move(row));
            }
            return rows;
          },
          [](const CellSet& c) { return nlohmann::json(c.cells); },
          [](const Prefix& p) { return nlohmann::json(p.k); },
      },
      payload);
}

Payload payload_from_json(const ModelFamily& f, const nlohmann::json& j) {
  try {
    switch (f.kind()) {
      case FamilyKind::sbm:
      case FamilyKind::multi_task: return Labels{j.get<std::vector<int>>()};
      case FamilyKind::biclustering:
        return LabelPair{j.at("rows").get<std::vector<int>>(), j.at("cols").get<std::vector<int>>()};
      case FamilyKind::sparse_regression:
      case FamilyKind::group_sparsity:
      case FamilyKind::besov_level:
      case FamilyKind::aggregation_regression: return Support{j.get<std::vector<int>>()};
      case FamilyKind::dictionary: {
        SignMatrix s;
        s.rows = static_cast<int>(j.size());
        s.cols = s.rows > 0 ? static_cast<int>(j[0].size()) : f.d();
        for (const auto& row : j)
          for (const auto& x : row) s.v.push_back(static_cast<std::int8_t>(x.get<int>()));
        return s;
      }
      case FamilyKind::group_two_level: return CellSet{j.get<std::vector<int>>()};
      case FamilyKind::sobolev_sequence: return Prefix{j.get<int>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("structure payload: ") + e.what());
  }
  throw ConfigError("structure payload: unreachable");
}

nlohmann::json structure_to_json(const Structure& z) {
  return nlohmann::json{{"tau", to_json(z.tau)}, {"structure", payload_to_json(z.payload)}};
}

Structure structure_from_json(const ModelFamily& f, const nlohmann::json& j) {
  Structure z;
  try {
    const auto& t = j.at("tau");
    if (t.is_array())
      z.tau = {t.at(0).get<int>(), t.at(1).get<int>()};
    else
      z.tau = {t.get<int>(), 0};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("structure tau: ") + e.what());
  }
  z.payload = payload_from_json(f, j.at("structure"));
  validate_structure(f, z);
  return z;
}

std::string structure_key(const Structure& z) { return structure_to_json(z).dump(); }

}  // namespace slm

#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "slm/family.hpp"

namespace slm {

/// Label vector z with labels in [0, k) (SBM over nodes, multi-task over tasks).
struct Labels {
  std::vector<int> z;
  friend bool operator==(const Labels&, const Labels&) = default;
};

/// Row and column labels for biclustering.
struct LabelPair {
  std::vector<int> rows;
  std::vector<int> cols;
  friend bool operator==(const LabelPair&, const LabelPair&) = default;
};

/// Sorted support set (sparse, group, aggregation, Besov level).
struct Support {
  std::vector<int> idx;
  friend bool operator==(const Support&, const Support&) = default;
};

/// Dictionary code Z in {-1,0,1}^{p x d}, row-major.
struct SignMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::int8_t> v;
  int at(int a, int j) const { return v[static_cast<std::size_t>(a) * cols + j]; }
  friend bool operator==(const SignMatrix&, const SignMatrix&) = default;
};

/// Sorted cell ids row * m + col of a two-level support T.
struct CellSet {
  std::vector<int> cells;
  friend bool operator==(const CellSet&, const CellSet&) = default;
};

/// Sobolev prefix length k.
struct Prefix {
  int k = 0;
  friend bool operator==(const Prefix&, const Prefix&) = default;
};

using Payload = std::variant<Labels, LabelPair, Support, SignMatrix, CellSet, Prefix>;

enum class Membership { unchecked, member, collinear };

struct Structure {
  ModelIndex tau;
  Payload payload;
  Membership membership = Membership::unchecked;

  /// Equality ignores the membership tag.
  friend bool operator==(const Structure& a, const Structure& b) {
    return a.tau == b.tau && a.payload == b.payload;
  }
};

/// Index implied by the payload (e.g. number of labels, support size, covered rows).
ModelIndex implied_index(const ModelFamily& family, const Payload& payload);

/// Throws DomainError unless the payload is well-formed for the family and tau.
void validate_structure(const ModelFamily& family, const Structure& z);

nlohmann::json payload_to_json(const Payload& payload);
Payload payload_from_json(const ModelFamily& family, const nlohmann::json& j);

/// {"tau": ..., "structure": payload}
nlohmann::json structure_to_json(const Structure& z);
Structure structure_from_json(const ModelFamily& family, const nlohmann::json& j);

/// Compact canonical key for maps and frequency tables.
std::string structure_key(const Structure& z);

}  // namespace slm

#include <algorithm>
#include <set>

#include "slm/error.hpp"
#include "slm/instances.hpp"

namespace slm {

namespace {

// Visits every vector in [0, k)^len, first coordinate most significant.
template <class F>
void for_each_labeling(int len, int k, F&& visit) {
  std::vector<int> z(len, 0);
  for (;;) {
    visit(z);
    int pos = len - 1;
    while (pos >= 0 && z[pos] == k - 1) z[pos--] = 0;
    if (pos < 0) return;
    ++z[pos];
  }
}

// Visits every sorted s-subset of [0, p) in lexicographic order.
template <class F>
void for_each_subset(int p, int s, F&& visit) {
  std::vector<int> c(s);
  for (int i = 0; i < s; ++i) c[i] = i;
  if (s > p) return;
  for (;;) {
    visit(c);
    int pos = s - 1;
    while (pos >= 0 && c[pos] == p - s + pos) --pos;
    if (pos < 0) return;
    ++c[pos];
    for (int i = pos + 1; i < s; ++i) c[i] = c[i - 1] + 1;
  }
}

// Column patterns in {-1,0,1}^p with at most s nonzeros, lexicographic.
std::vector<std::vector<std::int8_t>> column_patterns(int p, int s) {
  std::vector<std::vector<std::int8_t>> out;
  for_each_labeling(p, 3, [&](const std::vector<int>& v) {
    int nz = 0;
    for (int x : v) nz += x != 1;
    if (nz > s) return;
    std::vector<std::int8_t> col(p);
    for (int i = 0; i < p; ++i) col[i] = static_cast<std::int8_t>(v[i] - 1);
    out.push_back(std::move(col));
  });
  return out;
}

}  // namespace

std::vector<Structure> enumerate_structures(const ModelFamily& f, const ModelIndex& tau, std::size_t cap) {
  if (!f.contains(tau)) throw DomainError("model index " + to_string(tau) + " is not in the index set");
  const BigInt count = structure_count(f, tau);
  if (count > cap) {
    const std::string c = count.str();
    throw CapExceeded("|Z_tau| = " + c + " for tau = " + to_string(tau) + " exceeds the enumeration cap " +
                          std::to_string(cap) + "; use the MCMC sampler",
                      c);
  }
  std::vector<Structure> out;
  out.reserve(count.convert_to<std::size_t>());
  auto push = [&](Payload payload) {
    Structure z{tau, std::move(payload), Membership::unchecked};
    z.membership = is_member(f, z) ? Membership::member : Membership::collinear;
    out.push_back(std::move(z));
  };

  switch (f.kind()) {
    case FamilyKind::sbm:
      for_each_labeling(f.n(), tau.first, [&](const std::vector<int>& z) { push(Labels{z}); });
      break;
    case FamilyKind::multi_task:
      for_each_labeling(f.m(), tau.first, [&](const std::vector<int>& z) { push(Labels{z}); });
      break;
    case FamilyKind::biclustering:
      for_each_labeling(f.n(), tau.first, [&](const std::vector<int>& rows) {
        for_each_labeling(f.m(), tau.second, [&](const std::vector<int>& cols) { push(LabelPair{rows, cols}); });
      });
      break;
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::besov_level:
      for_each_subset(f.p(), tau.first, [&](const std::vector<int>& s) { push(Support{s}); });
      break;
    case FamilyKind::aggregation_regression:
      if (tau.first == f.design_rank())
        push(Support{f.spanning_columns()});
      else
        for_each_subset(f.p(), tau.first, [&](const std::vector<int>& s) { push(Support{s}); });
      break;
    case FamilyKind::dictionary: {
      const int a = tau.first, d = f.d();
      const auto patterns = column_patterns(a, tau.second);
      for_each_labeling(d, static_cast<int>(patterns.size()), [&](const std::vector<int>& pick) {
        SignMatrix m{a, d, std::vector<std::int8_t>(static_cast<std::size_t>(a) * d)};
        for (int j = 0; j < d; ++j)
          for (int row = 0; row < a; ++row) m.v[static_cast<std::size_t>(row) * d + j] = patterns[pick[j]][row];
        push(std::move(m));
      });
      break;
    }
    case FamilyKind::group_two_level: {
      const int r = tau.first, t = tau.second, m = f.m();
      std::vector<std::vector<int>> sets;
      for_each_subset(f.p(), r, [&](const std::vector<int>& rows) {
        for_each_subset(r * m, t, [&](const std::vector<int>& picks) {
          std::vector<int> cells;
          std::set<int> covered;
          for (int c : picks) {
            covered.insert(c / m);
            cells.push_back(rows[c / m] * m + c % m);
          }
          if (static_cast<int>(covered.size()) == r) sets.push_back(std::move(cells));
        });
      });
      std::sort(sets.begin(), sets.end());
      for (auto& cells : sets) push(CellSet{std::move(cells)});
      break;
    }
    case FamilyKind::sobolev_sequence: push(Prefix{tau.first}); break;
  }
  return out;
}

}  // namespace slm

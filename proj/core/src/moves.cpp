#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "slm/error.hpp"
#include "slm/instances.hpp"

namespace slm {

namespace {

const double kLn2 = std::log(2.0);
const double kLn3 = std::log(3.0);

// One outcome of a move: new payload and index, with the conditional
// probability of this outcome given the move type.
struct Outcome {
  Payload payload;
  ModelIndex tau;
  double prob;
};

// ---------------------------------------------------------------------------
// label vectors (SBM, multi-task, each side of biclustering)

struct LabelState {
  std::vector<int> z;
  int k;
};

struct LabelResult {
  LabelState next;
  double log_ratio = 0.0;
  bool self = true;
};

LabelResult label_move(MoveType t, const LabelState& cur, int k_max, Rng& rng) {
  LabelResult r{cur};
  const int len = static_cast<int>(cur.z.size());
  const int k = cur.k;
  switch (t) {
    case MoveType::relabel: {
      if (k < 2) return r;
      const int i = static_cast<int>(rng.index(len));
      int nl = static_cast<int>(rng.index(k - 1));
      if (nl >= cur.z[i]) ++nl;
      r.next.z[i] = nl;
      r.self = false;
      return r;
    }
    case MoveType::swap_labels: {
      bool mixed = false;
      for (int x : cur.z) mixed |= x != cur.z[0];
      if (!mixed) return r;
      int i, j;
      do {
        i = static_cast<int>(rng.index(len));
        j = static_cast<int>(rng.index(len));
      } while (cur.z[i] == cur.z[j]);
      std::swap(r.next.z[i], r.next.z[j]);
      r.self = false;
      return r;
    }
    case MoveType::split: {
      if (k >= k_max) return r;
      const int c = static_cast<int>(rng.index(k));
      int size = 0;
      for (int& x : r.next.z)
        if (x == c) {
          ++size;
          if (rng.bernoulli(0.5)) x = k;
        }
      r.next.k = k + 1;
      r.log_ratio = size * kLn2;
      r.self = false;
      return r;
    }
    case MoveType::merge: {
      if (k < 2) return r;
      const int c = static_cast<int>(rng.index(k - 1));
      int size = 0;
      for (int& x : r.next.z) {
        if (x == k - 1) x = c;
        if (x == c) ++size;
      }
      r.next.k = k - 1;
      r.log_ratio = -size * kLn2;
      r.self = false;
      return r;
    }
    default: throw DomainError("move type does not apply to label vectors");
  }
}

void label_outcomes(MoveType t, const LabelState& cur, int k_max, std::vector<std::pair<LabelState, double>>& out) {
  const int len = static_cast<int>(cur.z.size());
  const int k = cur.k;
  switch (t) {
    case MoveType::relabel:
      if (k < 2) {
        out.push_back({cur, 1.0});
        return;
      }
      for (int i = 0; i < len; ++i)
        for (int nl = 0; nl < k; ++nl) {
          if (nl == cur.z[i]) continue;
          LabelState s = cur;
          s.z[i] = nl;
          out.push_back({s, 1.0 / (len * (k - 1.0))});
        }
      return;
    case MoveType::swap_labels: {
      std::vector<std::pair<int, int>> pairs;
      for (int i = 0; i < len; ++i)
        for (int j = i + 1; j < len; ++j)
          if (cur.z[i] != cur.z[j]) pairs.emplace_back(i, j);
      if (pairs.empty()) {
        out.push_back({cur, 1.0});
        return;
      }
      for (auto [i, j] : pairs) {
        LabelState s = cur;
        std::swap(s.z[i], s.z[j]);
        out.push_back({s, 1.0 / pairs.size()});
      }
      return;
    }
    case MoveType::split: {
      if (k >= k_max) {
        out.push_back({cur, 1.0});
        return;
      }
      for (int c = 0; c < k; ++c) {
        std::vector<int> members;
        for (int i = 0; i < len; ++i)
          if (cur.z[i] == c) members.push_back(i);
        const double each = (1.0 / k) * std::pow(0.5, static_cast<double>(members.size()));
        for (std::size_t mask = 0; mask < (std::size_t{1} << members.size()); ++mask) {
          LabelState s{cur.z, k + 1};
          for (std::size_t b = 0; b < members.size(); ++b)
            if (mask >> b & 1) s.z[members[b]] = k;
          out.push_back({s, each});
        }
      }
      return;
    }
    case MoveType::merge:
      if (k < 2) {
        out.push_back({cur, 1.0});
        return;
      }
      for (int c = 0; c < k - 1; ++c) {
        LabelState s{cur.z, k - 1};
        for (int& x : s.z)
          if (x == k - 1) x = c;
        out.push_back({s, 1.0 / (k - 1)});
      }
      return;
    default: throw DomainError("move type does not apply to label vectors");
  }
}

// ---------------------------------------------------------------------------
// support sets on [0, p) with size bounds [s_min, s_max]

struct SupportResult {
  std::vector<int> next;
  double log_ratio = 0.0;
  bool self = true;
};

std::vector<int> complement(const std::vector<int>& s, int p) {
  std::vector<int> out;
  std::size_t a = 0;
  for (int i = 0; i < p; ++i) {
    if (a < s.size() && s[a] == i)
      ++a;
    else
      out.push_back(i);
  }
  return out;
}

std::vector<int> with(std::vector<int> s, int add) {
  s.insert(std::upper_bound(s.begin(), s.end(), add), add);
  return s;
}

std::vector<int> without(std::vector<int> s, int drop) {
  s.erase(std::find(s.begin(), s.end(), drop));
  return s;
}

SupportResult support_move(MoveType t, const std::vector<int>& s, int p, int s_min, int s_max, Rng& rng) {
  SupportResult r{s};
  const int size = static_cast<int>(s.size());
  switch (t) {
    case MoveType::add: {
      if (size >= s_max || size >= p) return r;
      const auto comp = complement(s, p);
      r.next = with(s, comp[rng.index(comp.size())]);
      r.log_ratio = std::log(static_cast<double>(p - size) / (size + 1));
      r.self = false;
      return r;
    }
    case MoveType::drop: {
      if (size <= s_min) return r;
      r.next = without(s, s[rng.index(size)]);
      r.log_ratio = std::log(static_cast<double>(size) / (p - size + 1));
      r.self = false;
      return r;
    }
    case MoveType::swap: {
      if (size == 0 || size == p) return r;
      const auto comp = complement(s, p);
      r.next = with(without(s, s[rng.index(size)]), comp[rng.index(comp.size())]);
      r.self = false;
      return r;
    }
    default: throw DomainError("move type does not apply to supports");
  }
}

void support_outcomes(MoveType t, const std::vector<int>& s, int p, int s_min, int s_max,
                      std::vector<std::pair<std::vector<int>, double>>& out) {
  const int size = static_cast<int>(s.size());
  const auto comp = complement(s, p);
  switch (t) {
    case MoveType::add:
      if (size >= s_max || size >= p) {
        out.push_back({s, 1.0});
        return;
      }
      for (int j : comp) out.push_back({with(s, j), 1.0 / comp.size()});
      return;
    case MoveType::drop:
      if (size <= s_min) {
        out.push_back({s, 1.0});
        return;
      }
      for (int j : s) out.push_back({without(s, j), 1.0 / size});
      return;
    case MoveType::swap:
      if (size == 0 || size == p) {
        out.push_back({s, 1.0});
        return;
      }
      for (int i : s)
        for (int j : comp) out.push_back({with(without(s, i), j), 1.0 / (size * comp.size())});
      return;
    default: throw DomainError("move type does not apply to supports");
  }
}

int support_cap(const ModelFamily& f) {
  switch (f.kind()) {
    case FamilyKind::besov_level: return f.p();
    case FamilyKind::aggregation_regression: return f.design_rank() - 1;
    default: return f.s_max();
  }
}

// ---------------------------------------------------------------------------
// dictionary helpers

int column_support(const SignMatrix& m, int j) {
  int c = 0;
  for (int a = 0; a < m.rows; ++a) c += m.at(a, j) != 0;
  return c;
}

int max_support(const SignMatrix& m) {
  int best = 0;
  for (int j = 0; j < m.cols; ++j) best = std::max(best, column_support(m, j));
  return best;
}

// ---------------------------------------------------------------------------
// two-level helpers

struct CellInfo {
  std::set<int> rows;
  std::vector<int> full_rows;
};

CellInfo cell_info(const std::vector<int>& cells, int p, int m) {
  CellInfo info;
  std::vector<int> per_row(p, 0);
  for (int c : cells) {
    info.rows.insert(c / m);
    ++per_row[c / m];
  }
  for (int i = 0; i < p; ++i)
    if (per_row[i] == m) info.full_rows.push_back(i);
  return info;
}

std::vector<int> toggle(std::vector<int> cells, int cell) {
  auto it = std::lower_bound(cells.begin(), cells.end(), cell);
  if (it != cells.end() && *it == cell)
    cells.erase(it);
  else
    cells.insert(it, cell);
  return cells;
}

std::vector<int> add_row_cells(std::vector<int> cells, int row, int m) {
  for (int c = 0; c < m; ++c) cells.push_back(row * m + c);
  std::sort(cells.begin(), cells.end());
  return cells;
}

std::vector<int> remove_row_cells(std::vector<int> cells, int row, int m) {
  cells.erase(std::remove_if(cells.begin(), cells.end(), [&](int c) { return c / m == row; }), cells.end());
  return cells;
}

ModelIndex cells_index(const std::vector<int>& cells, int m) {
  std::set<int> rows;
  for (int c : cells) rows.insert(c / m);
  return {static_cast<int>(rows.size()), static_cast<int>(cells.size())};
}

Proposal make_self(const Structure& cur, MoveType t) { return Proposal{cur, 0.0, t, true}; }

Proposal dispatch(const ModelFamily& f, const Structure& cur, Rng& rng, MoveType t) {
  switch (f.kind()) {
    case FamilyKind::sbm:
    case FamilyKind::multi_task: {
      const auto& z = std::get<Labels>(cur.payload).z;
      const LabelResult r = label_move(t, {z, cur.tau.first}, f.k_max(), rng);
      if (r.self) return make_self(cur, t);
      return {Structure{{r.next.k, 0}, Labels{r.next.z}}, r.log_ratio, t, false};
    }
    case FamilyKind::biclustering: {
      const auto& lp = std::get<LabelPair>(cur.payload);
      const bool col = t == MoveType::relabel_col || t == MoveType::swap_labels_col ||
                       t == MoveType::split_col || t == MoveType::merge_col;
      MoveType base = t;
      if (t == MoveType::relabel_col) base = MoveType::relabel;
      if (t == MoveType::swap_labels_col) base = MoveType::swap_labels;
      if (t == MoveType::split_col) base = MoveType::split;
      if (t == MoveType::merge_col) base = MoveType::merge;
      if (!col) {
        const LabelResult r = label_move(base, {lp.rows, cur.tau.first}, f.k_max(), rng);
        if (r.self) return make_self(cur, t);
        return {Structure{{r.next.k, cur.tau.second}, LabelPair{r.next.z, lp.cols}}, r.log_ratio, t, false};
      }
      const LabelResult r = label_move(base, {lp.cols, cur.tau.second}, f.l_max(), rng);
      if (r.self) return make_self(cur, t);
      return {Structure{{cur.tau.first, r.next.k}, LabelPair{lp.rows, r.next.z}}, r.log_ratio, t, false};
    }
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::besov_level: {
      const auto& s = std::get<Support>(cur.payload).idx;
      const SupportResult r = support_move(t, s, f.p(), 1, support_cap(f), rng);
      if (r.self) return make_self(cur, t);
      return {Structure{{static_cast<int>(r.next.size()), 0}, Support{r.next}}, r.log_ratio, t, false};
    }
    case FamilyKind::aggregation_regression: {
      const auto& s = std::get<Support>(cur.payload).idx;
      const int rank = f.design_rank();
      const bool full = cur.tau.first == rank;
      if (t == MoveType::jump_full) {
        if (rank < 2) return make_self(cur, t);
        if (!full) {
          const double back = -std::log(rank - 1.0) - log_binomial(f.p(), static_cast<double>(s.size()));
          return {Structure{{rank, 0}, Support{f.spanning_columns()}}, back, t, false};
        }
        const int size = 1 + static_cast<int>(rng.index(rank - 1));
        std::vector<int> pool(f.p());
        for (int i = 0; i < f.p(); ++i) pool[i] = i;
        for (int i = 0; i < size; ++i) std::swap(pool[i], pool[i + rng.index(f.p() - i)]);
        pool.resize(size);
        std::sort(pool.begin(), pool.end());
        const double ratio = std::log(rank - 1.0) + log_binomial(f.p(), size);
        return {Structure{{size, 0}, Support{pool}}, ratio, t, false};
      }
      if (full) return make_self(cur, t);
      const SupportResult r = support_move(t, s, f.p(), 1, rank - 1, rng);
      if (r.self) return make_self(cur, t);
      return {Structure{{static_cast<int>(r.next.size()), 0}, Support{r.next}}, r.log_ratio, t, false};
    }
    case FamilyKind::dictionary: {
      const auto& m = std::get<SignMatrix>(cur.payload);
      const int a = cur.tau.first, s = cur.tau.second, d = f.d();
      switch (t) {
        case MoveType::flip: {
          SignMatrix next = m;
          const int row = static_cast<int>(rng.index(a));
          const int col = static_cast<int>(rng.index(d));
          const int old = m.at(row, col);
          int nv = static_cast<int>(rng.index(2)) - 1;  // one of {-1, 0} ...
          if (nv >= old) ++nv;                           // ... shifted past the old value
          next.v[static_cast<std::size_t>(row) * d + col] = static_cast<std::int8_t>(nv);
          if (column_support(next, col) > s) return make_self(cur, t);
          return {Structure{cur.tau, std::move(next)}, 0.0, t, false};
        }
        case MoveType::grow_bound:
          if (s >= a) return make_self(cur, t);
          return {Structure{{a, s + 1}, m}, 0.0, t, false};
        case MoveType::shrink_bound:
          if (s <= 1 || max_support(m) > s - 1) return make_self(cur, t);
          return {Structure{{a, s - 1}, m}, 0.0, t, false};
        case MoveType::add_atom: {
          if (a >= f.p_max()) return make_self(cur, t);
          SignMatrix next{a + 1, d, m.v};
          for (int j = 0; j < d; ++j) next.v.push_back(static_cast<std::int8_t>(static_cast<int>(rng.index(3)) - 1));
          if (max_support(next) > s) return make_self(cur, t);
          return {Structure{{a + 1, s}, std::move(next)}, d * kLn3, t, false};
        }
        case MoveType::remove_atom: {
          if (a <= 1 || s > a - 1) return make_self(cur, t);
          SignMatrix next{a - 1, d, std::vector<std::int8_t>(m.v.begin(), m.v.end() - d)};
          return {Structure{{a - 1, s}, std::move(next)}, -d * kLn3, t, false};
        }
        default: throw DomainError("move type does not apply to dictionary codes");
      }
    }
    case FamilyKind::group_two_level: {
      const auto& cells = std::get<CellSet>(cur.payload).cells;
      const int p = f.p(), m = f.m();
      const CellInfo info = cell_info(cells, p, m);
      const int r = static_cast<int>(info.rows.size());
      switch (t) {
        case MoveType::toggle_cell: {
          const auto next = toggle(cells, static_cast<int>(rng.index(p * m)));
          if (next.empty()) return make_self(cur, t);
          const ModelIndex tau = cells_index(next, m);
          if (tau.first > f.r_max()) return make_self(cur, t);
          return {Structure{tau, CellSet{next}}, 0.0, t, false};
        }
        case MoveType::add_row: {
          if (r >= f.r_max() || r >= p) return make_self(cur, t);
          std::vector<int> free_rows;
          for (int i = 0; i < p; ++i)
            if (!info.rows.count(i)) free_rows.push_back(i);
          const auto next = add_row_cells(cells, free_rows[rng.index(free_rows.size())], m);
          const double ratio = std::log(static_cast<double>(p - r) / (info.full_rows.size() + 1.0));
          return {Structure{cells_index(next, m), CellSet{next}}, ratio, t, false};
        }
        case MoveType::remove_row: {
          if (info.full_rows.empty()) return make_self(cur, t);
          const auto next = remove_row_cells(cells, info.full_rows[rng.index(info.full_rows.size())], m);
          if (next.empty()) return make_self(cur, t);
          const double ratio = std::log(info.full_rows.size() / (p - r + 1.0));
          return {Structure{cells_index(next, m), CellSet{next}}, ratio, t, false};
        }
        default: throw DomainError("move type does not apply to cell sets");
      }
    }
    case FamilyKind::sobolev_sequence: {
      const int k = cur.tau.first;
      if (t == MoveType::increment) {
        if (k >= f.n()) return make_self(cur, t);
        return {Structure{{k + 1, 0}, Prefix{k + 1}}, 0.0, t, false};
      }
      if (t == MoveType::decrement) {
        if (k <= 1) return make_self(cur, t);
        return {Structure{{k - 1, 0}, Prefix{k - 1}}, 0.0, t, false};
      }
      throw DomainError("move type does not apply to prefixes");
    }
  }
  throw DomainError("unknown family");
}

void outcomes(const ModelFamily& f, const Structure& cur, MoveType t, std::vector<Outcome>& out) {
  auto self = [&] { out.push_back({cur.payload, cur.tau, 1.0}); };
  switch (f.kind()) {
    case FamilyKind::sbm:
    case FamilyKind::multi_task: {
      std::vector<std::pair<LabelState, double>> lo;
      label_outcomes(t, {std::get<Labels>(cur.payload).z, cur.tau.first}, f.k_max(), lo);
      for (auto& [s, pr] : lo) out.push_back({Labels{s.z}, {s.k, 0}, pr});
      return;
    }
    case FamilyKind::biclustering: {
      const auto& lp = std::get<LabelPair>(cur.payload);
      std::vector<std::pair<LabelState, double>> lo;
      switch (t) {
        case MoveType::relabel:
        case MoveType::swap_labels:
        case MoveType::split:
        case MoveType::merge:
          label_outcomes(t, {lp.rows, cur.tau.first}, f.k_max(), lo);
          for (auto& [s, pr] : lo) out.push_back({LabelPair{s.z, lp.cols}, {s.k, cur.tau.second}, pr});
          return;
        default: {
          MoveType base = MoveType::relabel;
          if (t == MoveType::swap_labels_col) base = MoveType::swap_labels;
          if (t == MoveType::split_col) base = MoveType::split;
          if (t == MoveType::merge_col) base = MoveType::merge;
          label_outcomes(base, {lp.cols, cur.tau.second}, f.l_max(), lo);
          for (auto& [s, pr] : lo) out.push_back({LabelPair{lp.rows, s.z}, {cur.tau.first, s.k}, pr});
          return;
        }
      }
    }
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::besov_level: {
      std::vector<std::pair<std::vector<int>, double>> so;
      support_outcomes(t, std::get<Support>(cur.payload).idx, f.p(), 1, support_cap(f), so);
      for (auto& [s, pr] : so) out.push_back({Support{s}, {static_cast<int>(s.size()), 0}, pr});
      return;
    }
    case FamilyKind::aggregation_regression: {
      const auto& s = std::get<Support>(cur.payload).idx;
      const int rank = f.design_rank();
      const bool full = cur.tau.first == rank;
      if (t == MoveType::jump_full) {
        if (rank < 2) return self();
        if (!full) {
          out.push_back({Support{f.spanning_columns()}, {rank, 0}, 1.0});
          return;
        }
        for (int size = 1; size < rank; ++size) {
          const double pr = 1.0 / ((rank - 1.0) * std::exp(log_binomial(f.p(), size)));
          std::vector<int> c(size);
          for (int i = 0; i < size; ++i) c[i] = i;
          for (;;) {
            out.push_back({Support{c}, {size, 0}, pr});
            int pos = size - 1;
            while (pos >= 0 && c[pos] == f.p() - size + pos) --pos;
            if (pos < 0) break;
            ++c[pos];
            for (int i = pos + 1; i < size; ++i) c[i] = c[i - 1] + 1;
          }
        }
        return;
      }
      if (full) return self();
      std::vector<std::pair<std::vector<int>, double>> so;
      support_outcomes(t, s, f.p(), 1, rank - 1, so);
      for (auto& [x, pr] : so) out.push_back({Support{x}, {static_cast<int>(x.size()), 0}, pr});
      return;
    }
    case FamilyKind::dictionary: {
      const auto& m = std::get<SignMatrix>(cur.payload);
      const int a = cur.tau.first, s = cur.tau.second, d = f.d();
      switch (t) {
        case MoveType::flip:
          for (int row = 0; row < a; ++row)
            for (int col = 0; col < d; ++col)
              for (int nv = -1; nv <= 1; ++nv) {
                if (nv == m.at(row, col)) continue;
                SignMatrix next = m;
                next.v[static_cast<std::size_t>(row) * d + col] = static_cast<std::int8_t>(nv);
                const double pr = 1.0 / (2.0 * a * d);
                if (column_support(next, col) > s)
                  out.push_back({cur.payload, cur.tau, pr});
                else
                  out.push_back({std::move(next), cur.tau, pr});
              }
          return;
        case MoveType::grow_bound:
          if (s >= a) return self();
          out.push_back({m, {a, s + 1}, 1.0});
          return;
        case MoveType::shrink_bound:
          if (s <= 1 || max_support(m) > s - 1) return self();
          out.push_back({m, {a, s - 1}, 1.0});
          return;
        case MoveType::add_atom: {
          if (a >= f.p_max()) return self();
          const double pr = std::pow(3.0, -d);
          std::vector<int> digits(d, 0);
          for (;;) {
            SignMatrix next{a + 1, d, m.v};
            for (int j = 0; j < d; ++j) next.v.push_back(static_cast<std::int8_t>(digits[j] - 1));
            if (max_support(next) > s)
              out.push_back({cur.payload, cur.tau, pr});
            else
              out.push_back({std::move(next), {a + 1, s}, pr});
            int pos = d - 1;
            while (pos >= 0 && digits[pos] == 2) digits[pos--] = 0;
            if (pos < 0) break;
            ++digits[pos];
          }
          return;
        }
        case MoveType::remove_atom: {
          if (a <= 1 || s > a - 1) return self();
          out.push_back({SignMatrix{a - 1, d, std::vector<std::int8_t>(m.v.begin(), m.v.end() - d)}, {a - 1, s}, 1.0});
          return;
        }
        default: throw DomainError("move type does not apply to dictionary codes");
      }
    }
    case FamilyKind::group_two_level: {
      const auto& cells = std::get<CellSet>(cur.payload).cells;
      const int p = f.p(), m = f.m();
      const CellInfo info = cell_info(cells, p, m);
      const int r = static_cast<int>(info.rows.size());
      switch (t) {
        case MoveType::toggle_cell:
          for (int c = 0; c < p * m; ++c) {
            const auto next = toggle(cells, c);
            const double pr = 1.0 / (p * m);
            const ModelIndex tau = next.empty() ? ModelIndex{} : cells_index(next, m);
            if (next.empty() || tau.first > f.r_max())
              out.push_back({cur.payload, cur.tau, pr});
            else
              out.push_back({CellSet{next}, tau, pr});
          }
          return;
        case MoveType::add_row: {
          if (r >= f.r_max() || r >= p) return self();
          for (int i = 0; i < p; ++i) {
            if (info.rows.count(i)) continue;
            const auto next = add_row_cells(cells, i, m);
            out.push_back({CellSet{next}, cells_index(next, m), 1.0 / (p - r)});
          }
          return;
        }
        case MoveType::remove_row: {
          if (info.full_rows.empty()) return self();
          for (int i : info.full_rows) {
            const auto next = remove_row_cells(cells, i, m);
            const double pr = 1.0 / info.full_rows.size();
            if (next.empty())
              out.push_back({cur.payload, cur.tau, pr});
            else
              out.push_back({CellSet{next}, cells_index(next, m), pr});
          }
          return;
        }
        default: throw DomainError("move type does not apply to cell sets");
      }
    }
    case FamilyKind::sobolev_sequence: {
      const int k = cur.tau.first;
      if (t == MoveType::increment) {
        if (k >= f.n()) return self();
        out.push_back({Prefix{k + 1}, {k + 1, 0}, 1.0});
        return;
      }
      if (k <= 1) return self();
      out.push_back({Prefix{k - 1}, {k - 1, 0}, 1.0});
      return;
    }
  }
}

}  // namespace

std::vector<std::pair<MoveType, double>> move_menu(const ModelFamily& f) {
  using M = MoveType;
  switch (f.kind()) {
    case FamilyKind::sbm:
    case FamilyKind::multi_task:
      return {{M::relabel, 0.4}, {M::swap_labels, 0.2}, {M::split, 0.2}, {M::merge, 0.2}};
    case FamilyKind::biclustering:
      return {{M::relabel, 0.2},     {M::swap_labels, 0.1},     {M::split, 0.1},     {M::merge, 0.1},
              {M::relabel_col, 0.2}, {M::swap_labels_col, 0.1}, {M::split_col, 0.1}, {M::merge_col, 0.1}};
    case FamilyKind::sparse_regression:
    case FamilyKind::group_sparsity:
    case FamilyKind::besov_level:
      return {{M::add, 1.0 / 3}, {M::drop, 1.0 / 3}, {M::swap, 1.0 / 3}};
    case FamilyKind::aggregation_regression:
      return {{M::add, 0.3}, {M::drop, 0.3}, {M::swap, 0.3}, {M::jump_full, 0.1}};
    case FamilyKind::dictionary:
      return {{M::flip, 0.5},
              {M::grow_bound, 0.125},
              {M::shrink_bound, 0.125},
              {M::add_atom, 0.125},
              {M::remove_atom, 0.125}};
    case FamilyKind::group_two_level:
      if (f.m() == 1) return {{M::toggle_cell, 1.0}};
      return {{M::toggle_cell, 0.6}, {M::add_row, 0.2}, {M::remove_row, 0.2}};
    case FamilyKind::sobolev_sequence: return {{M::increment, 0.5}, {M::decrement, 0.5}};
  }
  return {};
}

Proposal propose_move(const ModelFamily& f, const Structure& current, Rng& rng) {
  const auto menu = move_menu(f);
  double u = rng.uniform();
  MoveType t = menu.back().first;
  for (const auto& [type, pr] : menu) {
    if (u < pr) {
      t = type;
      break;
    }
    u -= pr;
  }
  return dispatch(f, current, rng, t);
}

Proposal propose_move(const ModelFamily& f, const Structure& current, Rng& rng, MoveType forced) {
  return dispatch(f, current, rng, forced);
}

std::vector<MoveOutcome> enumerate_moves(const ModelFamily& f, const Structure& current) {
  std::vector<MoveOutcome> result;
  std::map<std::string, std::size_t> where;
  for (const auto& [type, pr] : move_menu(f)) {
    std::vector<Outcome> outs;
    outcomes(f, current, type, outs);
    for (auto& o : outs) {
      Structure z{o.tau, std::move(o.payload)};
      const std::string key = structure_key(z);
      auto it = where.find(key);
      if (it == where.end()) {
        where.emplace(key, result.size());
        result.push_back({std::move(z), pr * o.prob});
      } else {
        result[it->second].probability += pr * o.prob;
      }
    }
  }
  return result;
}

}  // namespace slm

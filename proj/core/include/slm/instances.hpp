#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "slm/design.hpp"
#include "slm/family.hpp"
#include "slm/random.hpp"
#include "slm/structure.hpp"

namespace slm {

/// Observation slot of the ordered pair (i, j), i != j, of an n-node graph.
int sbm_pair_index(int n, int i, int j);

/// Raw matrix of X_Z (N x ell) acting on vec(Q). No rank check.
///   sbm            rows are ordered pairs (i, j), i != j, in row-major order; Q is k x k column-major
///   biclustering   rows are cells (i, j), column-major over the n x m matrix; Q is k x l column-major
///   dictionary     theta = Q Z with Q n x p; both vectorized column-major
///   group / multi  Y is n x m column-major; B (group) is |S| x m column-major, Q (multi) is p x k
///   two-level      identity on the listed cells of the p x m matrix (cell = row * m + col,
///                  observation index col * p + row)
Eigen::MatrixXd design_matrix(const ModelFamily& family, const Structure& z);

/// Rank test of X_Z^T X_Z (scale-invariant pivot tolerance).
bool is_member(const ModelFamily& family, const Structure& z);

/// Checked operator. Throws CollinearStructure naming Z when not in Z-bar.
DesignOperator build_design(const ModelFamily& family, const Structure& z);

/// Every element of Z_tau in lexicographic order, each tagged member/collinear.
/// Throws CapExceeded (with the exact count) when |Z_tau| > cap.
std::vector<Structure> enumerate_structures(const ModelFamily& family, const ModelIndex& tau,
                                            std::size_t cap);

/// Exact ln|Z-bar_tau| when it has a closed form (no data dependence);
/// nullopt for designs where membership depends on the columns.
std::optional<double> log_valid_count_closed_form(const ModelFamily& family, const ModelIndex& tau);

/// Whether Z-bar_tau is nonempty. Exact for every family.
bool has_valid_structures(const ModelFamily& family, const ModelIndex& tau);

/// Uniform draw from Z_tau (not filtered).
Structure sample_uniform_structure(const ModelFamily& family, const ModelIndex& tau, Rng& rng);

enum class MoveType {
  relabel,
  swap_labels,
  split,
  merge,
  relabel_col,
  swap_labels_col,
  split_col,
  merge_col,
  add,
  drop,
  swap,
  jump_full,
  flip,
  grow_bound,
  shrink_bound,
  add_atom,
  remove_atom,
  toggle_cell,
  add_row,
  remove_row,
  increment,
  decrement,
};

struct Proposal {
  Structure candidate;
  /// ln q(current | candidate) - ln q(candidate | current)
  double log_ratio = 0.0;
  MoveType type = MoveType::relabel;
  bool self = false;
};

/// Move types of the family with their fixed selection probabilities.
std::vector<std::pair<MoveType, double>> move_menu(const ModelFamily& family);

Proposal propose_move(const ModelFamily& family, const Structure& current, Rng& rng);
/// Same kernel with the move type fixed (bypasses type selection).
Proposal propose_move(const ModelFamily& family, const Structure& current, Rng& rng, MoveType forced);

struct MoveOutcome {
  Structure candidate;
  double probability = 0.0;
};

/// Full proposal distribution from `current`, one entry per (type, detail)
/// outcome, including self-proposals. Used to cross-check propose_move.
std::vector<MoveOutcome> enumerate_moves(const ModelFamily& family, const Structure& current);

/// x* = max{0 <= x <= p : x <= k (n / ln(ep/x))^{q/2}} by bisection.
double effective_sparsity_root(double q, double k, int p, int n);
/// ceil(x*) clamped to [0, p].
int effective_sparsity(double q, double k, int p, int n);

enum class AggregationClass { MS, C, L, Ls, Cs };
double aggregation_rate(AggregationClass cls, int n, int p, int r, int s_star);

/// Signal X_Z(Q).
Eigen::VectorXd signal(const ModelFamily& family, const Structure& z, const Eigen::VectorXd& q);

/// Coefficients embedded in the ambient parameter space (R^p, or R^{p x m}
/// column-major for group families, or R^n for sequence families); nullopt
/// for families without coefficient semantics.
std::optional<Eigen::VectorXd> coefficients(const ModelFamily& family, const Structure& z,
                                            const Eigen::VectorXd& q);

}  // namespace slm

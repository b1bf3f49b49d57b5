#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "jigsaw/compat_mgc.hpp"
#include "jigsaw/core.hpp"

namespace jigsaw {

struct BalancingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// n x m matrix of piece -> position probabilities.
using AssignmentMatrix = Eigen::MatrixXd;

/// Sparse coefficients r_{ij,lambda,mu}: equal to C_R(i, j) when
/// mu = neighbor_R(lambda) and i != j, zero otherwise. Stored as one
/// matrix per relation plus the grid.
struct CompatTensor {
  GridGeometry grid;
  std::array<SparseRowMatrix, 4> coeff;

  int pieces() const noexcept { return grid.size(); }
  const SparseRowMatrix& operator[](Relation r) const { return coeff[static_cast<int>(r)]; }

  /// Logical coefficient lookup; O(log nnz).
  double at(int i, int j, int lambda, int mu) const;
};

/// With `symmetrize`, r <- (r + r^T) / 2 where r^T_{ij,lambda,mu} = r_{ji,mu,lambda};
/// per relation this is C_R <- (C_R + C_{inverse R}^T) / 2.
CompatTensor build_compat_tensor(const CompatibilityTable& c, const GridGeometry& g,
                                 bool symmetrize = false);

/// q_{i,lambda} = sum_R sum_j C_R(i, j) p_{j, neighbor_R(lambda)}.
Eigen::MatrixXd support(const AssignmentMatrix& p, const CompatTensor& r);

/// Multiplicative relaxation labeling update, row by row. Rows whose
/// normalizer falls below 1e-12 are returned unchanged. Entries that were
/// positive are floored at the smallest normal double so that underflow
/// cannot empty a row or column; zero entries stay zero.
AssignmentMatrix rl_step(const AssignmentMatrix& p, const Eigen::MatrixXd& q);

struct Balanced {
  AssignmentMatrix matrix;
  int sweeps = 0;
  double deviation = 0.0;  // max |row or column sum - 1| on exit
  bool converged = false;
};

/// Sinkhorn-Knopp: each sweep rescales columns then rows, so rows are exact
/// on exit and columns are within `tol` when converged. Throws
/// BalancingError on an all-zero row or column.
Balanced sinkhorn(const AssignmentMatrix& p, int max_sweeps, double tol);

/// Optimal linear assignment maximizing sum_i p(i, sigma(i)); requires a
/// square matrix. Ties resolve toward lower piece then lower position index.
Permutation discretize(const AssignmentMatrix& p);

struct SolverConfig {
  std::uint64_t seed = 0;
  double init_jitter = 1e-3;
  int max_iters = 1000;
  int sk_sweeps = 10;  // 0 disables balancing
  double sk_tol = 1e-6;
  double stop_tol = 1e-3;
  bool symmetrize = true;
  /// Per-iteration distance to the nearest permutation needs one assignment
  /// solve per iteration.
  bool trace_distance = true;
};

struct IterationRecord {
  double max_row_entropy = 0.0;
  double local_consistency = 0.0;  // sum_{i,lambda} p q, with p and q before the update
  double permutation_distance = 0.0;  // Frobenius distance to discretize(P) after the update
};

struct SolveReport {
  Permutation final_assignment;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  AssignmentMatrix final_matrix;
};

/// Barycenter start with seeded multiplicative jitter, then support ->
/// rl_step -> sinkhorn until max_i (1 - max_lambda p) < stop_tol or the
/// iteration budget runs out.
SolveReport solve(const CompatibilityTable& c, const GridGeometry& g, const SolverConfig& config = {});

AssignmentMatrix initial_assignment(int n, const SolverConfig& config);

nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base = {});

}  // namespace jigsaw

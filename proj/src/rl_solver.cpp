#include "jigsaw/rl_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jigsaw/rng.hpp"

namespace jigsaw {
namespace {

struct AssignmentSolution {
  std::vector<int> row_to_col;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Shortest augmenting path Hungarian method on a square cost matrix,
// minimizing total cost. Potentials satisfy cost(i,j) - u[i] - v[j] >= 0.
AssignmentSolution hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  AssignmentSolution s;
  s.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) s.row_to_col[match[j] - 1] = j - 1;
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

double row_entropy(const AssignmentMatrix& p, Eigen::Index i) {
  double h = 0.0;
  for (Eigen::Index l = 0; l < p.cols(); ++l) {
    const double x = p(i, l);
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double max_uncertainty(const AssignmentMatrix& p) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) worst = std::max(worst, 1.0 - p.row(i).maxCoeff());
  return worst;
}

double permutation_distance(const AssignmentMatrix& p) {
  const Permutation sigma = discretize(p);
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index l = 0; l < p.cols(); ++l) {
      const double target = sigma[static_cast<int>(i)] == l ? 1.0 : 0.0;
      d2 += (p(i, l) - target) * (p(i, l) - target);
    }
  return std::sqrt(d2);
}

}  // namespace

double CompatTensor::at(int i, int j, int lambda, int mu) const {
  if (i == j) return 0.0;
  for (Relation r : kAllRelations) {
    const auto nb = neighbor_position(lambda, r, grid);
    if (nb && *nb == mu) return (*this)[r].coeff(i, j);
  }
  return 0.0;
}

CompatTensor build_compat_tensor(const CompatibilityTable& c, const GridGeometry& g,
                                 bool symmetrize) {
  if (c.n != g.size()) throw DomainError("compatibility table size does not match grid");
  CompatTensor t;
  t.grid = g;
  for (Relation r : kAllRelations) {
    const auto& m = c[r];
    if (m.rows() != c.n || m.cols() != c.n)
      throw DomainError("compatibility matrix has wrong shape");
    if (symmetrize) {
      SparseRowMatrix inv_t = SparseRowMatrix(c[inverse(r)].transpose());
      t.coeff[static_cast<int>(r)] = 0.5 * (m + inv_t);
    } else {
      t.coeff[static_cast<int>(r)] = m;
    }
    // No self-support.
    t.coeff[static_cast<int>(r)].prune([](Eigen::Index i, Eigen::Index j, double) { return i != j; });
  }
  return t;
}

Eigen::MatrixXd support(const AssignmentMatrix& p, const CompatTensor& r) {
  const int n = r.pieces();
  const int m = r.grid.size();
  if (p.rows() != n || p.cols() != m) throw DomainError("assignment matrix has wrong shape");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, m);
  for (Relation rel : kAllRelations) {
    const auto& c = r[rel];
    if (c.nonZeros() == 0) continue;
    const Eigen::MatrixXd cp = c * p;  // cp(i, mu) = sum_j C(i, j) p(j, mu)
    for (int lambda = 0; lambda < m; ++lambda) {
      if (const auto mu = neighbor_position(lambda, rel, r.grid)) q.col(lambda) += cp.col(*mu);
    }
  }
  return q;
}

AssignmentMatrix rl_step(const AssignmentMatrix& p, const Eigen::MatrixXd& q) {
  constexpr double kFloor = std::numeric_limits<double>::min();
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw DomainError("P and Q differ in shape");
  AssignmentMatrix next = p.cwiseProduct(q);
  for (Eigen::Index i = 0; i < next.rows(); ++i) {
    const double z = next.row(i).sum();
    if (z < 1e-12) {
      next.row(i) = p.row(i);
      continue;
    }
    next.row(i) /= z;
    for (Eigen::Index l = 0; l < next.cols(); ++l)
      if (p(i, l) > 0.0) next(i, l) = std::max(next(i, l), kFloor);
  }
  return next;
}

Balanced sinkhorn(const AssignmentMatrix& p, int max_sweeps, double tol) {
  if (max_sweeps < 1) throw DomainError("sinkhorn needs at least one sweep");
  Balanced b;
  b.matrix = p;
  auto& x = b.matrix;
  for (b.sweeps = 1; b.sweeps <= max_sweeps; ++b.sweeps) {
    for (Eigen::Index l = 0; l < x.cols(); ++l) {
      const double s = x.col(l).sum();
      if (!(s > 0.0)) throw BalancingError("column " + std::to_string(l) + " sums to zero");
      x.col(l) /= s;
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double s = x.row(i).sum();
      if (!(s > 0.0)) throw BalancingError("row " + std::to_string(i) + " sums to zero");
      x.row(i) /= s;
    }
    const double col_dev = (x.colwise().sum().array() - 1.0).abs().maxCoeff();
    const double row_dev = (x.rowwise().sum().array() - 1.0).abs().maxCoeff();
    b.deviation = std::max(col_dev, row_dev);
    if (b.deviation <= tol) {
      b.converged = true;
      return b;
    }
  }
  b.sweeps = max_sweeps;
  return b;
}

Permutation discretize(const AssignmentMatrix& p) {
  const int n = static_cast<int>(p.rows());
  if (p.cols() != n) throw DomainError("discretize needs a square matrix");
  if (n == 0) return Permutation{};
  const Eigen::MatrixXd cost = -p;
  AssignmentSolution s = hungarian(cost);

  // Every optimal assignment is a perfect matching on the tight edges of
  // the optimal duals. Walk pieces in order and give each the lowest tight
  // position that still leaves a perfect matching for the later pieces.
  const double scale = 1.0 + cost.cwiseAbs().maxCoeff();
  const double eps = 1e-12 * scale * n;
  std::vector<std::vector<int>> tight(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (cost(i, j) - s.u[i] - s.v[j] <= eps) tight[i].push_back(j);

  std::vector<int> row_to_col = s.row_to_col;
  std::vector<int> col_to_row(n);
  for (int i = 0; i < n; ++i) col_to_row[row_to_col[i]] = i;

  std::vector<char> visited(n);
  // Re-match `row` (whose column was taken) using rows > fixed_upto only,
  // ending at the freed column `target`.
  auto augment = [&](auto&& self, int row, int fixed_upto, int target) -> bool {
    for (int j : tight[row]) {
      if (visited[j]) continue;
      visited[j] = 1;
      if (j == target) {
        row_to_col[row] = j;
        col_to_row[j] = row;
        return true;
      }
      const int other = col_to_row[j];
      if (other <= fixed_upto) continue;
      if (self(self, other, fixed_upto, target)) {
        row_to_col[row] = j;
        col_to_row[j] = row;
        return true;
      }
    }
    return false;
  };

  for (int i = 0; i < n; ++i) {
    for (int j : tight[i]) {
      if (row_to_col[i] == j) break;
      const int holder = col_to_row[j];
      if (holder < i) continue;
      const int freed = row_to_col[i];
      // Tentatively move i to j; `holder` must find a path to `freed`.
      const auto saved_r = row_to_col;
      const auto saved_c = col_to_row;
      row_to_col[i] = j;
      col_to_row[j] = i;
      std::fill(visited.begin(), visited.end(), 0);
      visited[j] = 1;
      if (augment(augment, holder, i, freed)) break;
      row_to_col = saved_r;
      col_to_row = saved_c;
    }
  }
  return Permutation(std::move(row_to_col));
}

AssignmentMatrix initial_assignment(int n, const SolverConfig& config) {
  AssignmentMatrix p = AssignmentMatrix::Constant(n, n, n > 0 ? 1.0 / n : 0.0);
  if (config.init_jitter > 0.0) {
    Rng rng(config.seed);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) p(i, l) *= 1.0 + rng.uniform(-config.init_jitter, config.init_jitter);
  }
  for (int i = 0; i < n; ++i) p.row(i) /= p.row(i).sum();
  return p;
}

SolveReport solve(const CompatibilityTable& c, const GridGeometry& g, const SolverConfig& config) {
  const int n = g.size();
  if (c.n != n) throw DomainError("compatibility table size does not match grid");
  const CompatTensor r = build_compat_tensor(c, g, config.symmetrize);

  AssignmentMatrix p = initial_assignment(n, config);
  if (config.sk_sweeps > 0 && n > 0) p = sinkhorn(p, config.sk_sweeps, config.sk_tol).matrix;

  SolveReport report;
  while (report.iterations < config.max_iters && max_uncertainty(p) >= config.stop_tol) {
    const Eigen::MatrixXd q = support(p, r);
    IterationRecord rec;
    rec.local_consistency = p.cwiseProduct(q).sum();
    p = rl_step(p, q);
    if (config.sk_sweeps > 0) p = sinkhorn(p, config.sk_sweeps, config.sk_tol).matrix;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      rec.max_row_entropy = std::max(rec.max_row_entropy, row_entropy(p, i));
    if (config.trace_distance) rec.permutation_distance = permutation_distance(p);
    report.trace.push_back(rec);
    ++report.iterations;
  }
  report.final_assignment = discretize(p);
  report.final_matrix = std::move(p);
  return report;
}

nlohmann::json to_json(const SolveReport& report) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& rec : report.trace)
    trace.push_back({{"max_row_entropy", rec.max_row_entropy},
                     {"local_consistency", rec.local_consistency},
                     {"permutation_distance", rec.permutation_distance}});
  return {{"final_assignment", report.final_assignment.mapping()},
          {"iterations", report.iterations},
          {"trace", std::move(trace)}};
}

nlohmann::json to_json(const SolverConfig& c) {
  return {{"seed", c.seed},           {"init_jitter", c.init_jitter}, {"max_iters", c.max_iters},
          {"sk_sweeps", c.sk_sweeps}, {"sk_tol", c.sk_tol},           {"stop_tol", c.stop_tol},
          {"symmetrize", c.symmetrize}, {"trace_distance", c.trace_distance}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base) {
  base.seed = j.value("seed", base.seed);
  base.init_jitter = j.value("init_jitter", base.init_jitter);
  base.max_iters = j.value("max_iters", base.max_iters);
  base.sk_sweeps = j.value("sk_sweeps", base.sk_sweeps);
  base.sk_tol = j.value("sk_tol", base.sk_tol);
  base.stop_tol = j.value("stop_tol", base.stop_tol);
  base.symmetrize = j.value("symmetrize", base.symmetrize);
  base.trace_distance = j.value("trace_distance", base.trace_distance);
  return base;
}

}  // namespace jigsaw

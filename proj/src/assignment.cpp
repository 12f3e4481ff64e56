#include "gwmv/ot.hpp"

#include "gwmv/error.hpp"

#include <limits>

namespace gwmv {

// Shortest augmenting path assignment in the Jonker-Volgenant / Kuhn-Munkres
// dual form: u_i + v_j <= c_ij everywhere, with equality on matched pairs.
// Rows are first matched greedily against the (possibly warm) column duals;
// each remaining free row is inserted by one Dijkstra-like sweep.
std::vector<Index> AssignmentSolver::solve(const Matrix& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw InvalidInput("assignment cost must be square");
  if (!cost.allFinite()) throw InvalidInput("assignment cost has non-finite entries");
  if (n == 0) return {};

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor c = cost;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  Vector& v = col_dual_;
  if (v.size() != n) {
    v = c.row(0).transpose();
    for (Index i = 1; i < n; ++i) v = v.cwiseMin(c.row(i).transpose());
  }
  Vector u(n);
  std::vector<Index> col_row(static_cast<std::size_t>(n) + 1, -1);  // slot n is the virtual root
  std::vector<Index> free_rows;

  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double best_val = kInf;
    for (Index j = 0; j < n; ++j) {
      const double r = c(i, j) - v(j);
      if (r < best_val) {
        best_val = r;
        best = j;
      }
    }
    u(i) = best_val;
    if (col_row[best] < 0)
      col_row[best] = i;
    else
      free_rows.push_back(i);
  }

  Vector dual_v(n + 1);
  dual_v.head(n) = v;
  dual_v(n) = 0.0;
  std::vector<double> minv(static_cast<std::size_t>(n));
  std::vector<Index> way(static_cast<std::size_t>(n) + 1);
  std::vector<char> used(static_cast<std::size_t>(n) + 1);

  for (Index r : free_rows) {
    col_row[n] = r;
    Index j0 = n;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = col_row[j0];
      double delta = kInf;
      Index j1 = -1;
      const double ui = u(i0);
      for (Index j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0, j) - ui - dual_v(j);
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u(col_row[j]) += delta;
          dual_v(j) -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_row[j0] >= 0);
    do {
      const Index j1 = way[j0];
      col_row[j0] = col_row[j1];
      j0 = j1;
    } while (j0 != n);
  }
  v = dual_v.head(n);

  std::vector<Index> row_col(static_cast<std::size_t>(n), -1);
  for (Index j = 0; j < n; ++j) row_col[col_row[j]] = j;
  return row_col;
}

}  // namespace gwmv

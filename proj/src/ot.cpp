#include "gwmv/ot.hpp"

#include "gwmv/error.hpp"
#include "gwmv/relational.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gwmv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_marginals(const Matrix& cost, const Vector& a, const Vector& b) {
  if (a.size() != cost.rows() || b.size() != cost.cols())
    throw InvalidInput(fmt::format("marginal sizes ({}, {}) do not match a {}x{} cost", a.size(), b.size(),
                                   cost.rows(), cost.cols()));
  if (cost.rows() == 0 || cost.cols() == 0) throw InvalidInput("empty cost matrix");
  if (!cost.allFinite()) throw InvalidInput("cost matrix has non-finite entries");
  if ((a.array() < 0.0).any() || (b.array() < 0.0).any() || !a.allFinite() || !b.allFinite())
    throw InvalidInput("marginals must be finite and nonnegative");
  const double sa = a.sum(), sb = b.sum();
  if (std::abs(sa - sb) > 1e-6) throw InvalidInput(fmt::format("infeasible marginals: masses {} and {} differ", sa, sb));
  if (std::abs(sa - 1.0) > 1e-6) throw InvalidInput(fmt::format("marginals must sum to 1, got {}", sa));
}

bool is_uniform(const Vector& w) {
  const double target = 1.0 / static_cast<double>(w.size());
  return ((w.array() - target).abs() <= 1e-15).all();
}

// Successive shortest paths on the bipartite transport network, with
// Johnson potentials keeping reduced costs nonnegative. Dense Dijkstra:
// O((n + m)^2) per augmentation.
Matrix transport_ssp(const Matrix& cost, const Vector& a, Vector b, int& augmentations) {
  const Index n = cost.rows(), m = cost.cols();
  b *= a.sum() / b.sum();
  const double tiny = 1e-15;

  Matrix flow = Matrix::Zero(n, m);
  Vector supply = a, demand = b;
  Vector pot_src = Vector::Zero(n);
  Vector pot_snk = cost.colwise().minCoeff().transpose();

  Vector dist_src(n), dist_snk(m);
  std::vector<Index> pred_src(n), pred_snk(m);  // pred_snk: source feeding the sink; pred_src: sink (backward edge)
  std::vector<char> done_src(n), done_snk(m);
  augmentations = 0;

  while (true) {
    dist_src.setConstant(kInf);
    dist_snk.setConstant(kInf);
    std::fill(done_src.begin(), done_src.end(), 0);
    std::fill(done_snk.begin(), done_snk.end(), 0);
    bool any = false;
    for (Index i = 0; i < n; ++i)
      if (supply(i) > tiny) {
        dist_src(i) = 0.0;
        pred_src[i] = -1;
        any = true;
      }
    if (!any) break;

    Index target = -1;
    while (true) {
      double best = kInf;
      Index node = -1;
      bool is_sink = false;
      for (Index i = 0; i < n; ++i)
        if (!done_src[i] && dist_src(i) < best) {
          best = dist_src(i);
          node = i;
          is_sink = false;
        }
      for (Index j = 0; j < m; ++j)
        if (!done_snk[j] && dist_snk(j) < best) {
          best = dist_snk(j);
          node = j;
          is_sink = true;
        }
      if (node < 0) break;
      if (is_sink) {
        done_snk[node] = 1;
        if (demand(node) > tiny) {
          target = node;
          break;
        }
        for (Index i = 0; i < n; ++i) {
          if (done_src[i] || flow(i, node) <= 0.0) continue;
          const double rc = std::max(0.0, -cost(i, node) + pot_snk(node) - pot_src(i));
          if (best + rc < dist_src(i)) {
            dist_src(i) = best + rc;
            pred_src[i] = node;
          }
        }
      } else {
        done_src[node] = 1;
        for (Index j = 0; j < m; ++j) {
          if (done_snk[j]) continue;
          const double rc = std::max(0.0, cost(node, j) + pot_src(node) - pot_snk(j));
          if (best + rc < dist_snk(j)) {
            dist_snk(j) = best + rc;
            pred_snk[j] = node;
          }
        }
      }
    }
    if (target < 0) break;

    const double cap = dist_snk(target);
    for (Index i = 0; i < n; ++i) pot_src(i) += std::min(dist_src(i), cap);
    for (Index j = 0; j < m; ++j) pot_snk(j) += std::min(dist_snk(j), cap);

    // Walk back to find the bottleneck.
    double delta = demand(target);
    Index j = target;
    Index i = pred_snk[j];
    while (true) {
      if (pred_src[i] < 0) {
        delta = std::min(delta, supply(i));
        break;
      }
      const Index jb = pred_src[i];
      delta = std::min(delta, flow(i, jb));
      j = jb;
      i = pred_snk[j];
    }
    // Apply.
    j = target;
    i = pred_snk[j];
    demand(target) = demand(target) - delta <= tiny ? 0.0 : demand(target) - delta;
    while (true) {
      flow(i, j) += delta;
      if (pred_src[i] < 0) {
        supply(i) = supply(i) - delta <= tiny ? 0.0 : supply(i) - delta;
        break;
      }
      const Index jb = pred_src[i];
      flow(i, jb) -= delta;
      if (flow(i, jb) <= tiny) flow(i, jb) = 0.0;
      j = jb;
      i = pred_snk[j];
    }
    ++augmentations;
  }
  return flow;
}

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  Index find(Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(Index x, Index y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    parent[y] = x;
    return true;
  }
};

// Cancels cycles in the support graph until it is a forest, which makes the
// plan a vertex of the transport polytope. Every support arc of an optimal
// plan has zero reduced cost, so each cycle is cost-neutral up to rounding;
// flow is pushed in the non-increasing direction.
void make_vertex(Matrix& plan, const Matrix& cost) {
  const Index n = plan.rows(), m = plan.cols();
  bool changed = true;
  while (changed) {
    changed = false;
    UnionFind uf(n + m);
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n + m));
    for (Index i = 0; i < n && !changed; ++i) {
      for (Index j = 0; j < m; ++j) {
        if (plan(i, j) <= 0.0) continue;
        const Index s = i, t = n + j;
        if (uf.unite(s, t)) {
          adj[s].push_back(t);
          adj[t].push_back(s);
          continue;
        }
        // Path t -> s in the forest closes a cycle with arc (s, t).
        std::vector<Index> prev(static_cast<std::size_t>(n + m), -2);
        std::vector<Index> queue{t};
        prev[t] = -1;
        for (std::size_t q = 0; q < queue.size() && prev[s] == -2; ++q)
          for (Index w : adj[queue[q]])
            if (prev[w] == -2) {
              prev[w] = queue[q];
              queue.push_back(w);
            }
        // Arcs along the cycle: (s,t) gets +, then alternate.
        std::vector<std::pair<Index, Index>> arcs{{i, j}};
        for (Index x = s; prev[x] != -1; x = prev[x]) {
          const Index y = prev[x];
          arcs.emplace_back(x < n ? x : y, x < n ? y - n : x - n);
        }
        double dcost = 0.0;
        for (std::size_t k = 0; k < arcs.size(); ++k)
          dcost += (k % 2 == 0 ? 1.0 : -1.0) * cost(arcs[k].first, arcs[k].second);
        const double sign = dcost <= 0.0 ? 1.0 : -1.0;
        double theta = kInf;
        std::size_t blocking = 0;
        for (std::size_t k = 0; k < arcs.size(); ++k) {
          const double s_k = k % 2 == 0 ? sign : -sign;
          if (s_k < 0 && plan(arcs[k].first, arcs[k].second) < theta) {
            theta = plan(arcs[k].first, arcs[k].second);
            blocking = k;
          }
        }
        for (std::size_t k = 0; k < arcs.size(); ++k) {
          const double s_k = k % 2 == 0 ? sign : -sign;
          double& p = plan(arcs[k].first, arcs[k].second);
          p = k == blocking ? 0.0 : std::max(0.0, p + s_k * theta);
        }
        changed = true;
        break;
      }
    }
  }
}

}  // namespace

Vector uniform_weights(Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

double Coupling::marginal_violation() const {
  const double row = (plan.rowwise().sum() - a).cwiseAbs().maxCoeff();
  const double col = (plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
  return std::max(row, col);
}

Coupling Coupling::product(const Vector& a, const Vector& b) { return Coupling{a * b.transpose(), a, b}; }

Coupling Coupling::identity(Index n) {
  const Vector w = uniform_weights(n);
  return Coupling{Matrix(w.asDiagonal()), w, w};
}

const char* to_string(OtSolver s) { return s == OtSolver::entropic ? "entropic" : "exact"; }

OtSolver ot_solver_from_string(const std::string& s) {
  if (s == "exact") return OtSolver::exact;
  if (s == "entropic") return OtSolver::entropic;
  throw InvalidInput("unknown OT solver '" + s + "' (expected exact|entropic)");
}

OtResult solve_exact_ot(const Matrix& cost, const Vector& a, const Vector& b) {
  check_marginals(cost, a, b);
  OtResult out;
  const Index n = cost.rows(), m = cost.cols();
  if (n == m && is_uniform(a) && is_uniform(b)) {
    AssignmentSolver lap;
    const auto match = lap.solve(cost);
    Matrix plan = Matrix::Zero(n, m);
    for (Index i = 0; i < n; ++i) plan(i, match[i]) = a(i);
    out.coupling = Coupling{std::move(plan), a, b};
    out.iterations = static_cast<int>(n);
  } else {
    int augmentations = 0;
    Matrix plan = transport_ssp(cost, a, b, augmentations);
    make_vertex(plan, cost);
    out.coupling = Coupling{std::move(plan), a, b};
    out.iterations = augmentations;
  }
  out.objective = out.coupling.plan.cwiseProduct(cost).sum();
  return out;
}

double default_epsilon(const Matrix& cost) {
  std::vector<double> vals(cost.data(), cost.data() + cost.size());
  auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  double med = std::abs(*mid);
  if (med <= 0.0) med = cost.cwiseAbs().mean();
  if (med <= 0.0) med = 1.0;
  return 5e-3 * med;
}

namespace {

double log_sum_exp(const double* vals, Index count, Index stride) {
  double mx = -kInf;
  for (Index k = 0; k < count; ++k) mx = std::max(mx, vals[k * stride]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (Index k = 0; k < count; ++k) s += std::exp(vals[k * stride] - mx);
  return mx + std::log(s);
}

// Log-domain Sinkhorn on dual potentials f, g.
OtResult sinkhorn_log(const Matrix& cost, const Vector& a, const Vector& b, double eps, const SinkhornOptions& opts) {
  const Index n = cost.rows(), m = cost.cols();
  const Vector log_a = a.array().log();
  const Vector log_b = b.array().log();
  Vector f = Vector::Zero(n), g = Vector::Zero(m);
  Matrix work(n, m);
  OtResult out;
  out.converged = false;
  double err = kInf;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    // f update: rows.
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < n; ++i) work(i, j) = (g(j) - cost(i, j)) / eps;
    for (Index i = 0; i < n; ++i)
      f(i) = a(i) > 0.0 ? eps * (log_a(i) - log_sum_exp(work.data() + i, m, n)) : -kInf;
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < n; ++i) work(i, j) = (f(i) - cost(i, j)) / eps;
    for (Index j = 0; j < m; ++j)
      g(j) = b(j) > 0.0 ? eps * (log_b(j) - log_sum_exp(work.data() + j * n, n, 1)) : -kInf;
    if (it % 10 == 9 || it + 1 == opts.max_iter) {
      double row_err = 0.0;
      for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Index j = 0; j < m; ++j) s += std::exp((f(i) + g(j) - cost(i, j)) / eps);
        row_err += std::abs(s - a(i));
      }
      err = row_err;
      if (err < opts.tol) {
        out.converged = true;
        ++it;
        break;
      }
    }
  }
  Matrix plan(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) plan(i, j) = std::exp((f(i) + g(j) - cost(i, j)) / eps);
  out.coupling = Coupling{std::move(plan), a, b};
  out.iterations = it;
  out.objective = out.coupling.plan.cwiseProduct(cost).sum();
  return out;
}

}  // namespace

OtResult solve_entropic_ot(const Matrix& cost, const Vector& a, const Vector& b, const SinkhornOptions& opts) {
  check_marginals(cost, a, b);
  const double eps = opts.epsilon > 0.0 ? opts.epsilon : default_epsilon(cost);
  // Shifting C by a constant leaves the plan unchanged and keeps exp(-C/eps) <= 1.
  const Matrix shifted = cost.array() - cost.minCoeff();
  const Matrix kernel = (-shifted / eps).array().exp();
  const bool underflow = (kernel.rowwise().maxCoeff().array() < 1e-200).any() ||
                         (kernel.colwise().maxCoeff().array() < 1e-200).any() ||
                         kernel.minCoeff() < 1e-250;
  if (underflow) {
    auto out = sinkhorn_log(shifted, a, b, eps, opts);
    out.objective = out.coupling.plan.cwiseProduct(cost).sum();
    return out;
  }

  const Index n = cost.rows(), m = cost.cols();
  Vector u = Vector::Ones(n), v = Vector::Ones(m);
  OtResult out;
  out.converged = false;
  int it = 0;
  bool failed = false;
  for (; it < opts.max_iter; ++it) {
    const Vector kv = kernel * v;
    u = a.array() / kv.array();
    const Vector ktu = kernel.transpose() * u;
    v = b.array() / ktu.array();
    if (!u.allFinite() || !v.allFinite()) {
      failed = true;
      break;
    }
    if (it % 10 == 9 || it + 1 == opts.max_iter) {
      const Vector rows = u.array() * (kernel * v).array();
      if ((rows - a).cwiseAbs().sum() < opts.tol) {
        out.converged = true;
        ++it;
        break;
      }
    }
  }
  if (failed) {
    auto log_out = sinkhorn_log(shifted, a, b, eps, opts);
    log_out.objective = log_out.coupling.plan.cwiseProduct(cost).sum();
    return log_out;
  }
  out.coupling = Coupling{u.asDiagonal() * kernel * v.asDiagonal(), a, b};
  out.iterations = it;
  out.objective = out.coupling.plan.cwiseProduct(cost).sum();
  return out;
}

double wasserstein_p(const Matrix& x, const Matrix& y, double p) {
  if (!(p >= 1.0)) throw InvalidInput("Wasserstein order p must be >= 1");
  if (x.cols() != y.cols())
    throw InvalidInput(fmt::format("Wasserstein needs a shared ambient space: dimensions {} and {} differ", x.cols(),
                                   y.cols()));
  if (x.rows() == 0 || y.rows() == 0) throw InvalidInput("Wasserstein of an empty point set");
  Matrix cost(x.rows(), y.rows());
  for (Index j = 0; j < y.rows(); ++j)
    for (Index i = 0; i < x.rows(); ++i) cost(i, j) = std::pow((x.row(i) - y.row(j)).norm(), p);
  const auto res = solve_exact_ot(cost, uniform_weights(x.rows()), uniform_weights(y.rows()));
  return std::pow(std::max(0.0, res.objective), 1.0 / p);
}

double wasserstein_p(const SampleMatrix& x, const SampleMatrix& y, double p) {
  return wasserstein_p(x.values(), y.values(), p);
}

}  // namespace gwmv

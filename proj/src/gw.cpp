#include "gwmv/gw.hpp"

#include "gwmv/error.hpp"
#include "gwmv/geometry.hpp"
#include "gwmv/multiview.hpp"
#include "gwmv/relational.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace gwmv {

void GwConfig::validate() const {
  if (!(outer_tol > 0.0)) throw InvalidInput("GW outer_tol must be > 0");
  if (n_restarts < 1) throw InvalidInput("GW n_restarts must be >= 1");
  if (outer_max_iter < 1) throw InvalidInput("GW outer_max_iter must be >= 1");
}

const char* to_string(MdsInit init) {
  switch (init) {
    case MdsInit::classical_mds: return "cmds";
    case MdsInit::random_gaussian: return "gaussian";
    case MdsInit::provided: return "provided";
  }
  return "cmds";
}

MdsInit mds_init_from_string(const std::string& s) {
  if (s == "cmds" || s == "classical_mds") return MdsInit::classical_mds;
  if (s == "gaussian" || s == "random_gaussian") return MdsInit::random_gaussian;
  if (s == "provided") return MdsInit::provided;
  throw InvalidInput("unknown init '" + s + "' (expected cmds|gaussian)");
}

void MdsConfig::validate(Index n) const {
  if (dim < 1) throw InvalidInput("embedding dimension must be >= 1");
  if (dim >= n) throw InvalidInput(fmt::format("embedding dimension {} must be smaller than n = {}", dim, n));
  if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be > 0");
  if (max_epochs < 1) throw InvalidInput("max_epochs must be >= 1");
  if (!(epoch_tol > 0.0)) throw InvalidInput("epoch_tol must be > 0");
  if (inner_steps < 1) throw InvalidInput("inner_steps must be >= 1");
  if (init == MdsInit::provided) {
    if (!initial) throw InvalidInput("init 'provided' needs initial coordinates");
    if (initial->rows() != n || initial->cols() != dim)
      throw InvalidInput(fmt::format("initial coordinates are {}x{}, expected {}x{}", initial->rows(),
                                     initial->cols(), n, dim));
  }
}

namespace {

// Nonzero entries of a plan, column-major order.
struct Support {
  std::vector<Index> row, col;
  std::vector<double> val;
  std::size_t size() const { return val.size(); }
};

Support support_of(const Matrix& plan) {
  Support s;
  for (Index j = 0; j < plan.cols(); ++j)
    for (Index i = 0; i < plan.rows(); ++i)
      if (plan(i, j) != 0.0) {
        s.row.push_back(i);
        s.col.push_back(j);
        s.val.push_back(plan(i, j));
      }
  return s;
}

// O(nnz^2) beats the O(n m (n + m)) dense contraction for sparse plans.
bool prefer_sparse(std::size_t nnz, Index n, Index m) {
  const double k = static_cast<double>(nnz);
  return k * k < 0.5 * static_cast<double>(n) * static_cast<double>(m) * static_cast<double>(n + m);
}

// dx * plan * dy
Matrix contract(const Matrix& dx, const Matrix& plan, const Support& s, const Matrix& dy) {
  if (prefer_sparse(s.size(), plan.rows(), plan.cols())) {
    Matrix pd = Matrix::Zero(plan.rows(), dy.cols());
    for (std::size_t k = 0; k < s.size(); ++k) pd.row(s.row[k]) += s.val[k] * dy.row(s.col[k]);
    return dx * pd;
  }
  return dx * (plan * dy);
}

// <plan, dx plan dy> = sum_{(i,j),(l,k)} plan_ij plan_lk dx_il dy_jk
double cross_term(const Matrix& dx, const Matrix& plan, const Support& s, const Matrix& dy) {
  if (prefer_sparse(s.size(), plan.rows(), plan.cols())) {
    double total = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a) {
      const double* dx_col = dx.data() + s.row[a] * dx.rows();
      const double* dy_col = dy.data() + s.col[a] * dy.rows();
      double acc = 0.0;
      for (std::size_t b = 0; b < s.size(); ++b) acc += s.val[b] * dx_col[s.row[b]] * dy_col[s.col[b]];
      total += s.val[a] * acc;
    }
    return total;
  }
  return plan.cwiseProduct(dx * plan * dy).sum();
}

// plan^T * dx * plan
Matrix plan_gram(const Matrix& dx, const Matrix& plan, const Support& s) {
  if (prefer_sparse(s.size(), plan.rows(), plan.cols())) {
    Matrix g = Matrix::Zero(plan.cols(), plan.cols());
    for (std::size_t b = 0; b < s.size(); ++b) {
      const double* dx_col = dx.data() + s.row[b] * dx.rows();
      for (std::size_t a = 0; a < s.size(); ++a) g(s.col[a], s.col[b]) += s.val[a] * s.val[b] * dx_col[s.row[a]];
    }
    return g;
  }
  return plan.transpose() * (dx * plan);
}

double squared_mass_term(const Matrix& d, const Vector& w) { return w.dot(d.cwiseAbs2() * w); }

Matrix pairwise(const Matrix& y) {
  const Index n = y.rows();
  const Matrix yt = y.transpose();
  Matrix d = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) d(i, j) = (yt.col(i) - yt.col(j)).norm();
  return d.selfadjointView<Eigen::Lower>();
}

double objective_from_parts(const Matrix& dx, const Matrix& dy, const Matrix& plan, const Support& s) {
  const Vector p = plan.rowwise().sum();
  const Vector q = plan.colwise().sum().transpose();
  const double value = squared_mass_term(dx, p) + squared_mass_term(dy, q) - 2.0 * cross_term(dx, plan, s, dy);
  return std::max(0.0, value);
}

// Linear minimization oracle over the transport polytope.
class LinearOracle {
 public:
  explicit LinearOracle(const GwConfig& cfg) : kind_(cfg.inner_ot), epsilon_(cfg.epsilon) {}

  Matrix solve(const Matrix& cost, const Vector& a, const Vector& b) {
    if (kind_ == OtSolver::entropic) {
      SinkhornOptions opts;
      opts.epsilon = epsilon_;
      auto res = solve_entropic_ot(cost, a, b, opts);
      if (!res.coupling.plan.allFinite()) throw NumericalError("entropic inner OT produced a non-finite plan");
      return std::move(res.coupling.plan);
    }
    const Index n = cost.rows();
    const double u = 1.0 / static_cast<double>(n);
    if (n == cost.cols() && ((a.array() - u).abs() <= 1e-15).all() && ((b.array() - u).abs() <= 1e-15).all()) {
      const auto match = lap_.solve(cost);
      Matrix plan = Matrix::Zero(n, n);
      for (Index i = 0; i < n; ++i) plan(i, match[i]) = a(i);
      return plan;
    }
    return solve_exact_ot(cost, a, b).coupling.plan;
  }

 private:
  OtSolver kind_;
  double epsilon_;
  AssignmentSolver lap_;
};

struct StepOutcome {
  double tau = 0.0;
  double objective = 0.0;
};

// One Frank-Wolfe step on the plan with dx, dy fixed. `plan` is updated in
// place; the returned objective is the exact quadratic evaluated at tau.
StepOutcome cg_step(const Matrix& dx, const Matrix& dy, Coupling& pi, LinearOracle& oracle, double current) {
  const Support s = support_of(pi.plan);
  const Matrix m = contract(dx, pi.plan, s, dy);
  const Vector cx = dx.cwiseAbs2() * pi.a;
  const Vector cy = dy.cwiseAbs2() * pi.b;
  Matrix grad = -4.0 * m;
  grad.colwise() += cx;
  grad.rowwise() += cy.transpose();

  const Matrix target = oracle.solve(grad, pi.a, pi.b);
  const Matrix delta = target - pi.plan;
  const Support sd = support_of(delta);
  if (sd.size() == 0) return {0.0, current};

  const double lin = grad.cwiseProduct(delta).sum();
  const double quad = -2.0 * cross_term(dx, delta, sd, dy);
  double tau;
  if (quad > 0.0) {
    tau = std::clamp(-lin / (2.0 * quad), 0.0, 1.0);
  } else {
    tau = quad + lin < 0.0 ? 1.0 : 0.0;
  }
  if (tau <= 0.0) return {0.0, current};
  if (tau >= 1.0)
    pi.plan = target;
  else
    pi.plan += tau * delta;
  return {tau, current + quad * tau * tau + lin * tau};
}

bool uniform_square(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  const double u = 1.0 / static_cast<double>(a.size());
  return ((a.array() - u).abs() <= 1e-15).all() && ((b.array() - u).abs() <= 1e-15).all();
}

Coupling random_permutation_plan(Index n, std::mt19937_64& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Vector w = uniform_weights(n);
  Matrix plan = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) plan(i, perm[i]) = w(i);
  return Coupling{std::move(plan), w, w};
}

}  // namespace

double gw_objective(const Matrix& dx, const Matrix& dy, const Matrix& plan) {
  if (dx.rows() != dx.cols() || dy.rows() != dy.cols() || plan.rows() != dx.rows() || plan.cols() != dy.rows())
    throw InvalidInput(fmt::format("gw_objective shape mismatch: dx {}x{}, dy {}x{}, plan {}x{}", dx.rows(),
                                   dx.cols(), dy.rows(), dy.cols(), plan.rows(), plan.cols()));
  return objective_from_parts(dx, dy, plan, support_of(plan));
}

double gw_objective(const RelationalMatrix& dx, const RelationalMatrix& dy, const Coupling& plan) {
  return gw_objective(dx.values(), dy.values(), plan.plan);
}

GwResult gw_distance(const RelationalMatrix& dx, const RelationalMatrix& dy, const GwConfig& cfg,
                     const std::optional<Coupling>& init) {
  cfg.validate();
  const Index n = dx.size(), m = dy.size();
  const Vector a = init ? init->a : uniform_weights(n);
  const Vector b = init ? init->b : uniform_weights(m);
  if (init && (init->rows() != n || init->cols() != m))
    throw InvalidInput(fmt::format("initial plan is {}x{}, expected {}x{}", init->rows(), init->cols(), n, m));

  std::mt19937_64 rng(cfg.seed);
  GwResult best;
  bool have_best = false;
  for (int r = 0; r < cfg.n_restarts; ++r) {
    Coupling pi;
    if (r == 0 && init) {
      pi = *init;
    } else if (uniform_square(a, b)) {
      if (r == 0) pi = Coupling::identity(n);
      else if (r == 1) pi = Coupling::product(a, b);
      else pi = random_permutation_plan(n, rng);
    } else {
      if (r > 0) break;  // the product plan is the only deterministic start
      pi = Coupling::product(a, b);
    }

    LinearOracle oracle(cfg);
    double obj = gw_objective(dx, dy, pi);
    bool converged = false;
    int it = 0;
    for (; it < cfg.outer_max_iter; ++it) {
      const double prev = obj;
      const auto step = cg_step(dx.values(), dy.values(), pi, oracle, obj);
      if (step.tau <= 0.0) {
        converged = true;
        break;
      }
      obj = gw_objective(dx, dy, pi);
      if (std::abs(prev - obj) <= cfg.outer_tol * std::max(prev, 1e-300)) {
        converged = true;
        ++it;
        break;
      }
    }
    if (!have_best || obj < best.gw_sq) {
      best = GwResult{std::move(pi), obj, converged, it};
      have_best = true;
    }
  }
  best.gw_sq = std::max(0.0, best.gw_sq);
  return best;
}

double embedding_objective(const Matrix& dx, const Matrix& plan, const Matrix& y) {
  return gw_objective(dx, pairwise(y), plan);
}

Matrix embedding_gradient(const Matrix& dx, const Matrix& plan, const Matrix& y) {
  const Index m = y.rows();
  if (plan.rows() != dx.rows() || plan.cols() != m)
    throw InvalidInput("embedding_gradient: plan shape does not match dx and y");
  const Matrix dy = pairwise(y);
  const Matrix gram = plan_gram(dx, plan, support_of(plan));
  const Vector q = plan.colwise().sum().transpose();
  Matrix grad = Matrix::Zero(m, y.cols());
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < m; ++k) {
      if (k == j || dy(j, k) <= 0.0) continue;
      grad.row(j) += 4.0 * (q(j) * q(k) - gram(j, k) / dy(j, k)) * (y.row(j) - y.row(k));
    }
  return grad;
}

namespace {

struct EpochState {
  Matrix y;
  std::vector<Coupling> plans;
  double objective = 0.0;
};

double weighted_mass_terms(std::span<const RelationalMatrix> dxs, std::span<const double> lambda,
                           const std::vector<Coupling>& plans) {
  double total = 0.0;
  for (std::size_t v = 0; v < dxs.size(); ++v)
    total += lambda[v] * squared_mass_term(dxs[v].values(), plans[v].plan.rowwise().sum());
  return total;
}

// Coordinate phase: `steps` preconditioned gradient steps against the fixed
// lambda-weighted plan Gram matrix. Returns the objective at the new y.
double coordinate_phase(Matrix& y, const Matrix& gram, const Vector& q, double rate, int steps, double mass_x) {
  const Index m = y.rows();
  Matrix dy = pairwise(y);
  const Vector precond = (q * q.sum()).cwiseInverse();
  Matrix b(m, m);
  for (int s = 0; s < steps; ++s) {
    // grad_j = 4 sum_k b_jk (y_j - y_k); preconditioner 1 / (4 q_j sum q).
    for (Index k = 0; k < m; ++k)
      for (Index j = 0; j < m; ++j)
        b(j, k) = (j == k || dy(j, k) <= 0.0) ? 0.0 : q(j) * q(k) - gram(j, k) / dy(j, k);
    Matrix step = b.rowwise().sum().asDiagonal() * y - b * y;
    for (Index j = 0; j < m; ++j) step.row(j) *= q(j) > 0.0 ? precond(j) : 0.0;
    y -= rate * step;
    dy = pairwise(y);
  }
  return std::max(0.0, mass_x + squared_mass_term(dy, q) - 2.0 * gram.cwiseProduct(dy).sum());
}

struct RunOutcome {
  EpochState state;
  std::vector<double> trace;
  int epochs = 0;
  bool converged = false;
};

RunOutcome run_joint(std::span<const RelationalMatrix> dxs, std::span<const double> lambda, Matrix y0,
                     std::vector<Coupling> plans0, const MdsConfig& mds, const GwConfig& gw) {
  const std::size_t views = dxs.size();
  std::vector<LinearOracle> oracles(views, LinearOracle(gw));
  EpochState cur{std::move(y0), std::move(plans0), 0.0};
  cur.objective = joint_objective(dxs, lambda, cur.y, cur.plans);

  RunOutcome out;
  out.trace.push_back(cur.objective);
  double rate = mds.learning_rate;
  int halvings = 0;
  const Vector q = cur.plans.front().b;

  for (int epoch = 0; epoch < mds.max_epochs;) {
    EpochState next = cur;
    const Matrix dy = pairwise(next.y);
    // Plan phase: every view against the same embedding.
    for (std::size_t v = 0; v < views; ++v) cg_step(dxs[v].values(), dy, next.plans[v], oracles[v], 0.0);
    Matrix gram = Matrix::Zero(next.y.rows(), next.y.rows());
    for (std::size_t v = 0; v < views; ++v)
      gram += lambda[v] * plan_gram(dxs[v].values(), next.plans[v].plan, support_of(next.plans[v].plan));
    const double mass_x = weighted_mass_terms(dxs, lambda, next.plans);
    next.objective = coordinate_phase(next.y, gram, q, rate, mds.inner_steps, mass_x);
    if (!next.y.allFinite() || !std::isfinite(next.objective))
      next.objective = std::numeric_limits<double>::infinity();

    const double prev = cur.objective;
    if (next.objective <= prev) {
      cur = std::move(next);
      out.trace.push_back(cur.objective);
      ++epoch;
      ++out.epochs;
      halvings = 0;
      if (prev - cur.objective <= mds.epoch_tol * std::max(prev, 1e-300)) {
        out.converged = true;
        break;
      }
    } else if (next.objective - prev <= mds.epoch_tol * std::max(prev, 1e-300)) {
      // Rounding-level increase at a stationary point.
      out.converged = true;
      break;
    } else {
      if (++halvings > 5)
        throw NumericalError(fmt::format("GW-MDS diverged: objective kept increasing after 5 step halvings "
                                         "(learning rate {})", rate));
      rate *= 0.5;
    }
  }
  out.state = std::move(cur);
  return out;
}

Matrix gaussian_init(Index n, Index q, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix y(n, q);
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < n; ++i) y(i, j) = normal(rng);
  return y;
}

}  // namespace

double joint_objective(std::span<const RelationalMatrix> dxs, std::span<const double> lambda, const Matrix& y,
                       std::span<const Coupling> plans) {
  const Matrix dy = pairwise(y);
  double total = 0.0;
  for (std::size_t v = 0; v < dxs.size(); ++v) total += lambda[v] * gw_objective(dxs[v].values(), dy, plans[v].plan);
  return total;
}

JointResult optimize_joint(std::span<const RelationalMatrix> dxs, std::span<const double> lambda,
                           const RelationalMatrix& init_reference, const MdsConfig& mds, const GwConfig& gw) {
  if (dxs.empty()) throw InvalidInput("joint GW-MDS needs at least one view");
  if (lambda.size() != dxs.size()) throw InvalidInput("one weight per view is required");
  gw.validate();
  const Index n = dxs.front().size();
  for (std::size_t v = 0; v < dxs.size(); ++v)
    if (dxs[v].size() != n) throw InvalidInput(fmt::format("view {} has {} samples, expected {}", v, dxs[v].size(), n));
  mds.validate(n);
  const Index q = mds.dim;

  JointResult best;
  bool have_best = false;
  for (int r = 0; r < gw.n_restarts; ++r) {
    const std::uint64_t seed = mds.seed + static_cast<std::uint64_t>(r);
    Matrix y0;
    std::vector<Coupling> plans0;
    const MdsInit init = r == 0 ? mds.init : MdsInit::random_gaussian;
    switch (init) {
      case MdsInit::classical_mds:
        y0 = classical_mds(init_reference, q).coords;
        break;
      case MdsInit::provided:
        y0 = *mds.initial;
        break;
      case MdsInit::random_gaussian:
        y0 = gaussian_init(n, q, init_reference.values().mean() / std::sqrt(static_cast<double>(q)), seed);
        break;
    }
    // Coordinates built from the samples start aligned with them; random
    // coordinates start from the uninformative product plan.
    const Coupling start = init == MdsInit::random_gaussian ? Coupling::product(uniform_weights(n), uniform_weights(n))
                                                            : Coupling::identity(n);
    plans0.assign(dxs.size(), start);

    auto run = run_joint(dxs, lambda, std::move(y0), std::move(plans0), mds, gw);
    if (!have_best || run.state.objective < best.objective) {
      best.y = std::move(run.state.y);
      best.plans = std::move(run.state.plans);
      best.objective = run.state.objective;
      best.trace = std::move(run.trace);
      best.epochs = run.epochs;
      best.converged = run.converged;
      best.restart = r;
      best.seed = seed;
      have_best = true;
    }
  }
  best.objective = joint_objective(dxs, lambda, best.y, best.plans);
  return best;
}

Embedding gwmds_embed(const RelationalMatrix& dx, const MdsConfig& mds, const GwConfig& gw) {
  const Index n = dx.size();
  mds.validate(n);
  gw.validate();
  Embedding out;
  out.method = "gwmds";
  out.row_ids = default_row_ids(n);
  out.seed = mds.seed;
  if (dx.values().cwiseAbs().maxCoeff() == 0.0) {
    out.coords = Matrix::Zero(n, mds.dim);
    out.notes.push_back("all-zero relational matrix: returned the zero embedding");
    out.objective_trace = {0.0};
    return out;
  }
  const double weight = 1.0;
  const auto joint = optimize_joint(std::span(&dx, 1), std::span(&weight, 1), dx, mds, gw);
  out.coords = barycentric_align(joint.y, joint.plans.front().plan.transpose());
  out.gw_sq = std::max(0.0, joint.objective);
  out.iterations = joint.epochs;
  out.converged = joint.converged;
  out.objective_trace = joint.trace;
  out.seed = joint.seed;
  return out;
}

}  // namespace gwmv

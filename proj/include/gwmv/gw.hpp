#pragma once

#include "gwmv/ot.hpp"
#include "gwmv/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gwmv {

enum class GwLoss { squared };

struct GwConfig {
  GwLoss loss = GwLoss::squared;
  OtSolver inner_ot = OtSolver::exact;
  double epsilon = 0.0;       // entropic inner solver only; <= 0 picks 5e-3 * median(cost)
  int outer_max_iter = 200;   // conditional-gradient iterations per restart
  double outer_tol = 1e-9;    // relative objective change
  int n_restarts = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GwResult {
  Coupling coupling;
  double gw_sq = 0.0;
  bool converged = false;
  int iterations = 0;
};

enum class MdsInit { classical_mds, random_gaussian, provided };

const char* to_string(MdsInit init);
MdsInit mds_init_from_string(const std::string& s);

struct MdsConfig {
  Index dim = 2;
  // Step size on the marginal-preconditioned gradient; 1.0 is the
  // majorization (Guttman) step, which never increases the objective.
  double learning_rate = 1.0;
  int max_epochs = 200;
  double epoch_tol = 1e-6;
  int inner_steps = 10;  // coordinate steps per epoch, plan held fixed
  MdsInit init = MdsInit::classical_mds;
  std::optional<Matrix> initial;  // used when init == provided
  std::uint64_t seed = 0;

  void validate(Index n) const;
};

/// Squared-loss GW objective of `plan` between relational matrices `dx`
/// (n x n) and `dy` (m x m), evaluated through the factored contraction
///   sum dx^2 p p + sum dy^2 q q - 2 <plan, dx plan dy>
/// where p, q are the plan's own row and column sums.
double gw_objective(const Matrix& dx, const Matrix& dy, const Matrix& plan);
double gw_objective(const RelationalMatrix& dx, const RelationalMatrix& dy, const Coupling& plan);

/// Squared GW discrepancy by conditional gradient with exact line search.
/// Restart 0 starts from `init` (default: the identity plan when n == m,
/// the product plan otherwise). Square uniform problems then restart from
/// the product plan and from seeded random permutations. The lowest
/// objective wins.
GwResult gw_distance(const RelationalMatrix& dx, const RelationalMatrix& dy, const GwConfig& cfg,
                     const std::optional<Coupling>& init = std::nullopt);

/// GW objective of embedding `y` against `dx` for a fixed plan
/// (rows: samples of dx, columns: rows of y).
double embedding_objective(const Matrix& dx, const Matrix& plan, const Matrix& y);
/// Analytic gradient of embedding_objective with respect to `y`.
Matrix embedding_gradient(const Matrix& dx, const Matrix& plan, const Matrix& y);

/// GW multidimensional scaling: fits n x q coordinates whose distance matrix
/// is GW-close to `dx`, alternating one conditional-gradient plan update with
/// a few coordinate steps per epoch. The returned coordinates are mapped back
/// to sample order through the final plan.
Embedding gwmds_embed(const RelationalMatrix& dx, const MdsConfig& mds, const GwConfig& gw);

/// Joint problem shared by single- and multi-view GW-MDS:
///   min over Y, {plan_v}  sum_v lambda_v GW(dx_v, D_Y; plan_v).
struct JointResult {
  Matrix y;                     // shared embedding, embedding-point order
  std::vector<Coupling> plans;  // per view, rows: samples, cols: embedding points
  double objective = 0.0;
  std::vector<double> trace;    // initial value, then one entry per accepted epoch
  int epochs = 0;
  bool converged = false;
  int restart = 0;
  std::uint64_t seed = 0;
};

JointResult optimize_joint(std::span<const RelationalMatrix> dxs, std::span<const double> lambda,
                           const RelationalMatrix& init_reference, const MdsConfig& mds, const GwConfig& gw);

/// Sum of lambda-weighted per-view GW objectives at (y, plans).
double joint_objective(std::span<const RelationalMatrix> dxs, std::span<const double> lambda, const Matrix& y,
                       std::span<const Coupling> plans);

}  // namespace gwmv

#pragma once

#include "gwmv/types.hpp"

#include <vector>

namespace gwmv {

/// Transport plan between two discrete measures with weights `a` (rows)
/// and `b` (columns).
struct Coupling {
  Matrix plan;
  Vector a;
  Vector b;

  Index rows() const noexcept { return plan.rows(); }
  Index cols() const noexcept { return plan.cols(); }

  /// Largest absolute violation over all row and column sums.
  double marginal_violation() const;

  static Coupling product(const Vector& a, const Vector& b);
  static Coupling identity(Index n);
};

Vector uniform_weights(Index n);

enum class OtSolver { exact, entropic };

const char* to_string(OtSolver s);
OtSolver ot_solver_from_string(const std::string& s);

struct OtResult {
  Coupling coupling;
  double objective = 0.0;  // <plan, C>
  int iterations = 0;
  bool converged = true;
};

/// Minimizes <plan, C> over the transport polytope of (a, b) and returns an
/// optimal vertex. Uniform square problems go through the assignment
/// solver; everything else through successive shortest paths.
OtResult solve_exact_ot(const Matrix& cost, const Vector& a, const Vector& b);

struct SinkhornOptions {
  double epsilon = 0.0;  // <= 0 selects 5e-3 * median(C)
  int max_iter = 10000;
  double tol = 1e-9;
};

/// Entropy-regularized transport by alternating marginal scaling. Switches
/// to log-domain updates when the Gibbs kernel underflows. A run that hits
/// `max_iter` returns its last iterate with `converged == false`.
OtResult solve_entropic_ot(const Matrix& cost, const Vector& a, const Vector& b, const SinkhornOptions& opts = {});

double default_epsilon(const Matrix& cost);

/// Order-p Wasserstein distance between uniform empirical measures on the
/// rows of x and y.
double wasserstein_p(const Matrix& x, const Matrix& y, double p);
double wasserstein_p(const SampleMatrix& x, const SampleMatrix& y, double p);

/// Dense linear assignment (min-cost perfect matching) by shortest
/// augmenting paths. Keeps its column duals between calls so a sequence
/// of slowly varying cost matrices is solved from a warm start.
class AssignmentSolver {
 public:
  /// Returns row -> column.
  std::vector<Index> solve(const Matrix& cost);
  void reset() { col_dual_.resize(0); }

 private:
  Vector col_dual_;
};

}  // namespace gwmv

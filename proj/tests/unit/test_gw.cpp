#include "gwmv/error.hpp"
#include "gwmv/gw.hpp"
#include "gwmv/relational.hpp"
#include "testing.hpp"

#include <doctest.h>

#include <algorithm>

using namespace gwmv;
using namespace gwmv::testing;

namespace {

Matrix permutation_plan(const std::vector<Index>& p) {
  const Index n = static_cast<Index>(p.size());
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) m(i, p[static_cast<std::size_t>(i)]) = 1.0 / static_cast<double>(n);
  return m;
}

Coupling coupling_of(const Matrix& plan) {
  return Coupling{plan, plan.rowwise().sum(), plan.colwise().sum().transpose()};
}

GwConfig single_start() {
  GwConfig cfg;
  cfg.n_restarts = 1;
  return cfg;
}

Matrix grid_points(Index side_x, Index side_y) {
  Matrix x(side_x * side_y, 2);
  for (Index i = 0; i < side_x; ++i)
    for (Index j = 0; j < side_y; ++j) x.row(i * side_y + j) << static_cast<double>(i), static_cast<double>(j);
  return x;
}

}  // namespace

TEST_CASE("gw objective hand cases") {
  Matrix dx(2, 2), dy(2, 2);
  dx << 0, 1, 1, 0;
  dy << 0, 3, 3, 0;
  const Matrix plan = 0.5 * Matrix::Identity(2, 2);
  CHECK(gw_objective(dx, dy, plan) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gw_objective(dx, dx, plan) == 0.0);

  auto g = rng(1);
  const Matrix d = random_dissimilarity(g, 6);
  CHECK(std::abs(gw_objective(d, d, Matrix::Identity(6, 6) / 6.0)) < 1e-14);
  CHECK_THROWS_AS(gw_objective(d, dy, plan), InvalidInput);
}

TEST_CASE("gw objective matches the quadruple sum") {
  auto g = rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 2 + rep % 7, m = 2 + (rep * 3) % 7;
    const Matrix dx = random_dissimilarity(g, n, 3.0), dy = random_dissimilarity(g, m);
    const Matrix plan = random_simplex(g, n) * random_simplex(g, m).transpose();
    const Matrix sparse = uniform_matrix(g, n, m).cwiseProduct((uniform_matrix(g, n, m).array() > 0.6).cast<double>().matrix());
    const double total = sparse.sum();
    const Matrix p2 = total > 0 ? Matrix(sparse / total) : plan;
    const double o1 = gw_quadruple(dx, dy, plan), o2 = gw_quadruple(dx, dy, p2);
    CHECK(std::abs(gw_objective(dx, dy, plan) - o1) < 1e-10 * std::max(1.0, o1));
    CHECK(std::abs(gw_objective(dx, dy, p2) - o2) < 1e-10 * std::max(1.0, o2));
    CHECK(gw_objective(dx, dy, plan) >= -1e-12);
  }
}

TEST_CASE("gw objective vanishes exactly on distance-matching supports") {
  auto g = rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 3 + rep % 6;
    const Matrix dx = random_dissimilarity(g, n);
    const auto p = random_permutation(g, n);
    // dy(p[i], p[j]) = dx(i, j), so the plan i -> p[i] matches every pair
    Matrix dy(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) dy(p[i], p[j]) = dx(i, j);
    CHECK(std::abs(gw_objective(dx, dy, permutation_plan(p))) < 1e-13);
    // any other permutation mismatches some pair of a generic matrix
    auto q = p;
    std::swap(q[0], q[1]);
    CHECK(gw_objective(dx, dy, permutation_plan(q)) > 1e-8);
  }
}

TEST_CASE("gw distance of identical and isometric matrices is zero") {
  auto g = rng(4);
  const Matrix x = normal_matrix(g, 30, 2);
  const RelationalMatrix dx = pairwise_euclidean(x);
  const auto self = gw_distance(dx, dx, GwConfig{});
  CHECK(self.gw_sq <= 1e-6);
  CHECK(self.gw_sq >= 0.0);

  const double th = 0.7;
  Matrix r(2, 2);
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const auto rot = gw_distance(dx, pairwise_euclidean(Matrix(x * r.transpose())), GwConfig{});
  CHECK(rot.gw_sq <= 1e-6);
  CHECK(rot.coupling.marginal_violation() < 1e-7);
}

TEST_CASE("gw distance on 4x4 reaches the best permutation coupling") {
  // Conditional gradient is a local method: a permutation start is often
  // already stationary. Enough seeded permutation restarts cover all 24
  // vertices; the default three restarts are only reported.
  auto g = rng(5);
  double default_gap = 0.0;
  int default_misses = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const RelationalMatrix dx(random_dissimilarity(g, 4)), dy(random_dissimilarity(g, 4));
    std::vector<Index> p{0, 1, 2, 3};
    double best = std::numeric_limits<double>::infinity();
    do best = std::min(best, gw_objective(dx.values(), dy.values(), permutation_plan(p)));
    while (std::next_permutation(p.begin(), p.end()));
    GwConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(rep);
    const auto quick = gw_distance(dx, dy, cfg);
    CHECK(quick.gw_sq >= 0.0);
    if (quick.gw_sq > best + 1e-9) ++default_misses;
    default_gap = std::max(default_gap, quick.gw_sq - best);
    cfg.n_restarts = 200;
    CHECK(gw_distance(dx, dy, cfg).gw_sq <= best + 1e-9);
  }
  MESSAGE("default restarts: " << default_misses << "/30 above the best permutation, largest gap " << default_gap);
}

TEST_CASE("gw distance is symmetric with mirrored starts") {
  auto g = rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 3 + rep % 6, m = 3 + (rep * 5) % 6;
    const RelationalMatrix dx(random_dissimilarity(g, n)), dy(random_dissimilarity(g, m));
    const Matrix u = Vector::Constant(n, 1.0 / n) * Vector::Constant(m, 1.0 / m).transpose();
    const Matrix init = n == m ? permutation_plan(random_permutation(g, n)) : u;
    const auto ab = gw_distance(dx, dy, single_start(), coupling_of(init));
    const auto ba = gw_distance(dy, dx, single_start(), coupling_of(init.transpose()));
    CHECK(std::abs(ab.gw_sq - ba.gw_sq) < 1e-6);
  }
}

TEST_CASE("gw distance is invariant to relabelling one side") {
  auto g = rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 3 + rep % 6;
    const Matrix dx = random_dissimilarity(g, n), dy = random_dissimilarity(g, n);
    const auto p = random_permutation(g, n);
    const Matrix pdx = permute_sym(dx, p);  // pdx(i, j) = dx(p[i], p[j])
    const Matrix init = permutation_plan(random_permutation(g, n));
    Matrix mapped(n, n);  // row i of the relabelled problem is row p[i] of the original
    for (Index i = 0; i < n; ++i) mapped.row(i) = init.row(p[i]);
    const auto r1 = gw_distance(RelationalMatrix(dx), RelationalMatrix(dy), single_start(), coupling_of(init));
    const auto r2 = gw_distance(RelationalMatrix(pdx), RelationalMatrix(dy), single_start(), coupling_of(mapped));
    CHECK(std::abs(r1.gw_sq - r2.gw_sq) < 1e-6);
  }
}

TEST_CASE("gw config validation") {
  GwConfig cfg;
  cfg.outer_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = GwConfig{};
  cfg.n_restarts = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  MdsConfig mds;
  mds.dim = 5;
  CHECK_THROWS_AS(mds.validate(5), InvalidInput);
  mds.dim = 2;
  mds.learning_rate = 0.0;
  CHECK_THROWS_AS(mds.validate(5), InvalidInput);
  CHECK(mds_init_from_string("cmds") == MdsInit::classical_mds);
  CHECK(mds_init_from_string("gaussian") == MdsInit::random_gaussian);
  CHECK_THROWS_AS(mds_init_from_string("pca"), InvalidInput);
}

TEST_CASE("embedding gradient matches central differences") {
  auto g = rng(8);
  for (int inst = 0; inst < 20; ++inst) {
    const Index n = 10;
    const Matrix dx = point_distances(normal_matrix(g, n, 3));
    const Matrix plan = random_simplex(g, n) * random_simplex(g, n).transpose() * 0.5 +
                        permutation_plan(random_permutation(g, n)) * 0.5;
    Matrix y = normal_matrix(g, n, 2);
    const Matrix grad = embedding_gradient(dx, plan, y);
    std::uniform_int_distribution<Index> pick(0, n * 2 - 1);
    for (int c = 0; c < 5; ++c) {
      const Index k = pick(g);
      const Index i = k / 2, j = k % 2;
      const double h = 1e-5, keep = y(i, j);
      y(i, j) = keep + h;
      const double up = embedding_objective(dx, plan, y);
      y(i, j) = keep - h;
      const double down = embedding_objective(dx, plan, y);
      y(i, j) = keep;
      const double fd = (up - down) / (2 * h);
      CHECK(std::abs(fd - grad(i, j)) <= 1e-4 * std::max(std::abs(fd), 1e-8));
    }
  }
}

TEST_CASE("embedding objective equals gw objective against the embedding's distances") {
  auto g = rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 3 + rep % 8;
    const Matrix dx = random_dissimilarity(g, n);
    const Matrix y = normal_matrix(g, n, 1 + rep % 3);
    const Matrix plan = random_simplex(g, n) * random_simplex(g, n).transpose();
    CHECK(std::abs(embedding_objective(dx, plan, y) - gw_quadruple(dx, point_distances(y), plan)) < 1e-10);
  }
}

TEST_CASE("gwmds embeds a planar grid") {
  const RelationalMatrix dx = pairwise_euclidean(grid_points(10, 5));
  const auto e = gwmds_embed(dx, MdsConfig{}, GwConfig{});
  CHECK(e.rows() == 50);
  CHECK(e.dim() == 2);
  CHECK(e.iterations <= 200);
  CHECK(distance_correlation(dx.values(), pairwise_euclidean(e.coords).values()) >= 0.99);
}

TEST_CASE("gwmds embeds a regular simplex exactly") {
  const Index n = 6;
  const Matrix d = Matrix::Ones(n, n) - Matrix::Identity(n, n);
  MdsConfig mds;
  mds.dim = n - 1;
  const auto e = gwmds_embed(RelationalMatrix(d), mds, GwConfig{});
  CHECK(e.gw_sq <= 1e-4);
}

TEST_CASE("gwmds returns the zero embedding for an all-zero matrix") {
  const auto e = gwmds_embed(RelationalMatrix(Matrix::Zero(5, 5)), MdsConfig{}, GwConfig{});
  CHECK(e.coords.isZero());
  CHECK(e.gw_sq == 0.0);
}

TEST_CASE("gwmds rejects q >= n") {
  MdsConfig mds;
  mds.dim = 4;
  auto g = rng(10);
  CHECK_THROWS_AS(gwmds_embed(RelationalMatrix(random_dissimilarity(g, 4)), mds, GwConfig{}), InvalidInput);
}

TEST_CASE("gwmds objective trace never increases") {
  auto g = rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 6 + rep % 10;
    const RelationalMatrix dx = pairwise_euclidean(normal_matrix(g, n, 3 + rep % 3));
    MdsConfig mds;
    mds.max_epochs = 20;
    mds.seed = static_cast<std::uint64_t>(rep);
    mds.init = rep % 2 ? MdsInit::random_gaussian : MdsInit::classical_mds;
    GwConfig gw;
    gw.n_restarts = 1;
    const auto e = gwmds_embed(dx, mds, gw);
    REQUIRE(!e.objective_trace.empty());
    for (std::size_t t = 1; t < e.objective_trace.size(); ++t)
      CHECK(e.objective_trace[t] <= e.objective_trace[t - 1] * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("gwmds is deterministic for a fixed seed") {
  auto g = rng(12);
  const RelationalMatrix dx = pairwise_euclidean(normal_matrix(g, 25, 3));
  MdsConfig mds;
  mds.seed = 99;
  const auto a = gwmds_embed(dx, mds, GwConfig{});
  const auto b = gwmds_embed(dx, mds, GwConfig{});
  CHECK(a.coords == b.coords);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("provided initialization is validated") {
  auto g = rng(13);
  const RelationalMatrix dx = pairwise_euclidean(normal_matrix(g, 12, 2));
  MdsConfig mds;
  mds.init = MdsInit::provided;
  CHECK_THROWS_AS(gwmds_embed(dx, mds, GwConfig{}), InvalidInput);
  mds.initial = normal_matrix(g, 11, 2);
  CHECK_THROWS_AS(gwmds_embed(dx, mds, GwConfig{}), InvalidInput);
  mds.initial = normal_matrix(g, 12, 2);
  CHECK_NOTHROW(gwmds_embed(dx, mds, GwConfig{}));
}

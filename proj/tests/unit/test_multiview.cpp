#include "gwmv/error.hpp"
#include "gwmv/multiview.hpp"
#include "gwmv/relational.hpp"
#include "testing.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>

using namespace gwmv;
using namespace gwmv::testing;

namespace {

double cross2(const Eigen::RowVector2d& o, const Eigen::RowVector2d& a, const Eigen::RowVector2d& b) {
  return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
}

// Monotone-chain hull, counter-clockwise.
std::vector<Eigen::RowVector2d> hull(const Matrix& y) {
  std::vector<Eigen::RowVector2d> p;
  for (Index i = 0; i < y.rows(); ++i) p.emplace_back(y(i, 0), y(i, 1));
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1)); });
  std::vector<Eigen::RowVector2d> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

bool inside(const std::vector<Eigen::RowVector2d>& h, const Eigen::RowVector2d& x, double slack) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    const double len = (b - a).norm();
    if (cross2(a, b, x) / len < -slack) return false;
  }
  return true;
}

MdsConfig small_mds(std::uint64_t seed = 0) {
  MdsConfig m;
  m.seed = seed;
  m.max_epochs = 30;
  return m;
}

GwConfig small_gw(int restarts = 2) {
  GwConfig g;
  g.n_restarts = restarts;
  return g;
}

double mean_of_local(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("view weights live on the simplex") {
  const auto u = ViewWeights::uniform(4);
  CHECK(u.values() == std::vector<double>(4, 0.25));
  CHECK_THROWS_AS(ViewWeights::uniform(0), InvalidInput);
  CHECK_THROWS_AS(ViewWeights::normalized({1.0, -1.0}), InvalidInput);
  CHECK_THROWS_AS(ViewWeights::normalized({0.0, 0.0}), InvalidInput);
  auto g = rng(1);
  std::uniform_real_distribution<double> w(0.0, 100.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> raw(static_cast<std::size_t>(1 + rep % 6));
    for (double& x : raw) x = w(g);
    const auto lam = ViewWeights::normalized(raw);
    double s = 0.0;
    for (double x : lam.values()) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) <= ViewWeights::kSimplexTol);
  }
}

TEST_CASE("barycentric alignment") {
  auto g = rng(2);
  const Matrix y = normal_matrix(g, 6, 2);
  CHECK((barycentric_align(y, Matrix::Identity(6, 6) / 6.0) - y).cwiseAbs().maxCoeff() < 1e-15);

  const auto p = random_permutation(g, 6);
  Matrix perm = Matrix::Zero(6, 6);  // point p[k] -> sample k
  for (Index k = 0; k < 6; ++k) perm(p[k], k) = 1.0 / 6.0;
  const Matrix out = barycentric_align(y, perm);
  for (Index k = 0; k < 6; ++k) CHECK((out.row(k) - y.row(p[k])).cwiseAbs().maxCoeff() < 1e-14);

  const Matrix y5 = normal_matrix(g, 5, 2);
  const Matrix plan = random_simplex(g, 5) * random_simplex(g, 5).transpose();
  const Matrix b = barycentric_align(y5, plan);
  for (Index k = 0; k < 5; ++k)
    for (Index c = 0; c < 2; ++c) {
      double num = 0, den = 0;
      for (Index i = 0; i < 5; ++i) {
        num += plan(i, k) * y5(i, c);
        den += plan(i, k);
      }
      CHECK(std::abs(b(k, c) - num / den) < 1e-12);
    }

  Matrix hole = plan;
  hole.col(2).setZero();
  try {
    (void)barycentric_align(y5, hole);
    FAIL("accepted a sample without mass");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("sample 2") != std::string::npos);
  }
  CHECK_THROWS_AS(barycentric_align(y5, Matrix(Matrix::Ones(4, 5))), InvalidInput);
}

TEST_CASE("aligned rows lie in the convex hull of the embedding") {
  auto g = rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 3 + rep % 12, m = 2 + rep % 9;
    const Matrix y = normal_matrix(g, n, 2) * (1.0 + rep % 4);
    Matrix plan = uniform_matrix(g, n, m);
    plan = plan.cwiseProduct((uniform_matrix(g, n, m).array() > 0.5).cast<double>().matrix());
    for (Index k = 0; k < m; ++k)
      if (plan.col(k).sum() == 0.0) plan(k % n, k) = 1.0;
    plan /= plan.sum();
    const auto h = hull(y);
    const Matrix out = barycentric_align(y, plan);
    for (Index k = 0; k < m; ++k) CHECK(inside(h, out.row(k), 1e-9));
  }
}

TEST_CASE("mean gwmds collapses to single-view gwmds") {
  auto g = rng(4);
  const RelationalMatrix d = pairwise_euclidean(normal_matrix(g, 20, 3));
  const auto single = gwmds_embed(d, small_mds(5), small_gw());
  const std::vector<RelationalMatrix> one{d}, two{d, d};
  const auto m1 = mean_gwmds(one, small_mds(5), small_gw());
  const auto m2 = mean_gwmds(two, small_mds(5), small_gw());
  CHECK(m1.coords == single.coords);
  CHECK(m2.coords == single.coords);
  REQUIRE(m2.view_correlations.size() == 2);
  CHECK(m2.view_correlations[0] == m2.view_correlations[1]);
  CHECK(m2.view_correlations[0] == doctest::Approx(distance_correlation(d.values(), pairwise_euclidean(m2.coords).values())));
}

TEST_CASE("joint optimization with one view is single-view gwmds") {
  auto g = rng(5);
  const RelationalMatrix d = pairwise_euclidean(normal_matrix(g, 18, 3));
  const auto single = gwmds_embed(d, small_mds(3), small_gw());
  const std::vector<RelationalMatrix> one{d};
  const auto joint = multi_gwmds_optimize(one, ViewWeights::uniform(1), small_mds(3), small_gw());
  CHECK(joint.shared.gw_sq == doctest::Approx(single.gw_sq).epsilon(1e-12));
  CHECK(joint.shared.objective_trace == single.objective_trace);
  const Matrix aligned = barycentric_align(joint.shared.coords, joint.couplings[0].plan.transpose());
  CHECK((aligned - single.coords).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two identical views with equal weights follow the one-view trajectory") {
  auto g = rng(6);
  const RelationalMatrix d = pairwise_euclidean(normal_matrix(g, 16, 3));
  const std::vector<RelationalMatrix> one{d}, two{d, d};
  const auto a = multi_gwmds_optimize(one, ViewWeights::uniform(1), small_mds(1), small_gw());
  const auto b = multi_gwmds_optimize(two, ViewWeights::uniform(2), small_mds(1), small_gw());
  REQUIRE(a.shared.objective_trace.size() == b.shared.objective_trace.size());
  for (std::size_t t = 0; t < a.shared.objective_trace.size(); ++t)
    CHECK(std::abs(a.shared.objective_trace[t] - b.shared.objective_trace[t]) <=
          1e-12 * std::max(1.0, a.shared.objective_trace[t]));
}

TEST_CASE("joint objective matches the quadruple sum at the returned iterate") {
  auto g = rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix x = normal_matrix(g, 8, 3);
    const std::vector<RelationalMatrix> views{pairwise_euclidean(x),
                                              pairwise_euclidean(Matrix(x * uniform_matrix(g, 3, 3, -1, 1)))};
    const auto lam = ViewWeights::normalized({1.0 + rep, 2.0});
    const auto r = multi_gwmds_optimize(views, lam, small_mds(static_cast<std::uint64_t>(rep)), small_gw());
    const Matrix dy = point_distances(r.shared.coords);
    double oracle = 0.0;
    for (std::size_t v = 0; v < 2; ++v) oracle += lam.values()[v] * gw_quadruple(views[v].values(), dy, r.couplings[v].plan);
    CHECK(std::abs(joint_objective(views, lam.values(), r.shared.coords, r.couplings) - oracle) < 1e-8);
    CHECK(std::abs(r.shared.gw_sq - oracle) < 1e-8);
  }
}

TEST_CASE("joint objective never ends above its starting value") {
  auto g = rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 6 + rep % 6;
    const Matrix x = normal_matrix(g, n, 3);
    const std::vector<RelationalMatrix> views{pairwise_euclidean(x), pairwise_euclidean(normal_matrix(g, n, 2))};
    auto mds = small_mds(static_cast<std::uint64_t>(rep));
    mds.max_epochs = 10;
    const auto r = multi_gwmds_optimize(views, ViewWeights::normalized({1.0, 0.5 + rep % 3}), mds, small_gw(1));
    CHECK(r.shared.objective_trace.back() <= r.shared.objective_trace.front() * (1 + 1e-12));
  }
}

TEST_CASE("rescaling the view weights leaves the trajectory unchanged") {
  auto g = rng(9);
  std::uniform_real_distribution<double> w(0.1, 5.0);
  std::uniform_int_distribution<int> e(-20, 20);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 6 + rep % 4;
    const std::vector<RelationalMatrix> views{pairwise_euclidean(normal_matrix(g, n, 3)),
                                              pairwise_euclidean(normal_matrix(g, n, 3))};
    const std::vector<double> raw{w(g), w(g)};
    const double c = std::ldexp(1.0, e(g));
    auto mds = small_mds(static_cast<std::uint64_t>(rep));
    mds.max_epochs = 5;
    const auto a = multi_gwmds_optimize(views, ViewWeights::normalized(raw), mds, small_gw(1));
    const auto b = multi_gwmds_optimize(views, ViewWeights::normalized({c * raw[0], c * raw[1]}), mds, small_gw(1));
    CHECK(a.shared.coords == b.shared.coords);
    CHECK(a.shared.objective_trace == b.shared.objective_trace);
  }
}

TEST_CASE("selection picks the faithful embedding") {
  auto g = rng(10);
  const Matrix x = normal_matrix(g, 12, 2);
  const RelationalMatrix d = pairwise_euclidean(x);
  const std::vector<RelationalMatrix> views{d, d};
  const std::vector<Matrix> faithful_second{normal_matrix(g, 12, 2), x};
  const auto r = select_representative(views, std::span<const Matrix>(faithful_second));
  CHECK(r.selected == 1);
  CHECK(r.scores[1] == doctest::Approx(1.0));
  CHECK(r.scores[0] < 1.0);

  const std::vector<RelationalMatrix> single{d};
  const std::vector<Matrix> any{normal_matrix(g, 12, 2)};
  CHECK(select_representative(single, std::span<const Matrix>(any)).selected == 0);

  SelectionConfig literal;
  literal.selection = Selection::min_rho;
  CHECK(select_representative(views, std::span<const Matrix>(faithful_second), literal).selected == 0);
}

TEST_CASE("degenerate candidates score minus infinity") {
  auto g = rng(11);
  const RelationalMatrix d = pairwise_euclidean(normal_matrix(g, 10, 2));
  const std::vector<RelationalMatrix> views{d, d};
  const std::vector<Matrix> cands{Matrix::Constant(10, 2, 3.0), normal_matrix(g, 10, 2)};
  const auto r = select_representative(views, std::span<const Matrix>(cands));
  CHECK(r.degenerate[0]);
  CHECK_FALSE(r.degenerate[1]);
  CHECK(r.scores[0] == -std::numeric_limits<double>::infinity());
  CHECK(std::isnan(r.cross(0, 0)));
  CHECK(r.selected == 1);
}

TEST_CASE("selection scores aggregate the cross-correlation columns") {
  auto g = rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 6 + rep % 5;
    const std::size_t nv = 1 + static_cast<std::size_t>(rep % 4);
    std::vector<RelationalMatrix> views;
    std::vector<Matrix> cands;
    for (std::size_t v = 0; v < nv; ++v) {
      views.push_back(pairwise_euclidean(normal_matrix(g, n, 3)));
      cands.push_back(normal_matrix(g, n, 2));
    }
    for (Aggregate agg : {Aggregate::mean, Aggregate::median, Aggregate::maxmin}) {
      SelectionConfig cfg;
      cfg.aggregate = agg;
      const auto r = select_representative(views, std::span<const Matrix>(cands), cfg);
      double best = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t v = 0; v < nv; ++v) {
        std::vector<double> col;
        for (std::size_t u = 0; u < nv; ++u)
          col.push_back(pearson_upper(views[u].values(), point_distances(cands[v])));
        std::sort(col.begin(), col.end());
        double s = 0;
        for (double c : col) s += c;
        const double want = agg == Aggregate::mean     ? s / static_cast<double>(nv)
                            : agg == Aggregate::maxmin ? col.front()
                            : nv % 2                   ? col[nv / 2]
                                                       : 0.5 * (col[nv / 2 - 1] + col[nv / 2]);
        CHECK(std::abs(r.scores[v] - want) < 1e-12);
        if (want > best + 1e-12) {
          best = want;
          arg = v;
        }
      }
      CHECK(r.selected == arg);
    }
  }
}

TEST_CASE("argmax is invariant to increasing transforms of the scores") {
  auto g = rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 3);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> s(static_cast<std::size_t>(1 + rep % 6));
    for (double& x : s) x = rep % 3 == 0 ? coarse(g) / 4.0 : u(g);  // some runs with ties
    const auto base = pick_representative(s, Selection::max_corr);
    for (int f = 0; f < 4; ++f) {
      std::vector<double> t = s;
      for (double& x : t) {
        if (f == 0) x = std::exp(3 * x);
        if (f == 1) x = x * x * x;
        if (f == 2) x = std::atan(x) + 7.0;
        if (f == 3) x = 2.0 * x - 1.0;
      }
      CHECK(pick_representative(t, Selection::max_corr) == base);
    }
    for (std::size_t v = 0; v < base; ++v) CHECK(s[v] < s[base]);
  }
  CHECK_THROWS_AS(pick_representative(std::vector<double>{}, Selection::max_corr), InvalidInput);
}

TEST_CASE("identical views give identical aligned embeddings and scores") {
  auto g = rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const RelationalMatrix d = pairwise_euclidean(normal_matrix(g, 10 + rep, 3));
    const std::vector<RelationalMatrix> views{d, d, d};
    const auto r = multi_gwmds(views, ViewWeights::uniform(3), small_mds(static_cast<std::uint64_t>(rep)), small_gw());
    REQUIRE(r.aligned.size() == 3);
    CHECK(r.couplings.size() == 3);
    CHECK(r.scores.size() == 3);
    for (std::size_t v = 1; v < 3; ++v) {
      CHECK((r.aligned[v].coords - r.aligned[0].coords).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(std::abs(r.scores[v] - r.scores[0]) < 1e-9);
    }
    CHECK(r.selected == 0);
    CHECK(r.representative().view_correlations.size() == 3);
    CHECK(std::abs(mean_of_local(r.representative().view_correlations) - r.scores[r.selected]) < 1e-12);
  }
}

TEST_CASE("multi gwmds on all-zero views returns the zero embedding") {
  const std::vector<RelationalMatrix> views{RelationalMatrix(Matrix::Zero(5, 5)), RelationalMatrix(Matrix::Zero(5, 5))};
  const auto r = multi_gwmds_optimize(views, ViewWeights::uniform(2), MdsConfig{}, GwConfig{});
  CHECK(r.shared.coords.isZero());
  CHECK(r.couplings.size() == 2);
}

TEST_CASE("string forms of the selection options") {
  CHECK(selection_from_string("max-corr") == Selection::max_corr);
  CHECK(selection_from_string("min-rho") == Selection::min_rho);
  CHECK(aggregate_from_string("maxmin") == Aggregate::maxmin);
  CHECK_THROWS_AS(selection_from_string("best"), InvalidInput);
  CHECK_THROWS_AS(aggregate_from_string("mode"), InvalidInput);
  CHECK(std::string(to_string(Aggregate::median)) == "median");
}

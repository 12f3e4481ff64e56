#include "gwmv/geometry.hpp"

#include "gwmv/relational.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <random>

namespace gwmv {

const char* to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::s_curve: return "s-curve";
    case ManifoldKind::swiss_roll: return "swiss-roll";
    case ManifoldKind::mobius: return "mobius";
    case ManifoldKind::torus: return "torus";
  }
  return "s-curve";
}

ManifoldKind manifold_kind_from_string(const std::string& s) {
  if (s == "s-curve" || s == "s_curve" || s == "scurve") return ManifoldKind::s_curve;
  if (s == "swiss-roll" || s == "swiss_roll" || s == "swissroll") return ManifoldKind::swiss_roll;
  if (s == "mobius" || s == "moebius") return ManifoldKind::mobius;
  if (s == "torus") return ManifoldKind::torus;
  throw InvalidInput("unknown manifold kind '" + s + "' (expected s-curve|swiss-roll|mobius|torus)");
}

ManifoldSample generate_manifold(ManifoldKind kind, Index n, double noise, std::uint64_t seed) {
  if (n < 10) throw InvalidInput(fmt::format("manifold sample size must be >= 10, got {}", n));
  if (!(noise >= 0.0)) throw InvalidInput("noise must be >= 0");
  using std::numbers::pi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix pts(n, 3), intrinsic(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double r1 = unif(rng), r2 = unif(rng);
    switch (kind) {
      case ManifoldKind::s_curve: {
        const double t = 3.0 * pi * (r1 - 0.5);
        const double sgn = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
        pts.row(i) << std::sin(t), 2.0 * r2, sgn * (std::cos(t) - 1.0);
        intrinsic.row(i) << t, r2;
        break;
      }
      case ManifoldKind::swiss_roll: {
        const double t = 1.5 * pi * (1.0 + 2.0 * r1);
        const double h = 21.0 * r2;
        pts.row(i) << t * std::cos(t), h, t * std::sin(t);
        intrinsic.row(i) << t, h;
        break;
      }
      case ManifoldKind::mobius: {
        const double th = 2.0 * pi * r1;
        const double w = 2.0 * r2 - 1.0;
        const double radial = 1.0 + 0.5 * w * std::cos(0.5 * th);
        pts.row(i) << radial * std::cos(th), radial * std::sin(th), 0.5 * w * std::sin(0.5 * th);
        intrinsic.row(i) << th, w;
        break;
      }
      case ManifoldKind::torus: {
        constexpr double major = 2.0, minor = 1.0;
        const double th = 2.0 * pi * r1, ph = 2.0 * pi * r2;
        pts.row(i) << (major + minor * std::cos(ph)) * std::cos(th), (major + minor * std::cos(ph)) * std::sin(th),
            minor * std::sin(ph);
        intrinsic.row(i) << th, ph;
        break;
      }
    }
  }
  if (noise > 0.0) {
    std::normal_distribution<double> normal(0.0, noise);
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < 3; ++c) pts(i, c) += normal(rng);
  }
  return ManifoldSample{SampleMatrix(std::move(pts)), std::move(intrinsic), kind};
}

Matrix rotation_z(double degrees) {
  const double th = degrees * std::numbers::pi / 180.0;
  Matrix r(3, 3);
  r << std::cos(th), -std::sin(th), 0.0,  //
      std::sin(th), std::cos(th), 0.0,    //
      0.0, 0.0, 1.0;
  return r;
}

Matrix shear_scale_matrix() {
  Matrix a(3, 3);
  a << 1.8, 0.3, 0.0,  //
      0.0, 1.0, 0.0,   //
      0.0, 0.0, 0.6;
  return a;
}

MultiViewDataset make_views(const ManifoldSample& m, ViewMetric metric) {
  const Matrix& x = m.points.values();
  if (x.cols() != 3) throw InvalidInput("make_views needs 3-D points");
  std::vector<SampleMatrix> views;
  views.emplace_back(x * rotation_z(40.0).transpose(), m.points.row_ids());
  views.emplace_back(x * shear_scale_matrix().transpose(), m.points.row_ids());
  return MultiViewDataset(std::move(views), metric);
}

NeighborGraph knn_graph(const RelationalMatrix& distances, Index k) {
  const Index n = distances.size();
  if (k < 1 || k >= n) throw InvalidInput(fmt::format("k must be in [1, n-1] = [1, {}], got {}", n - 1, k));
  const Matrix& d = distances.values();
  std::vector<char> adjacent(static_cast<std::size_t>(n * n), 0);
  std::vector<Index> order(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    Index c = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) order[c++] = j;
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      return d(i, a) < d(i, b) || (d(i, a) == d(i, b) && a < b);
    });
    for (Index t = 0; t < k; ++t) {
      const Index j = order[t];
      adjacent[std::min(i, j) * n + std::max(i, j)] = 1;
    }
  }
  NeighborGraph g;
  g.n = n;
  g.k = k;
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (adjacent[u * n + v]) g.edges.push_back({u, v, d(u, v)});
  return g;
}

NeighborGraph knn_graph(const SampleMatrix& x, Index k) { return knn_graph(pairwise_euclidean(x), k); }

namespace {

std::vector<Index> component_labels(const NeighborGraph& g, Index& count) {
  std::vector<Index> parent(static_cast<std::size_t>(g.n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto join = [&](const GraphEdge& e) {
    const Index a = find(e.u), b = find(e.v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (const auto& e : g.edges) join(e);
  for (const auto& e : g.bridges) join(e);
  std::vector<Index> label(static_cast<std::size_t>(g.n), -1), root_label(static_cast<std::size_t>(g.n), -1);
  count = 0;
  for (Index i = 0; i < g.n; ++i) {
    const Index r = find(i);
    if (root_label[r] < 0) root_label[r] = count++;
    label[i] = root_label[r];
  }
  return label;
}

}  // namespace

std::vector<Index> component_sizes(const NeighborGraph& g) {
  Index count = 0;
  const auto label = component_labels(g, count);
  std::vector<Index> sizes(static_cast<std::size_t>(count), 0);
  for (Index l : label) ++sizes[l];
  return sizes;
}

NeighborGraph bridge_components(NeighborGraph g, const RelationalMatrix& distances) {
  if (distances.size() != g.n) throw InvalidInput("bridge_components: distance matrix size differs from graph");
  const Matrix& d = distances.values();
  while (true) {
    Index count = 0;
    const auto label = component_labels(g, count);
    if (count <= 1) break;
    GraphEdge best{0, 0, std::numeric_limits<double>::infinity()};
    for (Index u = 0; u < g.n; ++u)
      for (Index v = u + 1; v < g.n; ++v)
        if (label[u] != label[v] && d(u, v) < best.weight) best = {u, v, d(u, v)};
    g.bridges.push_back(best);
  }
  return g;
}

DisconnectedGraph::DisconnectedGraph(std::vector<Index> sizes, const std::string& context)
    : InvalidInput(fmt::format("{}neighbor graph is disconnected: {} components of sizes [{}]; increase k or enable "
                               "component bridging",
                               context.empty() ? "" : context + ": ", sizes.size(), fmt::join(sizes, ", "))),
      sizes_(std::move(sizes)) {}

RelationalMatrix geodesic_distances(const NeighborGraph& g) {
  const auto sizes = component_sizes(g);
  if (sizes.size() > 1) throw DisconnectedGraph(sizes);
  const Index n = g.n;
  std::vector<std::vector<std::pair<Index, double>>> adj(static_cast<std::size_t>(n));
  auto add = [&](const GraphEdge& e) {
    adj[e.u].emplace_back(e.v, e.weight);
    adj[e.v].emplace_back(e.u, e.weight);
  };
  for (const auto& e : g.edges) add(e);
  for (const auto& e : g.bridges) add(e);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Matrix dist = Matrix::Constant(n, n, kInf);
  using Item = std::pair<double, Index>;
  for (Index s = 0; s < n; ++s) {
    auto col = dist.col(s);
    col(s) = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > col(u)) continue;
      for (const auto& [v, w] : adj[u]) {
        const double nd = du + w;
        if (nd < col(v)) {
          col(v) = nd;
          heap.emplace(nd, v);
        }
      }
    }
  }
  // Both directions are valid path lengths; keep the shorter for exact symmetry.
  Matrix sym = dist.cwiseMin(dist.transpose());
  return RelationalMatrix(std::move(sym), MetricTag::geodesic);
}

RelationalMatrix geodesic_distances(const RelationalMatrix& distances, const GeodesicOptions& opts,
                                   std::vector<GraphEdge>* bridges) {
  auto g = knn_graph(distances, opts.k);
  if (opts.bridge_components) g = bridge_components(std::move(g), distances);
  if (bridges) *bridges = g.bridges;
  return geodesic_distances(g);
}

std::vector<RelationalMatrix> view_distances(const MultiViewDataset& data, const GeodesicOptions& opts) {
  std::vector<RelationalMatrix> out;
  out.reserve(data.view_count());
  for (std::size_t v = 0; v < data.view_count(); ++v) {
    try {
      const auto& view = data.view(v);
      if (const auto* d = std::get_if<RelationalMatrix>(&view.data)) {
        out.push_back(*d);
        continue;
      }
      const auto euclid = pairwise_euclidean(std::get<SampleMatrix>(view.data));
      out.push_back(view.metric == ViewMetric::geodesic ? geodesic_distances(euclid, opts) : euclid);
    } catch (const DisconnectedGraph& e) {
      throw DisconnectedGraph(e.sizes(), fmt::format("view {}", v));
    } catch (const InvalidInput& e) {
      throw InvalidInput(fmt::format("view {}: {}", v, e.what()));
    }
  }
  return out;
}

Embedding classical_mds(const RelationalMatrix& d, Index q) {
  const Index n = d.size();
  if (q < 1 || q >= n) throw InvalidInput(fmt::format("classical MDS needs 1 <= q < n, got q = {}, n = {}", q, n));
  const Matrix sq = d.values().cwiseAbs2();
  const Vector row_mean = sq.rowwise().mean();
  const double grand = sq.mean();
  Matrix b = -0.5 * ((sq.colwise() - row_mean).rowwise() - row_mean.transpose()).array() - 0.5 * grand;
  b = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
  if (eig.info() != Eigen::Success) throw NumericalError("classical MDS eigendecomposition failed");

  Embedding out;
  out.method = "cmds";
  out.row_ids = default_row_ids(n);
  out.coords = Matrix::Zero(n, q);
  const double top = eig.eigenvalues()(n - 1);
  for (Index c = 0; c < q; ++c) {
    const Index idx = n - 1 - c;  // eigenvalues ascending
    const double lambda = eig.eigenvalues()(idx);
    // rounding leaves ~1e-16 * top on directions the points do not span
    if (!(lambda > 1e-12 * std::max(top, 0.0))) {
      out.notes.push_back(fmt::format("axis {} has eigenvalue {:.3g}, not positive; padded with zeros", c + 1, lambda));
      continue;
    }
    Vector axis = eig.eigenvectors().col(idx) * std::sqrt(lambda);
    Index arg = 0;
    for (Index i = 1; i < n; ++i)
      if (std::abs(axis(i)) > std::abs(axis(arg))) arg = i;
    if (axis(arg) < 0.0) axis = -axis;
    out.coords.col(c) = axis;
  }
  return out;
}

Embedding multi_isomap(const MultiViewDataset& data, Index k, Index q, bool bridge) {
  std::vector<RelationalMatrix> geo;
  for (std::size_t v = 0; v < data.view_count(); ++v) {
    const auto& view = data.view(v);
    const RelationalMatrix base = std::holds_alternative<RelationalMatrix>(view.data)
                                      ? std::get<RelationalMatrix>(view.data)
                                      : pairwise_euclidean(std::get<SampleMatrix>(view.data));
    try {
      geo.push_back(geodesic_distances(base, GeodesicOptions{k, bridge}));
    } catch (const DisconnectedGraph& e) {
      throw DisconnectedGraph(e.sizes(), fmt::format("view {}", v));
    } catch (const InvalidInput& e) {
      throw InvalidInput(fmt::format("view {}: {}", v, e.what()));
    }
  }
  auto out = classical_mds(mean_relational(geo), q);
  out.method = "multi-isomap";
  out.row_ids = data.row_ids();
  return out;
}

}  // namespace gwmv

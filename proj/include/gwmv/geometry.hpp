#pragma once

#include "gwmv/error.hpp"
#include "gwmv/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gwmv {

enum class ManifoldKind { s_curve, swiss_roll, mobius, torus };

const char* to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& s);

struct ManifoldSample {
  SampleMatrix points;  // n x 3
  Matrix intrinsic;     // n x 2 generating parameters
  ManifoldKind kind;
};

/// Samples `n` points from one of the standard synthetic surfaces:
///   s_curve     (sin t, 2u, sign(t)(cos t - 1)),      t in [-3pi/2, 3pi/2], u in [0, 1]
///   swiss_roll  (t cos t, h, t sin t),                 t in [1.5pi, 4.5pi],  h in [0, 21]
///   mobius      ((1 + w/2 cos(th/2)) cos th, (1 + w/2 cos(th/2)) sin th, w/2 sin(th/2)),
///               th in [0, 2pi), w in [-1, 1]
///   torus       ((2 + cos ph) cos th, (2 + cos ph) sin th, sin ph)
/// then adds isotropic Gaussian noise with standard deviation `noise`.
ManifoldSample generate_manifold(ManifoldKind kind, Index n, double noise, std::uint64_t seed);

/// Rotation about z by `degrees`.
Matrix rotation_z(double degrees);
/// Elongation-plus-shear map used for the second synthetic view.
Matrix shear_scale_matrix();

/// Two views of a 3-D sample: X R(40 deg)^T and X A^T.
MultiViewDataset make_views(const ManifoldSample& m, ViewMetric metric = ViewMetric::euclidean);

struct GraphEdge {
  Index u = 0;
  Index v = 0;
  double weight = 0.0;
};

/// Undirected weighted graph on n nodes, u < v for every edge.
struct NeighborGraph {
  Index n = 0;
  Index k = 0;
  std::vector<GraphEdge> edges;
  std::vector<GraphEdge> bridges;  // edges added to join components
};

/// Union-symmetrized k-nearest-neighbor graph. Distance ties go to the
/// smaller index.
NeighborGraph knn_graph(const SampleMatrix& x, Index k);
NeighborGraph knn_graph(const RelationalMatrix& distances, Index k);

std::vector<Index> component_sizes(const NeighborGraph& g);

/// Joins components by repeatedly adding the shortest `distances` edge
/// between two different components.
NeighborGraph bridge_components(NeighborGraph g, const RelationalMatrix& distances);

class DisconnectedGraph : public InvalidInput {
 public:
  explicit DisconnectedGraph(std::vector<Index> sizes, const std::string& context = {});
  const std::vector<Index>& sizes() const noexcept { return sizes_; }

 private:
  std::vector<Index> sizes_;
};

/// All-pairs shortest paths by per-source Dijkstra. Throws
/// DisconnectedGraph when the graph has more than one component.
RelationalMatrix geodesic_distances(const NeighborGraph& g);

struct GeodesicOptions {
  Index k = 10;
  bool bridge_components = false;
};

/// kNN graph on `distances`, optional bridging, then shortest paths.
RelationalMatrix geodesic_distances(const RelationalMatrix& distances, const GeodesicOptions& opts,
                                   std::vector<GraphEdge>* bridges = nullptr);

/// Relational matrix of every view, by each view's configured metric.
/// Failures are rethrown naming the view index.
std::vector<RelationalMatrix> view_distances(const MultiViewDataset& data, const GeodesicOptions& opts);

/// Classical (Torgerson) MDS: top-q eigenpairs of the double-centered
/// squared distances. Axes with nonpositive eigenvalues are zero and
/// reported in `notes`. Each axis is signed so that its largest-magnitude
/// coordinate is positive.
Embedding classical_mds(const RelationalMatrix& d, Index q);

/// Multi-view Isomap baseline: per-view geodesic matrices, their entry-wise
/// mean, then classical MDS.
Embedding multi_isomap(const MultiViewDataset& data, Index k, Index q, bool bridge = false);

}  // namespace gwmv

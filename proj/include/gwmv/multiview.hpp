#pragma once

#include "gwmv/geometry.hpp"
#include "gwmv/gw.hpp"
#include "gwmv/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace gwmv {

/// Nonnegative view weights on the simplex.
class ViewWeights {
 public:
  static constexpr double kSimplexTol = 1e-9;

  static ViewWeights uniform(std::size_t views);
  /// Rescales nonnegative raw weights to sum to one.
  static ViewWeights normalized(std::vector<double> raw);

  const std::vector<double>& values() const noexcept { return lambda_; }
  std::size_t size() const noexcept { return lambda_.size(); }

 private:
  explicit ViewWeights(std::vector<double> lambda) : lambda_(std::move(lambda)) {}
  std::vector<double> lambda_;
};

// max_corr picks the highest aggregated correlation; min_rho is the literal
// argmin reading of the selection rule, kept for comparison runs.
enum class Selection { max_corr, min_rho };
enum class Aggregate { mean, median, maxmin };

const char* to_string(Selection s);
const char* to_string(Aggregate a);
Selection selection_from_string(const std::string& s);
Aggregate aggregate_from_string(const std::string& s);

struct SelectionConfig {
  Selection selection = Selection::max_corr;
  Aggregate aggregate = Aggregate::mean;
};

struct SelectionResult {
  std::size_t selected = 0;
  std::vector<double> scores;     // aggregated over views u, one per candidate v
  std::vector<bool> degenerate;   // candidate's distances have zero variance
  Matrix cross;                   // cross(u, v) = corr(D_X(u), D_Y(v)); NaN when degenerate
};

struct MultiGwResult {
  Embedding shared;                  // Y*, embedding-point order
  std::vector<Coupling> couplings;   // per view, rows: samples, cols: embedding points
  std::vector<Embedding> aligned;    // per view, sample order
  std::vector<double> scores;
  std::vector<bool> degenerate;
  Matrix cross;
  std::size_t selected = 0;
  std::vector<double> objective_trace;
  SelectionConfig criterion;

  const Embedding& representative() const { return aligned.at(selected); }
};

/// Row k of the result is the convex combination of rows of `y` weighted
/// by column k of `plan` (rows: points of y, columns: samples).
Matrix barycentric_align(const Matrix& y, const Matrix& plan);
Embedding barycentric_align(const Embedding& y, const Coupling& plan_embedding_by_sample);

/// Averages the views' relational matrices and runs GW-MDS on the mean.
/// `view_correlations` holds corr(D_X(v), D_Y) for each view.
Embedding mean_gwmds(std::span<const RelationalMatrix> views, const MdsConfig& mds, const GwConfig& gw);
Embedding mean_gwmds(const MultiViewDataset& data, const MdsConfig& mds, const GwConfig& gw,
                     const GeodesicOptions& geo = {});

struct JointEmbedding {
  Embedding shared;
  std::vector<Coupling> couplings;
};

/// Shared embedding plus one plan per view minimizing the lambda-weighted
/// sum of GW objectives. Plans are updated per view against the same
/// embedding (Jacobi), then the embedding is updated against all plans.
JointEmbedding multi_gwmds_optimize(std::span<const RelationalMatrix> views, const ViewWeights& weights,
                                    const MdsConfig& mds, const GwConfig& gw);

/// Index of the best score under `selection`; ties go to the lowest index.
std::size_t pick_representative(std::span<const double> scores, Selection selection);

/// score_v = aggregate over u of corr(D_X(u), D_Y(v)); ties go to the lowest
/// view index.
SelectionResult select_representative(std::span<const RelationalMatrix> views, std::span<const Embedding> aligned,
                                      const SelectionConfig& cfg = {});
SelectionResult select_representative(std::span<const RelationalMatrix> views, std::span<const Matrix> aligned,
                                      const SelectionConfig& cfg = {});

MultiGwResult multi_gwmds(std::span<const RelationalMatrix> views, const ViewWeights& weights, const MdsConfig& mds,
                          const GwConfig& gw, const SelectionConfig& sel = {});
MultiGwResult multi_gwmds(const MultiViewDataset& data, const ViewWeights& weights, const MdsConfig& mds,
                          const GwConfig& gw, const SelectionConfig& sel = {}, const GeodesicOptions& geo = {});

/// Per-view correlations of an embedding against each view's matrix.
std::vector<double> view_correlations(std::span<const RelationalMatrix> views, const Matrix& coords);

}  // namespace gwmv

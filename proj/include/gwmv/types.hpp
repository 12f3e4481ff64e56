#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gwmv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class MetricTag { euclidean, geodesic, precomputed };

const char* to_string(MetricTag tag);
MetricTag metric_tag_from_string(const std::string& s);

/// Symmetric, nonnegative, zero-diagonal n x n dissimilarity matrix.
///
/// Construction validates every invariant; a constructed instance is
/// immutable, so downstream code never re-checks.
class RelationalMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-9;

  explicit RelationalMatrix(Matrix values, MetricTag tag = MetricTag::precomputed);

  const Matrix& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.rows(); }
  MetricTag tag() const noexcept { return tag_; }
  double operator()(Index i, Index j) const { return values_(i, j); }

  RelationalMatrix with_tag(MetricTag tag) const { return RelationalMatrix(values_, tag); }

 private:
  Matrix values_;
  MetricTag tag_;
};

/// n x p feature matrix for one view; rows are samples.
class SampleMatrix {
 public:
  SampleMatrix(Matrix values, std::vector<std::string> row_ids);
  explicit SampleMatrix(Matrix values);  // ids "0", "1", ...

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
  std::vector<std::string> row_ids_;
};

std::vector<std::string> default_row_ids(Index n);

enum class ViewMetric { euclidean, geodesic };

const char* to_string(ViewMetric m);
ViewMetric view_metric_from_string(const std::string& s);

/// One view of the shared samples: raw features, or an already computed
/// relational matrix. For feature views, `metric` selects how the
/// relational matrix is derived.
struct View {
  std::variant<SampleMatrix, RelationalMatrix> data;
  ViewMetric metric = ViewMetric::euclidean;
};

/// Ordered views of the same n samples. All views share row count and ids.
class MultiViewDataset {
 public:
  MultiViewDataset(std::vector<View> views, std::vector<std::string> row_ids);
  explicit MultiViewDataset(std::vector<SampleMatrix> views, ViewMetric metric = ViewMetric::euclidean);
  explicit MultiViewDataset(std::vector<RelationalMatrix> views);

  std::size_t view_count() const noexcept { return views_.size(); }
  Index sample_count() const noexcept { return static_cast<Index>(row_ids_.size()); }
  const std::vector<View>& views() const noexcept { return views_; }
  const View& view(std::size_t v) const { return views_.at(v); }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }

 private:
  std::vector<View> views_;
  std::vector<std::string> row_ids_;
};

/// n x q coordinates plus provenance of how they were produced.
struct Embedding {
  Matrix coords;
  std::vector<std::string> row_ids;
  std::string method;
  std::uint64_t seed = 0;
  std::optional<std::size_t> source_view;
  double gw_sq = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<double> objective_trace;
  std::vector<double> view_correlations;  // one per input view, when evaluated
  std::vector<std::string> notes;

  Index rows() const noexcept { return coords.rows(); }
  Index dim() const noexcept { return coords.cols(); }
};

}  // namespace gwmv

#include "gwmv/relational.hpp"

#include "gwmv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace gwmv {

const char* to_string(MetricTag tag) {
  switch (tag) {
    case MetricTag::euclidean: return "euclidean";
    case MetricTag::geodesic: return "geodesic";
    case MetricTag::precomputed: return "precomputed";
  }
  return "precomputed";
}

MetricTag metric_tag_from_string(const std::string& s) {
  if (s == "euclidean") return MetricTag::euclidean;
  if (s == "geodesic") return MetricTag::geodesic;
  if (s == "precomputed") return MetricTag::precomputed;
  throw InvalidInput("unknown metric tag '" + s + "'");
}

const char* to_string(ViewMetric m) {
  return m == ViewMetric::geodesic ? "geodesic" : "euclidean";
}

ViewMetric view_metric_from_string(const std::string& s) {
  if (s == "euclidean") return ViewMetric::euclidean;
  if (s == "geodesic") return ViewMetric::geodesic;
  throw InvalidInput("unknown metric '" + s + "' (expected euclidean|geodesic)");
}

RelationalMatrix::RelationalMatrix(Matrix values, MetricTag tag) : values_(std::move(values)), tag_(tag) {
  const Index n = values_.rows();
  if (n != values_.cols())
    throw InvalidInput(fmt::format("relational matrix must be square, got {}x{}", n, values_.cols()));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double v = values_(i, j);
      if (!std::isfinite(v)) throw InvalidInput(fmt::format("relational matrix entry ({},{}) is not finite", i, j));
      if (v < 0.0) throw InvalidInput(fmt::format("relational matrix entry ({},{}) is negative: {}", i, j, v));
      if (std::abs(v - values_(j, i)) > kSymmetryTol)
        throw InvalidInput(fmt::format("relational matrix is not symmetric at ({},{})", i, j));
    }
    if (std::abs(values_(j, j)) > kSymmetryTol)
      throw InvalidInput(fmt::format("relational matrix has nonzero diagonal at {}", j));
  }
}

std::vector<std::string> default_row_ids(Index n) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

SampleMatrix::SampleMatrix(Matrix values, std::vector<std::string> row_ids)
    : values_(std::move(values)), row_ids_(std::move(row_ids)) {
  if (values_.rows() < 2) throw InvalidInput(fmt::format("sample matrix needs at least 2 rows, got {}", values_.rows()));
  if (static_cast<Index>(row_ids_.size()) != values_.rows())
    throw InvalidInput(fmt::format("{} row ids for {} rows", row_ids_.size(), values_.rows()));
  for (Index i = 0; i < values_.rows(); ++i)
    if (!values_.row(i).allFinite()) throw InvalidInput(fmt::format("sample row {} has a non-finite entry", i));
}

SampleMatrix::SampleMatrix(Matrix values) : SampleMatrix(values, default_row_ids(values.rows())) {}

namespace {

Index view_rows(const View& v) {
  return std::visit([](const auto& d) -> Index { return d.values().rows(); }, v.data);
}

}  // namespace

MultiViewDataset::MultiViewDataset(std::vector<View> views, std::vector<std::string> row_ids)
    : views_(std::move(views)), row_ids_(std::move(row_ids)) {
  if (views_.empty()) throw InvalidInput("multi-view dataset needs at least one view");
  for (std::size_t v = 0; v < views_.size(); ++v) {
    if (view_rows(views_[v]) != sample_count())
      throw InvalidInput(fmt::format("view {} has {} rows, expected {}", v, view_rows(views_[v]), sample_count()));
    if (const auto* s = std::get_if<SampleMatrix>(&views_[v].data); s && s->row_ids() != row_ids_)
      throw InvalidInput(fmt::format("view {} row ids differ from the dataset's", v));
  }
}

namespace {

std::vector<View> wrap(std::vector<SampleMatrix> xs, ViewMetric metric) {
  std::vector<View> out;
  for (auto& x : xs) out.push_back(View{std::move(x), metric});
  return out;
}

std::vector<View> wrap(std::vector<RelationalMatrix> ds) {
  std::vector<View> out;
  for (auto& d : ds) out.push_back(View{std::move(d), ViewMetric::euclidean});
  return out;
}

std::vector<std::string> first_ids(const std::vector<SampleMatrix>& xs) {
  if (xs.empty()) throw InvalidInput("multi-view dataset needs at least one view");
  return xs.front().row_ids();
}

Index first_size(const std::vector<RelationalMatrix>& ds) {
  if (ds.empty()) throw InvalidInput("multi-view dataset needs at least one view");
  return ds.front().size();
}

}  // namespace

MultiViewDataset::MultiViewDataset(std::vector<SampleMatrix> views, ViewMetric metric)
    : MultiViewDataset(wrap(views, metric), first_ids(views)) {}

MultiViewDataset::MultiViewDataset(std::vector<RelationalMatrix> views)
    : MultiViewDataset(wrap(views), default_row_ids(first_size(views))) {}

RelationalMatrix pairwise_euclidean(const Matrix& x) {
  const Index n = x.rows();
  for (Index i = 0; i < n; ++i)
    if (!x.row(i).allFinite()) throw InvalidInput(fmt::format("row {} has a non-finite entry", i));
  Matrix d = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
  return RelationalMatrix(std::move(d), MetricTag::euclidean);
}

RelationalMatrix pairwise_euclidean(const SampleMatrix& x) { return pairwise_euclidean(x.values()); }

RelationalMatrix mean_relational(std::span<const RelationalMatrix> ds) {
  if (ds.empty()) throw InvalidInput("mean_relational needs at least one matrix");
  const Index n = ds.front().size();
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t v = 0; v < ds.size(); ++v) {
    if (ds[v].size() != n)
      throw InvalidInput(fmt::format("view {} is {}x{}, expected {}x{}", v, ds[v].size(), ds[v].size(), n, n));
    sum += ds[v].values();
  }
  sum /= static_cast<double>(ds.size());
  return RelationalMatrix(std::move(sum), MetricTag::precomputed);
}

RelationalMatrix mean_relational(std::span<const RelationalMatrix> ds, std::span<const double> weights) {
  if (ds.empty()) throw InvalidInput("mean_relational needs at least one matrix");
  if (weights.size() != ds.size())
    throw InvalidInput(fmt::format("{} weights for {} matrices", weights.size(), ds.size()));
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw InvalidInput("weights must not all be zero");
  const Index n = ds.front().size();
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t v = 0; v < ds.size(); ++v) {
    if (ds[v].size() != n)
      throw InvalidInput(fmt::format("view {} is {}x{}, expected {}x{}", v, ds[v].size(), ds[v].size(), n, n));
    sum += (weights[v] / total) * ds[v].values();
  }
  // Weighted sums of symmetric matrices can drift by an ulp; re-symmetrize.
  Matrix sym = 0.5 * (sum + sum.transpose());
  sym.diagonal().setZero();
  return RelationalMatrix(std::move(sym), MetricTag::precomputed);
}

double distance_correlation(const Matrix& da, const Matrix& db) {
  const Index n = da.rows();
  if (da.cols() != n || db.rows() != n || db.cols() != n)
    throw InvalidInput(fmt::format("distance_correlation shape mismatch: {}x{} vs {}x{}", da.rows(), da.cols(),
                                   db.rows(), db.cols()));
  if (n < 3) throw InvalidInput("distance_correlation needs n >= 3");
  const double count = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  double mean_a = 0.0, mean_b = 0.0;
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      mean_a += da(i, j);
      mean_b += db(i, j);
    }
  mean_a /= count;
  mean_b /= count;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      const double x = da(i, j) - mean_a;
      const double y = db(i, j) - mean_b;
      saa += x * x;
      sbb += y * y;
      sab += x * y;
    }
  if (saa <= 0.0 || sbb <= 0.0) throw NumericalError("distance_correlation: zero variance in a distance triangle");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double distance_correlation(const RelationalMatrix& da, const RelationalMatrix& db) {
  return distance_correlation(da.values(), db.values());
}

}  // namespace gwmv

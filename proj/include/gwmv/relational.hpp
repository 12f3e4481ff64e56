#pragma once

#include "gwmv/types.hpp"

#include <span>
#include <vector>

namespace gwmv {

/// L2 distance between every pair of rows.
RelationalMatrix pairwise_euclidean(const SampleMatrix& x);
RelationalMatrix pairwise_euclidean(const Matrix& x);

/// Entry-wise mean of same-sized relational matrices. Uniform 1/V weights
/// unless `weights` is given (nonnegative, renormalized to sum 1).
RelationalMatrix mean_relational(std::span<const RelationalMatrix> ds);
RelationalMatrix mean_relational(std::span<const RelationalMatrix> ds, std::span<const double> weights);

/// Pearson correlation of the strict upper triangles of `da` and `db`.
/// Throws NumericalError when either triangle has zero variance.
double distance_correlation(const RelationalMatrix& da, const RelationalMatrix& db);
double distance_correlation(const Matrix& da, const Matrix& db);

}  // namespace gwmv

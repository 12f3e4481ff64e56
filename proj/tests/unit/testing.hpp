#pragma once

#include "gwmv/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace gwmv::testing {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Matrix uniform_matrix(std::mt19937_64& g, Index rows, Index cols, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(g);
  return m;
}

inline Matrix normal_matrix(std::mt19937_64& g, Index rows, Index cols) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = z(g);
  return m;
}

// Distances between random points, computed pair by pair.
inline Matrix point_distances(const Matrix& x) {
  const Index n = x.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Index c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
      d(i, j) = std::sqrt(s);
    }
  return d;
}

// Symmetric, zero diagonal, arbitrary nonnegative entries (not necessarily metric).
inline Matrix random_dissimilarity(std::mt19937_64& g, Index n, double scale = 1.0) {
  Matrix d = uniform_matrix(g, n, n, 0.0, scale);
  d = (0.5 * (d + d.transpose())).eval();
  d.diagonal().setZero();
  return d;
}

inline Vector random_simplex(std::mt19937_64& g, Index n, double floor = 0.05) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(g);
  return v / v.sum();
}

inline std::vector<Index> random_permutation(std::mt19937_64& g, Index n) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  std::shuffle(p.begin(), p.end(), g);
  return p;
}

// out(i, j) = m(p[i], p[j])
inline Matrix permute_sym(const Matrix& m, const std::vector<Index>& p) {
  const Index n = m.rows();
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = m(p[i], p[j]);
  return out;
}

inline double pearson_upper(const Matrix& a, const Matrix& b) {
  std::vector<double> x, y;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j) {
      x.push_back(a(i, j));
      y.push_back(b(i, j));
    }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Squared-loss GW by the defining quadruple sum.
inline double gw_quadruple(const Matrix& dx, const Matrix& dy, const Matrix& plan) {
  double s = 0.0;
  for (Index i = 0; i < dx.rows(); ++i)
    for (Index k = 0; k < dx.rows(); ++k)
      for (Index j = 0; j < dy.rows(); ++j)
        for (Index l = 0; l < dy.rows(); ++l) {
          const double diff = dx(i, k) - dy(j, l);
          s += diff * diff * plan(i, j) * plan(k, l);
        }
  return s;
}

}  // namespace gwmv::testing

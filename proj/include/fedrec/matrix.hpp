#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedrec {

using Vec = std::vector<double>;

// Row-major dense matrix of doubles. All numerics in this project are 64-bit.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  void fill(double v) { data.assign(data.size(), v); }

  bool same_shape(const DenseMatrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

inline bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline bool all_finite(const DenseMatrix& m) { return all_finite(m.data); }

inline double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(std::span<double> x, double a) {
  for (double& v : x) v *= a;
}

// out = M * x  (M: [rows x cols], x: [cols])
inline void matvec(const DenseMatrix& m, std::span<const double> x,
                   std::span<double> out) {
  if (x.size() != m.cols || out.size() != m.rows)
    throw std::invalid_argument("matvec: shape mismatch (" +
                                std::to_string(m.rows) + "x" +
                                std::to_string(m.cols) + " vs input " +
                                std::to_string(x.size()) + ")");
  for (std::size_t r = 0; r < m.rows; ++r) out[r] = dot(m.row(r), x);
}

// out = M^T * x  (x: [rows], out: [cols])
inline void matvec_t(const DenseMatrix& m, std::span<const double> x,
                     std::span<double> out) {
  for (std::size_t c = 0; c < m.cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double xr = x[r];
    const double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += xr * row[c];
  }
}

// M += a * x * y^T  (rank-1 update; x: [rows], y: [cols])
inline void rank1_update(DenseMatrix& m, double a, std::span<const double> x,
                         std::span<const double> y) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double ax = a * x[r];
    double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) row[c] += ax * y[c];
  }
}

}  // namespace fedrec

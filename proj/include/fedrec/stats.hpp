#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedrec/matrix.hpp"

namespace fedrec {

// Cosine similarity. Zero vectors are a domain error, not 0: silently
// returning 0 hides initialization bugs upstream.
inline double cosine_similarity(std::span<const double> x,
                                std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("cosine_similarity: length mismatch");
  const double nx = norm2(x);
  const double ny = norm2(y);
  if (nx == 0.0 || ny == 0.0)
    throw std::domain_error("cosine_similarity: zero vector");
  double s = dot(x, y) / (nx * ny);
  return std::clamp(s, -1.0, 1.0);
}

// d sim(x, y) / dx, accumulated into dx with weight w.
inline void cosine_grad_x(std::span<const double> x, std::span<const double> y,
                          double w, std::span<double> dx) {
  const double nx = norm2(x);
  const double ny = norm2(y);
  if (nx == 0.0 || ny == 0.0)
    throw std::domain_error("cosine_grad_x: zero vector");
  const double s = dot(x, y) / (nx * ny);
  const double inv = 1.0 / (nx * ny);
  const double self = s / (nx * nx);
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] += w * (y[i] * inv - self * x[i]);
}

// Pearson correlation matrix of the columns of M [n x d] -> [d x d].
// Symmetric, unit diagonal, entries clamped to [-1, 1].
inline DenseMatrix correlation_matrix(const DenseMatrix& m) {
  if (m.rows < 2)
    throw std::invalid_argument("correlation_matrix: need at least 2 rows");
  const std::size_t n = m.rows, d = m.cols;
  Vec mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) mean[c] += m(i, c);
  for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(n);

  // Centered gram matrix of columns.
  DenseMatrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) centered(i, c) = m(i, c) - mean[c];
  DenseMatrix gram(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += centered(i, a) * centered(i, b);
      gram(a, b) = acc;
      gram(b, a) = acc;
    }
  for (std::size_t c = 0; c < d; ++c)
    if (gram(c, c) <= 0.0)
      throw std::domain_error("correlation_matrix: zero-variance column " +
                              std::to_string(c));

  DenseMatrix corr(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    corr(a, a) = 1.0;
    for (std::size_t b = a + 1; b < d; ++b) {
      double v = gram(a, b) / (std::sqrt(gram(a, a)) * std::sqrt(gram(b, b)));
      v = std::clamp(v, -1.0, 1.0);
      corr(a, b) = v;
      corr(b, a) = v;
    }
  }
  return corr;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns eigenvalues
// in descending order; if `vectors` is non-null it receives the matching
// eigenvectors as columns. Plenty at this project's scale (d <= 64).
inline Vec symmetric_eigenvalues(DenseMatrix a, DenseMatrix* vectors = nullptr) {
  if (a.rows != a.cols)
    throw std::invalid_argument("symmetric_eigenvalues: matrix not square");
  const std::size_t d = a.rows;
  DenseMatrix v(d, d);
  for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(a(i, j)));
  const double tol = (scale > 0.0 ? scale : 1.0) * 1e-15;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * static_cast<double>(d)) break;

    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tol * 1e-2) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
    return x < y;
  });
  Vec values(d);
  for (std::size_t i = 0; i < d; ++i) values[i] = a(order[i], order[i]);
  if (vectors) {
    *vectors = DenseMatrix(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) (*vectors)(k, i) = v(k, order[i]);
  }
  return values;
}

// Singular values of M, descending: square roots of the eigenvalues of M^T M.
inline Vec singular_values(const DenseMatrix& m) {
  if (!all_finite(m))
    throw std::invalid_argument("singular_values: non-finite entries");
  const std::size_t d = m.cols;
  DenseMatrix gram(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m.rows; ++i) acc += m(i, a) * m(i, b);
      gram(a, b) = acc;
      gram(b, a) = acc;
    }
  Vec eig = symmetric_eigenvalues(gram);
  Vec sv(d);
  for (std::size_t i = 0; i < d; ++i) sv[i] = std::sqrt(std::max(eig[i], 0.0));
  return sv;
}

// Projects the rows of M onto its top-k principal components (for 2-D
// embedding-distribution dumps).
inline DenseMatrix pca_project(const DenseMatrix& m, std::size_t k) {
  const std::size_t n = m.rows, d = m.cols;
  k = std::min(k, d);
  Vec mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) mean[c] += m(i, c);
  for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(n ? n : 1);
  DenseMatrix cov(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        acc += (m(i, a) - mean[a]) * (m(i, b) - mean[b]);
      cov(a, b) = acc;
      cov(b, a) = acc;
    }
  DenseMatrix vectors;
  symmetric_eigenvalues(cov, &vectors);
  DenseMatrix out(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += (m(i, j) - mean[j]) * vectors(j, c);
      out(i, c) = acc;
    }
  return out;
}

inline double variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size());
}

}  // namespace fedrec

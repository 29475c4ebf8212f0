// Test-side oracles, independent of the implementation paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fedrec/matrix.hpp"

namespace oracle {

inline constexpr double kFdStep = 1e-4;

// Central finite difference of f with respect to *x.
template <typename F>
double central_diff(F&& f, double* x, double h = kFdStep) {
  const double saved = *x;
  *x = saved + h;
  const double fp = f();
  *x = saved - h;
  const double fm = f();
  *x = saved;
  return (fp - fm) / (2.0 * h);
}

// Relative error with a floor so that near-zero pairs compare cleanly.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)});
}

// Checks every coordinate of an analytic gradient against central finite
// differences of `loss`. Returns the worst relative error.
template <typename F>
double max_grad_rel_err(F&& loss, std::span<double> params,
                        std::span<const double> analytic, double h = kFdStep) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double fd = central_diff(loss, &params[i], h);
    worst = std::max(worst, rel_err(analytic[i], fd));
  }
  return worst;
}

// Scalar reference Adam, written from the published update equations.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  long t = 0;
  double lr, b1, b2, eps;
  ScalarAdam(double lr_, double b1_, double b2_, double eps_)
      : lr(lr_), b1(b1_), b2(b2_), eps(eps_) {}
  double step(double param, double grad) {
    t += 1;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad * grad;
    const double mhat = m / (1.0 - std::pow(b1, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(b2, static_cast<double>(t)));
    return param - lr * mhat / (std::sqrt(vhat) + eps);
  }
};

// trace(G^k) for a square matrix, by repeated multiplication.
inline double trace_power(const fedrec::DenseMatrix& g, int k) {
  const std::size_t d = g.rows;
  fedrec::DenseMatrix acc = g;
  for (int p = 1; p < k; ++p) {
    fedrec::DenseMatrix next(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < d; ++l) s += acc(i, l) * g(l, j);
        next(i, j) = s;
      }
    acc = next;
  }
  double tr = 0.0;
  for (std::size_t i = 0; i < d; ++i) tr += acc(i, i);
  return tr;
}

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double power_iteration_max_eig(const fedrec::DenseMatrix& g,
                                      int iters = 1000) {
  const std::size_t d = g.rows;
  fedrec::Vec v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    fedrec::Vec next(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) next[i] += g(i, j) * v[j];
    const double n = fedrec::norm2(next);
    if (n == 0.0) return 0.0;
    for (std::size_t i = 0; i < d; ++i) next[i] /= n;
    lambda = n;
    v = next;
  }
  return lambda;
}

}  // namespace oracle

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedrec/matrix.hpp"

namespace fedrec {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
// Convention: relu'(0) = 0.
inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

// One fully connected layer. weight is [out x in].
struct DenseLayer {
  DenseMatrix weight;
  Vec bias;

  DenseLayer() = default;
  DenseLayer(std::size_t out_dim, std::size_t in_dim)
      : weight(out_dim, in_dim), bias(out_dim, 0.0) {}
};

// ReLU feedforward stack with a linear scoring head:
//   score = sigmoid(head . relu(W_n(...relu(W_1 x + b_1)...) + b_n))
struct Mlp {
  std::vector<DenseLayer> layers;
  Vec output_head;

  std::size_t input_dim() const {
    return layers.empty() ? output_head.size() : layers.front().weight.cols;
  }
};

// Activations saved by the forward pass; sufficient to run backward without
// recomputation.
struct MlpCache {
  Vec input;
  std::vector<Vec> pre;  // per-layer pre-activations
  std::vector<Vec> act;  // per-layer post-activations
  double logit = 0.0;
  double score = 0.0;
};

inline void check_mlp_shapes(const Mlp& mlp, std::size_t input_len) {
  std::size_t dim = input_len;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const DenseLayer& layer = mlp.layers[l];
    if (layer.weight.cols != dim || layer.bias.size() != layer.weight.rows)
      throw std::invalid_argument(
          "mlp: shape mismatch at layer " + std::to_string(l) + " (expects input " +
          std::to_string(layer.weight.cols) + ", got " + std::to_string(dim) + ")");
    dim = layer.weight.rows;
  }
  if (mlp.output_head.size() != dim)
    throw std::invalid_argument("mlp: output head length " +
                                std::to_string(mlp.output_head.size()) +
                                " does not match final layer width " +
                                std::to_string(dim));
}

// Forward pass. Accumulation order per row is: weighted sum over inputs in
// index order, then bias. The batch scorer in model.hpp resumes partial sums
// in this exact order, so keep them in sync.
inline double mlp_forward(const Mlp& mlp, std::span<const double> input,
                          MlpCache* cache = nullptr) {
  check_mlp_shapes(mlp, input.size());
  Vec cur(input.begin(), input.end());
  if (cache) {
    cache->input = cur;
    cache->pre.assign(mlp.layers.size(), {});
    cache->act.assign(mlp.layers.size(), {});
  }
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const DenseLayer& layer = mlp.layers[l];
    Vec pre(layer.weight.rows);
    matvec(layer.weight, cur, pre);
    for (std::size_t r = 0; r < pre.size(); ++r) pre[r] += layer.bias[r];
    Vec act(pre.size());
    for (std::size_t r = 0; r < pre.size(); ++r) act[r] = relu(pre[r]);
    if (cache) {
      cache->pre[l] = pre;
      cache->act[l] = act;
    }
    cur = std::move(act);
  }
  const double logit = dot(mlp.output_head, cur);
  const double score = sigmoid(logit);
  if (cache) {
    cache->logit = logit;
    cache->score = score;
  }
  return score;
}

// Gradient accumulator matching an Mlp's shapes, plus the input gradient.
struct MlpGrads {
  std::vector<DenseLayer> layers;
  Vec output_head;
  Vec input;

  MlpGrads() = default;
  explicit MlpGrads(const Mlp& mlp) { reset(mlp); }

  void reset(const Mlp& mlp) {
    layers.clear();
    for (const DenseLayer& l : mlp.layers)
      layers.emplace_back(l.weight.rows, l.weight.cols);
    output_head.assign(mlp.output_head.size(), 0.0);
    input.assign(mlp.input_dim(), 0.0);
  }

  void zero() {
    for (DenseLayer& l : layers) {
      l.weight.fill(0.0);
      l.bias.assign(l.bias.size(), 0.0);
    }
    output_head.assign(output_head.size(), 0.0);
    input.assign(input.size(), 0.0);
  }
};

// Backward pass from dL/dlogit. Accumulates into `grads` (callers sum over
// many (user, item) pairs); grads.input is overwritten with this pair's
// input gradient.
inline void mlp_backward(const Mlp& mlp, const MlpCache& cache, double dlogit,
                         MlpGrads& grads) {
  const std::size_t n_layers = mlp.layers.size();
  const Vec& last_act = n_layers ? cache.act[n_layers - 1] : cache.input;
  axpy(dlogit, last_act, grads.output_head);

  Vec dact(mlp.output_head.size());
  for (std::size_t i = 0; i < dact.size(); ++i)
    dact[i] = dlogit * mlp.output_head[i];

  for (std::size_t l = n_layers; l-- > 0;) {
    const DenseLayer& layer = mlp.layers[l];
    Vec dpre(dact.size());
    for (std::size_t r = 0; r < dpre.size(); ++r)
      dpre[r] = dact[r] * relu_grad(cache.pre[l][r]);
    const Vec& below = (l == 0) ? cache.input : cache.act[l - 1];
    rank1_update(grads.layers[l].weight, 1.0, dpre, below);
    axpy(1.0, dpre, grads.layers[l].bias);
    Vec dx(layer.weight.cols);
    matvec_t(layer.weight, dpre, dx);
    dact = std::move(dx);
  }
  grads.input = std::move(dact);
}

}  // namespace fedrec

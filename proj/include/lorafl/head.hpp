#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lorafl/lowrank.hpp"

namespace lorafl {

// One-shot Siamese similarity head: two branch LoRA layers mapping frozen
// features to embeddings, absolute-difference fusion, a similarity LoRA
// layer, and a sigmoid output. The six factor matrices are the only
// trainable weights in the whole model.
template <typename T>
struct SiameseHeadParams {
  std::size_t feature_dim = 0;  // F
  std::size_t embed_dim = 0;    // E
  std::size_t rank = 0;         // k, shared by all three layers
  LoRaLayer<T> fc_lora_1;       // F -> E
  LoRaLayer<T> fc_lora_2;       // F -> E
  LoRaLayer<T> similarity_lora; // E -> 1

  bool operator==(const SiameseHeadParams&) const = default;
};

template <typename T>
SiameseHeadParams<T> init_head(std::size_t feature_dim, std::size_t embed_dim,
                               std::size_t rank, std::uint64_t seed) {
  SiameseHeadParams<T> p;
  p.feature_dim = feature_dim;
  p.embed_dim = embed_dim;
  p.rank = rank;
  p.fc_lora_1 = init_lora<T>(feature_dim, embed_dim, rank, hash_combine(seed, 1));
  p.fc_lora_2 = init_lora<T>(feature_dim, embed_dim, rank, hash_combine(seed, 2));
  p.similarity_lora = init_lora<T>(embed_dim, 1, rank, hash_combine(seed, 3));
  return p;
}

// Per-batch intermediates kept for the backward pass.
template <typename T>
struct ForwardCache {
  Matrix<T> x1, x2;
  Matrix<T> x1a1, x2a2;  // x * A for each branch
  Matrix<T> diff_abs;    // d = |u1 - u2|
  Matrix<T> diff_sign;   // sign(u1 - u2), sign(0) := 0
  Matrix<T> da_s;        // d * A_s
  Matrix<T> logit;       // s
  Matrix<T> prob;        // p = sigmoid(s)
};

template <typename T>
struct HeadGrads {
  Matrix<T> dA1, dB1, dA2, dB2, dAs, dBs;
};

// The six trainable factor matrices in their fixed serialization and
// optimizer order (A1, B1, A2, B2, A_s, B_s).
template <typename T>
std::array<Matrix<T>*, 6> head_factors(SiameseHeadParams<T>& p) {
  return {&p.fc_lora_1.A, &p.fc_lora_1.B, &p.fc_lora_2.A, &p.fc_lora_2.B,
          &p.similarity_lora.A, &p.similarity_lora.B};
}

template <typename T>
std::array<const Matrix<T>*, 6> head_factors(const SiameseHeadParams<T>& p) {
  return {&p.fc_lora_1.A, &p.fc_lora_1.B, &p.fc_lora_2.A, &p.fc_lora_2.B,
          &p.similarity_lora.A, &p.similarity_lora.B};
}

template <typename T>
std::array<const Matrix<T>*, 6> grad_list(const HeadGrads<T>& g) {
  return {&g.dA1, &g.dB1, &g.dA2, &g.dB2, &g.dAs, &g.dBs};
}

template <typename T>
T sigmoid(T s) {
  // Branch on sign to avoid overflow in exp.
  if (s >= T(0)) {
    const T e = std::exp(-s);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(s);
  return e / (T(1) + e);
}

template <typename T>
std::pair<Matrix<T>, ForwardCache<T>> head_forward(const SiameseHeadParams<T>& params,
                                                   const Matrix<T>& x1,
                                                   const Matrix<T>& x2,
                                                   FlopCounter* flops = nullptr) {
  if (!x1.same_shape(x2))
    throw DimensionError("head_forward: x1 and x2 must have the same shape");
  if (x1.cols() != params.feature_dim)
    throw DimensionError("head_forward: input cols != feature_dim");

  ForwardCache<T> cache;
  cache.x1 = x1;
  cache.x2 = x2;
  auto [u1, x1a1] = lora_forward_cached(params.fc_lora_1, x1, flops);
  auto [u2, x2a2] = lora_forward_cached(params.fc_lora_2, x2, flops);
  cache.x1a1 = std::move(x1a1);
  cache.x2a2 = std::move(x2a2);

  const std::size_t n = x1.rows(), e = params.embed_dim;
  cache.diff_abs = Matrix<T>(n, e);
  cache.diff_sign = Matrix<T>(n, e);
  for (std::size_t i = 0; i < n * e; ++i) {
    const T d = u1.data()[i] - u2.data()[i];
    cache.diff_abs.data()[i] = std::abs(d);
    cache.diff_sign.data()[i] = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
  }
  if (flops) flops->other += std::uint64_t(n) * e;  // abs-difference, 1 op/elem

  auto [s, da_s] = lora_forward_cached(params.similarity_lora, cache.diff_abs, flops);
  cache.da_s = std::move(da_s);
  cache.logit = s;

  cache.prob = Matrix<T>(n, 1);
  for (std::size_t i = 0; i < n; ++i)
    cache.prob.data()[i] = sigmoid(s.data()[i]);
  if (flops) flops->other += std::uint64_t(n) * 4;  // sigmoid counted as 4 ops

  return {cache.prob, std::move(cache)};
}

// Gradient of the mean sigmoid-BCE loss w.r.t. the six factor matrices.
// The sigmoid and BCE are fused: dL/ds = (p - y) / n.
template <typename T>
HeadGrads<T> head_backward(const SiameseHeadParams<T>& params,
                           const ForwardCache<T>& cache, const Matrix<T>& y) {
  const std::size_t n = cache.prob.rows();
  if (y.rows() != n || y.cols() != 1)
    throw DimensionError("head_backward: label shape mismatch");

  Matrix<T> ds(n, 1);
  for (std::size_t i = 0; i < n; ++i)
    ds.data()[i] = (cache.prob.data()[i] - y.data()[i]) / T(n);

  LoRaGrads<T> gs = lora_backward(params.similarity_lora, cache.diff_abs,
                                  cache.da_s, ds);

  // Absolute-value node: route gradient with sign(u1 - u2), sign(0) = 0.
  Matrix<T> du1 = gs.grad_x;
  Matrix<T> du2 = gs.grad_x;
  for (std::size_t i = 0; i < du1.size(); ++i) {
    const T sgn = cache.diff_sign.data()[i];
    du1.data()[i] *= sgn;
    du2.data()[i] *= -sgn;
  }

  LoRaGrads<T> g1 = lora_backward(params.fc_lora_1, cache.x1, cache.x1a1, du1);
  LoRaGrads<T> g2 = lora_backward(params.fc_lora_2, cache.x2, cache.x2a2, du2);

  HeadGrads<T> grads;
  grads.dA1 = std::move(g1.grad_A);
  grads.dB1 = std::move(g1.grad_B);
  grads.dA2 = std::move(g2.grad_A);
  grads.dB2 = std::move(g2.grad_B);
  grads.dAs = std::move(gs.grad_A);
  grads.dBs = std::move(gs.grad_B);
  return grads;
}

// Binary decision per pair; ties at the threshold predict "same".
template <typename T>
std::vector<std::uint8_t> predict(const Matrix<T>& p, T threshold = T(0.5)) {
  if (p.cols() != 1) throw DimensionError("predict: expected a column vector");
  std::vector<std::uint8_t> out(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i)
    out[i] = p.data()[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace lorafl

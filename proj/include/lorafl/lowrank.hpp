#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <tuple>

#include "lorafl/matrix.hpp"
#include "lorafl/rng.hpp"

namespace lorafl {

// Low-rank linear map W = A*B with factors A (N,k) and B (k,M). The factors
// are the sole trainable weights; there is no bias term.
template <typename T>
struct LoRaLayer {
  std::size_t in_dim = 0;   // N
  std::size_t out_dim = 0;  // M
  std::size_t rank = 0;     // k
  Matrix<T> A;              // (N, k)
  Matrix<T> B;              // (k, M)

  bool operator==(const LoRaLayer&) const = default;
};

// Full-rank baseline layer, used only for cost accounting comparisons.
template <typename T>
struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Matrix<T> W;  // (N, M)
};

template <typename T>
struct LoRaGrads {
  Matrix<T> grad_A;  // (N, k)
  Matrix<T> grad_B;  // (k, M)
  Matrix<T> grad_x;  // (n, N)
};

// Both factors get variance-preserving Gaussian init (A std 1/sqrt(N),
// B std 1/sqrt(k)). The LoRA modules are the sole weights here, so the usual
// zero-init of one factor would stall the other's gradients at step 0.
template <typename T>
LoRaLayer<T> init_lora(std::size_t in_dim, std::size_t out_dim, std::size_t rank,
                       std::uint64_t seed) {
  if (in_dim < 1 || out_dim < 1 || rank < 1)
    throw ValidationError("init_lora: dimensions and rank must be >= 1");
  if (rank > std::min(in_dim, out_dim))
    std::fprintf(stderr,
                 "warning: LoRA rank %zu exceeds min(%zu,%zu); layer is "
                 "over-parameterized\n",
                 rank, in_dim, out_dim);
  LoRaLayer<T> layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.rank = rank;
  layer.A = Matrix<T>(in_dim, rank);
  layer.B = Matrix<T>(rank, out_dim);
  Rng rng(seed);
  const double std_a = 1.0 / std::sqrt(double(in_dim));
  const double std_b = 1.0 / std::sqrt(double(rank));
  for (std::size_t i = 0; i < layer.A.size(); ++i)
    layer.A.data()[i] = T(rng.gaussian() * std_a);
  for (std::size_t i = 0; i < layer.B.size(); ++i)
    layer.B.data()[i] = T(rng.gaussian() * std_b);
  return layer;
}

// Forward pass computed factored as (x*A)*B. The N x M product is never
// materialized during training; that is where the FLOP savings come from.
template <typename T>
Matrix<T> lora_forward(const LoRaLayer<T>& layer, const Matrix<T>& x,
                       FlopCounter* flops = nullptr) {
  if (x.cols() != layer.in_dim)
    throw DimensionError("lora_forward: input cols != layer in_dim");
  return matmul(matmul(x, layer.A, flops), layer.B, flops);
}

// Forward pass that also returns the intermediate x*A needed by backward.
template <typename T>
std::pair<Matrix<T>, Matrix<T>> lora_forward_cached(const LoRaLayer<T>& layer,
                                                    const Matrix<T>& x,
                                                    FlopCounter* flops = nullptr) {
  if (x.cols() != layer.in_dim)
    throw DimensionError("lora_forward: input cols != layer in_dim");
  Matrix<T> xa = matmul(x, layer.A, flops);
  Matrix<T> out = matmul(xa, layer.B, flops);
  return {std::move(out), std::move(xa)};
}

template <typename T>
Matrix<T> lora_materialize(const LoRaLayer<T>& layer) {
  return matmul(layer.A, layer.B);
}

// Closed-form chain rule for y = (x*A)*B.
//   grad_B = (x*A)^T * grad_out
//   grad_A = x^T * (grad_out * B^T)
//   grad_x = grad_out * B^T * A^T
template <typename T>
LoRaGrads<T> lora_backward(const LoRaLayer<T>& layer, const Matrix<T>& x,
                           const Matrix<T>& xa, const Matrix<T>& grad_out,
                           FlopCounter* flops = nullptr) {
  if (x.cols() != layer.in_dim || grad_out.cols() != layer.out_dim ||
      x.rows() != grad_out.rows() || xa.rows() != x.rows() ||
      xa.cols() != layer.rank)
    throw DimensionError("lora_backward: inconsistent shapes");
  LoRaGrads<T> g;
  Matrix<T> go_bt = matmul(grad_out, transpose(layer.B), flops);
  g.grad_B = matmul(transpose(xa), grad_out, flops);
  g.grad_A = matmul(transpose(x), go_bt, flops);
  g.grad_x = matmul(go_bt, transpose(layer.A), flops);
  return g;
}

template <typename T>
LoRaGrads<T> lora_backward(const LoRaLayer<T>& layer, const Matrix<T>& x,
                           const Matrix<T>& grad_out, FlopCounter* flops = nullptr) {
  return lora_backward(layer, x, matmul(x, layer.A), grad_out, flops);
}

template <typename T>
std::size_t param_count(const LoRaLayer<T>& layer) {
  return layer.rank * (layer.in_dim + layer.out_dim);
}

template <typename T>
std::size_t param_count(const DenseLayer<T>& layer) {
  return layer.in_dim * layer.out_dim;
}

}  // namespace lorafl

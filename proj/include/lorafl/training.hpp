#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <vector>

#include "lorafl/data.hpp"
#include "lorafl/head.hpp"

namespace lorafl {

// A client's trainable view: frozen features plus its labeled pairs.
struct ClientDataView {
  const FeatureStore* features = nullptr;
  std::vector<PairExample> pairs;
};

constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy over the batch; probabilities are clamped to
// [1e-7, 1-1e-7] so the reported loss stays finite.
template <typename T>
double bce_loss(const Matrix<T>& p, const Matrix<T>& y) {
  if (!p.same_shape(y) || p.cols() != 1)
    throw DimensionError("bce_loss: p and y must be matching column vectors");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double yi = double(y.data()[i]);
    if (yi != 0.0 && yi != 1.0)
      throw ValidationError("bce_loss: label must be 0 or 1");
    double pi = double(p.data()[i]);
    pi = std::min(1.0 - kProbClamp, std::max(kProbClamp, pi));
    sum += -(yi * std::log(pi) + (1.0 - yi) * std::log(1.0 - pi));
  }
  return sum / double(p.rows());
}

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment state for the six factor matrices, in the fixed order
// (A1, B1, A2, B2, A_s, B_s).
template <typename T>
struct AdamState {
  std::vector<Matrix<T>> m;
  std::vector<Matrix<T>> v;
  std::uint64_t t = 0;
};

template <typename T>
AdamState<T> make_adam_state(const SiameseHeadParams<T>& params) {
  AdamState<T> state;
  for (const Matrix<T>* f : head_factors(params)) {
    state.m.emplace_back(f->rows(), f->cols(), T(0));
    state.v.emplace_back(f->rows(), f->cols(), T(0));
  }
  return state;
}

// One Adam update with bias correction, applied entrywise per factor matrix.
template <typename T>
void adam_step(const std::array<Matrix<T>*, 6>& factors,
               const std::array<const Matrix<T>*, 6>& grads, AdamState<T>& state,
               const AdamHyper& hp = {}) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(hp.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, double(state.t));
  for (std::size_t f = 0; f < factors.size(); ++f) {
    Matrix<T>& w = *factors[f];
    const Matrix<T>& g = *grads[f];
    Matrix<T>& m = state.m[f];
    Matrix<T>& v = state.v[f];
    if (!w.same_shape(g) || !w.same_shape(m))
      throw DimensionError("adam_step: factor/grad/state shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = double(g.data()[i]);
      const double mi = hp.beta1 * double(m.data()[i]) + (1.0 - hp.beta1) * gi;
      const double vi = hp.beta2 * double(v.data()[i]) + (1.0 - hp.beta2) * gi * gi;
      m.data()[i] = T(mi);
      v.data()[i] = T(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      w.data()[i] = T(double(w.data()[i]) - hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps));
    }
  }
}

template <typename T>
struct TrainStats {
  std::vector<double> epoch_loss;  // running mean per epoch
  std::size_t samples_seen = 0;
  double elapsed_ms = 0.0;
};

namespace detail {

// Gather one mini-batch of pair features and labels.
template <typename T>
void assemble_batch(const ClientDataView& data, const std::uint32_t* order,
                    std::size_t begin, std::size_t end, Matrix<T>& x1,
                    Matrix<T>& x2, Matrix<T>& y) {
  const std::size_t n = end - begin;
  const std::size_t dim = data.features->dim;
  x1 = Matrix<T>(n, dim);
  x2 = Matrix<T>(n, dim);
  y = Matrix<T>(n, 1);
  for (std::size_t b = 0; b < n; ++b) {
    const PairExample& pair = data.pairs[order[begin + b]];
    const float* f1 = data.features->row(pair.idx1);
    const float* f2 = data.features->row(pair.idx2);
    for (std::size_t c = 0; c < dim; ++c) {
      x1(b, c) = T(f1[c]);
      x2(b, c) = T(f2[c]);
    }
    y(b, 0) = T(pair.label);
  }
}

}  // namespace detail

// Local training: fresh Adam state, shuffled mini-batches (fresh shuffle per
// epoch), last partial batch included. Deterministic for a fixed seed.
template <typename T>
TrainStats<T> train_local(SiameseHeadParams<T>& params, const ClientDataView& data,
                          std::size_t epochs, std::size_t batch_size, double lr,
                          std::uint64_t seed) {
  if (!data.features || data.pairs.empty())
    throw ValidationError("train_local: empty client dataset");
  if (batch_size < 1) throw ValidationError("train_local: batch_size must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  AdamState<T> adam = make_adam_state(params);
  AdamHyper hp;
  hp.lr = lr;
  Rng rng(seed);

  std::vector<std::uint32_t> order(data.pairs.size());
  std::iota(order.begin(), order.end(), 0);

  TrainStats<T> stats;
  Matrix<T> x1, x2, y;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order.data(), order.size());
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const std::size_t end = std::min(begin + batch_size, order.size());
      detail::assemble_batch(data, order.data(), begin, end, x1, x2, y);
      auto [p, cache] = head_forward(params, x1, x2);
      loss_sum += bce_loss(p, y);
      HeadGrads<T> grads = head_backward(params, cache, y);
      adam_step(head_factors(params), grad_list(grads), adam, hp);
      stats.samples_seen += end - begin;
      ++batches;
    }
    stats.epoch_loss.push_back(batches ? loss_sum / double(batches) : 0.0);
  }
  stats.elapsed_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  return stats;
}

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

template <typename T>
EvalResult evaluate(const SiameseHeadParams<T>& params, const ClientDataView& data,
                    std::size_t batch_size = 256) {
  if (!data.features || data.pairs.empty())
    throw ValidationError("evaluate: empty test set");

  std::vector<std::uint32_t> order(data.pairs.size());
  std::iota(order.begin(), order.end(), 0);

  std::size_t correct = 0;
  double loss_sum = 0.0;
  Matrix<T> x1, x2, y;
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, order.size());
    detail::assemble_batch(data, order.data(), begin, end, x1, x2, y);
    auto [p, cache] = head_forward(params, x1, x2);
    loss_sum += bce_loss(p, y) * double(end - begin);
    const auto preds = predict(p);
    for (std::size_t i = 0; i < preds.size(); ++i)
      if (preds[i] == std::uint8_t(y(i, 0))) ++correct;
  }
  EvalResult r;
  r.accuracy = double(correct) / double(data.pairs.size());
  r.mean_loss = loss_sum / double(data.pairs.size());
  return r;
}

}  // namespace lorafl

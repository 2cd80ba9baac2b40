#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <thread>
#include <vector>

#include "lorafl/cost_model.hpp"
#include "lorafl/training.hpp"

namespace lorafl {

enum class Partition { Iid, NonIid };

struct FedConfig {
  std::size_t num_clients = 5;       // C
  std::size_t clients_per_round = 3; // K
  std::size_t rounds = 10;
  std::size_t local_epochs = 5;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::size_t rank = 8;
  Partition partition = Partition::Iid;
  std::uint64_t global_seed = 0;
  std::size_t threads = 1;
};

struct RoundRecord {
  std::size_t round = 0;                  // 1-based
  std::vector<std::size_t> selected;      // client ids, ascending
  std::vector<std::size_t> sample_counts; // training pairs per selected client
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  double train_loss = 0.0;                // mean of selected clients' last epoch
  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
  double elapsed_ms = 0.0;
};

// Per-client seed stream, stable under parallel dispatch.
inline std::uint64_t client_seed(std::uint64_t global_seed, std::size_t round,
                                 std::size_t client) {
  return hash_combine(global_seed, round, client);
}

// Uniform sample of K distinct client ids, deterministic per (seed, round).
inline std::vector<std::size_t> sample_clients(std::size_t num_clients,
                                               std::size_t k, std::size_t round,
                                               std::uint64_t global_seed) {
  if (k < 1 || k > num_clients)
    throw ValidationError("sample_clients: need 1 <= K <= C");
  std::vector<std::size_t> ids(num_clients);
  for (std::size_t i = 0; i < num_clients; ++i) ids[i] = i;
  Rng rng(hash_combine(global_seed, round, 0x5e1ec7ULL));
  // Partial Fisher-Yates: the first k slots become the sample.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + std::size_t(rng.uniform_index(num_clients - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

template <typename T>
struct ClientUpdate {
  SiameseHeadParams<T> params;
  double weight = 0.0;  // training sample count
};

// FederatedAveraging over the six factor matrices: entrywise weighted mean,
// accumulated in 64-bit in the given (ascending client-id) order, then
// rounded back to storage precision.
template <typename T>
SiameseHeadParams<T> aggregate(const std::vector<ClientUpdate<T>>& updates) {
  if (updates.empty()) throw ValidationError("aggregate: no updates");
  for (const auto& u : updates) {
    if (u.weight <= 0.0) throw ValidationError("aggregate: weights must be > 0");
    if (u.params.feature_dim != updates[0].params.feature_dim ||
        u.params.embed_dim != updates[0].params.embed_dim ||
        u.params.rank != updates[0].params.rank)
      throw DimensionError("aggregate: update shapes differ");
  }

  SiameseHeadParams<T> out = updates[0].params;
  auto out_factors = head_factors(out);
  double total_weight = 0.0;
  for (const auto& u : updates) total_weight += u.weight;

  for (std::size_t f = 0; f < out_factors.size(); ++f) {
    Matrix<T>& dst = *out_factors[f];
    std::vector<double> acc(dst.size(), 0.0);
    for (const auto& u : updates) {
      const Matrix<T>& src = *head_factors(u.params)[f];
      if (!src.same_shape(dst))
        throw DimensionError("aggregate: factor shape mismatch");
      for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += u.weight * double(src.data()[i]);
    }
    for (std::size_t i = 0; i < acc.size(); ++i)
      dst.data()[i] = T(acc[i] / total_weight);
  }
  return out;
}

template <typename T>
struct FedResult {
  std::vector<RoundRecord> records;
  SiameseHeadParams<T> model;
};

// One run of the FL-LoRa pipeline: per round, sample K clients, train each
// from a copy of the global model, aggregate weighted by sample counts, then
// evaluate on the global test set. Bit-reproducible at any thread count
// (client randomness comes only from client_seed; aggregation order is
// fixed by ascending client id).
template <typename T>
FedResult<T> run_federated(const FedConfig& cfg,
                           const SiameseHeadParams<T>& init_params,
                           const std::vector<ClientDataView>& clients,
                           const ClientDataView& test_set) {
  if (clients.size() != cfg.num_clients)
    throw ValidationError("run_federated: client view count != C");
  if (cfg.clients_per_round < 1 || cfg.clients_per_round > cfg.num_clients)
    throw ValidationError("run_federated: need 1 <= K <= C");

  const std::uint64_t payload =
      payload_bytes(head_param_count(init_params.feature_dim,
                                     init_params.embed_dim, init_params.rank));

  FedResult<T> result;
  result.model = init_params;
  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    const auto round_start = std::chrono::steady_clock::now();
    const auto selected = sample_clients(cfg.num_clients, cfg.clients_per_round,
                                         round, cfg.global_seed);

    std::vector<ClientUpdate<T>> updates(selected.size());
    std::vector<double> last_losses(selected.size(), 0.0);
    auto train_one = [&](std::size_t slot) {
      const std::size_t cid = selected[slot];
      SiameseHeadParams<T> local = result.model;
      TrainStats<T> stats =
          train_local(local, clients[cid], cfg.local_epochs, cfg.batch_size,
                      cfg.lr, client_seed(cfg.global_seed, round, cid));
      updates[slot] = {std::move(local), double(clients[cid].pairs.size())};
      last_losses[slot] = stats.epoch_loss.empty() ? 0.0 : stats.epoch_loss.back();
    };

    if (cfg.threads > 1 && selected.size() > 1) {
      std::vector<std::thread> pool;
      for (std::size_t slot = 0; slot < selected.size(); ++slot)
        pool.emplace_back(train_one, slot);
      for (auto& th : pool) th.join();
    } else {
      for (std::size_t slot = 0; slot < selected.size(); ++slot) train_one(slot);
    }

    result.model = aggregate(updates);
    const EvalResult eval = evaluate(result.model, test_set);

    RoundRecord rec;
    rec.round = round;
    rec.selected = selected;
    for (std::size_t cid : selected)
      rec.sample_counts.push_back(clients[cid].pairs.size());
    rec.test_accuracy = eval.accuracy;
    rec.test_loss = eval.mean_loss;
    double loss_sum = 0.0;
    for (double l : last_losses) loss_sum += l;
    rec.train_loss = loss_sum / double(last_losses.size());
    rec.uplink_bytes = selected.size() * payload;
    rec.downlink_bytes = selected.size() * payload;
    rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - round_start)
                         .count();
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace lorafl

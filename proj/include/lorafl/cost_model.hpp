#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorafl/errors.hpp"

namespace lorafl {

// Analytic accounting of trainable parameters, edge-server bytes and
// training FLOPs as functions of the LoRA rank k, with a full-rank dense
// baseline. Conventions: a multiply-accumulate is 2 FLOPs; the backward
// pass costs 2x the forward pass, so one training sample costs 3x forward;
// parameters are 4-byte floats; Adam FLOPs (18/param/step) are reported
// separately from the headline figure.

constexpr std::uint64_t kBytesPerParam = 4;
constexpr std::uint64_t kAdamFlopsPerParamStep = 18;

// Two branch LoRA layers (F->E) plus the similarity layer (E->1).
inline std::uint64_t head_param_count(std::uint64_t F, std::uint64_t E,
                                      std::uint64_t k) {
  return 2 * k * (F + E) + k * (E + 1);
}

inline std::uint64_t dense_head_param_count(std::uint64_t F, std::uint64_t E) {
  return 2 * F * E + E;
}

inline std::uint64_t payload_bytes(std::uint64_t params,
                                   std::uint64_t bytes_per_param = kBytesPerParam) {
  return params * bytes_per_param;
}

// Forward FLOPs for one sample: two factored branch layers at 2k(N+M) each,
// the absolute difference (E), the similarity layer, and the sigmoid (4).
inline std::uint64_t forward_flops_per_sample(std::uint64_t F, std::uint64_t E,
                                              std::uint64_t k) {
  return 2 * (2 * k * (F + E)) + E + 2 * k * (E + 1) + 4;
}

inline std::uint64_t dense_forward_flops_per_sample(std::uint64_t F,
                                                    std::uint64_t E) {
  return 2 * (2 * F * E) + E + 2 * E + 4;
}

inline std::uint64_t training_flops_per_sample(std::uint64_t forward_flops) {
  return 3 * forward_flops;
}

struct CostConfig {
  std::uint64_t feature_dim = 0;       // F
  std::uint64_t embed_dim = 128;       // E
  std::uint64_t clients_per_round = 3; // K
  std::uint64_t rounds = 10;
  std::uint64_t local_epochs = 5;
  std::uint64_t pairs_per_client = 5000;
  std::uint64_t batch_size = 32;
};

// Uplink + downlink for the K selected clients of one round.
inline std::uint64_t round_bytes(const CostConfig& cfg, std::uint64_t params) {
  return 2 * cfg.clients_per_round * payload_bytes(params);
}

inline std::uint64_t run_bytes(const CostConfig& cfg, std::uint64_t params) {
  return cfg.rounds * round_bytes(cfg, params);
}

struct CostReport {
  std::string label;                 // "k=8" or "dense"
  std::uint64_t rank = 0;            // 0 for dense
  std::uint64_t trainable_params = 0;
  std::uint64_t payload_bytes = 0;   // per client per direction
  std::uint64_t round_bytes = 0;
  std::uint64_t run_bytes = 0;
  std::uint64_t forward_flops_per_sample = 0;
  std::uint64_t training_flops_per_sample = 0;
  std::uint64_t training_flops_per_epoch = 0;     // per client
  std::uint64_t training_flops_per_run = 0;       // per client, all rounds
  std::uint64_t adam_flops_per_run = 0;           // per client, reported apart
  double params_ratio_vs_dense = 0.0;
  double flops_ratio_vs_dense = 0.0;
  double params_ratio_vs_max_k = 0.0;
  double flops_ratio_vs_max_k = 0.0;
};

inline CostReport make_cost_row(const CostConfig& cfg, std::uint64_t params,
                                std::uint64_t fwd_flops, std::uint64_t rank,
                                const std::string& label) {
  CostReport r;
  r.label = label;
  r.rank = rank;
  r.trainable_params = params;
  r.payload_bytes = payload_bytes(params);
  r.round_bytes = round_bytes(cfg, params);
  r.run_bytes = run_bytes(cfg, params);
  r.forward_flops_per_sample = fwd_flops;
  r.training_flops_per_sample = training_flops_per_sample(fwd_flops);
  r.training_flops_per_epoch = r.training_flops_per_sample * cfg.pairs_per_client;
  r.training_flops_per_run =
      r.training_flops_per_epoch * cfg.local_epochs * cfg.rounds;
  const std::uint64_t steps_per_epoch =
      (cfg.pairs_per_client + cfg.batch_size - 1) / cfg.batch_size;
  r.adam_flops_per_run = kAdamFlopsPerParamStep * params * steps_per_epoch *
                         cfg.local_epochs * cfg.rounds;
  return r;
}

// One row per rank in the sweep plus the dense baseline, with ratios against
// dense and against the largest swept rank.
inline std::vector<CostReport> cost_report(const CostConfig& cfg,
                                           const std::vector<std::uint64_t>& sweep) {
  if (sweep.empty()) throw ValidationError("cost_report: empty rank sweep");
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (sweep[i] <= sweep[i - 1])
      throw ValidationError("cost_report: sweep must be strictly increasing");

  const std::uint64_t F = cfg.feature_dim, E = cfg.embed_dim;
  std::vector<CostReport> rows;
  for (std::uint64_t k : sweep)
    rows.push_back(make_cost_row(cfg, head_param_count(F, E, k),
                                 forward_flops_per_sample(F, E, k), k,
                                 "k=" + std::to_string(k)));
  rows.push_back(make_cost_row(cfg, dense_head_param_count(F, E),
                               dense_forward_flops_per_sample(F, E), 0, "dense"));

  const CostReport& dense = rows.back();
  const CostReport& max_k = rows[sweep.size() - 1];
  for (CostReport& r : rows) {
    r.params_ratio_vs_dense = double(dense.trainable_params) / double(r.trainable_params);
    r.flops_ratio_vs_dense = double(dense.training_flops_per_sample) /
                             double(r.training_flops_per_sample);
    r.params_ratio_vs_max_k = double(max_k.trainable_params) / double(r.trainable_params);
    r.flops_ratio_vs_max_k = double(max_k.training_flops_per_sample) /
                             double(r.training_flops_per_sample);
  }
  return rows;
}

}  // namespace lorafl

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorafl/data.hpp"

namespace lorafl {

// Full experiment configuration. Every field maps to one `key = value`
// config-file key of the same name; unknown keys are hard errors.
struct RunConfig {
  std::string dataset = "mnist";          // mnist | cifar10
  std::string mnist_images;               // IDX file, optionally gzipped
  std::string mnist_labels;
  std::string cifar_bin;                  // comma-separated batch files

  std::string feature_mode = "flatten";   // flatten | random_projection | file
  std::size_t feature_dim = 0;            // random_projection output dim
  std::uint64_t feature_seed = 0;
  std::string feature_file;

  std::size_t embed_dim = 128;            // E
  std::string partition = "iid";          // iid | noniid

  std::size_t clients = 5;                // C
  std::size_t clients_per_round = 3;      // K
  std::size_t rounds = 10;
  std::size_t local_epochs = 5;
  std::size_t batch_size = 32;
  double lr = 1e-3;

  std::vector<std::size_t> ranks = {1, 2, 4, 8, 16, 32};
  std::size_t folds = 5;
  double train_ratio = 0.8;
  std::size_t max_pairs_per_client = 5000;
  std::size_t test_pairs = 2000;

  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string precision = "f32";          // f32 | f64
};

// `key = value` text; '#' starts a comment; unknown keys are hard errors.
RunConfig load_config_file(const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);
void validate_config(const RunConfig& cfg);

// Per-fold dataset artifacts, as written by `prepare`.
struct FoldData {
  std::vector<std::vector<std::uint32_t>> client_indices;
  std::vector<std::vector<std::uint8_t>> client_classes;
  std::vector<std::vector<PairExample>> client_pairs;
  std::vector<PairExample> test_pairs;
};

struct PreparedData {
  FeatureStore features;
  std::vector<FoldData> folds;
};

ImageStore load_dataset(const RunConfig& cfg);
FoldData make_fold(const ImageStore& store, const RunConfig& cfg, std::size_t fold);

// Subcommands. prepare writes features + fold files + manifest into out_dir;
// the others consume them.
void cmd_prepare(const RunConfig& cfg);
void cmd_federate(const RunConfig& cfg);
void cmd_centralized(const RunConfig& cfg);
void cmd_cost(const RunConfig& cfg);
void cmd_plot_metrics(const std::string& csv_path, const std::string& svg_path);
void cmd_plot_cost(const std::string& csv_path, const std::string& svg_path);

PreparedData load_prepared(const RunConfig& cfg);

// Feature dimension implied by the config (used by cost accounting, which
// must not require the dataset on disk).
std::size_t effective_feature_dim(const RunConfig& cfg);

std::string metrics_csv_path(const RunConfig& cfg);
std::string central_csv_path(const RunConfig& cfg);
std::string checkpoint_path(const RunConfig& cfg, std::size_t fold, std::size_t rank);

}  // namespace lorafl

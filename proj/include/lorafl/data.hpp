#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorafl/errors.hpp"
#include "lorafl/rng.hpp"

namespace lorafl {

using Bytes = std::vector<std::uint8_t>;

// Raw image dataset: n images of H x W x C bytes plus class labels.
struct ImageStore {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::size_t num_classes = 0;           // L
  std::vector<std::uint8_t> pixels;      // n * H*W*C, per-image contiguous
  std::vector<std::uint8_t> labels;      // n entries, each < L

  std::size_t count() const { return labels.size(); }
  std::size_t image_bytes() const { return height * width * channels; }
};

// Frozen per-image feature vectors; immutable once extracted.
struct FeatureStore {
  std::size_t dim = 0;                   // F
  std::vector<float> features;           // count * dim, row-major
  std::string extractor;                 // descriptor: mode + seed

  std::size_t count() const { return dim == 0 ? 0 : features.size() / dim; }
  const float* row(std::size_t i) const { return features.data() + i * dim; }
};

// Labeled pair of image indices; label 1 iff same class.
struct PairExample {
  std::uint32_t idx1 = 0;
  std::uint32_t idx2 = 0;
  std::uint8_t label = 0;

  bool operator==(const PairExample&) const = default;
};

// One simulated client's slice of the data.
struct ClientShard {
  int client_id = 0;
  std::vector<std::uint32_t> indices;    // owned image indices (train split)
  std::vector<std::uint8_t> classes;     // owned class ids
  std::vector<PairExample> pairs;        // training pairs, endpoints in indices
};

// Raw IDX tensor as stored in MNIST distribution files.
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

// --- parsing / serialization (src/data.cpp) ---

// Transparently gunzips if the payload carries the gzip magic.
Bytes gunzip_if_needed(const Bytes& bytes);

// Big-endian IDX: magic 0x00000803 (3-D image tensor) or 0x00000801 (labels).
IdxTensor parse_idx(const Bytes& bytes);
Bytes write_idx(const IdxTensor& tensor);

ImageStore load_mnist(const Bytes& image_bytes, const Bytes& label_bytes);

// CIFAR-10 binary batches: 3073-byte records, 1 label byte + 3072 pixel bytes.
ImageStore parse_cifar10_bin(const Bytes& bytes);
Bytes write_cifar10_bin(const ImageStore& store);

// Precomputed-feature file, little-endian: magic "LFFT", version u16,
// count u64, F u32, then count*F float32 row-major.
FeatureStore read_feature_file(const std::string& path);
void write_feature_file(const std::string& path, const FeatureStore& store);

// --- feature extraction ---

enum class FeatureKind { Flatten, RandomProjection, File };

struct FeatureMode {
  FeatureKind kind = FeatureKind::Flatten;
  std::size_t out_dim = 0;       // random_projection only
  std::uint64_t seed = 0;        // random_projection only
  std::string path;              // file only
};

FeatureStore extract_features(const ImageStore& store, const FeatureMode& mode);

// --- pairing / partitioning / splitting ---

std::vector<PairExample> build_pairs(const ImageStore& store,
                                     const std::vector<std::uint32_t>& indices,
                                     std::size_t n_pairs, std::uint64_t seed);

std::vector<std::vector<std::uint32_t>> partition_iid(
    const std::vector<std::uint32_t>& indices, std::size_t num_clients,
    std::uint64_t seed);

struct NonIidPartition {
  std::vector<std::vector<std::uint32_t>> shards;
  std::vector<std::vector<std::uint8_t>> class_sets;
};

// Classes sorted ascending, split into contiguous groups of floor(L/C);
// remainder classes go to the last client.
NonIidPartition partition_noniid(const ImageStore& store,
                                 const std::vector<std::uint32_t>& indices,
                                 std::size_t num_clients);

// Image-level split before pairing: floor(ratio*n) train, rest test.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
split_train_test(const std::vector<std::uint32_t>& indices, double ratio,
                 std::uint64_t seed);

}  // namespace lorafl

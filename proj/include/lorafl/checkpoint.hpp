#pragma once

#include <cstring>
#include <string>

#include "lorafl/head.hpp"
#include "lorafl/io.hpp"

namespace lorafl {

// Checkpoint layout (little-endian): magic "LRFL", version u16 (=1),
// F u32, E u32, k u32, then the six factor matrices in fixed order
// (A1, B1, A2, B2, A_s, B_s), each row-major float32.
constexpr std::size_t kCheckpointHeaderBytes = 18;

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(const SiameseHeadParams<T>& params) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'L', 'R', 'F', 'L'});
  auto append = [&out](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  const std::uint16_t version = 1;
  const std::uint32_t F = std::uint32_t(params.feature_dim);
  const std::uint32_t E = std::uint32_t(params.embed_dim);
  const std::uint32_t k = std::uint32_t(params.rank);
  append(&version, 2);
  append(&F, 4);
  append(&E, 4);
  append(&k, 4);
  for (const Matrix<T>* factor : head_factors(params)) {
    for (std::size_t i = 0; i < factor->size(); ++i) {
      const float v = float(factor->data()[i]);
      append(&v, 4);
    }
  }
  return out;
}

template <typename T>
void save_checkpoint(const SiameseHeadParams<T>& params, const std::string& path) {
  write_file(path, serialize_checkpoint(params));
}

template <typename T>
SiameseHeadParams<T> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kCheckpointHeaderBytes)
    throw LengthError("checkpoint: file shorter than header");
  if (std::memcmp(bytes.data(), "LRFL", 4) != 0)
    throw FormatError("checkpoint: bad magic");
  std::uint16_t version;
  std::uint32_t F, E, k;
  std::memcpy(&version, bytes.data() + 4, 2);
  std::memcpy(&F, bytes.data() + 6, 4);
  std::memcpy(&E, bytes.data() + 10, 4);
  std::memcpy(&k, bytes.data() + 14, 4);
  if (version != 1)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  if (F < 1 || E < 1 || k < 1) throw FormatError("checkpoint: invalid dimensions");

  const std::size_t weights = 2 * std::size_t(k) * (F + E) + std::size_t(k) * (E + 1);
  const std::size_t expected = kCheckpointHeaderBytes + 4 * weights;
  if (bytes.size() != expected)
    throw LengthError("checkpoint: expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(bytes.size()));

  SiameseHeadParams<T> params;
  params.feature_dim = F;
  params.embed_dim = E;
  params.rank = k;
  params.fc_lora_1 = {F, E, k, Matrix<T>(F, k), Matrix<T>(k, E)};
  params.fc_lora_2 = {F, E, k, Matrix<T>(F, k), Matrix<T>(k, E)};
  params.similarity_lora = {E, 1, k, Matrix<T>(E, k), Matrix<T>(k, 1)};

  std::size_t off = kCheckpointHeaderBytes;
  for (Matrix<T>* factor : head_factors(params)) {
    for (std::size_t i = 0; i < factor->size(); ++i) {
      float v;
      std::memcpy(&v, bytes.data() + off, 4);
      factor->data()[i] = T(v);
      off += 4;
    }
  }
  return params;
}

template <typename T>
SiameseHeadParams<T> load_checkpoint(const std::string& path) {
  return deserialize_checkpoint<T>(read_file(path));
}

}  // namespace lorafl

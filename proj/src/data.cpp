#include "lorafl/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "lorafl/io.hpp"

namespace lorafl {

namespace {

std::uint32_t read_u32_be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void write_u32_be(Bytes& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

constexpr std::uint32_t kIdxMagicLabels = 0x00000801;
constexpr std::uint32_t kIdxMagicImages = 0x00000803;
constexpr std::size_t kCifarRecordBytes = 3073;
constexpr std::size_t kCifarImageBytes = 3072;

}  // namespace

Bytes gunzip_if_needed(const Bytes& bytes) {
  if (bytes.size() < 2 || bytes[0] != 0x1f || bytes[1] != 0x8b) return bytes;

  z_stream strm{};
  if (inflateInit2(&strm, 16 + MAX_WBITS) != Z_OK)
    throw FormatError("gunzip: inflateInit failed");

  Bytes out;
  out.reserve(bytes.size() * 4);
  std::uint8_t buf[1 << 16];
  strm.next_in = const_cast<std::uint8_t*>(bytes.data());
  strm.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    strm.next_out = buf;
    strm.avail_out = sizeof(buf);
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw FormatError("gunzip: corrupt gzip stream");
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - strm.avail_out));
  }
  inflateEnd(&strm);
  return out;
}

IdxTensor parse_idx(const Bytes& raw) {
  const Bytes bytes = gunzip_if_needed(raw);
  if (bytes.size() < 4) throw LengthError("IDX: file shorter than magic");
  const std::uint32_t magic = read_u32_be(bytes.data());

  std::size_t ndims;
  if (magic == kIdxMagicLabels)
    ndims = 1;
  else if (magic == kIdxMagicImages)
    ndims = 3;
  else
    throw FormatError("IDX: bad magic " + std::to_string(magic));

  if (bytes.size() < 4 + 4 * ndims)
    throw LengthError("IDX: truncated dimension header");

  IdxTensor t;
  std::size_t total = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    const std::uint32_t dim = read_u32_be(bytes.data() + 4 + 4 * d);
    t.dims.push_back(dim);
    total *= dim;
  }
  const std::size_t payload = bytes.size() - 4 - 4 * ndims;
  if (payload != total)
    throw LengthError("IDX: payload is " + std::to_string(payload) +
                      " bytes, header declares " + std::to_string(total));
  t.data.assign(bytes.begin() + 4 + 4 * ndims, bytes.end());
  return t;
}

Bytes write_idx(const IdxTensor& tensor) {
  Bytes out;
  write_u32_be(out, tensor.dims.size() == 1 ? kIdxMagicLabels : kIdxMagicImages);
  for (std::uint32_t d : tensor.dims) write_u32_be(out, d);
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

ImageStore load_mnist(const Bytes& image_bytes, const Bytes& label_bytes) {
  IdxTensor images = parse_idx(image_bytes);
  IdxTensor labels = parse_idx(label_bytes);
  if (images.dims.size() != 3)
    throw FormatError("MNIST: image file is not a 3-D IDX tensor");
  if (labels.dims.size() != 1)
    throw FormatError("MNIST: label file is not a 1-D IDX tensor");
  if (images.dims[0] != labels.dims[0])
    throw ValidationError("MNIST: image/label counts differ");

  ImageStore store;
  store.height = images.dims[1];
  store.width = images.dims[2];
  store.channels = 1;
  store.pixels = std::move(images.data);
  store.labels = std::move(labels.data);
  std::uint8_t max_label = 0;
  for (std::uint8_t l : store.labels) max_label = std::max(max_label, l);
  store.num_classes = std::size_t(max_label) + 1;
  return store;
}

ImageStore parse_cifar10_bin(const Bytes& raw) {
  const Bytes bytes = gunzip_if_needed(raw);
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0)
    throw FormatError("CIFAR-10: length " + std::to_string(bytes.size()) +
                      " not a multiple of 3073");
  const std::size_t n = bytes.size() / kCifarRecordBytes;

  ImageStore store;
  store.height = 32;
  store.width = 32;
  store.channels = 3;
  store.num_classes = 10;
  store.labels.reserve(n);
  store.pixels.reserve(n * kCifarImageBytes);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * kCifarRecordBytes;
    if (rec[0] > 9)
      throw FormatError("CIFAR-10: label byte " + std::to_string(rec[0]) +
                        " out of range at record " + std::to_string(i));
    store.labels.push_back(rec[0]);
    store.pixels.insert(store.pixels.end(), rec + 1, rec + kCifarRecordBytes);
  }
  return store;
}

Bytes write_cifar10_bin(const ImageStore& store) {
  Bytes out;
  out.reserve(store.count() * kCifarRecordBytes);
  for (std::size_t i = 0; i < store.count(); ++i) {
    out.push_back(store.labels[i]);
    const std::uint8_t* px = store.pixels.data() + i * kCifarImageBytes;
    out.insert(out.end(), px, px + kCifarImageBytes);
  }
  return out;
}

FeatureStore read_feature_file(const std::string& path) {
  const Bytes bytes = read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "LFFT", 4) != 0)
    throw FormatError("feature file: bad magic");
  if (bytes.size() < 18) throw LengthError("feature file: truncated header");
  std::uint16_t version;
  std::uint64_t count;
  std::uint32_t dim;
  std::memcpy(&version, bytes.data() + 4, 2);
  std::memcpy(&count, bytes.data() + 6, 8);
  std::memcpy(&dim, bytes.data() + 14, 4);
  if (version != 1)
    throw FormatError("feature file: unsupported version " + std::to_string(version));
  const std::size_t expected = 18 + std::size_t(count) * dim * 4;
  if (bytes.size() != expected)
    throw LengthError("feature file: expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(bytes.size()));

  FeatureStore store;
  store.dim = dim;
  store.features.resize(std::size_t(count) * dim);
  std::memcpy(store.features.data(), bytes.data() + 18, store.features.size() * 4);
  store.extractor = "file:" + path;
  return store;
}

void write_feature_file(const std::string& path, const FeatureStore& store) {
  Bytes out;
  out.insert(out.end(), {'L', 'F', 'F', 'T'});
  const std::uint16_t version = 1;
  const std::uint64_t count = store.count();
  const std::uint32_t dim = std::uint32_t(store.dim);
  auto append = [&out](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  append(&version, 2);
  append(&count, 8);
  append(&dim, 4);
  append(store.features.data(), store.features.size() * 4);
  write_file(path, out);
}

FeatureStore extract_features(const ImageStore& store, const FeatureMode& mode) {
  const std::size_t n = store.count();
  const std::size_t raw_dim = store.image_bytes();

  FeatureStore out;
  switch (mode.kind) {
    case FeatureKind::Flatten: {
      out.dim = raw_dim;
      out.features.resize(n * raw_dim);
      for (std::size_t i = 0; i < n * raw_dim; ++i)
        out.features[i] = float(store.pixels[i]) / 255.0f;
      out.extractor = "flatten";
      break;
    }
    case FeatureKind::RandomProjection: {
      if (mode.out_dim < 1)
        throw ValidationError("random_projection: output dim must be >= 1");
      // Frozen seeded Gaussian projection, std 1/sqrt(raw_dim).
      Rng rng(mode.seed);
      std::vector<float> proj(raw_dim * mode.out_dim);
      const double std_p = 1.0 / std::sqrt(double(raw_dim));
      for (auto& v : proj) v = float(rng.gaussian() * std_p);

      out.dim = mode.out_dim;
      out.features.assign(n * mode.out_dim, 0.0f);
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* px = store.pixels.data() + i * raw_dim;
        float* frow = out.features.data() + i * mode.out_dim;
        for (std::size_t r = 0; r < raw_dim; ++r) {
          const float x = float(px[r]) / 255.0f;
          if (x == 0.0f) continue;
          const float* prow = proj.data() + r * mode.out_dim;
          for (std::size_t c = 0; c < mode.out_dim; ++c) frow[c] += x * prow[c];
        }
      }
      out.extractor = "random_projection:dim=" + std::to_string(mode.out_dim) +
                      ",seed=" + std::to_string(mode.seed);
      break;
    }
    case FeatureKind::File: {
      out = read_feature_file(mode.path);
      if (out.count() != n)
        throw ValidationError("feature file has " + std::to_string(out.count()) +
                              " records, dataset has " + std::to_string(n));
      break;
    }
  }
  return out;
}

std::vector<PairExample> build_pairs(const ImageStore& store,
                                     const std::vector<std::uint32_t>& indices,
                                     std::size_t n_pairs, std::uint64_t seed) {
  if (indices.empty()) throw ValidationError("build_pairs: empty index set");

  // Class -> member indices within the given set.
  std::map<std::uint8_t, std::vector<std::uint32_t>> by_class;
  for (std::uint32_t idx : indices) by_class[store.labels[idx]].push_back(idx);

  std::vector<std::uint8_t> class_ids;
  std::vector<std::uint8_t> pair_capable;  // classes with >= 2 images
  for (const auto& [cls, members] : by_class) {
    class_ids.push_back(cls);
    if (members.size() >= 2) pair_capable.push_back(cls);
  }

  const std::size_t n_pos = (n_pairs + 1) / 2;
  const std::size_t n_neg = n_pairs / 2;
  if (n_pos > 0 && pair_capable.empty())
    throw ValidationError("build_pairs: no class has >= 2 images; cannot form positives");
  if (n_neg > 0 && class_ids.size() < 2)
    throw ValidationError("build_pairs: single-class index set; cannot form negatives");

  Rng rng(seed);
  std::vector<PairExample> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pos; ++i) {
    const std::uint8_t cls = pair_capable[rng.uniform_index(pair_capable.size())];
    const auto& members = by_class[cls];
    const std::size_t a = rng.uniform_index(members.size());
    std::size_t b = rng.uniform_index(members.size() - 1);
    if (b >= a) ++b;  // distinct images within the pair
    pairs.push_back({members[a], members[b], 1});
  }
  for (std::size_t i = 0; i < n_neg; ++i) {
    const std::size_t ca = rng.uniform_index(class_ids.size());
    std::size_t cb = rng.uniform_index(class_ids.size() - 1);
    if (cb >= ca) ++cb;
    const auto& ma = by_class[class_ids[ca]];
    const auto& mb = by_class[class_ids[cb]];
    pairs.push_back({ma[rng.uniform_index(ma.size())],
                     mb[rng.uniform_index(mb.size())], 0});
  }
  return pairs;
}

std::vector<std::vector<std::uint32_t>> partition_iid(
    const std::vector<std::uint32_t>& indices, std::size_t num_clients,
    std::uint64_t seed) {
  if (num_clients < 1) throw ValidationError("partition_iid: need >= 1 client");
  if (indices.size() < num_clients)
    throw ValidationError("partition_iid: fewer images than clients");

  std::vector<std::uint32_t> perm = indices;
  Rng rng(seed);
  rng.shuffle(perm.data(), perm.size());

  // Round-robin off the permutation: sizes differ by at most 1.
  std::vector<std::vector<std::uint32_t>> shards(num_clients);
  for (std::size_t i = 0; i < perm.size(); ++i)
    shards[i % num_clients].push_back(perm[i]);
  return shards;
}

NonIidPartition partition_noniid(const ImageStore& store,
                                 const std::vector<std::uint32_t>& indices,
                                 std::size_t num_clients) {
  if (num_clients < 1) throw ValidationError("partition_noniid: need >= 1 client");
  std::vector<std::uint8_t> present;
  {
    std::vector<bool> seen(store.num_classes, false);
    for (std::uint32_t idx : indices) seen[store.labels[idx]] = true;
    for (std::size_t c = 0; c < seen.size(); ++c)
      if (seen[c]) present.push_back(std::uint8_t(c));
  }
  if (num_clients > 1 && present.size() < 2 * num_clients)
    throw ValidationError("partition_noniid: need >= 2 classes per client (" +
                          std::to_string(present.size()) + " classes, " +
                          std::to_string(num_clients) + " clients)");

  const std::size_t per_client = present.size() / num_clients;
  NonIidPartition out;
  out.shards.resize(num_clients);
  out.class_sets.resize(num_clients);
  for (std::size_t c = 0; c < num_clients; ++c) {
    const std::size_t lo = c * per_client;
    const std::size_t hi = (c + 1 == num_clients) ? present.size() : lo + per_client;
    out.class_sets[c].assign(present.begin() + lo, present.begin() + hi);
  }
  std::vector<std::size_t> owner(store.num_classes, 0);
  for (std::size_t c = 0; c < num_clients; ++c)
    for (std::uint8_t cls : out.class_sets[c]) owner[cls] = c;
  for (std::uint32_t idx : indices)
    out.shards[owner[store.labels[idx]]].push_back(idx);
  return out;
}

std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
split_train_test(const std::vector<std::uint32_t>& indices, double ratio,
                 std::uint64_t seed) {
  if (indices.empty()) throw ValidationError("split_train_test: empty input");
  std::vector<std::uint32_t> perm = indices;
  Rng rng(seed);
  rng.shuffle(perm.data(), perm.size());
  const std::size_t n_train = std::size_t(ratio * double(perm.size()));
  if (n_train == 0 || n_train == perm.size())
    throw ValidationError("split_train_test: one side of the split is empty");
  std::vector<std::uint32_t> train(perm.begin(), perm.begin() + n_train);
  std::vector<std::uint32_t> test(perm.begin() + n_train, perm.end());
  return {std::move(train), std::move(test)};
}

}  // namespace lorafl

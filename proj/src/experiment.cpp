#include "lorafl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lorafl/checkpoint.hpp"
#include "lorafl/cost_model.hpp"
#include "lorafl/federation.hpp"
#include "lorafl/io.hpp"
#include "lorafl/svg.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace lorafl {

namespace {

constexpr const char* kMetricsHeader =
    "# lorafl metrics v1\n"
    "fold,round,k,mode,train_loss,test_acc,test_loss,uplink_bytes,"
    "downlink_bytes,flops,elapsed_ms\n";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::size_t parse_size(const std::string& v, const std::string& key) {
  try {
    return std::stoull(v);
  } catch (...) {
    throw ValidationError("config: bad integer for " + key + ": " + v);
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (...) {
    throw ValidationError("config: bad number for " + key + ": " + v);
  }
}

// Seed salts for independent per-fold randomness streams.
constexpr std::uint64_t kSaltSplit = 1;
constexpr std::uint64_t kSaltPartition = 2;
constexpr std::uint64_t kSaltPairs = 3;
constexpr std::uint64_t kSaltTestPairs = 4;

std::uint64_t fold_seed(const RunConfig& cfg, std::size_t fold) {
  return cfg.seed + fold;
}

struct MetricsRow {
  std::size_t fold = 0;
  std::size_t round = 0;
  std::size_t rank = 0;
  std::string mode;
  double train_loss = 0.0;
  double test_acc = 0.0;
  double test_loss = 0.0;
  std::uint64_t uplink = 0;
  std::uint64_t downlink = 0;
  std::uint64_t flops = 0;
  double elapsed_ms = 0.0;
};

std::string rows_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = kMetricsHeader;
  for (const auto& r : rows) {
    out += std::to_string(r.fold) + ',' + std::to_string(r.round) + ',' +
           std::to_string(r.rank) + ',' + r.mode + ',' + fmt_double(r.train_loss) +
           ',' + fmt_double(r.test_acc) + ',' + fmt_double(r.test_loss) + ',' +
           std::to_string(r.uplink) + ',' + std::to_string(r.downlink) + ',' +
           std::to_string(r.flops) + ',' + fmt_double(r.elapsed_ms) + '\n';
  }
  return out;
}

// Simple deterministic-result worker pool over [0, n).
void parallel_cells(std::size_t n, std::size_t threads,
                    const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto runner = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      work(i);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back(runner);
  for (auto& th : pool) th.join();
}

json pairs_to_json(const std::vector<PairExample>& pairs) {
  json arr = json::array();
  for (const auto& p : pairs)
    arr.push_back({p.idx1, p.idx2, unsigned(p.label)});
  return arr;
}

std::vector<PairExample> pairs_from_json(const json& arr) {
  std::vector<PairExample> pairs;
  pairs.reserve(arr.size());
  for (const auto& e : arr)
    pairs.push_back({e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>(),
                     std::uint8_t(e[2].get<unsigned>())});
  return pairs;
}

std::string fold_file(const RunConfig& cfg, std::size_t fold) {
  return cfg.out_dir + "/fold_" + std::to_string(fold) + ".json";
}

std::string features_file(const RunConfig& cfg) {
  return cfg.out_dir + "/features.lfft";
}

}  // namespace

std::string metrics_csv_path(const RunConfig& cfg) {
  return cfg.out_dir + "/metrics.csv";
}

std::string central_csv_path(const RunConfig& cfg) {
  return cfg.out_dir + "/metrics_central.csv";
}

std::string checkpoint_path(const RunConfig& cfg, std::size_t fold, std::size_t rank) {
  return cfg.out_dir + "/ckpt_f" + std::to_string(fold) + "_k" +
         std::to_string(rank) + ".bin";
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "dataset") cfg.dataset = value;
  else if (key == "mnist_images") cfg.mnist_images = value;
  else if (key == "mnist_labels") cfg.mnist_labels = value;
  else if (key == "cifar_bin") cfg.cifar_bin = value;
  else if (key == "feature_mode") cfg.feature_mode = value;
  else if (key == "feature_dim") cfg.feature_dim = parse_size(value, key);
  else if (key == "feature_seed") cfg.feature_seed = parse_size(value, key);
  else if (key == "feature_file") cfg.feature_file = value;
  else if (key == "embed_dim") cfg.embed_dim = parse_size(value, key);
  else if (key == "partition") cfg.partition = value;
  else if (key == "clients") cfg.clients = parse_size(value, key);
  else if (key == "clients_per_round") cfg.clients_per_round = parse_size(value, key);
  else if (key == "rounds") cfg.rounds = parse_size(value, key);
  else if (key == "local_epochs") cfg.local_epochs = parse_size(value, key);
  else if (key == "batch_size") cfg.batch_size = parse_size(value, key);
  else if (key == "lr") cfg.lr = parse_double(value, key);
  else if (key == "ranks") {
    cfg.ranks.clear();
    for (const auto& tok : split(value, ','))
      cfg.ranks.push_back(parse_size(trim(tok), key));
  } else if (key == "folds") cfg.folds = parse_size(value, key);
  else if (key == "train_ratio") cfg.train_ratio = parse_double(value, key);
  else if (key == "max_pairs_per_client") cfg.max_pairs_per_client = parse_size(value, key);
  else if (key == "test_pairs") cfg.test_pairs = parse_size(value, key);
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "seed") cfg.seed = parse_size(value, key);
  else if (key == "threads") cfg.threads = parse_size(value, key);
  else if (key == "precision") cfg.precision = value;
  else throw ValidationError("config: unknown key: " + key);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: line " + std::to_string(lineno) +
                            " is not key = value");
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.dataset != "mnist" && cfg.dataset != "cifar10")
    throw ValidationError("config: dataset must be mnist or cifar10");
  if (cfg.feature_mode != "flatten" && cfg.feature_mode != "random_projection" &&
      cfg.feature_mode != "file")
    throw ValidationError("config: bad feature_mode: " + cfg.feature_mode);
  if (cfg.partition != "iid" && cfg.partition != "noniid")
    throw ValidationError("config: partition must be iid or noniid");
  if (cfg.precision != "f32" && cfg.precision != "f64")
    throw ValidationError("config: precision must be f32 or f64");
  if (cfg.clients_per_round < 1 || cfg.clients_per_round > cfg.clients)
    throw ValidationError("config: need 1 <= clients_per_round <= clients");
  if (cfg.ranks.empty())
    throw ValidationError("config: empty rank sweep");
  for (std::size_t i = 0; i < cfg.ranks.size(); ++i) {
    if (cfg.ranks[i] < 1)
      throw ValidationError("config: ranks must be >= 1");
    if (i > 0 && cfg.ranks[i] <= cfg.ranks[i - 1])
      throw ValidationError("config: rank sweep must be strictly increasing");
  }
  if (cfg.folds < 1) throw ValidationError("config: folds must be >= 1");
  if (cfg.train_ratio <= 0.0 || cfg.train_ratio >= 1.0)
    throw ValidationError("config: train_ratio must be in (0, 1)");
  if (cfg.embed_dim < 1) throw ValidationError("config: embed_dim must be >= 1");
  if (cfg.feature_mode == "random_projection" && cfg.feature_dim < 1)
    throw ValidationError("config: random_projection needs feature_dim >= 1");
}

ImageStore load_dataset(const RunConfig& cfg) {
  if (cfg.dataset == "mnist") {
    if (cfg.mnist_images.empty() || cfg.mnist_labels.empty())
      throw ValidationError("config: mnist_images and mnist_labels are required");
    return load_mnist(read_file(cfg.mnist_images), read_file(cfg.mnist_labels));
  }
  if (cfg.cifar_bin.empty())
    throw ValidationError("config: cifar_bin is required for cifar10");
  ImageStore merged;
  bool first = true;
  for (const auto& path : split(cfg.cifar_bin, ',')) {
    ImageStore batch = parse_cifar10_bin(read_file(trim(path)));
    if (first) {
      merged = std::move(batch);
      first = false;
    } else {
      merged.pixels.insert(merged.pixels.end(), batch.pixels.begin(),
                           batch.pixels.end());
      merged.labels.insert(merged.labels.end(), batch.labels.begin(),
                           batch.labels.end());
    }
  }
  return merged;
}

std::size_t effective_feature_dim(const RunConfig& cfg) {
  if (cfg.feature_mode == "random_projection") return cfg.feature_dim;
  if (cfg.feature_mode == "file") {
    if (cfg.feature_dim > 0) return cfg.feature_dim;
    return read_feature_file(cfg.feature_file).dim;
  }
  return cfg.dataset == "mnist" ? 28 * 28 : 32 * 32 * 3;
}

FoldData make_fold(const ImageStore& store, const RunConfig& cfg, std::size_t fold) {
  const std::uint64_t fseed = fold_seed(cfg, fold);

  std::vector<std::uint32_t> all(store.count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = std::uint32_t(i);
  auto [train_idx, test_idx] =
      split_train_test(all, cfg.train_ratio, hash_combine(fseed, kSaltSplit));

  FoldData fd;
  if (cfg.partition == "iid") {
    fd.client_indices =
        partition_iid(train_idx, cfg.clients, hash_combine(fseed, kSaltPartition));
    fd.client_classes.resize(cfg.clients);
    for (std::size_t c = 0; c < cfg.clients; ++c) {
      std::set<std::uint8_t> classes;
      for (std::uint32_t idx : fd.client_indices[c])
        classes.insert(store.labels[idx]);
      fd.client_classes[c].assign(classes.begin(), classes.end());
    }
  } else {
    NonIidPartition part = partition_noniid(store, train_idx, cfg.clients);
    fd.client_indices = std::move(part.shards);
    fd.client_classes = std::move(part.class_sets);
  }

  for (std::size_t c = 0; c < cfg.clients; ++c) {
    const std::size_t n_pairs =
        std::min(cfg.max_pairs_per_client, 2 * fd.client_indices[c].size());
    fd.client_pairs.push_back(build_pairs(store, fd.client_indices[c], n_pairs,
                                          hash_combine(fseed, kSaltPairs, c)));
  }
  fd.test_pairs = build_pairs(store, test_idx, cfg.test_pairs,
                              hash_combine(fseed, kSaltTestPairs));
  return fd;
}

void cmd_prepare(const RunConfig& cfg) {
  validate_config(cfg);
  fs::create_directories(cfg.out_dir);

  const ImageStore store = load_dataset(cfg);
  FeatureMode mode;
  if (cfg.feature_mode == "flatten") {
    mode.kind = FeatureKind::Flatten;
  } else if (cfg.feature_mode == "random_projection") {
    mode.kind = FeatureKind::RandomProjection;
    mode.out_dim = cfg.feature_dim;
    mode.seed = cfg.feature_seed;
  } else {
    mode.kind = FeatureKind::File;
    mode.path = cfg.feature_file;
  }
  const FeatureStore features = extract_features(store, mode);
  write_feature_file(features_file(cfg), features);

  std::ostringstream manifest;
  manifest << "# lorafl manifest v1\n"
           << "dataset " << cfg.dataset << "\n"
           << "images " << store.count() << "\n"
           << "classes " << store.num_classes << "\n"
           << "feature_mode " << features.extractor << "\n"
           << "feature_dim " << features.dim << "\n"
           << "partition " << cfg.partition << "\n"
           << "clients " << cfg.clients << "\n"
           << "folds " << cfg.folds << "\n";

  for (std::size_t f = 0; f < cfg.folds; ++f) {
    const FoldData fd = make_fold(store, cfg, f);
    json j;
    j["fold"] = f;
    json clients = json::array();
    for (std::size_t c = 0; c < cfg.clients; ++c) {
      json cj;
      cj["id"] = c;
      cj["classes"] = fd.client_classes[c];
      cj["indices"] = fd.client_indices[c];
      cj["pairs"] = pairs_to_json(fd.client_pairs[c]);
      clients.push_back(cj);
    }
    j["clients"] = clients;
    j["test_pairs"] = pairs_to_json(fd.test_pairs);
    write_text_file(fold_file(cfg, f), j.dump());

    for (std::size_t c = 0; c < cfg.clients; ++c) {
      manifest << "fold " << f << " client " << c << " classes ";
      for (std::size_t i = 0; i < fd.client_classes[c].size(); ++i)
        manifest << (i ? "," : "") << unsigned(fd.client_classes[c][i]);
      manifest << " images " << fd.client_indices[c].size() << " pairs "
               << fd.client_pairs[c].size() << "\n";
    }
    manifest << "fold " << f << " test_pairs " << fd.test_pairs.size() << "\n";
  }

  manifest << "file features.lfft " << fs::file_size(features_file(cfg)) << " "
           << crc32_hex_of_file(features_file(cfg)) << "\n";
  for (std::size_t f = 0; f < cfg.folds; ++f)
    manifest << "file fold_" << f << ".json " << fs::file_size(fold_file(cfg, f))
             << " " << crc32_hex_of_file(fold_file(cfg, f)) << "\n";
  write_text_file(cfg.out_dir + "/manifest.txt", manifest.str());
}

PreparedData load_prepared(const RunConfig& cfg) {
  PreparedData prep;
  if (!fs::exists(features_file(cfg)))
    throw ValidationError("missing " + features_file(cfg) + ": run prepare first");
  prep.features = read_feature_file(features_file(cfg));
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    std::ifstream jf(fold_file(cfg, f));
    if (!jf) throw ValidationError("missing prepared fold file: run prepare first");
    json j = json::parse(jf);
    FoldData fd;
    for (const auto& cj : j.at("clients")) {
      fd.client_indices.push_back(cj.at("indices").get<std::vector<std::uint32_t>>());
      fd.client_classes.push_back(cj.at("classes").get<std::vector<std::uint8_t>>());
      fd.client_pairs.push_back(pairs_from_json(cj.at("pairs")));
    }
    fd.test_pairs = pairs_from_json(j.at("test_pairs"));
    if (fd.client_pairs.size() != cfg.clients)
      throw ValidationError("prepared fold has wrong client count");
    prep.folds.push_back(std::move(fd));
  }
  return prep;
}

namespace {

// Per-round training FLOPs for a set of client sample counts.
std::uint64_t round_training_flops(std::size_t F, std::size_t E, std::size_t k,
                                   const std::vector<std::size_t>& counts,
                                   std::size_t epochs) {
  std::uint64_t pairs = 0;
  for (std::size_t c : counts) pairs += c;
  return training_flops_per_sample(forward_flops_per_sample(F, E, k)) * pairs *
         epochs;
}

template <typename T>
void federate_impl(const RunConfig& cfg, const PreparedData& prep) {
  const std::size_t F = prep.features.dim;
  const std::size_t E = cfg.embed_dim;
  const std::size_t n_cells = cfg.folds * cfg.ranks.size();

  struct CellResult {
    std::vector<MetricsRow> rows;
    std::vector<std::uint8_t> checkpoint;
  };
  std::vector<CellResult> cells(n_cells);

  parallel_cells(n_cells, cfg.threads, [&](std::size_t cell) {
    const std::size_t f = cell / cfg.ranks.size();
    const std::size_t k = cfg.ranks[cell % cfg.ranks.size()];
    const FoldData& fd = prep.folds[f];

    std::vector<ClientDataView> clients(cfg.clients);
    for (std::size_t c = 0; c < cfg.clients; ++c)
      clients[c] = {&prep.features, fd.client_pairs[c]};
    const ClientDataView test{&prep.features, fd.test_pairs};

    FedConfig fc;
    fc.num_clients = cfg.clients;
    fc.clients_per_round = cfg.clients_per_round;
    fc.rounds = cfg.rounds;
    fc.local_epochs = cfg.local_epochs;
    fc.batch_size = cfg.batch_size;
    fc.lr = cfg.lr;
    fc.rank = k;
    fc.partition = cfg.partition == "iid" ? Partition::Iid : Partition::NonIid;
    fc.global_seed = hash_combine(cfg.seed, f);
    fc.threads = 1;  // parallelism lives at the cell level

    const auto init = init_head<T>(F, E, k, hash_combine(cfg.seed, f, k));
    FedResult<T> result = run_federated(fc, init, clients, test);

    for (const RoundRecord& rec : result.records) {
      MetricsRow row;
      row.fold = f;
      row.round = rec.round;
      row.rank = k;
      row.mode = cfg.partition;
      row.train_loss = rec.train_loss;
      row.test_acc = rec.test_accuracy;
      row.test_loss = rec.test_loss;
      row.uplink = rec.uplink_bytes;
      row.downlink = rec.downlink_bytes;
      row.flops = round_training_flops(F, E, k, rec.sample_counts, cfg.local_epochs);
      row.elapsed_ms = rec.elapsed_ms;
      cells[cell].rows.push_back(std::move(row));
    }
    cells[cell].checkpoint = serialize_checkpoint(result.model);
  });

  std::vector<MetricsRow> rows;
  for (std::size_t f = 0; f < cfg.folds; ++f)
    for (std::size_t ki = 0; ki < cfg.ranks.size(); ++ki) {
      const std::size_t cell = f * cfg.ranks.size() + ki;
      rows.insert(rows.end(), cells[cell].rows.begin(), cells[cell].rows.end());
      write_file(checkpoint_path(cfg, f, cfg.ranks[ki]), cells[cell].checkpoint);
    }
  write_text_file(metrics_csv_path(cfg), rows_to_csv(rows));
  cmd_plot_metrics(metrics_csv_path(cfg), cfg.out_dir + "/accuracy_vs_round.svg");
}

template <typename T>
void centralized_impl(const RunConfig& cfg, const PreparedData& prep) {
  const std::size_t F = prep.features.dim;
  const std::size_t E = cfg.embed_dim;
  const std::size_t n_cells = cfg.folds * cfg.ranks.size();

  std::vector<std::vector<MetricsRow>> cells(n_cells);
  parallel_cells(n_cells, cfg.threads, [&](std::size_t cell) {
    const std::size_t f = cell / cfg.ranks.size();
    const std::size_t k = cfg.ranks[cell % cfg.ranks.size()];
    const FoldData& fd = prep.folds[f];

    // Union of all client shards, ascending client id.
    ClientDataView all{&prep.features, {}};
    for (const auto& pairs : fd.client_pairs)
      all.pairs.insert(all.pairs.end(), pairs.begin(), pairs.end());
    const ClientDataView test{&prep.features, fd.test_pairs};

    auto params = init_head<T>(F, E, k, hash_combine(cfg.seed, f, k));
    const std::uint64_t fed_seed = hash_combine(cfg.seed, f);
    const std::uint64_t flops =
        training_flops_per_sample(forward_flops_per_sample(F, E, k)) *
        all.pairs.size() * cfg.local_epochs;

    // Mirrors the federated schedule: one train_local call per "round" with
    // a fresh Adam state and the round's client-0 seed.
    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
      const auto t0 = std::chrono::steady_clock::now();
      TrainStats<T> stats =
          train_local(params, all, cfg.local_epochs, cfg.batch_size, cfg.lr,
                      client_seed(fed_seed, round, 0));
      const EvalResult eval = evaluate(params, test);
      MetricsRow row;
      row.fold = f;
      row.round = round;
      row.rank = k;
      row.mode = "central";
      row.train_loss = stats.epoch_loss.empty() ? 0.0 : stats.epoch_loss.back();
      row.test_acc = eval.accuracy;
      row.test_loss = eval.mean_loss;
      row.flops = flops;
      row.elapsed_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
      cells[cell].push_back(std::move(row));
    }
  });

  std::vector<MetricsRow> rows;
  for (const auto& cell : cells) rows.insert(rows.end(), cell.begin(), cell.end());
  write_text_file(central_csv_path(cfg), rows_to_csv(rows));
}

}  // namespace

void cmd_federate(const RunConfig& cfg) {
  validate_config(cfg);
  const PreparedData prep = load_prepared(cfg);
  if (cfg.precision == "f64")
    federate_impl<double>(cfg, prep);
  else
    federate_impl<float>(cfg, prep);
}

void cmd_centralized(const RunConfig& cfg) {
  validate_config(cfg);
  const PreparedData prep = load_prepared(cfg);
  if (cfg.precision == "f64")
    centralized_impl<double>(cfg, prep);
  else
    centralized_impl<float>(cfg, prep);
}

void cmd_cost(const RunConfig& cfg) {
  validate_config(cfg);
  fs::create_directories(cfg.out_dir);

  CostConfig cc;
  cc.feature_dim = effective_feature_dim(cfg);
  cc.embed_dim = cfg.embed_dim;
  cc.clients_per_round = cfg.clients_per_round;
  cc.rounds = cfg.rounds;
  cc.local_epochs = cfg.local_epochs;
  cc.pairs_per_client = cfg.max_pairs_per_client;
  cc.batch_size = cfg.batch_size;

  std::vector<std::uint64_t> sweep(cfg.ranks.begin(), cfg.ranks.end());
  const auto rows = cost_report(cc, sweep);

  std::string csv =
      "# lorafl cost v1\n"
      "label,k,params,payload_bytes,round_bytes,run_bytes,"
      "fwd_flops_per_sample,train_flops_per_sample,train_flops_per_epoch,"
      "train_flops_per_run,adam_flops_per_run,params_ratio_vs_dense,"
      "flops_ratio_vs_dense,params_ratio_vs_max_k,flops_ratio_vs_max_k\n";
  for (const auto& r : rows) {
    csv += r.label + ',' + std::to_string(r.rank) + ',' +
           std::to_string(r.trainable_params) + ',' +
           std::to_string(r.payload_bytes) + ',' + std::to_string(r.round_bytes) +
           ',' + std::to_string(r.run_bytes) + ',' +
           std::to_string(r.forward_flops_per_sample) + ',' +
           std::to_string(r.training_flops_per_sample) + ',' +
           std::to_string(r.training_flops_per_epoch) + ',' +
           std::to_string(r.training_flops_per_run) + ',' +
           std::to_string(r.adam_flops_per_run) + ',' +
           fmt_double(r.params_ratio_vs_dense) + ',' +
           fmt_double(r.flops_ratio_vs_dense) + ',' +
           fmt_double(r.params_ratio_vs_max_k) + ',' +
           fmt_double(r.flops_ratio_vs_max_k) + '\n';
  }
  write_text_file(cfg.out_dir + "/cost.csv", csv);
  cmd_plot_cost(cfg.out_dir + "/cost.csv", cfg.out_dir + "/cost.svg");
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               std::vector<std::string>& header) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open CSV: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    if (!have_header) {
      header = cells;
      have_header = true;
    } else {
      rows.push_back(cells);
    }
  }
  return rows;
}

std::size_t col(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw FormatError("CSV missing column: " + name);
}

}  // namespace

void cmd_plot_metrics(const std::string& csv_path, const std::string& svg_path) {
  std::vector<std::string> header;
  const auto rows = read_csv(csv_path, header);
  const std::size_t c_round = col(header, "round");
  const std::size_t c_k = col(header, "k");
  const std::size_t c_acc = col(header, "test_acc");

  // Mean accuracy over folds per (k, round).
  std::map<std::size_t, std::map<std::size_t, std::pair<double, std::size_t>>> acc;
  for (const auto& r : rows) {
    const std::size_t k = std::stoull(r[c_k]);
    const std::size_t round = std::stoull(r[c_round]);
    auto& slot = acc[k][round];
    slot.first += std::stod(r[c_acc]);
    slot.second += 1;
  }

  std::vector<LineSeries> series;
  for (const auto& [k, per_round] : acc) {
    LineSeries s;
    s.label = "k=" + std::to_string(k);
    for (const auto& [round, sum_count] : per_round) {
      s.x.push_back(double(round));
      s.y.push_back(sum_count.first / double(sum_count.second));
    }
    series.push_back(std::move(s));
  }
  write_svg(svg_path, render_line_chart("Test accuracy vs global round",
                                        "global round", "test accuracy", series));
}

void cmd_plot_cost(const std::string& csv_path, const std::string& svg_path) {
  std::vector<std::string> header;
  const auto rows = read_csv(csv_path, header);
  const std::size_t c_label = col(header, "label");
  const std::size_t c_flops = col(header, "train_flops_per_run");
  const std::size_t c_bytes = col(header, "run_bytes");

  std::vector<std::string> groups;
  BarSeries flops{"training FLOPs per run", "#1f77b4", {}};
  BarSeries bytes{"transfer bytes per run", "#d62728", {}};
  for (const auto& r : rows) {
    groups.push_back(r[c_label]);
    flops.values.push_back(std::stod(r[c_flops]));
    bytes.values.push_back(std::stod(r[c_bytes]));
  }
  write_svg(svg_path, render_bar_chart("Compute and bandwidth vs rank", groups,
                                       {flops, bytes}, "cost (log scale)"));
}

}  // namespace lorafl

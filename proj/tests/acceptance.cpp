// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run with no arguments for the full gate, or pass criterion
// numbers (e.g. "./acceptance 1 4 5") to run a subset.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lorafl/checkpoint.hpp"
#include "lorafl/cost_model.hpp"
#include "lorafl/experiment.hpp"
#include "lorafl/federation.hpp"
#include "lorafl/io.hpp"
#include "lorafl/synth.hpp"
#include "support/gradcheck.hpp"

using namespace lorafl;
namespace fs = std::filesystem;

namespace {

// Desk-scale runs use a seeded synthetic dataset written in genuine MNIST
// IDX format (class prototypes + Gaussian pixel noise): the experiment
// pipeline exercises the real parsers and file formats end to end.
constexpr std::size_t kSynthImages = 1500;
constexpr double kSynthNoise = 24.0;

// Frozen floor for criterion 6(a): centralized oracle accuracy minus
// 5 points. Calibrated from the oracle run on this synthetic dataset
// (fold 0, k=16, 10 rounds: accuracy 1.0000 -> floor 0.95).
constexpr double kTrendAccuracyFloor = 0.95;

fs::path g_workdir;

std::string work(const std::string& name) { return (g_workdir / name).string(); }

void write_synth_idx(const std::string& images_path, const std::string& labels_path,
                     std::size_t count, std::uint64_t seed) {
  SynthConfig sc;
  sc.count = count;
  sc.classes = 10;
  sc.height = 28;
  sc.width = 28;
  sc.noise_std = kSynthNoise;
  sc.seed = seed;
  const ImageStore store = make_synthetic(sc);
  IdxTensor images{{std::uint32_t(store.count()), 28, 28}, store.pixels};
  IdxTensor labels{{std::uint32_t(store.count())}, store.labels};
  write_file(images_path, write_idx(images));
  write_file(labels_path, write_idx(labels));
}

RunConfig base_config(const std::string& out_dir) {
  RunConfig cfg;
  cfg.dataset = "mnist";
  cfg.mnist_images = work("synth-images-idx3-ubyte");
  cfg.mnist_labels = work("synth-labels-idx1-ubyte");
  cfg.feature_mode = "flatten";
  cfg.embed_dim = 128;
  cfg.out_dir = out_dir;
  cfg.seed = 20240831;
  return cfg;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct CsvRow {
  std::vector<std::string> cells;
};

std::vector<CsvRow> read_metric_rows(const std::string& path) {
  std::ifstream f(path);
  std::vector<CsvRow> rows;
  std::string line;
  bool seen_header = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      continue;
    }
    CsvRow row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.cells.push_back(cell);
    rows.push_back(std::move(row));
  }
  return rows;
}

// Metrics columns: fold,round,k,mode,train_loss,test_acc,test_loss,
// uplink_bytes,downlink_bytes,flops,elapsed_ms
constexpr std::size_t kColFold = 0, kColRound = 1, kColK = 2, kColMode = 3,
                      kColTrainLoss = 4, kColTestAcc = 5, kColTestLoss = 6;

std::string strip_elapsed(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
    out += line + '\n';
  }
  return out;
}

// Mean final-round test accuracy over folds for one rank.
double mean_final_accuracy(const std::vector<CsvRow>& rows, std::size_t k,
                           std::size_t final_round) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (std::stoull(r.cells[kColK]) != k) continue;
    if (std::stoull(r.cells[kColRound]) != final_round) continue;
    sum += std::stod(r.cells[kColTestAcc]);
    ++n;
  }
  return n ? sum / double(n) : -1.0;
}

bool fail(const char* msg) {
  std::printf("    detail: %s\n", msg);
  return false;
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness: analytic full-head gradients vs central finite
//    differences in 64-bit, >= 20 random configurations, rel err < 1e-6.
bool criterion_1() {
  std::size_t accepted = 0;
  std::uint64_t seed = 0;
  double worst = 0.0;
  while (accepted < 20 && seed < 500) {
    auto inst = lorafl::testing::random_instance(seed++);
    const auto res = lorafl::testing::check_head_gradients(inst.params, inst.x1,
                                                           inst.x2, inst.y);
    if (res.near_kink) continue;  // finite differences would cross the |.| kink
    worst = std::max(worst, res.max_rel_err);
    ++accepted;
  }
  std::printf("    detail: %zu configurations, max relative error %.3g\n",
              accepted, worst);
  return accepted >= 20 && worst < 1e-6;
}

// ---------------------------------------------------------------------------
// 2. FedAvg oracle equivalence: C = K = 1 federated run vs cmd_centralized,
//    matched seeds and per-round Adam resets, accuracy columns bit-identical.
bool criterion_2() {
  auto cfg = base_config(work("out_c2"));
  cfg.clients = 1;
  cfg.clients_per_round = 1;
  cfg.rounds = 3;
  cfg.local_epochs = 2;
  cfg.batch_size = 32;
  cfg.ranks = {4};
  cfg.folds = 1;
  cfg.max_pairs_per_client = 500;
  cfg.test_pairs = 200;
  cmd_prepare(cfg);
  cmd_federate(cfg);
  cmd_centralized(cfg);

  const auto fed = read_metric_rows(metrics_csv_path(cfg));
  const auto cen = read_metric_rows(central_csv_path(cfg));
  if (fed.size() != cen.size() || fed.empty())
    return fail("row count mismatch between federated and centralized CSVs");
  for (std::size_t i = 0; i < fed.size(); ++i) {
    for (std::size_t c : {kColFold, kColRound, kColK, kColTrainLoss, kColTestAcc,
                          kColTestLoss}) {
      if (fed[i].cells[c] != cen[i].cells[c]) {
        std::printf("    detail: row %zu column %zu: '%s' vs '%s'\n", i, c,
                    fed[i].cells[c].c_str(), cen[i].cells[c].c_str());
        return false;
      }
    }
    if (cen[i].cells[kColMode] != "central")
      return fail("centralized mode column is not 'central'");
  }
  std::printf("    detail: %zu rows, loss/accuracy columns bit-identical\n",
              fed.size());
  return true;
}

// ---------------------------------------------------------------------------
// 3. Aggregation arithmetic vs an independent weighted-mean oracle.
bool criterion_3() {
  // Single-client fixed point.
  const auto base = init_head<float>(6, 4, 2, 0);
  if (!(aggregate<float>({{base, 37.0}}) == base))
    return fail("single-client aggregate is not a fixed point");

  // Weights 1,2,3 with constant values 1,2,3 -> 7/3 in every entry.
  auto make_const = [&](float v) {
    auto p = base;
    for (Matrix<float>* f : head_factors(p))
      for (std::size_t i = 0; i < f->size(); ++i) f->data()[i] = v;
    return p;
  };
  const auto third = aggregate<float>(
      {{make_const(1), 1.0}, {make_const(2), 2.0}, {make_const(3), 3.0}});
  for (const Matrix<float>* f : head_factors(third))
    for (std::size_t i = 0; i < f->size(); ++i)
      if (f->data()[i] != float(7.0 / 3.0))
        return fail("weights 1,2,3 / values 1,2,3 does not give 7/3");

  // Randomized 1-10 client cases, exact against 64-bit accumulation.
  Rng rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n_clients = 1 + rng.uniform_index(10);
    std::vector<ClientUpdate<float>> updates;
    for (std::size_t c = 0; c < n_clients; ++c) {
      auto p = init_head<float>(5, 3, 2, hash_combine(trial, c));
      updates.push_back({std::move(p), double(1 + rng.uniform_index(100))});
    }
    const auto agg = aggregate(updates);
    double total = 0.0;
    for (const auto& u : updates) total += u.weight;
    const auto agg_factors = head_factors(agg);
    for (std::size_t f = 0; f < 6; ++f)
      for (std::size_t i = 0; i < agg_factors[f]->size(); ++i) {
        double acc = 0.0;
        for (const auto& u : updates)
          acc += u.weight * double(head_factors(u.params)[f]->data()[i]);
        if (agg_factors[f]->data()[i] != float(acc / total))
          return fail("randomized aggregate differs from the oracle");
      }
  }
  std::printf("    detail: fixed point, 7/3 case, 25 randomized cases exact\n");
  return true;
}

// ---------------------------------------------------------------------------
// 4. Cost-model identities across the rank sweep and the dense baseline.
bool criterion_4() {
  const std::size_t F = 784, E = 128;
  for (std::size_t k : {1, 2, 4, 8, 16, 32}) {
    const auto params = init_head<float>(F, E, k, k);
    const auto bytes = serialize_checkpoint(params);
    if (bytes.size() - kCheckpointHeaderBytes != payload_bytes(head_param_count(F, E, k)))
      return fail("payload bytes != checkpoint weight-section size");
  }
  if (payload_bytes(dense_head_param_count(F, E)) !=
      4 * dense_head_param_count(F, E))
    return fail("dense payload bytes != 4 x dense params");
  if (double(head_param_count(F, E, 32)) / double(head_param_count(F, E, 8)) != 4.0)
    return fail("params(32)/params(8) != 4.0");

  // Instrumented counter vs closed form (exact: both count MACs as 2 FLOPs,
  // 1 op/element for |.|, 4 per sigmoid).
  for (std::size_t k : {1, 4, 16}) {
    const std::size_t n = 3;
    const auto params = init_head<double>(F, E, k, 9);
    Matrix<double> x1(n, F, 0.125), x2(n, F, -0.25);
    FlopCounter fc;
    head_forward(params, x1, x2, &fc);
    if (fc.total() != n * forward_flops_per_sample(F, E, k))
      return fail("instrumented FLOP count != closed form");
  }
  std::printf("    detail: payloads, 4.0 ratio, FLOP counter all exact\n");
  return true;
}

// ---------------------------------------------------------------------------
// 5. Dataset properties: pair balance, label consistency, partitions,
//    format round trips.
bool criterion_5() {
  SynthConfig sc;
  sc.count = 400;
  sc.classes = 10;
  sc.height = 8;
  sc.width = 8;
  sc.seed = 5;
  const ImageStore store = make_synthetic(sc);
  std::vector<std::uint32_t> all(store.count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = std::uint32_t(i);

  for (std::size_t n_pairs : {7, 50, 101}) {
    const auto pairs = build_pairs(store, all, n_pairs, n_pairs);
    std::size_t pos = 0;
    for (const auto& p : pairs) {
      // Label-consistency oracle, exhaustive.
      const bool same = store.labels[p.idx1] == store.labels[p.idx2];
      if (bool(p.label) != same) return fail("pair label inconsistent with classes");
      pos += p.label;
    }
    const std::size_t neg = pairs.size() - pos;
    if (pairs.size() != n_pairs || (pos > neg ? pos - neg : neg - pos) > 1)
      return fail("pair set not balanced within +-1");
  }

  // IID shards: disjoint and covering.
  const auto shards = partition_iid(all, 7, 3);
  std::set<std::uint32_t> seen;
  std::size_t covered = 0;
  for (const auto& s : shards)
    for (std::uint32_t idx : s) {
      if (!seen.insert(idx).second) return fail("IID shards overlap");
      ++covered;
    }
  if (covered != all.size()) return fail("IID shards do not cover");

  // Non-IID C=5, L=10: class sets {0,1},...,{8,9}; disjoint and covering.
  const auto part = partition_noniid(store, all, 5);
  for (std::size_t c = 0; c < 5; ++c) {
    const std::vector<std::uint8_t> expect{std::uint8_t(2 * c),
                                           std::uint8_t(2 * c + 1)};
    if (part.class_sets[c] != expect)
      return fail("non-IID class sets differ from {0,1}..{8,9}");
  }
  seen.clear();
  covered = 0;
  for (std::size_t c = 0; c < 5; ++c)
    for (std::uint32_t idx : part.shards[c]) {
      if (store.labels[idx] / 2 != c) return fail("non-IID shard breaks class closure");
      if (!seen.insert(idx).second) return fail("non-IID shards overlap");
      ++covered;
    }
  if (covered != all.size()) return fail("non-IID shards do not cover");

  // MNIST IDX round trip, bit exact.
  IdxTensor images{{std::uint32_t(store.count()), 8, 8}, store.pixels};
  const Bytes idx_bytes = write_idx(images);
  if (write_idx(parse_idx(idx_bytes)) != idx_bytes)
    return fail("IDX round trip not bit-exact");

  // CIFAR-10 binary round trip, bit exact.
  SynthConfig cc = sc;
  cc.height = 32;
  cc.width = 32;
  cc.channels = 3;
  cc.count = 50;
  const ImageStore cifar = make_synthetic(cc);
  const Bytes cifar_bytes = write_cifar10_bin(cifar);
  if (write_cifar10_bin(parse_cifar10_bin(cifar_bytes)) != cifar_bytes)
    return fail("CIFAR-10 round trip not bit-exact");

  std::printf("    detail: balance, labels, partitions, round trips all hold\n");
  return true;
}

// ---------------------------------------------------------------------------
// Shared desk-scale trend config (criteria 6 and 7).
RunConfig trend_config(const std::string& out_dir) {
  auto cfg = base_config(out_dir);
  cfg.clients = 5;
  cfg.clients_per_round = 3;
  cfg.rounds = 10;
  cfg.local_epochs = 5;
  cfg.batch_size = 32;
  cfg.folds = 5;
  cfg.max_pairs_per_client = 480;
  cfg.test_pairs = 500;
  return cfg;
}

// 6. Desk-scale learning trend, IID: (a) final k=16 accuracy clears the
//    centralized-oracle-derived floor; (b) k=16 beats k=1 by >= 2 points.
bool criterion_6() {
  auto cfg = trend_config(work("out_c6"));
  cfg.partition = "iid";
  cfg.ranks = {1, 16};
  cmd_prepare(cfg);
  cmd_federate(cfg);

  const auto rows = read_metric_rows(metrics_csv_path(cfg));
  const double acc_k16 = mean_final_accuracy(rows, 16, cfg.rounds);
  const double acc_k1 = mean_final_accuracy(rows, 1, cfg.rounds);

  // Centralized oracle on fold 0 at k=16 for the (a) threshold.
  auto oracle_cfg = cfg;
  oracle_cfg.out_dir = work("out_c6_oracle");
  oracle_cfg.ranks = {16};
  oracle_cfg.folds = 1;
  cmd_prepare(oracle_cfg);
  cmd_centralized(oracle_cfg);
  const auto oracle_rows = read_metric_rows(central_csv_path(oracle_cfg));
  const double oracle_acc = mean_final_accuracy(oracle_rows, 16, cfg.rounds);

  std::printf(
      "    detail: mean final acc k=16 %.4f, k=1 %.4f, oracle %.4f, floor %.2f\n",
      acc_k16, acc_k1, oracle_acc, kTrendAccuracyFloor);
  if (acc_k16 < oracle_acc - 0.05)
    return fail("(a) k=16 accuracy below centralized oracle - 5 points");
  if (acc_k16 < kTrendAccuracyFloor)
    return fail("(a) k=16 accuracy below the frozen floor");
  if (acc_k16 - acc_k1 < 0.02)
    return fail("(b) k=16 does not beat k=1 by 2 points");
  return true;
}

// 7. Non-IID degradation: mean final non-IID accuracy <= IID at matched
//    config (depends on the criterion-6 IID artifacts).
bool criterion_7() {
  auto iid_cfg = trend_config(work("out_c6"));
  iid_cfg.ranks = {1, 16};
  if (!fs::exists(metrics_csv_path(iid_cfg))) {
    cmd_prepare(iid_cfg);
    cmd_federate(iid_cfg);
  }
  const double iid_acc =
      mean_final_accuracy(read_metric_rows(metrics_csv_path(iid_cfg)), 16,
                          iid_cfg.rounds);

  auto cfg = trend_config(work("out_c7"));
  cfg.partition = "noniid";
  cfg.ranks = {16};
  cmd_prepare(cfg);
  cmd_federate(cfg);
  const double noniid_acc = mean_final_accuracy(
      read_metric_rows(metrics_csv_path(cfg)), 16, cfg.rounds);

  std::printf("    detail: mean final acc IID %.4f, non-IID %.4f\n", iid_acc,
              noniid_acc);
  return noniid_acc <= iid_acc;
}

// ---------------------------------------------------------------------------
// 8. Determinism: identical config gives byte-identical metrics (modulo the
//    wall-clock column) and checkpoints, at 1 thread and at 4 threads.
bool criterion_8() {
  auto cfg = base_config(work("out_c8"));
  cfg.clients = 3;
  cfg.clients_per_round = 2;
  cfg.rounds = 2;
  cfg.local_epochs = 1;
  cfg.batch_size = 16;
  cfg.ranks = {1, 2};
  cfg.folds = 2;
  cfg.max_pairs_per_client = 60;
  cfg.test_pairs = 60;
  cmd_prepare(cfg);

  std::string reference_csv;
  std::vector<Bytes> reference_ckpts;
  for (std::size_t threads : {1, 1, 4}) {
    cfg.threads = threads;
    cmd_federate(cfg);
    const std::string csv = strip_elapsed(read_text(metrics_csv_path(cfg)));
    std::vector<Bytes> ckpts;
    for (std::size_t f = 0; f < cfg.folds; ++f)
      for (std::size_t k : cfg.ranks)
        ckpts.push_back(read_file(checkpoint_path(cfg, f, k)));
    if (reference_csv.empty()) {
      reference_csv = csv;
      reference_ckpts = std::move(ckpts);
      continue;
    }
    if (csv != reference_csv)
      return fail("metrics CSV differs across repeated runs");
    if (ckpts != reference_ckpts)
      return fail("checkpoints differ across repeated runs");
  }
  std::printf("    detail: CSV and %zu checkpoints identical at 1 and 4 threads\n",
              reference_ckpts.size());
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  g_workdir = fs::temp_directory_path() / "lorafl_acceptance";
  fs::remove_all(g_workdir);
  fs::create_directories(g_workdir);
  write_synth_idx(work("synth-images-idx3-ubyte"), work("synth-labels-idx1-ubyte"),
                  kSynthImages, 1);

  struct Criterion {
    int id;
    const char* name;
    bool (*run)();
  };
  const Criterion criteria[] = {
      {1, "gradient correctness vs finite differences", criterion_1},
      {2, "FedAvg C=K=1 equivalence with centralized oracle", criterion_2},
      {3, "aggregation matches weighted-mean oracle", criterion_3},
      {4, "cost-model identities", criterion_4},
      {5, "dataset properties and format round trips", criterion_5},
      {6, "desk-scale IID learning trend", criterion_6},
      {7, "non-IID degradation trend", criterion_7},
      {8, "determinism across runs and thread counts", criterion_8},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      std::printf("    detail: exception: %s\n", e.what());
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    std::printf("ACCEPTANCE %d [%s]: %s (%.1fs)\n", c.id, c.name,
                ok ? "PASS" : "FAIL", secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

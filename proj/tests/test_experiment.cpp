#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lorafl/checkpoint.hpp"
#include "lorafl/cost_model.hpp"
#include "lorafl/experiment.hpp"
#include "lorafl/io.hpp"
#include "lorafl/synth.hpp"

using namespace lorafl;
namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(bool(f));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Metrics CSV with the wall-clock column removed, for determinism checks.
std::string strip_elapsed(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      const auto comma = line.rfind(',');
      REQUIRE(comma != std::string::npos);
      line = line.substr(0, comma);
    }
    out += line + '\n';
  }
  return out;
}

std::size_t count_data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("lorafl_test_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

// Write a small synthetic dataset in real IDX format and return a config
// pointing at it.
RunConfig small_config(const TempDir& dir, const std::string& out_dir) {
  const ImageStore store = make_synthetic(
      {.count = 120, .classes = 5, .height = 6, .width = 6, .seed = 31});
  IdxTensor images{{std::uint32_t(store.count()), 6, 6}, store.pixels};
  IdxTensor labels{{std::uint32_t(store.count())}, store.labels};
  write_file(dir.str() + "/images-idx3-ubyte", write_idx(images));
  write_file(dir.str() + "/labels-idx1-ubyte", write_idx(labels));

  RunConfig cfg;
  cfg.dataset = "mnist";
  cfg.mnist_images = dir.str() + "/images-idx3-ubyte";
  cfg.mnist_labels = dir.str() + "/labels-idx1-ubyte";
  cfg.embed_dim = 8;
  cfg.clients = 2;
  cfg.clients_per_round = 2;
  cfg.rounds = 2;
  cfg.local_epochs = 1;
  cfg.batch_size = 8;
  cfg.ranks = {1, 2};
  cfg.folds = 2;
  cfg.max_pairs_per_client = 30;
  cfg.test_pairs = 20;
  cfg.out_dir = out_dir;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("config file parsing") {
  TempDir dir("config");
  const std::string path = dir.str() + "/run.cfg";

  SUBCASE("keys, comments and blank lines") {
    write_text_file(path,
                    "# experiment\n"
                    "dataset = mnist\n"
                    "\n"
                    "clients = 7   # C\n"
                    "lr = 0.005\n"
                    "ranks = 2, 4, 8\n"
                    "precision = f64\n");
    const RunConfig cfg = load_config_file(path);
    CHECK(cfg.dataset == "mnist");
    CHECK(cfg.clients == 7);
    CHECK(cfg.lr == doctest::Approx(0.005));
    CHECK(cfg.ranks == std::vector<std::size_t>{2, 4, 8});
    CHECK(cfg.precision == "f64");
    CHECK(cfg.rounds == 10);  // untouched default
  }
  SUBCASE("unknown key is a hard error") {
    write_text_file(path, "learning_rate = 0.01\n");
    CHECK_THROWS_AS(load_config_file(path), ValidationError);
  }
  SUBCASE("malformed line is a hard error") {
    write_text_file(path, "dataset mnist\n");
    CHECK_THROWS_AS(load_config_file(path), ValidationError);
  }
  SUBCASE("bad integer is a hard error") {
    write_text_file(path, "rounds = many\n");
    CHECK_THROWS_AS(load_config_file(path), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config_file(dir.str() + "/nope.cfg"), ValidationError);
  }
}

TEST_CASE("apply_override changes exactly the named key") {
  RunConfig cfg;
  apply_override(cfg, "rounds", "25");
  CHECK(cfg.rounds == 25);
  apply_override(cfg, "ranks", "3,5");
  CHECK(cfg.ranks == std::vector<std::size_t>{3, 5});
  apply_override(cfg, "out_dir", "elsewhere");
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.clients == 5);  // untouched default
  CHECK_THROWS_AS(apply_override(cfg, "bogus", "1"), ValidationError);
}

TEST_CASE("validate_config rejections") {
  RunConfig cfg;
  SUBCASE("defaults pass") { validate_config(cfg); }
  SUBCASE("bad dataset") {
    cfg.dataset = "imagenet";
    CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  }
  SUBCASE("K > C") {
    cfg.clients_per_round = 9;
    CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  }
  SUBCASE("non-increasing sweep") {
    cfg.ranks = {4, 4};
    CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  }
  SUBCASE("train_ratio bounds") {
    cfg.train_ratio = 1.0;
    CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  }
  SUBCASE("random_projection needs feature_dim") {
    cfg.feature_mode = "random_projection";
    cfg.feature_dim = 0;
    CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  }
  SUBCASE("bad precision") {
    cfg.precision = "f16";
    CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  }
}

TEST_CASE("prepare writes deterministic artifacts") {
  TempDir dir("prepare");
  auto cfg_a = small_config(dir, dir.str() + "/out_a");
  auto cfg_b = small_config(dir, dir.str() + "/out_b");
  cmd_prepare(cfg_a);
  cmd_prepare(cfg_b);

  for (const char* name :
       {"features.lfft", "fold_0.json", "fold_1.json", "manifest.txt"}) {
    CHECK(fs::exists(cfg_a.out_dir + "/" + name));
    CHECK(read_file(cfg_a.out_dir + "/" + name) ==
          read_file(cfg_b.out_dir + "/" + name));
  }

  const std::string manifest = read_text(cfg_a.out_dir + "/manifest.txt");
  CHECK(manifest.find("# lorafl manifest v1") == 0);
  CHECK(manifest.find("clients 2") != std::string::npos);
  CHECK(manifest.find("file features.lfft") != std::string::npos);

  // Prepared data loads back with the configured shape.
  const PreparedData prep = load_prepared(cfg_a);
  CHECK(prep.features.dim == 36);
  REQUIRE(prep.folds.size() == 2);
  for (const auto& fd : prep.folds) {
    CHECK(fd.client_pairs.size() == 2);
    CHECK(fd.test_pairs.size() == 20);
    for (const auto& pairs : fd.client_pairs) CHECK(pairs.size() == 30);
  }
}

TEST_CASE("make_fold is deterministic and fold-sensitive") {
  const ImageStore store = make_synthetic(
      {.count = 100, .classes = 5, .height = 4, .width = 4, .seed = 9});
  RunConfig cfg;
  cfg.clients = 2;
  cfg.clients_per_round = 2;
  cfg.test_pairs = 10;
  cfg.max_pairs_per_client = 20;
  const FoldData a = make_fold(store, cfg, 0);
  const FoldData b = make_fold(store, cfg, 0);
  CHECK(a.client_indices == b.client_indices);
  CHECK(a.client_pairs == b.client_pairs);
  CHECK(a.test_pairs == b.test_pairs);
  const FoldData c = make_fold(store, cfg, 1);
  CHECK(a.client_indices != c.client_indices);
}

TEST_CASE("federate end to end") {
  TempDir dir("federate");
  auto cfg = small_config(dir, dir.str() + "/out");
  cmd_prepare(cfg);
  cmd_federate(cfg);

  const std::string csv = read_text(metrics_csv_path(cfg));
  CHECK(csv.find("# lorafl metrics v1") == 0);

  SUBCASE("one row per (fold, rank, round)") {
    CHECK(count_data_rows(csv) == cfg.folds * cfg.ranks.size() * cfg.rounds);
  }
  SUBCASE("uplink bytes match the analytic cost model") {
    const std::size_t F = 36;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // comment
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(row, cell, ',')) cells.push_back(cell);
      REQUIRE(cells.size() == 11);
      const std::size_t k = std::stoull(cells[2]);
      const std::uint64_t expected =
          cfg.clients_per_round * payload_bytes(head_param_count(F, cfg.embed_dim, k));
      CHECK(std::stoull(cells[7]) == expected);  // uplink
      CHECK(std::stoull(cells[8]) == expected);  // downlink
      CHECK(std::stoull(cells[9]) > 0);          // flops
    }
  }
  SUBCASE("rerun reproduces the CSV up to wall-clock timings") {
    const std::string first = csv;
    cmd_federate(cfg);
    CHECK(strip_elapsed(read_text(metrics_csv_path(cfg))) == strip_elapsed(first));
  }
  SUBCASE("checkpoints exist and carry the right dimensions") {
    for (std::size_t f = 0; f < cfg.folds; ++f)
      for (std::size_t k : cfg.ranks) {
        const auto params = load_checkpoint<float>(checkpoint_path(cfg, f, k));
        CHECK(params.feature_dim == 36);
        CHECK(params.embed_dim == cfg.embed_dim);
        CHECK(params.rank == k);
      }
  }
  SUBCASE("accuracy plot has one polyline per rank") {
    const std::string svg = read_text(cfg.out_dir + "/accuracy_vs_round.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(count_occurrences(svg, "<polyline") == cfg.ranks.size());
    for (std::size_t k : cfg.ranks)
      CHECK(svg.find("k=" + std::to_string(k)) != std::string::npos);
  }
}

TEST_CASE("centralized end to end") {
  TempDir dir("central");
  auto cfg = small_config(dir, dir.str() + "/out");
  cmd_prepare(cfg);
  cmd_centralized(cfg);

  const std::string csv = read_text(central_csv_path(cfg));
  CHECK(count_data_rows(csv) == cfg.folds * cfg.ranks.size() * cfg.rounds);
  CHECK(csv.find(",central,") != std::string::npos);
  CHECK(csv.find(",iid,") == std::string::npos);
}

TEST_CASE("cost subcommand writes the report and plot") {
  TempDir dir("cost");
  RunConfig cfg;
  cfg.out_dir = dir.str() + "/out";
  cfg.feature_mode = "random_projection";
  cfg.feature_dim = 512;
  cfg.ranks = {1, 8};
  cmd_cost(cfg);

  const std::string csv = read_text(cfg.out_dir + "/cost.csv");
  CHECK(csv.find("# lorafl cost v1") == 0);
  CHECK(count_data_rows(csv) == 3);  // two ranks + dense
  CHECK(count_occurrences(csv, "\ndense,") == 1);
  CHECK(csv.find(std::to_string(head_param_count(512, cfg.embed_dim, 8))) !=
        std::string::npos);

  const std::string svg = read_text(cfg.out_dir + "/cost.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(count_occurrences(svg, "class=\"bar\"") == 2 * 3);
}

TEST_CASE("plot commands reject missing inputs") {
  CHECK_THROWS_AS(cmd_plot_metrics("/nonexistent/metrics.csv", "/tmp/x.svg"),
                  ValidationError);
  CHECK_THROWS_AS(cmd_plot_cost("/nonexistent/cost.csv", "/tmp/x.svg"),
                  ValidationError);
}

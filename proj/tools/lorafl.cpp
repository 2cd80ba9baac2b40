#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorafl/data.hpp"
#include "lorafl/experiment.hpp"
#include "lorafl/io.hpp"
#include "lorafl/synth.hpp"

namespace {

lorafl::RunConfig build_config(const std::string& config_path,
                               const std::vector<std::string>& overrides,
                               const std::string& out_dir, int threads,
                               const std::string& precision) {
  lorafl::RunConfig cfg;
  if (!config_path.empty()) cfg = lorafl::load_config_file(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw lorafl::ValidationError("--set expects key=value, got: " + kv);
    lorafl::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads > 0) cfg.threads = std::size_t(threads);
  if (!precision.empty()) cfg.precision = precision;
  return cfg;
}

void write_synth(const std::string& format, const std::string& out_dir,
                 std::size_t count, std::uint64_t seed, double noise) {
  lorafl::SynthConfig sc;
  sc.count = count;
  sc.seed = seed;
  sc.noise_std = noise;
  if (format == "cifar10") {
    sc.height = 32;
    sc.width = 32;
    sc.channels = 3;
    const lorafl::ImageStore store = lorafl::make_synthetic(sc);
    lorafl::write_file(out_dir + "/synth_cifar10.bin",
                       lorafl::write_cifar10_bin(store));
    std::printf("wrote %s/synth_cifar10.bin (%zu images)\n", out_dir.c_str(),
                store.count());
  } else {
    const lorafl::ImageStore store = lorafl::make_synthetic(sc);
    lorafl::IdxTensor images{{std::uint32_t(store.count()),
                              std::uint32_t(store.height),
                              std::uint32_t(store.width)},
                             store.pixels};
    lorafl::IdxTensor labels{{std::uint32_t(store.count())}, store.labels};
    lorafl::write_file(out_dir + "/synth-images-idx3-ubyte",
                       lorafl::write_idx(images));
    lorafl::write_file(out_dir + "/synth-labels-idx1-ubyte",
                       lorafl::write_idx(labels));
    std::printf("wrote %s/synth-{images,labels}-idx*-ubyte (%zu images)\n",
                out_dir.c_str(), store.count());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoRa-FL: federated low-rank one-shot similarity training"};
  app.require_subcommand(1);

  std::string config_path, out_dir, precision;
  std::vector<std::string> overrides;
  int threads = 0;
  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--set", overrides, "override a config key, key=value")
      ->take_all();
  app.add_option("--out", out_dir, "output directory (overrides out_dir)");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--precision", precision, "f32 or f64")
      ->check(CLI::IsMember({"f32", "f64"}));

  auto* prepare = app.add_subcommand("prepare", "parse data, extract features, build shards/pairs");
  auto* federate = app.add_subcommand("federate", "run the federated rank sweep");
  auto* centralized = app.add_subcommand("centralized", "run the centralized baseline");
  auto* cost = app.add_subcommand("cost", "emit the analytic cost report");

  auto* plot = app.add_subcommand("plot", "regenerate SVG charts from CSV files");
  std::string plot_metrics, plot_cost, plot_svg;
  plot->add_option("--metrics", plot_metrics, "metrics CSV to plot");
  plot->add_option("--cost-csv", plot_cost, "cost CSV to plot");
  plot->add_option("--svg", plot_svg, "output SVG path")->required();

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset in MNIST/CIFAR format");
  std::string synth_format = "mnist";
  std::size_t synth_count = 4000;
  std::uint64_t synth_seed = 0;
  double synth_noise = 24.0;
  std::string synth_out = ".";
  synth->add_option("--format", synth_format, "mnist or cifar10")
      ->check(CLI::IsMember({"mnist", "cifar10"}));
  synth->add_option("--count", synth_count, "number of images");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--noise", synth_noise, "pixel noise std");
  synth->add_option("--dir", synth_out, "output directory");

  // Let "lorafl <subcommand> --config ..." reach the app-level options.
  for (CLI::App* sub : {prepare, federate, centralized, cost, plot, synth})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      write_synth(synth_format, synth_out, synth_count, synth_seed, synth_noise);
      return 0;
    }
    if (plot->parsed()) {
      if (!plot_metrics.empty())
        lorafl::cmd_plot_metrics(plot_metrics, plot_svg);
      else if (!plot_cost.empty())
        lorafl::cmd_plot_cost(plot_cost, plot_svg);
      else
        throw lorafl::ValidationError("plot: need --metrics or --cost-csv");
      return 0;
    }

    const lorafl::RunConfig cfg =
        build_config(config_path, overrides, out_dir, threads, precision);
    if (prepare->parsed()) lorafl::cmd_prepare(cfg);
    if (federate->parsed()) lorafl::cmd_federate(cfg);
    if (centralized->parsed()) lorafl::cmd_centralized(cfg);
    if (cost->parsed()) lorafl::cmd_cost(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

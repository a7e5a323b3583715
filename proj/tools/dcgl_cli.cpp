// Command-line front end. Talks to the library only through dcgl.h.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "dcgl/dcgl.h"

namespace {

constexpr size_t kMemoryGuardRows = 20000;

// Exit codes: 0 ok, 2 usage/config, 3 data, 4 numeric.
int exit_code(dcgl_status status) {
  switch (status) {
    case DCGL_OK: return 0;
    case DCGL_ERR_USAGE: return 2;
    case DCGL_ERR_NUMERIC: return 4;
    case DCGL_ERR_DATA:
    case DCGL_ERR_IO: return 3;
    default: return 1;
  }
}

struct Failure {
  int code;
};

void check(dcgl_status status, const char* context) {
  if (status == DCGL_OK) return;
  std::cerr << "dcgl: " << context << ": " << dcgl_last_error() << '\n';
  throw Failure{exit_code(status)};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Dataset = Handle<dcgl_dataset, dcgl_dataset_free>;
using Config = Handle<dcgl_config, dcgl_config_free>;
using Result = Handle<dcgl_result, dcgl_result_free>;
using Graph = Handle<dcgl_graph, dcgl_graph_free>;

struct Labels {
  int* data = nullptr;
  size_t size = 0;
  ~Labels() { dcgl_labels_free(data); }
};

void read_labels(const std::string& path, Labels& labels) {
  check(dcgl_labels_read(path.c_str(), &labels.data, &labels.size), path.c_str());
}

struct RunArgs {
  std::string data;
  std::string config;
  std::string out = "run";
  std::string variant;
  std::string resume;
  bool force = false;
  bool unlabeled = false;
  int checkpoint_every = 0;
  // Overrides applied over the config file, keyed by config field.
  std::vector<std::pair<std::string, std::optional<std::string>>> overrides{
      {"seed", {}}, {"k_init", {}}, {"t", {}}, {"iter", {}}, {"alpha", {}}, {"beta", {}},
      {"gamma", {}}, {"tau", {}}, {"lambda", {}}, {"latent_dim", {}}, {"lr", {}}};
};

void add_run_options(CLI::App* cmd, RunArgs& args, bool variant_required) {
  cmd->add_option("--data", args.data, "Dataset (.csv or binary container)")->required();
  cmd->add_option("--config", args.config, "JSON config file")->required();
  cmd->add_option("--out", args.out, "Run directory")->capture_default_str();
  auto* variant = cmd->add_option("--variant", args.variant, "Ablation: wF, wC, wFg, wCg, wall");
  if (variant_required) variant->required();
  cmd->add_flag("--force", args.force, "Allow more than 20000 samples");
  cmd->add_flag("--unlabeled", args.unlabeled, "CSV has no trailing label column");
  cmd->add_option("--checkpoint-every", args.checkpoint_every, "Also checkpoint every N epochs");
  cmd->add_option("--resume", args.resume, "Resume from a checkpoint file");
  for (auto& [key, value] : args.overrides) {
    std::string flag = "--" + key;
    for (char& ch : flag)
      if (ch == '_') ch = '-';
    cmd->add_option(flag, value, "Override " + key);
  }
}

void print_epoch(int epoch, int k, double total, void*) {
  std::fprintf(stderr, "epoch %d  k=%d  loss=%.6g\n", epoch, k, total);
}

int cmd_run(const RunArgs& args) {
  Config cfg;
  check(dcgl_config_load(args.config.c_str(), cfg.out()), "config");
  for (const auto& [key, value] : args.overrides) {
    if (value) check(dcgl_config_set(cfg.get(), key.c_str(), value->c_str()), ("--" + key).c_str());
  }
  if (!args.variant.empty()) check(dcgl_config_apply_variant(cfg.get(), args.variant.c_str()), "--variant");

  Dataset data;
  check(dcgl_dataset_load(args.data.c_str(), DCGL_FORMAT_AUTO, args.unlabeled ? 0 : 1, data.out()), "data");
  const size_t n = dcgl_dataset_rows(data.get());
  if (n > kMemoryGuardRows && !args.force) {
    const double bytes = 8.0 * 8.0 * static_cast<double>(n) * static_cast<double>(n);
    std::cerr << "dcgl: " << n << " samples needs about " << static_cast<long long>(bytes)
              << " bytes of dense graph storage; pass --force to proceed\n";
    return 2;
  }
  check(dcgl_config_validate(cfg.get(), n), "config");
  double clusters = 0;
  check(dcgl_config_get_number(cfg.get(), "c", &clusters), "config");
  check(dcgl_dataset_set_clusters(data.get(), static_cast<int>(clusters)), "data");
  check(dcgl_dataset_normalize(data.get()), "data");

  std::filesystem::create_directories(args.out);
  dcgl_train_options options{};
  options.resume_path = args.resume.empty() ? nullptr : args.resume.c_str();
  options.checkpoint_dir = args.out.c_str();
  options.checkpoint_every = args.checkpoint_every;
  options.callback = print_epoch;

  Result result;
  check(dcgl_train(data.get(), cfg.get(), &options, result.out()), "train");
  check(dcgl_result_write_run_dir(result.get(), data.get(), cfg.get(), args.out.c_str()), "output");

  std::cerr << "stopped after epoch " << dcgl_result_epochs(result.get()) << " ("
            << dcgl_result_seconds(result.get()) << " s)\n";
  double acc = 0, nmi = 0;
  if (dcgl_result_metrics(result.get(), &acc, &nmi)) {
    std::printf("ACC %.4f  NMI %.4f\n", acc, nmi);
  }
  std::printf("run directory: %s\n", args.out.c_str());
  return 0;
}

int cmd_eval(const std::string& truth, const std::string& pred) {
  Labels y_true, y_pred;
  read_labels(truth, y_true);
  read_labels(pred, y_pred);
  if (y_true.size != y_pred.size) {
    std::cerr << "dcgl: label length mismatch: " << y_true.size << " vs " << y_pred.size << '\n';
    return 3;
  }
  double acc = 0, nmi = 0;
  check(dcgl_evaluate(y_true.data, y_pred.data, y_true.size, &acc, &nmi), "eval");
  std::printf("{\"acc\":%.17g,\"nmi\":%.17g}\n", acc, nmi);
  return 0;
}

struct PlotArgs {
  std::string graph;
  std::string embedding;
  std::string labels;
  std::string out;
  std::string edges;
  double percentile = 90.0;
};

int cmd_plot(const PlotArgs& args) {
  Labels labels;
  read_labels(args.labels, labels);
  if (!args.graph.empty()) {
    Graph graph;
    check(dcgl_graph_load(args.graph.c_str(), graph.out()), "graph");
    double quality = 0;
    check(dcgl_plot_adjacency(graph.get(), labels.data, labels.size, args.out.c_str(), &quality), "plot");
    if (!args.edges.empty()) check(dcgl_graph_export_edges(graph.get(), args.edges.c_str()), "edges");
    std::printf("block_quality %.6f\n", quality);
  } else {
    Dataset embedding;
    check(dcgl_dataset_load(args.embedding.c_str(), DCGL_FORMAT_AUTO, 0, embedding.out()), "embedding");
    check(dcgl_plot_heatmap(embedding.get(), labels.data, labels.size, args.out.c_str(), args.percentile), "plot");
  }
  return 0;
}

struct BlobArgs {
  int n = 300;
  int c = 3;
  int m = 16;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_blobs(const BlobArgs& args) {
  Dataset data;
  check(dcgl_dataset_make_blobs(args.n, args.c, args.m, args.sigma, args.seed, data.out()), "gen-blobs");
  check(dcgl_dataset_save(data.get(), args.out.c_str(), DCGL_FORMAT_AUTO), "gen-blobs");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph clustering on feature matrices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dcgl_version()));

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Train and write a run directory");
  add_run_options(run, run_args, false);

  RunArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Train an ablation variant");
  add_run_options(ablate, ablate_args, true);

  std::string truth, pred;
  auto* eval = app.add_subcommand("eval", "Score predicted labels against ground truth");
  eval->add_option("truth", truth, "True labels, one per line")->required();
  eval->add_option("pred", pred, "Predicted labels, one per line")->required();

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plot", "Render an adjacency or similarity plot");
  auto* graph_opt = plot->add_option("--graph", plot_args.graph, "Graph file (adjacency plot)");
  auto* emb_opt = plot->add_option("--embedding", plot_args.embedding, "Embedding matrix (heatmap)");
  graph_opt->excludes(emb_opt);
  plot->add_option("--labels", plot_args.labels, "Labels giving the display order")->required();
  plot->add_option("--out", plot_args.out, "Output PNG")->required();
  plot->add_option("--edges", plot_args.edges, "Also export the graph as an edge list CSV")->needs(graph_opt);
  plot->add_option("--percentile", plot_args.percentile, "Heatmap threshold percentile")->capture_default_str();

  BlobArgs blob_args;
  auto* blobs = app.add_subcommand("gen-blobs", "Write a synthetic Gaussian blob dataset");
  blobs->add_option("--n", blob_args.n)->capture_default_str();
  blobs->add_option("--c", blob_args.c)->capture_default_str();
  blobs->add_option("--m", blob_args.m)->capture_default_str();
  blobs->add_option("--sigma", blob_args.sigma)->capture_default_str();
  blobs->add_option("--seed", blob_args.seed)->capture_default_str();
  blobs->add_option("--out", blob_args.out, "Output path (.csv or binary)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*ablate) return cmd_run(ablate_args);
    if (*eval) return cmd_eval(truth, pred);
    if (*plot) {
      if (plot_args.graph.empty() && plot_args.embedding.empty()) {
        std::cerr << "dcgl plot: one of --graph or --embedding is required\n";
        return 2;
      }
      return cmd_plot(plot_args);
    }
    if (*blobs) return cmd_gen_blobs(blob_args);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "dcgl: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

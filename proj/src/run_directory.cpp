#include "dcgl/run_directory.hpp"

#include <cstdio>
#include <fstream>

namespace dcgl {
namespace {

std::ofstream open_text(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  return out;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_loss_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  auto out = open_text(path);
  out << "epoch,l_ae,l_fl,l_gl,l_cl,total,k\n";
  for (const auto& rec : history) {
    const auto& l = rec.losses;
    out << rec.epoch << ',' << exact(l.l_ae) << ',' << exact(l.l_fl) << ',' << exact(l.l_gl) << ','
        << exact(l.l_cl) << ',' << exact(l.total) << ',' << rec.k << '\n';
  }
}

void write_run_directory(const RunResult& result, const DataMatrix& data, const RunConfig& cfg,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "plots", ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());

  open_text(dir / "config.json") << to_json(cfg).dump(2) << '\n';
  write_loss_history(result.history, dir / "losses.csv");
  write_labels(dir / "labels.csv", result.labels);
  save_graph(result.local_graph, dir / "graph_final.bin");
  write_container(dir / "embedding_final.bin", result.structural, nullptr);

  nlohmann::json metrics{{"n", data.n()},
                         {"c", cfg.clusters},
                         {"seed", cfg.seed},
                         {"config_hash", config_hash(cfg)},
                         {"stop_epoch", result.stop_epoch},
                         {"threads", result.threads},
                         {"fl_negatives_per_anchor", result.fl_negatives_per_anchor}};
  if (result.metrics) {
    metrics["acc"] = result.metrics->acc;
    metrics["nmi"] = result.metrics->nmi;
  } else {
    metrics["acc"] = nullptr;
    metrics["nmi"] = nullptr;
  }
  open_text(dir / "metrics.json") << metrics.dump(2) << '\n';

  // Plots follow the ground truth when available, else the predicted labels.
  const std::vector<int>& order = data.labels ? *data.labels : result.labels;
  plot_similarity_heatmap(result.structural, order, dir / "plots" / "heatmap.png", cfg.heatmap_percentile);
  plot_adjacency(result.local_graph, order, dir / "plots" / "adjacency.png");
}

}  // namespace dcgl

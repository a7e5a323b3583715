#include "dcgl/dcgl.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "dcgl/run_directory.hpp"
#include "dcgl/trainer.hpp"

struct dcgl_dataset {
  dcgl::DataMatrix data;
};
struct dcgl_config {
  dcgl::RunConfig cfg;
};
struct dcgl_result {
  dcgl::RunResult result;
};
struct dcgl_graph {
  dcgl::AffinityGraph graph;
};

namespace {

thread_local std::string last_error;

dcgl_status to_status(dcgl::ErrorKind kind) {
  switch (kind) {
    case dcgl::ErrorKind::usage: return DCGL_ERR_USAGE;
    case dcgl::ErrorKind::data: return DCGL_ERR_DATA;
    case dcgl::ErrorKind::numeric: return DCGL_ERR_NUMERIC;
    case dcgl::ErrorKind::io: return DCGL_ERR_IO;
  }
  return DCGL_ERR_INTERNAL;
}

template <typename F>
dcgl_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return DCGL_OK;
  } catch (const dcgl::Error& e) {
    last_error = e.what();
    return to_status(e.kind());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("config: ") + e.what();
    return DCGL_ERR_USAGE;
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return DCGL_ERR_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DCGL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DCGL_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) dcgl::fail(dcgl::ErrorKind::usage, std::string(what) + " is null");
}

size_t copy_labels(const std::vector<int>& labels, int* out, size_t cap) {
  if (out) std::memcpy(out, labels.data(), std::min(cap, labels.size()) * sizeof(int));
  return labels.size();
}

dcgl::DataFormat resolve(dcgl_format format, const char* path) {
  switch (format) {
    case DCGL_FORMAT_CSV: return dcgl::DataFormat::csv;
    case DCGL_FORMAT_BINARY: return dcgl::DataFormat::binary;
    default: return dcgl::format_from_path(path);
  }
}

std::span<const int> label_span(const int* labels, size_t n) {
  require(labels, "labels");
  return {labels, n};
}

}  // namespace

extern "C" {

const char* dcgl_last_error(void) { return last_error.c_str(); }
const char* dcgl_version(void) { return "1.0.0"; }

dcgl_status dcgl_dataset_load(const char* path, dcgl_format format, int labeled, dcgl_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dcgl_dataset{dcgl::load_dataset(path, resolve(format, path), labeled != 0)};
  });
}

dcgl_status dcgl_dataset_make_blobs(int n, int c, int m, double sigma, uint64_t seed, dcgl_dataset** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dcgl_dataset{dcgl::make_blobs(n, c, m, sigma, seed)};
  });
}

dcgl_status dcgl_dataset_save(const dcgl_dataset* data, const char* path, dcgl_format format) {
  return guarded([&] {
    require(data, "dataset");
    require(path, "path");
    dcgl::save_dataset(data->data, path, resolve(format, path));
  });
}

dcgl_status dcgl_dataset_normalize(dcgl_dataset* data) {
  return guarded([&] {
    require(data, "dataset");
    data->data = dcgl::l2_normalize(std::move(data->data));
  });
}

dcgl_status dcgl_dataset_set_clusters(dcgl_dataset* data, int clusters) {
  return guarded([&] {
    require(data, "dataset");
    dcgl::set_clusters(data->data, clusters);
  });
}

size_t dcgl_dataset_rows(const dcgl_dataset* data) { return data ? static_cast<size_t>(data->data.n()) : 0; }
size_t dcgl_dataset_cols(const dcgl_dataset* data) { return data ? static_cast<size_t>(data->data.m()) : 0; }
int dcgl_dataset_has_labels(const dcgl_dataset* data) { return data && data->data.labels ? 1 : 0; }

size_t dcgl_dataset_labels(const dcgl_dataset* data, int* out, size_t cap) {
  if (!data || !data->data.labels) return 0;
  return copy_labels(*data->data.labels, out, cap);
}

void dcgl_dataset_free(dcgl_dataset* data) { delete data; }

dcgl_status dcgl_config_create(dcgl_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dcgl_config{};
  });
}

dcgl_status dcgl_config_load(const char* path, dcgl_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dcgl_config{dcgl::load_config(path)};
  });
}

dcgl_status dcgl_config_set(dcgl_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    dcgl::set_config_value(cfg->cfg, key, value);
  });
}

dcgl_status dcgl_config_apply_variant(dcgl_config* cfg, const char* variant) {
  return guarded([&] {
    require(cfg, "config");
    require(variant, "variant");
    dcgl::apply_variant(cfg->cfg, variant);
  });
}

dcgl_status dcgl_config_validate(const dcgl_config* cfg, size_t n) {
  return guarded([&] {
    require(cfg, "config");
    dcgl::validate(cfg->cfg, static_cast<long>(n));
  });
}

dcgl_status dcgl_config_get_number(const dcgl_config* cfg, const char* key, double* out) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(out, "out");
    auto j = dcgl::to_json(cfg->cfg);
    auto it = j.find(key);
    if (it == j.end()) dcgl::fail(dcgl::ErrorKind::usage, std::string("unknown config key: ") + key);
    if (it->is_boolean()) {
      *out = it->get<bool>() ? 1.0 : 0.0;
    } else if (it->is_number()) {
      *out = it->get<double>();
    } else {
      dcgl::fail(dcgl::ErrorKind::usage, std::string("config key is not numeric: ") + key);
    }
  });
}

dcgl_status dcgl_config_to_json(const dcgl_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(cfg, "config");
    const std::string text = dcgl::to_json(cfg->cfg).dump(2);
    if (needed) *needed = text.size() + 1;
    if (buf && cap > text.size()) std::memcpy(buf, text.c_str(), text.size() + 1);
    else if (buf) dcgl::fail(dcgl::ErrorKind::usage, "buffer too small for config JSON");
  });
}

void dcgl_config_free(dcgl_config* cfg) { delete cfg; }

dcgl_status dcgl_train(const dcgl_dataset* data, const dcgl_config* cfg, const dcgl_train_options* options,
                       dcgl_result** out) {
  return guarded([&] {
    require(data, "dataset");
    require(cfg, "config");
    require(out, "out");
    dcgl::TrainOptions opts;
    if (options) {
      if (options->resume_path) opts.resume_from = options->resume_path;
      if (options->checkpoint_dir) {
        opts.checkpoint_dir = options->checkpoint_dir;
        std::filesystem::create_directories(opts.checkpoint_dir);
      }
      opts.checkpoint_every = options->checkpoint_every;
      if (options->callback) {
        auto cb = options->callback;
        void* user = options->user_data;
        opts.on_epoch = [cb, user](const dcgl::EpochRecord& rec) { cb(rec.epoch, rec.k, rec.losses.total, user); };
      }
    }
    *out = new dcgl_result{dcgl::train(data->data, cfg->cfg, opts)};
  });
}

size_t dcgl_result_labels(const dcgl_result* result, int* out, size_t cap) {
  return result ? copy_labels(result->result.labels, out, cap) : 0;
}

int dcgl_result_epochs(const dcgl_result* result) { return result ? result->result.stop_epoch : 0; }

int dcgl_result_metrics(const dcgl_result* result, double* acc, double* nmi) {
  if (!result || !result->result.metrics) return 0;
  if (acc) *acc = result->result.metrics->acc;
  if (nmi) *nmi = result->result.metrics->nmi;
  return 1;
}

size_t dcgl_result_fl_negatives(const dcgl_result* result) {
  return result ? result->result.fl_negatives_per_anchor : 0;
}

double dcgl_result_seconds(const dcgl_result* result) { return result ? result->result.wall_seconds : 0.0; }

dcgl_status dcgl_result_write_run_dir(const dcgl_result* result, const dcgl_dataset* data, const dcgl_config* cfg,
                                      const char* dir) {
  return guarded([&] {
    require(result, "result");
    require(data, "dataset");
    require(cfg, "config");
    require(dir, "dir");
    dcgl::write_run_directory(result->result, data->data, cfg->cfg, dir);
  });
}

void dcgl_result_free(dcgl_result* result) { delete result; }

dcgl_status dcgl_labels_read(const char* path, int** labels, size_t* count) {
  return guarded([&] {
    require(path, "path");
    require(labels, "labels");
    require(count, "count");
    std::vector<int> read = dcgl::read_labels(path);
    int* buf = static_cast<int*>(std::malloc(std::max<size_t>(1, read.size()) * sizeof(int)));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, read.data(), read.size() * sizeof(int));
    *labels = buf;
    *count = read.size();
  });
}

void dcgl_labels_free(int* labels) { std::free(labels); }

dcgl_status dcgl_evaluate(const int* y_true, const int* y_pred, size_t n, double* acc, double* nmi) {
  return guarded([&] {
    auto report = dcgl::evaluate(label_span(y_true, n), label_span(y_pred, n));
    if (acc) *acc = report.acc;
    if (nmi) *nmi = report.nmi;
  });
}

dcgl_status dcgl_graph_load(const char* path, dcgl_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dcgl_graph{dcgl::load_graph(path)};
  });
}

size_t dcgl_graph_size(const dcgl_graph* graph) { return graph ? static_cast<size_t>(graph->graph.size()) : 0; }

dcgl_status dcgl_graph_export_edges(const dcgl_graph* graph, const char* path) {
  return guarded([&] {
    require(graph, "graph");
    require(path, "path");
    dcgl::export_edge_list(graph->graph, path);
  });
}

void dcgl_graph_free(dcgl_graph* graph) { delete graph; }

dcgl_status dcgl_plot_adjacency(const dcgl_graph* graph, const int* labels, size_t n, const char* path,
                                double* quality) {
  return guarded([&] {
    require(graph, "graph");
    require(path, "path");
    double q = dcgl::plot_adjacency(graph->graph, label_span(labels, n), path);
    if (quality) *quality = q;
  });
}

dcgl_status dcgl_plot_heatmap(const dcgl_dataset* embedding, const int* labels, size_t n, const char* path,
                              double percentile) {
  return guarded([&] {
    require(embedding, "embedding");
    require(path, "path");
    dcgl::plot_similarity_heatmap(embedding->data.X, label_span(labels, n), path, percentile);
  });
}

}  // extern "C"

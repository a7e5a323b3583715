#ifndef DCGL_H
#define DCGL_H

#include <stddef.h>
#include <stdint.h>

#if defined(DCGL_BUILDING_LIBRARY)
#define DCGL_API __attribute__((visibility("default")))
#else
#define DCGL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes where they overlap. */
typedef enum {
  DCGL_OK = 0,
  DCGL_ERR_USAGE = 2,
  DCGL_ERR_DATA = 3,
  DCGL_ERR_NUMERIC = 4,
  DCGL_ERR_IO = 5,
  DCGL_ERR_INTERNAL = 6
} dcgl_status;

typedef enum { DCGL_FORMAT_AUTO = 0, DCGL_FORMAT_CSV = 1, DCGL_FORMAT_BINARY = 2 } dcgl_format;

typedef struct dcgl_dataset dcgl_dataset;
typedef struct dcgl_config dcgl_config;
typedef struct dcgl_result dcgl_result;
typedef struct dcgl_graph dcgl_graph;

/* Message of the last failed call on this thread; empty after success. */
DCGL_API const char* dcgl_last_error(void);
DCGL_API const char* dcgl_version(void);

/* Datasets. Loading keeps raw values; call dcgl_dataset_normalize before training. */
DCGL_API dcgl_status dcgl_dataset_load(const char* path, dcgl_format format, int labeled, dcgl_dataset** out);
DCGL_API dcgl_status dcgl_dataset_make_blobs(int n, int c, int m, double sigma, uint64_t seed, dcgl_dataset** out);
DCGL_API dcgl_status dcgl_dataset_save(const dcgl_dataset* data, const char* path, dcgl_format format);
DCGL_API dcgl_status dcgl_dataset_normalize(dcgl_dataset* data);
DCGL_API dcgl_status dcgl_dataset_set_clusters(dcgl_dataset* data, int clusters);
DCGL_API size_t dcgl_dataset_rows(const dcgl_dataset* data);
DCGL_API size_t dcgl_dataset_cols(const dcgl_dataset* data);
DCGL_API int dcgl_dataset_has_labels(const dcgl_dataset* data);
/* Copies up to `cap` labels; returns the number available. */
DCGL_API size_t dcgl_dataset_labels(const dcgl_dataset* data, int* out, size_t cap);
DCGL_API void dcgl_dataset_free(dcgl_dataset* data);

/* Configuration. Keys match the JSON config file. */
DCGL_API dcgl_status dcgl_config_create(dcgl_config** out);
DCGL_API dcgl_status dcgl_config_load(const char* path, dcgl_config** out);
DCGL_API dcgl_status dcgl_config_set(dcgl_config* cfg, const char* key, const char* value);
DCGL_API dcgl_status dcgl_config_apply_variant(dcgl_config* cfg, const char* variant);
DCGL_API dcgl_status dcgl_config_validate(const dcgl_config* cfg, size_t n);
DCGL_API dcgl_status dcgl_config_get_number(const dcgl_config* cfg, const char* key, double* out);
/* Writes the resolved JSON (NUL-terminated) when it fits; `needed` gets the full size including NUL. */
DCGL_API dcgl_status dcgl_config_to_json(const dcgl_config* cfg, char* buf, size_t cap, size_t* needed);
DCGL_API void dcgl_config_free(dcgl_config* cfg);

/* Training. */
typedef void (*dcgl_epoch_callback)(int epoch, int k, double total_loss, void* user_data);

typedef struct {
  const char* resume_path;    /* NULL: start fresh */
  const char* checkpoint_dir; /* NULL: no checkpoints */
  int checkpoint_every;       /* 0: only the final checkpoint */
  dcgl_epoch_callback callback;
  void* user_data;
} dcgl_train_options;

DCGL_API dcgl_status dcgl_train(const dcgl_dataset* data, const dcgl_config* cfg, const dcgl_train_options* options,
                                dcgl_result** out);
DCGL_API size_t dcgl_result_labels(const dcgl_result* result, int* out, size_t cap);
DCGL_API int dcgl_result_epochs(const dcgl_result* result);
/* Returns 0 when the dataset had no labels. */
DCGL_API int dcgl_result_metrics(const dcgl_result* result, double* acc, double* nmi);
DCGL_API size_t dcgl_result_fl_negatives(const dcgl_result* result);
DCGL_API double dcgl_result_seconds(const dcgl_result* result);
DCGL_API dcgl_status dcgl_result_write_run_dir(const dcgl_result* result, const dcgl_dataset* data,
                                               const dcgl_config* cfg, const char* dir);
DCGL_API void dcgl_result_free(dcgl_result* result);

/* Labels and metrics. */
DCGL_API dcgl_status dcgl_labels_read(const char* path, int** labels, size_t* count);
DCGL_API void dcgl_labels_free(int* labels);
DCGL_API dcgl_status dcgl_evaluate(const int* y_true, const int* y_pred, size_t n, double* acc, double* nmi);

/* Graphs and plots. */
DCGL_API dcgl_status dcgl_graph_load(const char* path, dcgl_graph** out);
DCGL_API size_t dcgl_graph_size(const dcgl_graph* graph);
DCGL_API dcgl_status dcgl_graph_export_edges(const dcgl_graph* graph, const char* path);
DCGL_API void dcgl_graph_free(dcgl_graph* graph);
/* Writes the PNG and its block-quality sidecar; `quality` may be NULL. */
DCGL_API dcgl_status dcgl_plot_adjacency(const dcgl_graph* graph, const int* labels, size_t n, const char* path,
                                         double* quality);
/* Heatmap of the rows of `embedding` (any dataset handle). */
DCGL_API dcgl_status dcgl_plot_heatmap(const dcgl_dataset* embedding, const int* labels, size_t n, const char* path,
                                       double percentile);

#ifdef __cplusplus
}
#endif

#endif

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "dcgl/adaptive_graph.hpp"
#include "dcgl/clustering.hpp"
#include "dcgl/config.hpp"
#include "dcgl/data_io.hpp"
#include "dcgl/evaluation.hpp"
#include "dcgl/losses.hpp"
#include "dcgl/networks.hpp"

namespace dcgl {

/// Everything an epoch treats as constant with respect to the parameters:
/// the k-means centroids and the learned graphs.
struct EpochGraphs {
  int k = 0;
  std::optional<CentroidSet> centroids;  // absent when the feature loss does not use them
  AffinityGraph local;                   // S^L
  NormalizedGraph local_hat;
  std::optional<AffinityGraph> global;  // S^G; absent under disable_CL
  std::optional<NormalizedGraph> global_hat;
};

/// Per-term multipliers for the differentiated objective. The default
/// follows the configuration (1, 1, alpha, beta, with ablations applied).
struct ObjectiveWeights {
  double ae = 1.0;
  double fl = 1.0;
  double gl = 1.0;
  double cl = 1.0;

  static ObjectiveWeights from_config(const RunConfig& cfg);
};

struct Objective {
  double value = 0.0;  // weighted by ObjectiveWeights
  LossBundle losses;   // unweighted components and the configured total
  ModelParams grads;   // populated when requested
  Matrix structural;   // H^v1
  std::size_t fl_negatives_per_anchor = 0;
};

/// Forward pass, k-means on H^v2, S^L from H^v1 with `k`, then the merged
/// wide graph and its diffusion.
EpochGraphs prepare_epoch(const Matrix& X, const NormalizedGraph& A_hat, const ModelParams& params, int k,
                          const RunConfig& cfg, std::uint64_t epoch_seed);

/// Evaluates the four losses on fixed graphs and, optionally, the exact
/// gradient of the weighted objective w.r.t. every parameter.
Objective evaluate_objective(const Matrix& X, const NormalizedGraph& A_hat, const ModelParams& params,
                             const EpochGraphs& graphs, const RunConfig& cfg, const ObjectiveWeights& weights,
                             bool with_gradient);

struct AdamState {
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam_state(const ModelParams& params);

/// One bias-corrected Adam update over every tensor. Non-finite gradients
/// are rejected before anything is modified.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr);

struct EpochRecord {
  int epoch = 0;
  int k = 0;
  LossBundle losses;
};

struct TrainState {
  ModelParams params;
  AdamState adam;
  int epoch = 0;  // completed epochs
  int k = 0;
  std::vector<EpochRecord> history;
  std::uint64_t seed = 0;
  // Output of the most recent epoch, needed for the readout.
  AffinityGraph last_local;
  Matrix last_structural;
};

struct RunResult {
  std::vector<int> labels;
  AffinityGraph local_graph;  // converged S^L
  Matrix structural;          // H^v1 of the final epoch
  std::vector<EpochRecord> history;
  std::optional<MetricReport> metrics;
  double wall_seconds = 0.0;
  int stop_epoch = 0;
  std::size_t fl_negatives_per_anchor = 0;
  int threads = 1;
};

struct TrainOptions {
  std::optional<std::filesystem::path> resume_from;
  std::filesystem::path checkpoint_dir;  // empty: no periodic checkpoints
  int checkpoint_every = 0;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Seed for the k-means of a given epoch, derived from the run seed.
std::uint64_t epoch_seed(std::uint64_t seed, int epoch);

/// True when training ends after `epoch`: iter reached, or the stage at the
/// neighbor cap floor(n/c) has run its t epochs.
bool is_final_epoch(int epoch, const RunConfig& cfg, Index n, int c);

/// Threads used for internal parallelism (DCGL_THREADS caps it).
int configure_threads();

/// Runs the full procedure on normalized data and reads out labels by
/// normalized cut on the converged local graph.
RunResult train(const DataMatrix& data, const RunConfig& cfg, const TrainOptions& options = {});

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
/// `cfg` and the data shape rebuild the architecture the tensors must match.
TrainState load_checkpoint(const std::filesystem::path& path, const RunConfig& cfg, Index m);

}  // namespace dcgl

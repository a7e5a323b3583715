#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dcgl/adaptive_graph.hpp"
#include "dcgl/config.hpp"
#include "dcgl/errors.hpp"

namespace dcgl {

enum class Activation { relu, linear, softmax_rows };

/// Bias-free graph convolution stack: H <- act(G H W) per layer.
struct GcnParams {
  std::vector<Matrix> weights;
  std::vector<Activation> activations;
};

struct DenseLayer {
  Matrix weight;  // d_in x d_out
  Matrix bias;    // 1 x d_out
  Activation activation = Activation::linear;
};

struct AutoencoderParams {
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> decoder;
};

/// gcn1 produces the structural embedding, ae the attributed one, gcn2/gcn3
/// the two cluster indicators.
struct ModelParams {
  GcnParams gcn1;
  AutoencoderParams ae;
  GcnParams gcn2;
  GcnParams gcn3;

  /// Every trainable tensor in a fixed order, with a stable name.
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;

  /// Same shapes, all zeros.
  ModelParams zeros_like() const;

  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);
  size_t parameter_count() const;
};

// Activations

Matrix apply_activation(const Matrix& pre, Activation act);
/// Gradient w.r.t. the pre-activation given the activation output.
Matrix activation_backward(const Matrix& out, const Matrix& d_out, Activation act);
/// Row softmax with the row max subtracted first.
Matrix softmax_rows(const Matrix& logits);

// Graph convolution

/// act(graph * H_in * W).
Matrix gcn_layer(const Matrix& H_in, const NormalizedGraph& graph, const Matrix& W, Activation act);

struct GcnCache {
  Matrix input;
  std::vector<Matrix> propagated;  // graph * layer input
  std::vector<Matrix> outputs;
};

Matrix forward_gcn(const Matrix& input, const Matrix& graph, const GcnParams& params,
                   GcnCache* cache = nullptr);

/// Accumulates weight gradients into `grads` and returns d(input).
Matrix backward_gcn(const Matrix& graph, const GcnParams& params, const GcnCache& cache,
                    const Matrix& d_output, GcnParams& grads);

// Auto-encoder

struct DenseCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> outputs;
};

Matrix forward_dense(const Matrix& input, const std::vector<DenseLayer>& layers,
                     DenseCache* cache = nullptr);
Matrix backward_dense(const std::vector<DenseLayer>& layers, const DenseCache& cache,
                      const Matrix& d_output, std::vector<DenseLayer>& grads);

struct AttributeOutput {
  Matrix latent;          // H^v2
  Matrix reconstruction;  // X hat
};

struct AttributeCache {
  DenseCache encoder;
  DenseCache decoder;
};

/// Structural branch: two graph convolutions (relu, then linear).
Matrix forward_structural(const Matrix& X, const NormalizedGraph& A_hat, const GcnParams& params,
                          GcnCache* cache = nullptr);

/// Attributed branch: encoder and mirrored decoder.
AttributeOutput forward_attribute(const Matrix& X, const AutoencoderParams& params,
                                  AttributeCache* cache = nullptr);

/// Back-propagates gradients of the latent code and the reconstruction.
void backward_attribute(const AutoencoderParams& params, const AttributeCache& cache,
                        const Matrix& d_latent, const Matrix& d_reconstruction,
                        AutoencoderParams& grads);

struct ClusterIndicators {
  Matrix local;   // F^v1, propagated over the normalized local graph
  Matrix global;  // F^v2, propagated over the normalized diffused graph
};

/// Both siamese branches take the structural embedding as input.
ClusterIndicators forward_cluster_indicators(const Matrix& H1, const NormalizedGraph& local_hat,
                                             const NormalizedGraph& global_hat, const GcnParams& gcn2,
                                             const GcnParams& gcn3, GcnCache* local_cache = nullptr,
                                             GcnCache* global_cache = nullptr);

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
ModelParams init_params(const RunConfig& cfg, Index m, int c, std::uint64_t seed);

// Tensor checkpoint container: "DCGP", u32 count, then per tensor
// u32 name length, name bytes, u32 rows, u32 cols, f64 row-major data.
using NamedTensors = std::vector<std::pair<std::string, Matrix>>;

void save_tensors(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, const Matrix*>>& tensors);
NamedTensors load_tensors(const std::filesystem::path& path);

void save_params(const ModelParams& params, const std::filesystem::path& path);
/// `shape_like` supplies the architecture; names and shapes must match.
ModelParams load_params(const std::filesystem::path& path, const ModelParams& shape_like);

}  // namespace dcgl

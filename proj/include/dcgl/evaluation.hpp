#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dcgl/adaptive_graph.hpp"
#include "dcgl/errors.hpp"

namespace dcgl {

struct MetricReport {
  double acc = 0.0;
  double nmi = 0.0;
  Eigen::MatrixXi confusion;  // rows: predicted cluster, cols: true class
  std::vector<int> matching;  // predicted cluster -> matched class
};

/// Maximum-weight perfect matching on a square matrix (Hungarian algorithm).
/// Returns assignment[row] = column.
std::vector<int> hungarian_max(const Matrix& weights);

/// Fraction of samples whose cluster maps to their class under the best
/// one-to-one cluster-to-class matching.
double accuracy(std::span<const int> y_true, std::span<const int> y_pred);

/// I(U;V) / sqrt(H(U) H(V)) with natural logs. Two identical single-cluster
/// labelings score 1; a single-cluster labeling against anything else 0.
double nmi(std::span<const int> y_true, std::span<const int> y_pred);

MetricReport evaluate(std::span<const int> y_true, std::span<const int> y_pred);

/// Pairwise cosine similarity of the rows of H in label order, with every
/// value below the given percentile of all entries set to zero.
Matrix thresholded_similarity(const Matrix& H, std::span<const int> labels_order, double percentile = 90.0);

/// Indices sorted by label (stable).
std::vector<Index> order_by_label(std::span<const int> labels);

/// Intra-block nonzero fraction minus inter-block nonzero fraction, blocks
/// given by the labels; the diagonal is excluded.
double block_quality(const Matrix& S, std::span<const int> labels);

/// Writes the thresholded similarity as an 8-bit grayscale PNG.
void plot_similarity_heatmap(const Matrix& H, std::span<const int> labels_order, const std::filesystem::path& path,
                             double percentile = 90.0);

/// Writes the binarized adjacency (nonzero -> 255) in label order and a
/// sidecar "<stem>.json" holding the block quality score, which is returned.
double plot_adjacency(const AffinityGraph& S, std::span<const int> labels_order, const std::filesystem::path& path);

// 8-bit grayscale PNG helpers.
struct GrayImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

void write_png(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_png(const std::filesystem::path& path);

}  // namespace dcgl

#include "dcgl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace dcgl {
namespace {

constexpr Index kMaxImageSide = 1024;

void check_lengths(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::data, "label length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.empty()) fail(ErrorKind::data, "empty label vectors");
  for (int v : a)
    if (v < 0) fail(ErrorKind::data, "negative label");
  for (int v : b)
    if (v < 0) fail(ErrorKind::data, "negative label");
}

int label_span(std::span<const int> labels) { return *std::max_element(labels.begin(), labels.end()) + 1; }

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0) h -= (c / n) * std::log(c / n);
  return h;
}

enum class Reduce { mean, any };

// Renders an n x n matrix with entries in [0, 1]; large matrices are pooled
// down to kMaxImageSide pixels per side.
GrayImage render(const Matrix& values, Reduce reduce) {
  const Index n = values.rows();
  const Index side = std::min(n, kMaxImageSide);
  GrayImage image;
  image.width = static_cast<std::uint32_t>(side);
  image.height = static_cast<std::uint32_t>(side);
  image.pixels.resize(static_cast<size_t>(side * side));
  for (Index y = 0; y < side; ++y) {
    const Index r0 = y * n / side, r1 = (y + 1) * n / side;
    for (Index x = 0; x < side; ++x) {
      const Index c0 = x * n / side, c1 = (x + 1) * n / side;
      auto block = values.block(r0, c0, r1 - r0, c1 - c0);
      double v = reduce == Reduce::any ? (block.cwiseAbs().maxCoeff() > 0.0 ? 1.0 : 0.0) : block.mean();
      v = std::clamp(v, 0.0, 1.0);
      image.pixels[static_cast<size_t>(y * side + x)] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
  }
  return image;
}

Matrix reorder(const Matrix& S, const std::vector<Index>& order) {
  const Index n = static_cast<Index>(order.size());
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = S(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  return out;
}

}  // namespace

std::vector<int> hungarian_max(const Matrix& weights) {
  const Index n = weights.rows();
  if (weights.cols() != n) fail(ErrorKind::usage, "hungarian_max: matrix must be square");
  // Shortest augmenting path with potentials on the cost -weights, 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), way_min(n + 1);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(way_min.begin(), way_min.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < way_min[j]) {
          way_min[j] = cur;
          way[j] = j0;
        }
        if (way_min[j] < delta) {
          delta = way_min[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          way_min[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(static_cast<size_t>(n), -1);
  for (Index j = 1; j <= n; ++j) assignment[static_cast<size_t>(match[j] - 1)] = static_cast<int>(j - 1);
  return assignment;
}

MetricReport evaluate(std::span<const int> y_true, std::span<const int> y_pred) {
  check_lengths(y_true, y_pred);
  const int size = std::max(label_span(y_true), label_span(y_pred));
  MetricReport report;
  report.confusion = Eigen::MatrixXi::Zero(size, size);
  for (size_t i = 0; i < y_true.size(); ++i) ++report.confusion(y_pred[i], y_true[i]);
  report.matching = hungarian_max(report.confusion.cast<double>());
  long matched = 0;
  for (int p = 0; p < size; ++p) matched += report.confusion(p, report.matching[static_cast<size_t>(p)]);
  report.acc = static_cast<double>(matched) / static_cast<double>(y_true.size());
  report.nmi = nmi(y_true, y_pred);
  return report;
}

double accuracy(std::span<const int> y_true, std::span<const int> y_pred) { return evaluate(y_true, y_pred).acc; }

double nmi(std::span<const int> y_true, std::span<const int> y_pred) {
  check_lengths(y_true, y_pred);
  const int rows = label_span(y_true);
  const int cols = label_span(y_pred);
  const double n = static_cast<double>(y_true.size());
  Matrix joint = Matrix::Zero(rows, cols);
  for (size_t i = 0; i < y_true.size(); ++i) joint(y_true[i], y_pred[i]) += 1.0;
  std::vector<double> row_counts(static_cast<size_t>(rows)), col_counts(static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r) row_counts[static_cast<size_t>(r)] = joint.row(r).sum();
  for (int c = 0; c < cols; ++c) col_counts[static_cast<size_t>(c)] = joint.col(c).sum();
  const double h_true = entropy(row_counts, n);
  const double h_pred = entropy(col_counts, n);
  if (h_true == 0.0 && h_pred == 0.0) return 1.0;
  if (h_true == 0.0 || h_pred == 0.0) return 0.0;
  double mi = 0.0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double nij = joint(r, c);
      if (nij > 0) {
        mi += (nij / n) * std::log(nij * n / (row_counts[static_cast<size_t>(r)] * col_counts[static_cast<size_t>(c)]));
      }
    }
  return std::clamp(mi / std::sqrt(h_true * h_pred), 0.0, 1.0);
}

std::vector<Index> order_by_label(std::span<const int> labels) {
  std::vector<Index> order(labels.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&labels](Index a, Index b) {
    return labels[static_cast<size_t>(a)] < labels[static_cast<size_t>(b)];
  });
  return order;
}

Matrix thresholded_similarity(const Matrix& H, std::span<const int> labels_order, double percentile) {
  if (static_cast<Index>(labels_order.size()) != H.rows()) fail(ErrorKind::usage, "heatmap: label count mismatch");
  auto order = order_by_label(labels_order);
  Matrix unit(H.rows(), H.cols());
  for (Index i = 0; i < H.rows(); ++i) {
    Eigen::RowVectorXd row = H.row(order[static_cast<size_t>(i)]);
    double norm = row.norm();
    unit.row(i) = norm > 0.0 ? Eigen::RowVectorXd(row / norm) : row;
  }
  Matrix sim = (unit * unit.transpose()).cwiseMax(-1.0).cwiseMin(1.0);

  std::vector<double> values(sim.data(), sim.data() + sim.size());
  const size_t count = values.size();
  size_t rank = static_cast<size_t>(std::ceil(percentile / 100.0 * static_cast<double>(count)));
  rank = std::clamp<size_t>(rank, 1, count) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank), values.end());
  const double threshold = values[rank];
  return (sim.array() < threshold).select(0.0, sim);
}

double block_quality(const Matrix& S, std::span<const int> labels) {
  const Index n = S.rows();
  if (static_cast<Index>(labels.size()) != n) fail(ErrorKind::usage, "block_quality: label count mismatch");
  double intra_nz = 0, intra = 0, inter_nz = 0, inter = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool nz = S(i, j) != 0.0;
      if (labels[static_cast<size_t>(i)] == labels[static_cast<size_t>(j)]) {
        intra += 1;
        intra_nz += nz;
      } else {
        inter += 1;
        inter_nz += nz;
      }
    }
  return (intra > 0 ? intra_nz / intra : 0.0) - (inter > 0 ? inter_nz / inter : 0.0);
}

void plot_similarity_heatmap(const Matrix& H, std::span<const int> labels_order, const std::filesystem::path& path,
                             double percentile) {
  write_png(path, render(thresholded_similarity(H, labels_order, percentile), Reduce::mean));
}

double plot_adjacency(const AffinityGraph& S, std::span<const int> labels_order, const std::filesystem::path& path) {
  if (static_cast<Index>(labels_order.size()) != S.size()) fail(ErrorKind::usage, "adjacency plot: label count mismatch");
  Matrix binary = (reorder(S.weights, order_by_label(labels_order)).array() != 0.0).cast<double>();
  write_png(path, render(binary, Reduce::any));
  const double quality = block_quality(S.weights, labels_order);

  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  std::ofstream out(sidecar);
  if (!out) fail(ErrorKind::io, "cannot write " + sidecar.string());
  out << nlohmann::json{{"block_quality", quality}, {"role", to_string(S.role)}}.dump(2) << '\n';
  return quality;
}

}  // namespace dcgl

#include "dcgl/adaptive_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <vector>

#include "dcgl/data_io.hpp"

namespace dcgl {

const char* to_string(GraphRole role) {
  switch (role) {
    case GraphRole::initial_A: return "initial_A";
    case GraphRole::lpg_SL: return "lpg_SL";
    case GraphRole::pre_diffusion_G: return "pre_diffusion_G";
    case GraphRole::gdg_SG: return "gdg_SG";
  }
  return "unknown";
}

Matrix pairwise_sq_dists(const Matrix& X) {
  if (!X.allFinite()) fail(ErrorKind::numeric, "pairwise_sq_dists: non-finite input");
  const Index n = X.rows();
  Vector sq = X.rowwise().squaredNorm();
  Matrix D = -2.0 * (X * X.transpose());
  D.colwise() += sq;
  D.rowwise() += sq.transpose();
  for (Index i = 0; i < n; ++i) {
    D(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      double v = 0.5 * (D(i, j) + D(j, i));
      // Below the Gram-expansion round-off floor the rows coincide.
      if (v <= 8.0 * std::numeric_limits<double>::epsilon() * (sq(i) + sq(j))) v = 0.0;
      D(i, j) = v;
      D(j, i) = v;
    }
  }
  return D;
}

Vector solve_row_weights(const Vector& d, Index self_index, int k) {
  const Index n = d.size();
  if (k < 1 || k > n - 1) {
    fail(ErrorKind::usage, "neighbor count k = " + std::to_string(k) + " outside [1, " +
                               std::to_string(n - 1) + "]");
  }
  std::vector<Index> order;
  order.reserve(static_cast<size_t>(n - 1));
  for (Index j = 0; j < n; ++j)
    if (j != self_index) order.push_back(j);
  // Only the k+1 smallest matter; ties break by index.
  const size_t keep = std::min(order.size(), static_cast<size_t>(k) + 1);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&d](Index a, Index b) { return d(a) < d(b) || (d(a) == d(b) && a < b); });

  Vector a = Vector::Zero(n);
  double head_sum = 0.0;
  for (int u = 0; u < k; ++u) head_sum += d(order[static_cast<size_t>(u)]);

  bool degenerate = static_cast<Index>(order.size()) <= k;
  double w_next = 0.0;
  double denom = 0.0;
  if (!degenerate) {
    w_next = d(order[static_cast<size_t>(k)]);
    denom = k * w_next - head_sum;
    double scale = std::max(std::abs(k * w_next), std::numeric_limits<double>::min());
    degenerate = !(denom > 1e-12 * scale);
  }
  if (degenerate) {
    for (int u = 0; u < k; ++u) a(order[static_cast<size_t>(u)]) = 1.0 / k;
    return a;
  }
  for (int u = 0; u < k; ++u) {
    Index j = order[static_cast<size_t>(u)];
    a(j) = std::max(w_next - d(j), 0.0) / denom;
  }
  return a;
}

Matrix build_row_weights(const Matrix& Y, int k) {
  const Index n = Y.rows();
  if (k < 1 || k > n - 1) {
    fail(ErrorKind::usage, "neighbor count k = " + std::to_string(k) + " outside [1, " +
                               std::to_string(n - 1) + "]");
  }
  Matrix D = pairwise_sq_dists(Y);
  Matrix A(n, n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    Vector d = D.row(i).transpose();
    A.row(i) = solve_row_weights(d, i, k).transpose();
  }
  return A;
}

AffinityGraph build_graph(const Matrix& Y, int k, GraphRole role) {
  Matrix A = build_row_weights(Y, k);
  AffinityGraph g;
  g.weights = 0.5 * (A + A.transpose());
  g.k = k;
  g.role = role;
  return g;
}

Matrix normalize_adjacency(const Matrix& W) {
  const Index n = W.rows();
  Matrix tilde = W;
  tilde.diagonal().array() += 1.0;
  Vector inv_sqrt = tilde.rowwise().sum().array().rsqrt();
  Matrix out = inv_sqrt.asDiagonal() * tilde * inv_sqrt.asDiagonal();
  // Exact symmetry regardless of summation order.
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      double v = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

NormalizedGraph normalize_graph(const AffinityGraph& graph) {
  if ((graph.weights.array() < 0.0).any()) fail(ErrorKind::numeric, "normalize_graph: negative edge weight");
  return NormalizedGraph{normalize_adjacency(graph.weights), graph.role};
}

int neighbor_schedule(int epoch, const RunConfig& cfg, Index n, int c) {
  const long cap = static_cast<long>(n) / c;
  const long k = static_cast<long>(cfg.k_init) * (1 + (epoch - 1) / cfg.t);
  return static_cast<int>(std::min(k, cap));
}

void save_graph(const AffinityGraph& graph, const std::filesystem::path& path) {
  write_container(path, graph.weights, nullptr, static_cast<std::uint8_t>(graph.role));
}

AffinityGraph load_graph(const std::filesystem::path& path) {
  Container c = read_container(path);
  if (c.values.rows() != c.values.cols()) fail(ErrorKind::data, "graph container is not square: " + path.string());
  if (c.role < 1 || c.role > 4) fail(ErrorKind::data, "missing graph role tag in " + path.string());
  AffinityGraph g;
  g.weights = std::move(c.values);
  g.role = static_cast<GraphRole>(c.role);
  return g;
}

void export_edge_list(const AffinityGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << "i,j,w\n";
  char buf[64];
  for (Index i = 0; i < graph.size(); ++i)
    for (Index j = i; j < graph.size(); ++j) {
      double w = graph.weights(i, j);
      if (w == 0.0) continue;
      auto res = std::to_chars(buf, buf + sizeof buf, w);
      out << i << ',' << j << ',';
      out.write(buf, res.ptr - buf);
      out << '\n';
    }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

}  // namespace dcgl

#include "dcgl/clustering.hpp"

#include <iostream>
#include <limits>
#include <random>

namespace dcgl {
namespace {

double sq_dist(const Matrix& A, Index i, const Matrix& B, Index j) {
  return (A.row(i) - B.row(j)).squaredNorm();
}

Matrix plus_plus_seeds(const Matrix& H, int c, std::mt19937_64& rng) {
  const Index n = H.rows();
  Matrix centroids(c, H.cols());
  std::vector<bool> chosen(static_cast<size_t>(n), false);
  Index first = std::uniform_int_distribution<Index>(0, n - 1)(rng);
  centroids.row(0) = H.row(first);
  chosen[static_cast<size_t>(first)] = true;

  Vector nearest(n);
  for (Index i = 0; i < n; ++i) nearest(i) = sq_dist(H, i, centroids, 0);

  for (int j = 1; j < c; ++j) {
    double total = nearest.sum();
    Index pick = -1;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (nearest(i) <= 0.0) continue;
        acc += nearest(i);
        pick = i;
        if (acc > r) break;
      }
    } else {
      // All remaining points coincide with a seed; pick any unchosen one.
      std::vector<Index> free;
      for (Index i = 0; i < n; ++i)
        if (!chosen[static_cast<size_t>(i)]) free.push_back(i);
      pick = free[std::uniform_int_distribution<size_t>(0, free.size() - 1)(rng)];
    }
    chosen[static_cast<size_t>(pick)] = true;
    centroids.row(j) = H.row(pick);
    for (Index i = 0; i < n; ++i) nearest(i) = std::min(nearest(i), sq_dist(H, i, centroids, j));
  }
  return centroids;
}

ClusterAssignment lloyd(const Matrix& H, int c, std::mt19937_64& rng, int max_iter) {
  const Index n = H.rows();
  ClusterAssignment result;
  result.centroids = plus_plus_seeds(H, c, rng);
  result.labels.assign(static_cast<size_t>(n), -1);

  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(H, i, result.centroids, 0);
      for (int j = 1; j < c; ++j) {
        double d = sq_dist(H, i, result.centroids, j);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (result.labels[static_cast<size_t>(i)] != best) {
        result.labels[static_cast<size_t>(i)] = best;
        changed = true;
      }
    }

    std::vector<int> counts(static_cast<size_t>(c), 0);
    for (int label : result.labels) ++counts[static_cast<size_t>(label)];
    for (int j = 0; j < c; ++j) {
      if (counts[static_cast<size_t>(j)] > 0) continue;
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        int owner = result.labels[static_cast<size_t>(i)];
        if (counts[static_cast<size_t>(owner)] < 2) continue;
        double d = sq_dist(H, i, result.centroids, owner);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[static_cast<size_t>(result.labels[static_cast<size_t>(far)])];
      result.labels[static_cast<size_t>(far)] = j;
      ++counts[static_cast<size_t>(j)];
      changed = true;
    }

    result.centroids.setZero();
    for (Index i = 0; i < n; ++i) result.centroids.row(result.labels[static_cast<size_t>(i)]) += H.row(i);
    for (int j = 0; j < c; ++j) result.centroids.row(j) /= counts[static_cast<size_t>(j)];

    result.inertia = inertia(H, result.labels, result.centroids);
    result.inertia_history.push_back(result.inertia);
    result.iterations = it + 1;
    if (!changed) break;
  }
  return result;
}

}  // namespace

double inertia(const Matrix& H, const std::vector<int>& labels, const Matrix& centroids) {
  double total = 0.0;
  for (Index i = 0; i < H.rows(); ++i) total += sq_dist(H, i, centroids, labels[static_cast<size_t>(i)]);
  return total;
}

ClusterAssignment kmeans(const Matrix& H, int c, std::uint64_t seed, int max_iter, int n_init) {
  if (c < 1) fail(ErrorKind::usage, "kmeans: need at least one cluster");
  if (H.rows() < c) {
    fail(ErrorKind::data, "kmeans: n = " + std::to_string(H.rows()) + " < c = " + std::to_string(c));
  }
  if (!H.allFinite()) fail(ErrorKind::numeric, "kmeans: non-finite input");
  std::mt19937_64 rng(seed);
  ClusterAssignment best;
  for (int run = 0; run < std::max(1, n_init); ++run) {
    ClusterAssignment candidate = lloyd(H, c, rng, std::max(1, max_iter));
    if (run == 0 || candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

Matrix cluster_embeddings(const Matrix& F, const Matrix& H) {
  if (F.rows() != H.rows()) fail(ErrorKind::usage, "cluster_embeddings: shape mismatch");
  return F.transpose() * H;
}

SpectralEmbedding spectral_embedding(const Matrix& S, int c) {
  const Index n = S.rows();
  if (S.cols() != n) fail(ErrorKind::usage, "spectral_embedding: graph must be square");
  if (c < 1 || c > n) fail(ErrorKind::usage, "spectral_embedding: c out of range");
  SpectralEmbedding out;
  Vector degree = S.rowwise().sum();
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    if (degree(i) > 0.0) {
      inv_sqrt(i) = 1.0 / std::sqrt(degree(i));
    } else {
      inv_sqrt(i) = 0.0;
      out.isolated.push_back(i);
    }
  }
  Matrix laplacian = -(inv_sqrt.asDiagonal() * S * inv_sqrt.asDiagonal());
  laplacian.diagonal().array() += 1.0;
  laplacian = 0.5 * (laplacian + laplacian.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
  if (solver.info() != Eigen::Success) fail(ErrorKind::numeric, "spectral_embedding: eigensolver failed");
  out.eigenvalues = solver.eigenvalues().head(c);
  out.vectors = solver.eigenvectors().leftCols(c);
  for (Index i = 0; i < n; ++i) {
    double norm = out.vectors.row(i).norm();
    if (norm > 0.0) out.vectors.row(i) /= norm;
  }
  for (Index i : out.isolated) out.vectors.row(i).setZero();
  return out;
}

std::vector<int> ncut_spectral(const AffinityGraph& S, int c, std::uint64_t seed) {
  const Index n = S.size();
  SpectralEmbedding emb = spectral_embedding(S.weights, c);

  std::vector<bool> is_isolated(static_cast<size_t>(n), false);
  for (Index i : emb.isolated) is_isolated[static_cast<size_t>(i)] = true;
  std::vector<Index> connected;
  for (Index i = 0; i < n; ++i)
    if (!is_isolated[static_cast<size_t>(i)]) connected.push_back(i);
  if (static_cast<Index>(connected.size()) < c) {
    fail(ErrorKind::numeric, "ncut_spectral: fewer connected nodes than clusters");
  }

  Matrix rows(static_cast<Index>(connected.size()), c);
  for (size_t r = 0; r < connected.size(); ++r) rows.row(static_cast<Index>(r)) = emb.vectors.row(connected[r]);
  ClusterAssignment assignment = kmeans(rows, c, seed, 300, 10);

  std::vector<int> labels(static_cast<size_t>(n), -1);
  for (size_t r = 0; r < connected.size(); ++r) labels[static_cast<size_t>(connected[r])] = assignment.labels[r];
  if (!emb.isolated.empty()) {
    std::cerr << "warning: " << emb.isolated.size()
              << " isolated node(s) labeled from the nearest-index connected node\n";
    for (Index i : emb.isolated) {
      for (Index offset = 1; offset < n; ++offset) {
        if (i - offset >= 0 && !is_isolated[static_cast<size_t>(i - offset)]) {
          labels[static_cast<size_t>(i)] = labels[static_cast<size_t>(i - offset)];
          break;
        }
        if (i + offset < n && !is_isolated[static_cast<size_t>(i + offset)]) {
          labels[static_cast<size_t>(i)] = labels[static_cast<size_t>(i + offset)];
          break;
        }
      }
    }
  }
  return labels;
}

}  // namespace dcgl

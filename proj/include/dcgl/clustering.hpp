#pragma once

#include <cstdint>
#include <vector>

#include "dcgl/adaptive_graph.hpp"
#include "dcgl/errors.hpp"

namespace dcgl {

struct ClusterAssignment {
  std::vector<int> labels;
  Matrix centroids;  // c x l
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after each Lloyd assignment step
  int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or max_iter is reached. An emptied cluster is re-seeded with the
/// sample farthest from its current centroid. With n_init > 1 the run with
/// the lowest inertia wins (first one on ties).
ClusterAssignment kmeans(const Matrix& H, int c, std::uint64_t seed, int max_iter = 300, int n_init = 1);

/// Sum of squared distances from each row to its assigned centroid.
double inertia(const Matrix& H, const std::vector<int>& labels, const Matrix& centroids);

/// Z = F^T H.
Matrix cluster_embeddings(const Matrix& F, const Matrix& H);

struct SpectralEmbedding {
  Vector eigenvalues;  // c smallest of the symmetric normalized Laplacian, ascending
  Matrix vectors;      // n x c, rows normalized to unit length (zero rows kept)
  std::vector<Index> isolated;
};

/// Eigenvectors of L_sym = I - D^-1/2 S D^-1/2 for the c smallest eigenvalues.
SpectralEmbedding spectral_embedding(const Matrix& S, int c);

/// Normalized-cut readout: spectral embedding, then seeded k-means.
/// Isolated nodes take the label of the nearest-index node with positive
/// degree and a warning is printed to stderr.
std::vector<int> ncut_spectral(const AffinityGraph& S, int c, std::uint64_t seed);

}  // namespace dcgl

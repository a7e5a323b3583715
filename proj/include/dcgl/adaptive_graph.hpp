#pragma once

#include <cstdint>
#include <filesystem>

#include "dcgl/config.hpp"
#include "dcgl/errors.hpp"

namespace dcgl {

enum class GraphRole : std::uint8_t {
  initial_A = 1,        // built from the raw samples
  lpg_SL = 2,           // local propinquity graph, rebuilt every epoch
  pre_diffusion_G = 3,  // wide-neighborhood graph fed to the diffusion
  gdg_SG = 4,           // diffused global graph
};

const char* to_string(GraphRole role);

/// Dense symmetric nonnegative n x n edge weights.
struct AffinityGraph {
  Matrix weights;
  int k = 0;
  GraphRole role = GraphRole::initial_A;

  Index size() const { return weights.rows(); }
};

/// D^-1/2 (W + I) D^-1/2 of some AffinityGraph.
struct NormalizedGraph {
  Matrix weights;
  GraphRole source = GraphRole::initial_A;
};

/// Squared Euclidean distances between rows; negative round-off clamped to 0.
Matrix pairwise_sq_dists(const Matrix& X);

/// Closed-form adaptive-neighbor weights for one sample.
///
/// `d` holds squared distances from the sample to every other one, with
/// d[self_index] ignored. Candidates are sorted by (distance, index) into
/// w_(1) <= w_(2) <= ...; the k nearest receive
///   (w_(k+1) - w_(j))_+ / (k w_(k+1) - sum_{u<=k} w_(u)).
/// When the denominator vanishes (w_(1) = ... = w_(k+1)) or k = n-1 leaves no
/// (k+1)-th candidate, the k nearest get 1/k each. The result sums to 1.
Vector solve_row_weights(const Vector& d, Index self_index, int k);

/// Per-row solutions stacked into the non-symmetric matrix A (row i = a_i).
Matrix build_row_weights(const Matrix& Y, int k);

/// (A + A^T) / 2 of build_row_weights.
AffinityGraph build_graph(const Matrix& Y, int k, GraphRole role = GraphRole::initial_A);

NormalizedGraph normalize_graph(const AffinityGraph& graph);
Matrix normalize_adjacency(const Matrix& W);

/// k for a given 1-based epoch: k_init (1 + floor((epoch-1)/t)), capped at
/// floor(n/c).
int neighbor_schedule(int epoch, const RunConfig& cfg, Index n, int c);

/// Binary export in the sample container, role tag in the header.
void save_graph(const AffinityGraph& graph, const std::filesystem::path& path);
AffinityGraph load_graph(const std::filesystem::path& path);

/// "i,j,w" for every nonzero entry, upper triangle included once per pair.
void export_edge_list(const AffinityGraph& graph, const std::filesystem::path& path);

}  // namespace dcgl

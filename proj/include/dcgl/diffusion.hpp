#pragma once

#include "dcgl/adaptive_graph.hpp"

namespace dcgl {

/// Elementwise mean of the structural and attributed embeddings.
Matrix merge_representations(const Matrix& H1, const Matrix& H2);

/// Adaptive graph on the merged embedding with the fixed neighbor count
/// floor(n/c).
AffinityGraph build_global_graph(const Matrix& H, Index n, int c);

/// Personalized PageRank diffusion in closed form:
///   S = lambda [I - (1 - lambda) D^-1/2 G D^-1/2]^-1
/// with D the degree matrix of G itself (no self-loops added). The result is
/// symmetrized to absorb solver round-off.
AffinityGraph ppr_diffusion(const AffinityGraph& G, double lambda);

}  // namespace dcgl

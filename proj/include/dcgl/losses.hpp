#pragma once

#include <cstddef>

#include "dcgl/clustering.hpp"
#include "dcgl/config.hpp"
#include "dcgl/errors.hpp"

namespace dcgl {

/// k-means result on the attributed embedding; rows of `centroids` other
/// than a sample's own cluster are its negatives.
using CentroidSet = ClusterAssignment;

struct LossBundle {
  double l_ae = 0.0;
  double l_fl = 0.0;
  double l_gl = 0.0;
  double l_cl = 0.0;
  double total = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double tau = 0.0;
};

/// Norm guard used by the training path so a transient zero row never aborts.
inline constexpr double kCosineEps = 1e-12;

/// (1/2n) sum_i ||x_i - xhat_i||^2.
double loss_ae(const Matrix& X, const Matrix& X_hat, Matrix* d_xhat = nullptr);

/// Strict cosine similarity; a zero vector is an error.
double cosine_sim(const Vector& u, const Vector& v);

/// Guarded cosine similarity between every row of A and every row of B:
/// A_i . B_j / ((|A_i| + eps)(|B_j| + eps)).
Matrix cosine_matrix(const Matrix& A, const Matrix& B, double eps = kCosineEps);

/// Back-propagates dL/dK for K = cosine_matrix(A, B) into dA and dB
/// (accumulating).
void cosine_matrix_backward(const Matrix& A, const Matrix& B, const Matrix& d_k, Matrix& d_a, Matrix& d_b,
                            double eps = kCosineEps);

/// Guarded cosine similarity of matching rows.
Vector rowwise_cosine(const Matrix& A, const Matrix& B, double eps = kCosineEps);
void rowwise_cosine_backward(const Matrix& A, const Matrix& B, const Vector& d_k, Matrix& d_a, Matrix& d_b,
                             double eps = kCosineEps);

struct FeatureContrastOptions {
  double tau = 0.5;
  /// false: every non-corresponding row of H2 is a negative (n-1 per anchor).
  bool centroid_negatives = true;
};

struct FeatureContrastResult {
  double value = 0.0;
  std::size_t negatives_per_anchor = 0;
};

/// InfoNCE over anchors H1_i with positive H2_i. With centroid negatives the
/// negative set is the c-1 centroids of the other clusters, which are
/// constants for the gradient.
FeatureContrastResult loss_feature_contrastive(const Matrix& H1, const Matrix& H2, const CentroidSet* centroids,
                                               const FeatureContrastOptions& opts, Matrix* d_h1 = nullptr,
                                               Matrix* d_h2 = nullptr);

/// Tr(H^T L_S H) + (gamma/2) Tr(S S^T) with L_S = D_S - S. S is a constant;
/// the gradient 2 L_S H flows only into H.
double loss_graph(const Matrix& H1, const Matrix& S, double gamma, Matrix* d_h1 = nullptr);

/// (1/2c) sum_i [Omega(Z1_i, Z2_i) + Omega(Z2_i, Z1_i)] where
///   Omega(A_i, B_i) = -log(e^{th(A_i,B_i)/tau} / sum_j e^{th(A_i,B_j)/tau})
///                     + sum_{j != i} e^{th(A_i,A_j)/tau}.
/// With `inside_log` the intra-view sum joins the softmax denominator instead.
double loss_cluster_contrastive(const Matrix& Z1, const Matrix& Z2, double tau, bool inside_log = false,
                                Matrix* d_z1 = nullptr, Matrix* d_z2 = nullptr);

/// total = l_ae + l_fl + alpha l_gl + beta l_cl, with l_fl / l_cl forced to
/// zero by the disable_FL / disable_CL ablations.
LossBundle total_loss(double l_ae, double l_fl, double l_gl, double l_cl, const RunConfig& cfg);

}  // namespace dcgl

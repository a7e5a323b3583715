#include "dcgl/losses.hpp"

#include <cmath>
#include <vector>

namespace dcgl {
namespace {

// One contrastive row: -logits[0] + logsumexp(logits). Writes softmax(logits)
// into probs.
double info_nce_row(const std::vector<double>& logits, std::vector<double>& probs) {
  double peak = logits[0];
  for (double v : logits) peak = std::max(peak, v);
  double z = 0.0;
  probs.resize(logits.size());
  for (size_t j = 0; j < logits.size(); ++j) {
    probs[j] = std::exp(logits[j] - peak);
    z += probs[j];
  }
  for (double& p : probs) p /= z;
  return -logits[0] + peak + std::log(z);
}

// One Omega term summed over anchors, scaled by `weight`. Accumulates
// gradients into d_a / d_b when given.
double omega_sum(const Matrix& A, const Matrix& B, double tau, bool inside_log, double weight, Matrix* d_a,
                 Matrix* d_b) {
  const Index rows = A.rows();
  Matrix cross = cosine_matrix(A, B) / tau;
  Matrix self = cosine_matrix(A, A) / tau;
  const bool grad = d_a && d_b;
  Matrix d_cross, d_self;
  if (grad) {
    d_cross = Matrix::Zero(rows, rows);
    d_self = Matrix::Zero(rows, rows);
  }

  double total = 0.0;
  std::vector<double> logits, probs;
  for (Index i = 0; i < rows; ++i) {
    logits.clear();
    logits.push_back(cross(i, i));
    for (Index j = 0; j < rows; ++j)
      if (j != i) logits.push_back(cross(i, j));
    if (inside_log) {
      for (Index j = 0; j < rows; ++j)
        if (j != i) logits.push_back(self(i, j));
    }
    double value = info_nce_row(logits, probs);

    if (!inside_log) {
      for (Index j = 0; j < rows; ++j) {
        if (j == i) continue;
        double e = std::exp(self(i, j));
        value += e;
        if (grad) d_self(i, j) = weight * e / tau;
      }
    }
    total += value;

    if (grad) {
      size_t p = 0;
      d_cross(i, i) = weight * (probs[p++] - 1.0) / tau;
      for (Index j = 0; j < rows; ++j)
        if (j != i) d_cross(i, j) = weight * probs[p++] / tau;
      if (inside_log) {
        for (Index j = 0; j < rows; ++j)
          if (j != i) d_self(i, j) = weight * probs[p++] / tau;
      }
    }
  }

  if (grad) {
    cosine_matrix_backward(A, B, d_cross, *d_a, *d_b);
    Matrix d_self_left = Matrix::Zero(A.rows(), A.cols());
    Matrix d_self_right = Matrix::Zero(A.rows(), A.cols());
    cosine_matrix_backward(A, A, d_self, d_self_left, d_self_right);
    *d_a += d_self_left + d_self_right;
  }
  return weight * total;
}

}  // namespace

double loss_ae(const Matrix& X, const Matrix& X_hat, Matrix* d_xhat) {
  if (X.rows() != X_hat.rows() || X.cols() != X_hat.cols()) fail(ErrorKind::usage, "loss_ae: shape mismatch");
  const double n = static_cast<double>(X.rows());
  Matrix residual = X_hat - X;
  if (d_xhat) *d_xhat = residual / n;
  return residual.squaredNorm() / (2.0 * n);
}

double cosine_sim(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) fail(ErrorKind::usage, "cosine_sim: length mismatch");
  double nu = u.norm();
  double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) fail(ErrorKind::numeric, "cosine_sim: zero vector");
  return u.dot(v) / (nu * nv);
}

Matrix cosine_matrix(const Matrix& A, const Matrix& B, double eps) {
  if (A.cols() != B.cols()) fail(ErrorKind::usage, "cosine_matrix: dimension mismatch");
  Vector a = A.rowwise().norm().array() + eps;
  Vector b = B.rowwise().norm().array() + eps;
  Matrix K = A * B.transpose();
  K.array().colwise() /= a.array();
  K.array().rowwise() /= b.transpose().array();
  return K;
}

void cosine_matrix_backward(const Matrix& A, const Matrix& B, const Matrix& d_k, Matrix& d_a, Matrix& d_b,
                            double eps) {
  Vector norm_a = A.rowwise().norm();
  Vector norm_b = B.rowwise().norm();
  Vector a = norm_a.array() + eps;
  Vector b = norm_b.array() + eps;
  Matrix K = cosine_matrix(A, B, eps);

  // dK_ij/dA_i = B_j / (a_i b_j) - K_ij A_i / (a_i |A_i|)
  Matrix g_over_b = d_k;
  g_over_b.array().rowwise() /= b.transpose().array();
  Vector row_pull = d_k.cwiseProduct(K).rowwise().sum();
  Matrix grad_a = g_over_b * B;
  for (Index i = 0; i < A.rows(); ++i) {
    if (norm_a(i) > 0.0) grad_a.row(i) -= row_pull(i) * A.row(i) / norm_a(i);
    grad_a.row(i) /= a(i);
  }
  d_a += grad_a;

  Matrix g_over_a = d_k;
  g_over_a.array().colwise() /= a.array();
  Vector col_pull = d_k.cwiseProduct(K).colwise().sum().transpose();
  Matrix grad_b = g_over_a.transpose() * A;
  for (Index j = 0; j < B.rows(); ++j) {
    if (norm_b(j) > 0.0) grad_b.row(j) -= col_pull(j) * B.row(j) / norm_b(j);
    grad_b.row(j) /= b(j);
  }
  d_b += grad_b;
}

Vector rowwise_cosine(const Matrix& A, const Matrix& B, double eps) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) fail(ErrorKind::usage, "rowwise_cosine: shape mismatch");
  Vector a = A.rowwise().norm().array() + eps;
  Vector b = B.rowwise().norm().array() + eps;
  return A.cwiseProduct(B).rowwise().sum().cwiseQuotient(a.cwiseProduct(b));
}

void rowwise_cosine_backward(const Matrix& A, const Matrix& B, const Vector& d_k, Matrix& d_a, Matrix& d_b,
                             double eps) {
  Vector norm_a = A.rowwise().norm();
  Vector norm_b = B.rowwise().norm();
  Vector k = rowwise_cosine(A, B, eps);
  for (Index i = 0; i < A.rows(); ++i) {
    const double a = norm_a(i) + eps;
    const double b = norm_b(i) + eps;
    Eigen::RowVectorXd ga = B.row(i) / (a * b);
    Eigen::RowVectorXd gb = A.row(i) / (a * b);
    if (norm_a(i) > 0.0) ga -= k(i) * A.row(i) / (a * norm_a(i));
    if (norm_b(i) > 0.0) gb -= k(i) * B.row(i) / (b * norm_b(i));
    d_a.row(i) += d_k(i) * ga;
    d_b.row(i) += d_k(i) * gb;
  }
}

FeatureContrastResult loss_feature_contrastive(const Matrix& H1, const Matrix& H2, const CentroidSet* centroids,
                                               const FeatureContrastOptions& opts, Matrix* d_h1, Matrix* d_h2) {
  if (H1.rows() != H2.rows() || H1.cols() != H2.cols()) fail(ErrorKind::usage, "loss_feature_contrastive: shape mismatch");
  if (!(opts.tau > 0.0)) fail(ErrorKind::usage, "loss_feature_contrastive: tau must be positive");
  const Index n = H1.rows();
  const double tau = opts.tau;
  const bool grad = d_h1 && d_h2;
  if (grad) {
    *d_h1 = Matrix::Zero(H1.rows(), H1.cols());
    *d_h2 = Matrix::Zero(H2.rows(), H2.cols());
  }
  FeatureContrastResult result;
  std::vector<double> logits, probs;

  if (opts.centroid_negatives) {
    if (!centroids) fail(ErrorKind::usage, "loss_feature_contrastive: centroids required");
    const Index c = centroids->centroids.rows();
    if (c < 2) fail(ErrorKind::usage, "loss_feature_contrastive: need c >= 2 for negatives");
    if (static_cast<Index>(centroids->labels.size()) != n) {
      fail(ErrorKind::usage, "loss_feature_contrastive: assignment does not cover every sample");
    }
    Vector positive = rowwise_cosine(H1, H2) / tau;
    Matrix to_centroids = cosine_matrix(H1, centroids->centroids) / tau;
    Vector d_positive;
    Matrix d_centroids;
    if (grad) {
      d_positive = Vector::Zero(n);
      d_centroids = Matrix::Zero(n, c);
    }
    for (Index i = 0; i < n; ++i) {
      const int own = centroids->labels[static_cast<size_t>(i)];
      logits.assign(1, positive(i));
      for (Index j = 0; j < c; ++j)
        if (j != own) logits.push_back(to_centroids(i, j));
      result.value += info_nce_row(logits, probs);
      if (grad) {
        size_t p = 0;
        d_positive(i) = (probs[p++] - 1.0) / (tau * n);
        for (Index j = 0; j < c; ++j)
          if (j != own) d_centroids(i, j) = probs[p++] / (tau * n);
      }
    }
    result.negatives_per_anchor = static_cast<size_t>(c - 1);
    if (grad) {
      rowwise_cosine_backward(H1, H2, d_positive, *d_h1, *d_h2);
      Matrix unused = Matrix::Zero(c, H1.cols());
      cosine_matrix_backward(H1, centroids->centroids, d_centroids, *d_h1, unused);
    }
  } else {
    if (n < 2) fail(ErrorKind::usage, "loss_feature_contrastive: need at least two samples for negatives");
    Matrix K = cosine_matrix(H1, H2) / tau;
    Matrix d_k;
    if (grad) d_k = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      logits.assign(1, K(i, i));
      for (Index j = 0; j < n; ++j)
        if (j != i) logits.push_back(K(i, j));
      result.value += info_nce_row(logits, probs);
      if (grad) {
        size_t p = 0;
        d_k(i, i) = (probs[p++] - 1.0) / (tau * n);
        for (Index j = 0; j < n; ++j)
          if (j != i) d_k(i, j) = probs[p++] / (tau * n);
      }
    }
    result.negatives_per_anchor = static_cast<size_t>(n - 1);
    if (grad) cosine_matrix_backward(H1, H2, d_k, *d_h1, *d_h2);
  }
  result.value /= static_cast<double>(n);
  return result;
}

double loss_graph(const Matrix& H1, const Matrix& S, double gamma, Matrix* d_h1) {
  if (S.rows() != S.cols() || S.rows() != H1.rows()) fail(ErrorKind::usage, "loss_graph: shape mismatch");
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9) fail(ErrorKind::numeric, "loss_graph: graph is not symmetric");
  Matrix laplacian = -S;
  laplacian.diagonal() += S.rowwise().sum();
  Matrix LH = laplacian * H1;
  if (d_h1) *d_h1 = 2.0 * LH;
  return H1.cwiseProduct(LH).sum() + 0.5 * gamma * S.squaredNorm();
}

double loss_cluster_contrastive(const Matrix& Z1, const Matrix& Z2, double tau, bool inside_log, Matrix* d_z1,
                                Matrix* d_z2) {
  if (Z1.rows() != Z2.rows() || Z1.cols() != Z2.cols()) fail(ErrorKind::usage, "loss_cluster_contrastive: shape mismatch");
  if (!(tau > 0.0)) fail(ErrorKind::usage, "loss_cluster_contrastive: tau must be positive");
  if (Z1.rows() < 2) fail(ErrorKind::usage, "loss_cluster_contrastive: need at least two clusters");
  const double weight = 1.0 / (2.0 * static_cast<double>(Z1.rows()));
  const bool grad = d_z1 && d_z2;
  if (grad) {
    *d_z1 = Matrix::Zero(Z1.rows(), Z1.cols());
    *d_z2 = Matrix::Zero(Z2.rows(), Z2.cols());
  }
  double value = omega_sum(Z1, Z2, tau, inside_log, weight, d_z1, d_z2);
  value += omega_sum(Z2, Z1, tau, inside_log, weight, d_z2, d_z1);
  return value;
}

LossBundle total_loss(double l_ae, double l_fl, double l_gl, double l_cl, const RunConfig& cfg) {
  LossBundle b;
  b.l_ae = l_ae;
  b.l_fl = cfg.disable_FL ? 0.0 : l_fl;
  b.l_gl = l_gl;
  b.l_cl = cfg.disable_CL ? 0.0 : l_cl;
  b.alpha = cfg.alpha;
  b.beta = cfg.beta;
  b.gamma = cfg.gamma;
  b.tau = cfg.tau;
  b.total = b.l_ae + b.l_fl + cfg.alpha * b.l_gl + cfg.beta * b.l_cl;
  return b;
}

}  // namespace dcgl

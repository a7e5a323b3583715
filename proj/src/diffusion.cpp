#include "dcgl/diffusion.hpp"

#include <cmath>
#include <string>

namespace dcgl {

Matrix merge_representations(const Matrix& H1, const Matrix& H2) {
  if (H1.rows() != H2.rows() || H1.cols() != H2.cols()) {
    fail(ErrorKind::usage, "merge_representations: shape mismatch");
  }
  return 0.5 * (H1 + H2);
}

AffinityGraph build_global_graph(const Matrix& H, Index n, int c) {
  const int k = static_cast<int>(n / c);
  return build_graph(H, k, GraphRole::pre_diffusion_G);
}

AffinityGraph ppr_diffusion(const AffinityGraph& G, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) fail(ErrorKind::usage, "ppr_diffusion: lambda must be in (0, 1]");
  const Index n = G.size();
  Vector degree = G.weights.rowwise().sum();
  for (Index i = 0; i < n; ++i) {
    if (!(degree(i) > 0.0)) fail(ErrorKind::numeric, "ppr_diffusion: isolated node " + std::to_string(i));
  }

  AffinityGraph out;
  out.k = G.k;
  out.role = GraphRole::gdg_SG;
  if (lambda == 1.0) {
    out.weights = Matrix::Identity(n, n);
    return out;
  }

  Vector inv_sqrt = degree.array().rsqrt();
  Matrix system = -(1.0 - lambda) * (inv_sqrt.asDiagonal() * G.weights * inv_sqrt.asDiagonal());
  system.diagonal().array() += 1.0;
  system = 0.5 * (system + system.transpose()).eval();

  // Eigenvalues of the system lie in [lambda, 2 - lambda], so it is SPD.
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) fail(ErrorKind::numeric, "ppr_diffusion: singular diffusion system");
  Matrix S = llt.solve(Matrix::Identity(n, n));
  S *= lambda;
  out.weights = 0.5 * (S + S.transpose());
  if (!out.weights.allFinite()) fail(ErrorKind::numeric, "ppr_diffusion: non-finite result");
  return out;
}

}  // namespace dcgl

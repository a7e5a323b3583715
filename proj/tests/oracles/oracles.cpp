#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace oracle {

OracleReport compare(std::string case_name, double reference, double candidate) {
  OracleReport r{std::move(case_name), reference, candidate, std::abs(reference - candidate), 0.0};
  r.rel_err = r.abs_err / std::max(std::abs(reference), 1e-300);
  return r;
}

OracleReport compare(std::string case_name, const Mat& reference, const Mat& candidate) {
  if (reference.rows() != candidate.rows() || reference.cols() != candidate.cols()) {
    throw std::invalid_argument("compare: shape mismatch in " + case_name);
  }
  OracleReport worst{case_name, 0.0, 0.0, -1.0, 0.0};
  for (Eigen::Index i = 0; i < reference.rows(); ++i)
    for (Eigen::Index j = 0; j < reference.cols(); ++j) {
      auto r = compare(case_name, reference(i, j), candidate(i, j));
      if (r.abs_err > worst.abs_err) worst = r;
    }
  if (worst.abs_err < 0) worst.abs_err = 0;
  return worst;
}

namespace {

// Duchi et al. style projection of v onto {a >= 0, sum a = 1}.
Vec project_simplex(const Vec& v) {
  Vec u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0) theta = candidate;
  }
  Vec a(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) a[j] = std::max(v[j] - theta, 0.0);
  return a;
}

}  // namespace

Vec simplex_qp_row(const Vec& d, std::size_t self_index, int k) {
  Vec others;
  for (std::size_t j = 0; j < d.size(); ++j)
    if (j != self_index) others.push_back(d[j]);
  Vec sorted = others;
  std::sort(sorted.begin(), sorted.end());
  double gamma = 1.0;
  if (static_cast<std::size_t>(k) < sorted.size()) {
    double head = 0.0;
    for (int u = 0; u < k; ++u) head += sorted[static_cast<std::size_t>(u)];
    double g = (k * sorted[static_cast<std::size_t>(k)] - head) / 2.0;
    if (g > 0) gamma = g;
  }
  Vec v(others.size());
  for (std::size_t j = 0; j < others.size(); ++j) v[j] = -others[j] / (2.0 * gamma);
  Vec a = project_simplex(v);
  Vec out(d.size(), 0.0);
  for (std::size_t j = 0, r = 0; j < d.size(); ++j)
    if (j != self_index) out[j] = a[r++];
  return out;
}

Mat ppr_series(const Mat& G, double lambda, int terms, double* truncation) {
  const auto n = G.rows();
  Mat M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double di = 0, dj = 0;
      for (Eigen::Index r = 0; r < n; ++r) {
        di += G(i, r);
        dj += G(j, r);
      }
      M(i, j) = G(i, j) / std::sqrt(di * dj);
    }
  Mat power = Mat::Identity(n, n);
  Mat sum = Mat::Zero(n, n);
  double coeff = lambda;
  for (int i = 0; i <= terms; ++i) {
    sum += coeff * power;
    power = power * M;
    coeff *= (1.0 - lambda);
  }
  if (truncation) *truncation = std::pow(1.0 - lambda, terms + 1);
  return sum;
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
  Vec grad(x.size());
  Vec probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) throw std::runtime_error("finite_diff_grad: non-finite probe");
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double relative_error(const Vec& analytic, const Vec& numeric, double floor) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nb += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

Mat naive_sq_dists(const Mat& X) {
  Mat D(X.rows(), X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      double s = 0;
      for (Eigen::Index c = 0; c < X.cols(); ++c) s += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
      D(i, j) = s;
    }
  return D;
}

double pairwise_smoothness(const Mat& H, const Mat& S) {
  double total = 0;
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = 0; j < H.rows(); ++j) {
      double d = 0;
      for (Eigen::Index c = 0; c < H.cols(); ++c) d += (H(i, c) - H(j, c)) * (H(i, c) - H(j, c));
      total += S(i, j) * d;
    }
  return 0.5 * total;
}

double exhaustive_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  int size = 0;
  for (int v : y_true) size = std::max(size, v + 1);
  for (int v : y_pred) size = std::max(size, v + 1);
  std::vector<int> perm(static_cast<std::size_t>(size));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
      if (perm[static_cast<std::size_t>(y_pred[i])] == y_true[i]) ++hits;
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(y_true.size());
}

double entropy_nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    joint[{a[i], b[i]}] += 1;
  }
  auto entropy = [n](const std::map<int, double>& counts) {
    double h = 0;
    for (const auto& [key, c] : counts) h -= c / n * std::log(c / n);
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  if (ha == 0 && hb == 0) return 1.0;
  if (ha == 0 || hb == 0) return 0.0;
  double mi = 0;
  for (const auto& [key, c] : joint) mi += c / n * std::log(c * n / (ca[key.first] * cb[key.second]));
  return mi / std::sqrt(ha * hb);
}

void ScalarAdam::step(Vec& params, const Vec& grad) {
  if (m.empty()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  ++t;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1 - beta2) * grad[i] * grad[i];
    double mh = m[i] / (1 - std::pow(beta1, static_cast<double>(t)));
    double vh = v[i] / (1 - std::pow(beta2, static_cast<double>(t)));
    params[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

double cosine(const Mat& A, int i, const Mat& B, int j) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    dot += A(i, c) * B(j, c);
    na += A(i, c) * A(i, c);
    nb += B(j, c) * B(j, c);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double omega(const Mat& A, const Mat& B, int i, double tau) {
  double denom = 0;
  for (int j = 0; j < B.rows(); ++j) denom += std::exp(cosine(A, i, B, j) / tau);
  double value = -std::log(std::exp(cosine(A, i, B, i) / tau) / denom);
  for (int j = 0; j < A.rows(); ++j)
    if (j != i) value += std::exp(cosine(A, i, A, j) / tau);
  return value;
}

double info_nce(const Mat& H1, const Mat& H2, const std::vector<std::vector<Eigen::VectorXd>>& negatives, double tau) {
  double total = 0;
  for (int i = 0; i < H1.rows(); ++i) {
    const double pos = std::exp(cosine(H1, i, H2, i) / tau);
    double denom = pos;
    for (const auto& neg : negatives[static_cast<std::size_t>(i)]) {
      Mat row = neg.transpose();
      denom += std::exp(cosine(H1, i, row, 0) / tau);
    }
    total += -std::log(pos / denom);
  }
  return total / static_cast<double>(H1.rows());
}

std::vector<int> connected_components(const Mat& S) {
  const auto n = S.rows();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    std::queue<Eigen::Index> q;
    q.push(s);
    label[static_cast<std::size_t>(s)] = next;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (Eigen::Index v = 0; v < n; ++v)
        if (S(u, v) != 0 && label[static_cast<std::size_t>(v)] < 0) {
          label[static_cast<std::size_t>(v)] = next;
          q.push(v);
        }
    }
    ++next;
  }
  return label;
}

}  // namespace oracle

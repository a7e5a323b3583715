#include "dcgl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dcgl/diffusion.hpp"

namespace dcgl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Readout k-means seed; epochs use 1..iter.
constexpr int kReadoutStream = 0;

Matrix meta_row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Index>(values.size()));
  Index j = 0;
  for (double v : values) m(0, j++) = v;
  return m;
}

Matrix to_triplets(const Matrix& W) {
  Index nnz = (W.array() != 0.0).count();
  Matrix t(nnz, 3);
  Index r = 0;
  for (Index i = 0; i < W.rows(); ++i)
    for (Index j = 0; j < W.cols(); ++j)
      if (W(i, j) != 0.0) {
        t(r, 0) = static_cast<double>(i);
        t(r, 1) = static_cast<double>(j);
        t(r, 2) = W(i, j);
        ++r;
      }
  return t;
}

Matrix from_triplets(const Matrix& t, Index n) {
  Matrix W = Matrix::Zero(n, n);
  for (Index r = 0; r < t.rows(); ++r) {
    auto i = static_cast<Index>(t(r, 0));
    auto j = static_cast<Index>(t(r, 1));
    if (i < 0 || j < 0 || i >= n || j >= n) fail(ErrorKind::data, "corrupt checkpoint (graph index out of range)");
    W(i, j) = t(r, 2);
  }
  return W;
}

std::string describe(const LossBundle& b) {
  std::ostringstream os;
  os << "l_ae=" << b.l_ae << " l_fl=" << b.l_fl << " l_gl=" << b.l_gl << " l_cl=" << b.l_cl
     << " total=" << b.total;
  return os.str();
}

}  // namespace

ObjectiveWeights ObjectiveWeights::from_config(const RunConfig& cfg) {
  return ObjectiveWeights{1.0, cfg.disable_FL ? 0.0 : 1.0, cfg.alpha, cfg.disable_CL ? 0.0 : cfg.beta};
}

std::uint64_t epoch_seed(std::uint64_t seed, int epoch) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(epoch)));
}

bool is_final_epoch(int epoch, const RunConfig& cfg, Index n, int c) {
  if (epoch >= cfg.iter) return true;
  const int cap = static_cast<int>(n / c);
  return neighbor_schedule(epoch, cfg, n, c) == cap && epoch % cfg.t == 0;
}

int configure_threads() {
#ifdef _OPENMP
  if (const char* env = std::getenv("DCGL_THREADS")) {
    int requested = std::atoi(env);
    if (requested > 0) omp_set_num_threads(requested);
  }
  int threads = omp_get_max_threads();
  Eigen::setNbThreads(threads);
  return threads;
#else
  return 1;
#endif
}

EpochGraphs prepare_epoch(const Matrix& X, const NormalizedGraph& A_hat, const ModelParams& params, int k,
                          const RunConfig& cfg, std::uint64_t seed) {
  const Index n = X.rows();
  const int c = cfg.clusters;
  Matrix H1 = forward_structural(X, A_hat, params.gcn1);
  AttributeOutput attributed = forward_attribute(X, params.ae);

  EpochGraphs graphs;
  graphs.k = k;
  if (!cfg.disable_FL && !cfg.disable_FL_guidance) {
    graphs.centroids = kmeans(attributed.latent, c, seed, cfg.kmeans_max_iter);
  }
  graphs.local = build_graph(H1, k, GraphRole::lpg_SL);
  graphs.local_hat = normalize_graph(graphs.local);
  if (!cfg.disable_CL) {
    Matrix merged = merge_representations(H1, attributed.latent);
    AffinityGraph wide = build_global_graph(merged, n, c);
    graphs.global = ppr_diffusion(wide, cfg.lambda);
    graphs.global_hat = normalize_graph(*graphs.global);
  }
  return graphs;
}

Objective evaluate_objective(const Matrix& X, const NormalizedGraph& A_hat, const ModelParams& params,
                             const EpochGraphs& graphs, const RunConfig& cfg, const ObjectiveWeights& weights,
                             bool with_gradient) {
  Objective obj;
  GcnCache structural_cache;
  AttributeCache attribute_cache;
  Matrix H1 = forward_structural(X, A_hat, params.gcn1, with_gradient ? &structural_cache : nullptr);
  AttributeOutput attributed = forward_attribute(X, params.ae, with_gradient ? &attribute_cache : nullptr);
  const Matrix& H2 = attributed.latent;

  Matrix d_h1 = Matrix::Zero(H1.rows(), H1.cols());
  Matrix d_h2 = Matrix::Zero(H2.rows(), H2.cols());
  Matrix d_recon;
  if (with_gradient) obj.grads = params.zeros_like();

  const double l_ae = loss_ae(X, attributed.reconstruction, with_gradient ? &d_recon : nullptr);

  double l_fl = 0.0;
  if (!cfg.disable_FL) {
    FeatureContrastOptions opts{cfg.tau, !cfg.disable_FL_guidance};
    if (opts.centroid_negatives && !graphs.centroids) fail(ErrorKind::usage, "feature loss needs epoch centroids");
    Matrix g1, g2;
    auto fl = loss_feature_contrastive(H1, H2, graphs.centroids ? &*graphs.centroids : nullptr, opts,
                                       with_gradient ? &g1 : nullptr, with_gradient ? &g2 : nullptr);
    l_fl = fl.value;
    obj.fl_negatives_per_anchor = fl.negatives_per_anchor;
    if (with_gradient) {
      d_h1 += weights.fl * g1;
      d_h2 += weights.fl * g2;
    }
  }

  Matrix g_graph;
  const double l_gl = loss_graph(H1, graphs.local.weights, cfg.gamma, with_gradient ? &g_graph : nullptr);
  if (with_gradient) d_h1 += weights.gl * g_graph;

  double l_cl = 0.0;
  if (!cfg.disable_CL) {
    if (!graphs.global_hat) fail(ErrorKind::usage, "cluster loss needs the diffused graph");
    GcnCache local_cache, global_cache;
    ClusterIndicators F = forward_cluster_indicators(H1, graphs.local_hat, *graphs.global_hat, params.gcn2,
                                                     params.gcn3, with_gradient ? &local_cache : nullptr,
                                                     with_gradient ? &global_cache : nullptr);
    const bool guided = !cfg.disable_CL_guidance;
    Matrix anchors_local = guided ? cluster_embeddings(F.local, H1) : F.local;
    Matrix anchors_global = guided ? cluster_embeddings(F.global, H1) : F.global;
    Matrix d_local, d_global;
    l_cl = loss_cluster_contrastive(anchors_local, anchors_global, cfg.tau, cfg.cl_inside_log,
                                    with_gradient ? &d_local : nullptr, with_gradient ? &d_global : nullptr);
    if (with_gradient) {
      d_local *= weights.cl;
      d_global *= weights.cl;
      Matrix d_f_local, d_f_global;
      if (guided) {
        // Z = F^T H: dF = H dZ^T, dH = F dZ.
        d_f_local = H1 * d_local.transpose();
        d_f_global = H1 * d_global.transpose();
        d_h1 += F.local * d_local + F.global * d_global;
      } else {
        d_f_local = d_local;
        d_f_global = d_global;
      }
      d_h1 += backward_gcn(graphs.local_hat.weights, params.gcn2, local_cache, d_f_local, obj.grads.gcn2);
      d_h1 += backward_gcn(graphs.global_hat->weights, params.gcn3, global_cache, d_f_global, obj.grads.gcn3);
    }
  }

  if (with_gradient) {
    backward_gcn(A_hat.weights, params.gcn1, structural_cache, d_h1, obj.grads.gcn1);
    backward_attribute(params.ae, attribute_cache, d_h2, weights.ae * d_recon, obj.grads.ae);
  }

  obj.value = weights.ae * l_ae + weights.fl * l_fl + weights.gl * l_gl + weights.cl * l_cl;
  obj.losses = total_loss(l_ae, l_fl, l_gl, l_cl, cfg);
  obj.structural = std::move(H1);
  return obj;
}

AdamState make_adam_state(const ModelParams& params) {
  AdamState state;
  for (const auto& [name, m] : params.tensors()) {
    state.first.push_back(Matrix::Zero(m->rows(), m->cols()));
    state.second.push_back(Matrix::Zero(m->rows(), m->cols()));
  }
  return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr) {
  auto p = params.tensors();
  auto g = grads.tensors();
  if (p.size() != g.size() || p.size() != state.first.size()) fail(ErrorKind::usage, "adam_step: tensor count mismatch");
  for (size_t t = 0; t < p.size(); ++t) {
    if (p[t].second->rows() != g[t].second->rows() || p[t].second->cols() != g[t].second->cols()) {
      fail(ErrorKind::usage, "adam_step: shape mismatch at " + p[t].first);
    }
    if (!g[t].second->allFinite()) fail(ErrorKind::numeric, "adam_step: non-finite gradient in " + g[t].first);
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t t = 0; t < p.size(); ++t) {
    const Matrix& grad = *g[t].second;
    Matrix& m = state.first[t];
    Matrix& v = state.second[t];
    m = state.beta1 * m + (1.0 - state.beta1) * grad;
    v = state.beta2 * v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    Matrix& w = *p[t].second;
    w.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + state.eps);
  }
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  std::vector<std::pair<std::string, const Matrix*>> tensors;
  std::vector<Matrix> owned;
  owned.reserve(8);

  owned.push_back(meta_row({static_cast<double>(state.epoch), static_cast<double>(state.k),
                            static_cast<double>(state.adam.step), static_cast<double>(state.seed >> 32),
                            static_cast<double>(state.seed & 0xFFFFFFFFull)}));
  tensors.emplace_back("meta", &owned.back());

  Matrix history(static_cast<Index>(state.history.size()), 7);
  for (size_t r = 0; r < state.history.size(); ++r) {
    const auto& rec = state.history[r];
    history.row(static_cast<Index>(r)) << rec.epoch, rec.k, rec.losses.l_ae, rec.losses.l_fl, rec.losses.l_gl,
        rec.losses.l_cl, rec.losses.total;
  }
  owned.push_back(std::move(history));
  tensors.emplace_back("history", &owned.back());

  owned.push_back(meta_row({static_cast<double>(state.last_local.size()), static_cast<double>(state.last_local.k),
                            static_cast<double>(state.last_local.role)}));
  tensors.emplace_back("last_local.meta", &owned.back());
  owned.push_back(to_triplets(state.last_local.weights));
  tensors.emplace_back("last_local.triplets", &owned.back());
  tensors.emplace_back("last_structural", &state.last_structural);

  auto params = state.params.tensors();
  for (size_t t = 0; t < params.size(); ++t) {
    tensors.emplace_back("param." + params[t].first, params[t].second);
    tensors.emplace_back("adam.m." + params[t].first, &state.adam.first[t]);
    tensors.emplace_back("adam.v." + params[t].first, &state.adam.second[t]);
  }
  save_tensors(path, tensors);
}

TrainState load_checkpoint(const std::filesystem::path& path, const RunConfig& cfg, Index m) {
  NamedTensors loaded = load_tensors(path);
  auto find = [&](const std::string& name) -> Matrix& {
    for (auto& [key, value] : loaded)
      if (key == name) return value;
    fail(ErrorKind::data, "corrupt checkpoint (missing tensor " + name + "): " + path.string());
  };

  TrainState state;
  const Matrix& meta = find("meta");
  if (meta.rows() != 1 || meta.cols() != 5) fail(ErrorKind::data, "corrupt checkpoint (meta shape): " + path.string());
  state.epoch = static_cast<int>(meta(0, 0));
  state.k = static_cast<int>(meta(0, 1));
  state.seed = (static_cast<std::uint64_t>(meta(0, 3)) << 32) | static_cast<std::uint64_t>(meta(0, 4));

  const Matrix& history = find("history");
  if (history.cols() != 7 && history.rows() != 0) fail(ErrorKind::data, "corrupt checkpoint (history shape)");
  for (Index r = 0; r < history.rows(); ++r) {
    EpochRecord rec;
    rec.epoch = static_cast<int>(history(r, 0));
    rec.k = static_cast<int>(history(r, 1));
    rec.losses = total_loss(history(r, 2), history(r, 3), history(r, 4), history(r, 5), cfg);
    rec.losses.total = history(r, 6);
    state.history.push_back(rec);
  }

  const Matrix& local_meta = find("last_local.meta");
  if (local_meta.rows() != 1 || local_meta.cols() != 3) fail(ErrorKind::data, "corrupt checkpoint (graph meta)");
  const auto n = static_cast<Index>(local_meta(0, 0));
  state.last_local.weights = from_triplets(find("last_local.triplets"), n);
  state.last_local.k = static_cast<int>(local_meta(0, 1));
  state.last_local.role = static_cast<GraphRole>(static_cast<int>(local_meta(0, 2)));
  state.last_structural = find("last_structural");

  state.params = init_params(cfg, m, cfg.clusters, 0);
  state.adam = make_adam_state(state.params);
  state.adam.step = static_cast<long>(meta(0, 2));
  auto slots = state.params.tensors();
  for (size_t t = 0; t < slots.size(); ++t) {
    const std::string& name = slots[t].first;
    auto assign = [&](const std::string& key, Matrix& target) {
      Matrix& source = find(key);
      if (source.rows() != target.rows() || source.cols() != target.cols()) {
        fail(ErrorKind::data, "corrupt checkpoint (shape mismatch at " + key + "): " + path.string());
      }
      target = source;
    };
    assign("param." + name, *slots[t].second);
    assign("adam.m." + name, state.adam.first[t]);
    assign("adam.v." + name, state.adam.second[t]);
  }
  return state;
}

RunResult train(const DataMatrix& data, const RunConfig& cfg, const TrainOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  validate(cfg, data.n());
  const Index n = data.n();
  const int c = cfg.clusters;
  const Matrix& X = data.X;

  RunResult result;
  result.threads = configure_threads();

  const NormalizedGraph A_hat = normalize_graph(build_graph(X, cfg.k_init, GraphRole::initial_A));

  TrainState state;
  if (options.resume_from) {
    state = load_checkpoint(*options.resume_from, cfg, data.m());
    if (state.seed != cfg.seed) fail(ErrorKind::usage, "checkpoint was written with a different seed");
    if (state.epoch > 0 && state.last_local.size() != n) fail(ErrorKind::data, "checkpoint does not match the dataset");
  } else {
    state.params = init_params(cfg, data.m(), c, cfg.seed);
    state.adam = make_adam_state(state.params);
    state.seed = cfg.seed;
  }

  bool finished = state.epoch > 0 && is_final_epoch(state.epoch, cfg, n, c);
  while (!finished) {
    const int epoch = state.epoch + 1;
    const int k = neighbor_schedule(epoch, cfg, n, c);
    try {
      EpochGraphs graphs = prepare_epoch(X, A_hat, state.params, k, cfg, epoch_seed(cfg.seed, epoch));
      Objective obj = evaluate_objective(X, A_hat, state.params, graphs, cfg, ObjectiveWeights::from_config(cfg), true);
      if (!std::isfinite(obj.losses.total) || !std::isfinite(obj.value)) {
        fail(ErrorKind::numeric, "non-finite loss (" + describe(obj.losses) + ")");
      }
      adam_step(state.params, obj.grads, state.adam, cfg.lr);

      state.epoch = epoch;
      state.k = k;
      state.history.push_back(EpochRecord{epoch, k, obj.losses});
      state.last_local = std::move(graphs.local);
      state.last_structural = std::move(obj.structural);
      result.fl_negatives_per_anchor = obj.fl_negatives_per_anchor;
    } catch (const Error& e) {
      throw Error(e.kind(), "epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (options.on_epoch) options.on_epoch(state.history.back());
    if (options.checkpoint_every > 0 && !options.checkpoint_dir.empty() && epoch % options.checkpoint_every == 0) {
      save_checkpoint(state, options.checkpoint_dir / ("checkpoint_epoch_" + std::to_string(epoch) + ".bin"));
    }
    finished = is_final_epoch(epoch, cfg, n, c);
  }
  if (!options.checkpoint_dir.empty()) save_checkpoint(state, options.checkpoint_dir / "checkpoint.bin");

  result.labels = ncut_spectral(state.last_local, c, epoch_seed(cfg.seed, kReadoutStream));
  result.local_graph = std::move(state.last_local);
  result.structural = std::move(state.last_structural);
  result.history = std::move(state.history);
  result.stop_epoch = state.epoch;
  if (data.labels) result.metrics = evaluate(*data.labels, result.labels);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace dcgl

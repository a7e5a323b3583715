#include "dcgl/networks.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>

namespace dcgl {
namespace {

constexpr std::array<char, 4> kParamMagic = {'D', 'C', 'G', 'P'};

void check_finite(const Matrix& M, const char* where) {
  if (!M.allFinite()) fail(ErrorKind::numeric, std::string(where) + ": non-finite output");
}

template <typename Fn>
void for_each_tensor(ModelParams& p, Fn&& fn) {
  for (size_t i = 0; i < p.gcn1.weights.size(); ++i) fn("gcn1.w" + std::to_string(i), p.gcn1.weights[i]);
  for (size_t i = 0; i < p.ae.encoder.size(); ++i) {
    fn("ae.enc" + std::to_string(i) + ".w", p.ae.encoder[i].weight);
    fn("ae.enc" + std::to_string(i) + ".b", p.ae.encoder[i].bias);
  }
  for (size_t i = 0; i < p.ae.decoder.size(); ++i) {
    fn("ae.dec" + std::to_string(i) + ".w", p.ae.decoder[i].weight);
    fn("ae.dec" + std::to_string(i) + ".b", p.ae.decoder[i].bias);
  }
  for (size_t i = 0; i < p.gcn2.weights.size(); ++i) fn("gcn2.w" + std::to_string(i), p.gcn2.weights[i]);
  for (size_t i = 0; i < p.gcn3.weights.size(); ++i) fn("gcn3.w" + std::to_string(i), p.gcn3.weights[i]);
}

template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::istream& is, T& v, const std::filesystem::path& path) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail(ErrorKind::data, "corrupt checkpoint (truncated): " + path.string());
}

Matrix glorot(Index fan_in, Index fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix W(fan_in, fan_out);
  // Row-major fill so the draw order is independent of storage order.
  for (Index i = 0; i < fan_in; ++i)
    for (Index j = 0; j < fan_out; ++j) W(i, j) = dist(rng);
  return W;
}

DenseLayer dense(Index in, Index out, Activation act, std::mt19937_64& rng) {
  return DenseLayer{glorot(in, out, rng), Matrix::Zero(1, out), act};
}

}  // namespace

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors() {
  std::vector<std::pair<std::string, Matrix*>> out;
  for_each_tensor(*this, [&out](std::string name, Matrix& m) { out.emplace_back(std::move(name), &m); });
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for_each_tensor(const_cast<ModelParams&>(*this),
                  [&out](std::string name, Matrix& m) { out.emplace_back(std::move(name), &m); });
  return out;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto& [name, m] : z.tensors()) m->setZero();
  return z;
}

size_t ModelParams::parameter_count() const {
  size_t count = 0;
  for (const auto& [name, m] : tensors()) count += static_cast<size_t>(m->size());
  return count;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& [name, m] : tensors())
    for (Index i = 0; i < m->rows(); ++i)
      for (Index j = 0; j < m->cols(); ++j) flat.push_back((*m)(i, j));
  return flat;
}

void ModelParams::unflatten(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) fail(ErrorKind::usage, "unflatten: size mismatch");
  size_t pos = 0;
  for (auto& [name, m] : tensors())
    for (Index i = 0; i < m->rows(); ++i)
      for (Index j = 0; j < m->cols(); ++j) (*m)(i, j) = flat[pos++];
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    double peak = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - peak).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix apply_activation(const Matrix& pre, Activation act) {
  switch (act) {
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::linear: return pre;
    case Activation::softmax_rows: return softmax_rows(pre);
  }
  return pre;
}

Matrix activation_backward(const Matrix& out, const Matrix& d_out, Activation act) {
  switch (act) {
    case Activation::relu: return (out.array() > 0.0).select(d_out, 0.0);
    case Activation::linear: return d_out;
    case Activation::softmax_rows: {
      Vector inner = out.cwiseProduct(d_out).rowwise().sum();
      return out.cwiseProduct(d_out - inner.replicate(1, out.cols()));
    }
  }
  return d_out;
}

Matrix gcn_layer(const Matrix& H_in, const NormalizedGraph& graph, const Matrix& W, Activation act) {
  if (graph.weights.rows() != H_in.rows() || graph.weights.cols() != H_in.rows() || H_in.cols() != W.rows()) {
    fail(ErrorKind::usage, "gcn_layer: shape mismatch");
  }
  Matrix out = apply_activation(graph.weights * H_in * W, act);
  check_finite(out, "gcn_layer");
  return out;
}

Matrix forward_gcn(const Matrix& input, const Matrix& graph, const GcnParams& params, GcnCache* cache) {
  if (graph.rows() != input.rows() || graph.cols() != input.rows()) fail(ErrorKind::usage, "forward_gcn: graph shape mismatch");
  if (cache) {
    cache->input = input;
    cache->propagated.clear();
    cache->outputs.clear();
  }
  Matrix h = input;
  for (size_t l = 0; l < params.weights.size(); ++l) {
    if (h.cols() != params.weights[l].rows()) fail(ErrorKind::usage, "forward_gcn: layer dimension mismatch");
    Matrix propagated = graph * h;
    h = apply_activation(propagated * params.weights[l], params.activations[l]);
    if (cache) {
      cache->propagated.push_back(std::move(propagated));
      cache->outputs.push_back(h);
    }
  }
  check_finite(h, "forward_gcn");
  return h;
}

Matrix backward_gcn(const Matrix& graph, const GcnParams& params, const GcnCache& cache, const Matrix& d_output,
                    GcnParams& grads) {
  Matrix d = d_output;
  for (size_t l = params.weights.size(); l-- > 0;) {
    Matrix d_pre = activation_backward(cache.outputs[l], d, params.activations[l]);
    grads.weights[l].noalias() += cache.propagated[l].transpose() * d_pre;
    Matrix d_prop = d_pre * params.weights[l].transpose();
    d = graph.transpose() * d_prop;
  }
  return d;
}

Matrix forward_dense(const Matrix& input, const std::vector<DenseLayer>& layers, DenseCache* cache) {
  if (cache) {
    cache->inputs.clear();
    cache->outputs.clear();
  }
  Matrix h = input;
  for (const auto& layer : layers) {
    if (h.cols() != layer.weight.rows()) fail(ErrorKind::usage, "forward_dense: layer dimension mismatch");
    Matrix pre = h * layer.weight;
    pre.rowwise() += layer.bias.row(0);
    if (cache) cache->inputs.push_back(h);
    h = apply_activation(pre, layer.activation);
    if (cache) cache->outputs.push_back(h);
  }
  return h;
}

Matrix backward_dense(const std::vector<DenseLayer>& layers, const DenseCache& cache, const Matrix& d_output,
                      std::vector<DenseLayer>& grads) {
  Matrix d = d_output;
  for (size_t l = layers.size(); l-- > 0;) {
    Matrix d_pre = activation_backward(cache.outputs[l], d, layers[l].activation);
    grads[l].weight.noalias() += cache.inputs[l].transpose() * d_pre;
    grads[l].bias += d_pre.colwise().sum();
    d = d_pre * layers[l].weight.transpose();
  }
  return d;
}

Matrix forward_structural(const Matrix& X, const NormalizedGraph& A_hat, const GcnParams& params, GcnCache* cache) {
  return forward_gcn(X, A_hat.weights, params, cache);
}

AttributeOutput forward_attribute(const Matrix& X, const AutoencoderParams& params, AttributeCache* cache) {
  if (!X.allFinite()) fail(ErrorKind::numeric, "forward_attribute: non-finite input");
  AttributeOutput out;
  out.latent = forward_dense(X, params.encoder, cache ? &cache->encoder : nullptr);
  out.reconstruction = forward_dense(out.latent, params.decoder, cache ? &cache->decoder : nullptr);
  check_finite(out.latent, "forward_attribute");
  check_finite(out.reconstruction, "forward_attribute");
  return out;
}

void backward_attribute(const AutoencoderParams& params, const AttributeCache& cache, const Matrix& d_latent,
                        const Matrix& d_reconstruction, AutoencoderParams& grads) {
  Matrix d_code = backward_dense(params.decoder, cache.decoder, d_reconstruction, grads.decoder);
  d_code += d_latent;
  backward_dense(params.encoder, cache.encoder, d_code, grads.encoder);
}

ClusterIndicators forward_cluster_indicators(const Matrix& H1, const NormalizedGraph& local_hat,
                                             const NormalizedGraph& global_hat, const GcnParams& gcn2,
                                             const GcnParams& gcn3, GcnCache* local_cache, GcnCache* global_cache) {
  return ClusterIndicators{forward_gcn(H1, local_hat.weights, gcn2, local_cache),
                           forward_gcn(H1, global_hat.weights, gcn3, global_cache)};
}

ModelParams init_params(const RunConfig& cfg, Index m, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index l = cfg.latent_dim;
  ModelParams p;
  p.gcn1.weights = {glorot(m, cfg.hidden_gcn, rng), glorot(cfg.hidden_gcn, l, rng)};
  p.gcn1.activations = {Activation::relu, Activation::linear};
  p.ae.encoder = {dense(m, cfg.hidden_ae, Activation::relu, rng), dense(cfg.hidden_ae, l, Activation::linear, rng)};
  p.ae.decoder = {dense(l, cfg.hidden_ae, Activation::relu, rng), dense(cfg.hidden_ae, m, Activation::linear, rng)};
  p.gcn2.weights = {glorot(l, c, rng)};
  p.gcn2.activations = {Activation::softmax_rows};
  p.gcn3.weights = {glorot(l, c, rng)};
  p.gcn3.activations = {Activation::softmax_rows};
  return p;
}

void save_tensors(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, const Matrix*>>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out.write(kParamMagic.data(), kParamMagic.size());
  write_raw(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, m] : tensors) {
    write_raw(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_raw(out, static_cast<std::uint32_t>(m->rows()));
    write_raw(out, static_cast<std::uint32_t>(m->cols()));
    for (Index i = 0; i < m->rows(); ++i)
      for (Index j = 0; j < m->cols(); ++j) write_raw(out, (*m)(i, j));
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

NamedTensors load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data, "cannot open " + path.string());
  const auto file_size = std::filesystem::file_size(path);
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kParamMagic) fail(ErrorKind::data, "corrupt checkpoint (bad magic): " + path.string());
  std::uint32_t count = 0;
  read_raw(in, count, path);
  NamedTensors tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    std::uint32_t name_len = 0, rows = 0, cols = 0;
    read_raw(in, name_len, path);
    if (name_len > 4096) fail(ErrorKind::data, "corrupt checkpoint (name length): " + path.string());
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) fail(ErrorKind::data, "corrupt checkpoint (truncated): " + path.string());
    read_raw(in, rows, path);
    read_raw(in, cols, path);
    if (static_cast<std::uint64_t>(rows) * cols * 8 > file_size) {
      fail(ErrorKind::data, "corrupt checkpoint (shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                                " exceeds file): " + path.string());
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) read_raw(in, m(i, j), path);
    tensors.emplace_back(std::move(name), std::move(m));
  }
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorKind::data, "corrupt checkpoint (trailing bytes): " + path.string());
  return tensors;
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  save_tensors(path, params.tensors());
}

ModelParams load_params(const std::filesystem::path& path, const ModelParams& shape_like) {
  NamedTensors loaded = load_tensors(path);
  ModelParams params = shape_like;
  auto slots = params.tensors();
  if (slots.size() != loaded.size()) fail(ErrorKind::data, "corrupt checkpoint (tensor count): " + path.string());
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].first != loaded[i].first || slots[i].second->rows() != loaded[i].second.rows() ||
        slots[i].second->cols() != loaded[i].second.cols()) {
      fail(ErrorKind::data, "corrupt checkpoint (shape mismatch at " + slots[i].first + "): " + path.string());
    }
    *slots[i].second = std::move(loaded[i].second);
  }
  return params;
}

}  // namespace dcgl

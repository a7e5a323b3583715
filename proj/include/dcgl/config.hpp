#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

namespace dcgl {

/// Hyper-parameters for one training run.
struct RunConfig {
  int clusters = 0;  // "c"; required, never inferred from labels
  int k_init = 10;
  int t = 6;
  int iter = 30;
  double alpha = 1.0;
  double beta = 1e3;
  double gamma = 2e3;
  double tau = 0.5;
  double lambda = 0.2;
  int latent_dim = 128;
  int hidden_gcn = 256;
  int hidden_ae = 512;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int kmeans_max_iter = 300;
  double heatmap_percentile = 90.0;

  // Ablations.
  bool disable_FL = false;
  bool disable_CL = false;
  bool disable_FL_guidance = false;
  bool disable_CL_guidance = false;
  // Variant: intra-view term of the cluster loss moved into
  // the softmax denominator.
  bool cl_inside_log = false;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Unknown keys and mistyped values raise ErrorKind::usage.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

RunConfig load_config(const std::filesystem::path& path);

/// Sets one field from its textual form ("0.5", "true", "12").
void set_config_value(RunConfig& cfg, const std::string& key,
                      const std::string& value);

/// Applies an ablation variant: wF, wC, wFg, wCg, wall (or "full").
void apply_variant(RunConfig& cfg, const std::string& variant);

/// Checks parameter ranges; with n > 0 also checks the sample-count bounds.
void validate(const RunConfig& cfg, long n = 0);

/// Stable FNV-1a digest of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace dcgl

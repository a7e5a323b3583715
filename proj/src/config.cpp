#include "dcgl/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "dcgl/errors.hpp"

namespace dcgl {
namespace {

using nlohmann::json;

// One accessor pair per field keeps the JSON mapping and the key list in a
// single table.
struct FieldAccess {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
FieldAccess field(T RunConfig::*member) {
  return {
      [member](const RunConfig& c) { return json(c.*member); },
      [member](RunConfig& c, const json& v) {
        if constexpr (std::is_same_v<T, bool>) {
          if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
          c.*member = v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
          if (!v.is_number()) throw std::invalid_argument("expected an integer");
          double d = v.get<double>();
          if (v.is_number_float() && d != std::floor(d)) throw std::invalid_argument("expected an integer");
          if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
              throw std::invalid_argument("expected a non-negative integer");
            c.*member = v.is_number_unsigned() ? v.get<T>() : static_cast<T>(v.get<double>());
          } else {
            c.*member = v.is_number_integer() ? v.get<T>() : static_cast<T>(d);
          }
        } else {
          if (!v.is_number()) throw std::invalid_argument("expected a number");
          c.*member = v.get<T>();
        }
      }};
}

const std::map<std::string, FieldAccess>& fields() {
  static const std::map<std::string, FieldAccess> table = {
      {"c", field(&RunConfig::clusters)},
      {"k_init", field(&RunConfig::k_init)},
      {"t", field(&RunConfig::t)},
      {"iter", field(&RunConfig::iter)},
      {"alpha", field(&RunConfig::alpha)},
      {"beta", field(&RunConfig::beta)},
      {"gamma", field(&RunConfig::gamma)},
      {"tau", field(&RunConfig::tau)},
      {"lambda", field(&RunConfig::lambda)},
      {"latent_dim", field(&RunConfig::latent_dim)},
      {"hidden_gcn", field(&RunConfig::hidden_gcn)},
      {"hidden_ae", field(&RunConfig::hidden_ae)},
      {"lr", field(&RunConfig::lr)},
      {"seed", field(&RunConfig::seed)},
      {"kmeans_max_iter", field(&RunConfig::kmeans_max_iter)},
      {"heatmap_percentile", field(&RunConfig::heatmap_percentile)},
      {"disable_FL", field(&RunConfig::disable_FL)},
      {"disable_CL", field(&RunConfig::disable_CL)},
      {"disable_FL_guidance", field(&RunConfig::disable_FL_guidance)},
      {"disable_CL_guidance", field(&RunConfig::disable_CL_guidance)},
      {"cl_inside_log", field(&RunConfig::cl_inside_log)},
  };
  return table;
}

}  // namespace

json to_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [key, access] : fields()) j[key] = access.get(cfg);
  return j;
}

RunConfig config_from_json(const json& j, RunConfig base) {
  if (!j.is_object()) fail(ErrorKind::usage, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = fields().find(key);
    if (it == fields().end()) fail(ErrorKind::usage, "unknown config key '" + key + "'");
    try {
      it->second.set(base, value);
    } catch (const std::exception& e) {
      fail(ErrorKind::usage, "config key '" + key + "': " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::usage, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(ErrorKind::usage, "malformed config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    fail(ErrorKind::usage, "config key '" + key + "': cannot parse value '" + value + "'");
  }
  cfg = config_from_json(json{{key, parsed}}, cfg);
}

void apply_variant(RunConfig& cfg, const std::string& variant) {
  if (variant == "full") return;
  if (variant == "wF") {
    cfg.disable_FL = true;
  } else if (variant == "wC") {
    cfg.disable_CL = true;
  } else if (variant == "wFg") {
    cfg.disable_FL_guidance = true;
  } else if (variant == "wCg") {
    cfg.disable_CL_guidance = true;
  } else if (variant == "wall") {
    cfg.disable_FL_guidance = true;
    cfg.disable_CL_guidance = true;
  } else {
    fail(ErrorKind::usage, "unknown variant '" + variant + "' (expected wF, wC, wFg, wCg, wall)");
  }
}

void validate(const RunConfig& cfg, long n) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::usage, "invalid config: " + what);
  };
  require(cfg.clusters >= 2, "c must be given and >= 2");
  require(cfg.k_init >= 1, "k_init >= 1");
  require(cfg.t >= 1, "t >= 1");
  require(cfg.iter >= 1, "iter >= 1");
  require(cfg.tau > 0, "tau > 0");
  require(cfg.lambda > 0 && cfg.lambda <= 1, "0 < lambda <= 1");
  require(cfg.alpha >= 0 && cfg.beta >= 0 && cfg.gamma >= 0, "alpha, beta, gamma >= 0");
  require(cfg.latent_dim >= 1 && cfg.hidden_gcn >= 1 && cfg.hidden_ae >= 1, "layer widths >= 1");
  require(cfg.lr > 0, "lr > 0");
  require(cfg.kmeans_max_iter >= 1, "kmeans_max_iter >= 1");
  require(cfg.heatmap_percentile >= 0 && cfg.heatmap_percentile <= 100, "0 <= heatmap_percentile <= 100");
  if (n > 0) {
    require(n >= cfg.clusters, "n >= c");
    require(cfg.k_init <= n / cfg.clusters, "k_init <= floor(n/c) = " + std::to_string(n / cfg.clusters));
    require(n / cfg.clusters <= n - 1, "floor(n/c) <= n-1");
  }
}

std::string config_hash(const RunConfig& cfg) {
  std::string text = to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dcgl

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dcgl/errors.hpp"

namespace dcgl {

enum class DataFormat { csv, binary };

/// n x m samples plus optional ground-truth labels in [0, clusters).
struct DataMatrix {
  Matrix X;
  std::optional<std::vector<int>> labels;
  int clusters = 0;

  Index n() const { return X.rows(); }
  Index m() const { return X.cols(); }
};

/// ".csv" -> csv, everything else -> binary container.
DataFormat format_from_path(const std::filesystem::path& path);

/// Loads raw (unnormalized) samples. For csv with `labeled`, the trailing
/// column holds integer labels. When `clusters` is given, labels must lie
/// in [0, clusters); otherwise clusters is inferred as max(label) + 1.
DataMatrix load_dataset(const std::filesystem::path& path, DataFormat format,
                        bool labeled = true,
                        std::optional<int> clusters = std::nullopt);

void save_dataset(const DataMatrix& data, const std::filesystem::path& path,
                  DataFormat format);

/// Sets the cluster count and checks every label against it.
void set_clusters(DataMatrix& data, int clusters);

/// Divides every row by its Euclidean norm. A zero row is an error.
DataMatrix l2_normalize(DataMatrix data);
Matrix l2_normalize_rows(const Matrix& X);

/// c isotropic Gaussian clusters, centers at pairwise distance >= 10 sigma.
/// Cluster j holds floor(n/c) samples plus one more when j < n mod c.
DataMatrix make_blobs(int n, int c, int m, double sigma, std::uint64_t seed);

// Binary container: "DCGL", u32 n, u32 m, u8 flags, f64 row-major data,
// then i32 labels when flags bit 0 is set. Bits 1-3 carry a graph role tag
// (0 for plain sample matrices).
struct Container {
  Matrix values;
  std::optional<std::vector<int>> labels;
  std::uint8_t role = 0;
};

void write_container(const std::filesystem::path& path, const Matrix& values,
                     const std::vector<int>* labels, std::uint8_t role = 0);
Container read_container(const std::filesystem::path& path);

/// One label per line.
void write_labels(const std::filesystem::path& path, std::span<const int> labels);
std::vector<int> read_labels(const std::filesystem::path& path);

}  // namespace dcgl

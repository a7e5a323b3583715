#include "dcgl/data_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace dcgl {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary container assumes a little-endian host");

constexpr std::array<char, 4> kDataMagic = {'D', 'C', 'G', 'L'};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

template <typename T>
void write_raw(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& is, T& value, const std::filesystem::path& path) {
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) fail(ErrorKind::data, "truncated container: " + path.string());
}

void check_labels(const std::vector<int>& labels, int clusters) {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= clusters) {
      fail(ErrorKind::data, "label out of range: sample " + std::to_string(i) +
                                " has label " + std::to_string(labels[i]) +
                                " but c = " + std::to_string(clusters));
    }
  }
}

DataMatrix load_csv(const std::filesystem::path& path, bool labeled) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data, "cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  size_t line_no = 0;
  size_t width = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    auto cells = split_commas(view);

    std::vector<double> values(cells.size());
    bool numeric = true;
    for (size_t j = 0; j < cells.size() && numeric; ++j) numeric = parse_double(cells[j], values[j]);

    if (first_content_line) {
      first_content_line = false;
      if (!numeric) continue;  // header row
    }
    if (!numeric) {
      fail(ErrorKind::data, path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (width == 0) {
      width = values.size();
      if (labeled && width < 2) {
        fail(ErrorKind::data, path.string() + ": need at least one feature column plus the label");
      }
    } else if (values.size() != width) {
      fail(ErrorKind::data, path.string() + ":" + std::to_string(line_no) + ": ragged row (expected " +
                                std::to_string(width) + " cells, got " + std::to_string(values.size()) + ")");
    }
    if (labeled) {
      double label = values.back();
      if (label != std::floor(label) || std::abs(label) > 1e9) {
        fail(ErrorKind::data, path.string() + ":" + std::to_string(line_no) + ": label column not integral");
      }
      labels.push_back(static_cast<int>(label));
      values.pop_back();
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) fail(ErrorKind::data, "no samples in " + path.string());

  DataMatrix data;
  data.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) data.X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  if (labeled) data.labels = std::move(labels);
  return data;
}

void save_csv(const DataMatrix& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  char buf[64];
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.m(); ++j) {
      if (j) out << ',';
      auto res = std::to_chars(buf, buf + sizeof buf, data.X(i, j));
      out.write(buf, res.ptr - buf);
    }
    if (data.labels) out << ',' << (*data.labels)[static_cast<size_t>(i)];
    out << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

}  // namespace

DataFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".csv" ? DataFormat::csv : DataFormat::binary;
}

void write_container(const std::filesystem::path& path, const Matrix& values,
                     const std::vector<int>* labels, std::uint8_t role) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out.write(kDataMagic.data(), kDataMagic.size());
  write_raw(out, static_cast<std::uint32_t>(values.rows()));
  write_raw(out, static_cast<std::uint32_t>(values.cols()));
  std::uint8_t flags = static_cast<std::uint8_t>((labels ? 1u : 0u) | ((role & 0x7u) << 1));
  write_raw(out, flags);
  for (Index i = 0; i < values.rows(); ++i)
    for (Index j = 0; j < values.cols(); ++j) write_raw(out, values(i, j));
  if (labels) {
    for (int label : *labels) write_raw(out, static_cast<std::int32_t>(label));
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data, "cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kDataMagic) fail(ErrorKind::data, "bad magic in " + path.string());
  std::uint32_t n = 0, m = 0;
  std::uint8_t flags = 0;
  read_raw(in, n, path);
  read_raw(in, m, path);
  read_raw(in, flags, path);
  if (flags & 0xF0u) fail(ErrorKind::data, "unknown header flags in " + path.string());

  Container c;
  c.role = static_cast<std::uint8_t>((flags >> 1) & 0x7u);
  c.values.resize(n, m);
  for (Index i = 0; i < static_cast<Index>(n); ++i)
    for (Index j = 0; j < static_cast<Index>(m); ++j) read_raw(in, c.values(i, j), path);
  if (flags & 1u) {
    std::vector<int> labels(n);
    for (auto& label : labels) {
      std::int32_t v = 0;
      read_raw(in, v, path);
      label = v;
    }
    c.labels = std::move(labels);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    fail(ErrorKind::data, "trailing bytes in " + path.string());
  }
  return c;
}

DataMatrix load_dataset(const std::filesystem::path& path, DataFormat format, bool labeled,
                        std::optional<int> clusters) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::data, "missing file: " + path.string());
  if (std::filesystem::file_size(path) == 0) fail(ErrorKind::data, "no samples in " + path.string());

  DataMatrix data;
  if (format == DataFormat::csv) {
    data = load_csv(path, labeled);
  } else {
    Container c = read_container(path);
    data.X = std::move(c.values);
    if (labeled) data.labels = std::move(c.labels);
    if (data.X.rows() == 0) fail(ErrorKind::data, "no samples in " + path.string());
  }
  if (data.m() < 1) fail(ErrorKind::data, "no feature columns in " + path.string());

  if (clusters) {
    set_clusters(data, *clusters);
  } else if (data.labels) {
    int max_label = *std::max_element(data.labels->begin(), data.labels->end());
    int min_label = *std::min_element(data.labels->begin(), data.labels->end());
    if (min_label < 0) fail(ErrorKind::data, "label out of range: negative label");
    data.clusters = max_label + 1;
  }
  return data;
}

void save_dataset(const DataMatrix& data, const std::filesystem::path& path, DataFormat format) {
  if (format == DataFormat::csv) {
    save_csv(data, path);
  } else {
    write_container(path, data.X, data.labels ? &*data.labels : nullptr);
  }
}

void set_clusters(DataMatrix& data, int clusters) {
  if (clusters < 2) fail(ErrorKind::usage, "need at least 2 clusters");
  if (data.n() < clusters) {
    fail(ErrorKind::data, "fewer samples (" + std::to_string(data.n()) + ") than clusters (" +
                              std::to_string(clusters) + ")");
  }
  if (data.labels) check_labels(*data.labels, clusters);
  data.clusters = clusters;
}

Matrix l2_normalize_rows(const Matrix& X) {
  Matrix out = X;
  for (Index i = 0; i < X.rows(); ++i) {
    double norm = X.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      fail(ErrorKind::data, "cannot normalize row " + std::to_string(i) + ": zero or non-finite norm");
    }
    out.row(i) /= norm;
  }
  return out;
}

DataMatrix l2_normalize(DataMatrix data) {
  data.X = l2_normalize_rows(data.X);
  return data;
}

DataMatrix make_blobs(int n, int c, int m, double sigma, std::uint64_t seed) {
  if (c < 2) fail(ErrorKind::usage, "need at least 2 clusters");
  if (!(sigma > 0.0)) fail(ErrorKind::usage, "sigma must be positive");
  if (m < 1) fail(ErrorKind::usage, "dimension must be at least 1");
  if (n < c) fail(ErrorKind::usage, "need at least one sample per cluster");

  std::mt19937_64 rng(seed);
  const double min_gap = 10.0 * sigma;
  // The box is wide enough that c points at spacing min_gap always fit.
  double half_width = min_gap * c;
  Matrix centers(c, m);
  int placed = 0;
  int failures = 0;
  while (placed < c) {
    std::uniform_real_distribution<double> coord(-half_width, half_width);
    for (Index j = 0; j < m; ++j) centers(placed, j) = coord(rng);
    bool ok = true;
    for (int p = 0; p < placed && ok; ++p) ok = (centers.row(p) - centers.row(placed)).norm() >= min_gap;
    if (ok) {
      ++placed;
    } else if (++failures % 100 == 0) {
      half_width *= 1.5;
    }
  }

  DataMatrix data;
  data.X.resize(n, m);
  data.labels.emplace();
  data.labels->reserve(static_cast<size_t>(n));
  data.clusters = c;
  std::normal_distribution<double> noise(0.0, sigma);
  Index row = 0;
  for (int j = 0; j < c; ++j) {
    int count = n / c + (j < n % c ? 1 : 0);
    for (int s = 0; s < count; ++s, ++row) {
      for (Index d = 0; d < m; ++d) data.X(row, d) = centers(j, d) + noise(rng);
      data.labels->push_back(j);
    }
  }
  return data;
}

void write_labels(const std::filesystem::path& path, std::span<const int> labels) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  for (int label : labels) out << label << '\n';
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data, "cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    int value = 0;
    auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), value);
    if (ec != std::errc() || ptr != view.data() + view.size() || value < 0) {
      fail(ErrorKind::data, path.string() + ":" + std::to_string(line_no) + ": malformed label '" +
                                std::string(view) + "'");
    }
    labels.push_back(value);
  }
  return labels;
}

}  // namespace dcgl

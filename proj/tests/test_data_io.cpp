#include <cmath>
#include <fstream>
#include <functional>

#include "dcgl/data_io.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace dcgl;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv with trailing labels") {
  TempDir dir;
  write_text(dir / "a.csv", "0,0,0\n1,0,0\n0,1,1\n");
  DataMatrix d = load_dataset(dir / "a.csv", DataFormat::csv);
  Matrix expected(3, 2);
  expected << 0, 0, 1, 0, 0, 1;
  CHECK(d.X == expected);
  REQUIRE(d.labels);
  CHECK(*d.labels == std::vector<int>{0, 0, 1});
  CHECK(d.clusters == 2);
}

TEST_CASE("csv header row is skipped") {
  TempDir dir;
  write_text(dir / "h.csv", "x,y,label\n0.5,1.5,0\n2,3,1\n");
  DataMatrix d = load_dataset(dir / "h.csv", DataFormat::csv);
  CHECK(d.n() == 2);
  CHECK(d.X(1, 1) == 3.0);
}

TEST_CASE("unlabeled csv keeps every column") {
  TempDir dir;
  write_text(dir / "u.csv", "1,2,3\n4,5,6\n");
  DataMatrix d = load_dataset(dir / "u.csv", DataFormat::csv, false);
  CHECK(d.m() == 3);
  CHECK_FALSE(d.labels);
}

TEST_CASE("csv errors") {
  TempDir dir;
  write_text(dir / "empty.csv", "");
  CHECK(error_of([&] { load_dataset(dir / "empty.csv", DataFormat::csv); }).find("no samples") != std::string::npos);
  write_text(dir / "empty.bin", "");
  CHECK(error_of([&] { load_dataset(dir / "empty.bin", DataFormat::binary); }).find("no samples") != std::string::npos);
  write_text(dir / "ragged.csv", "1,2,0\n1,0\n");
  CHECK(error_of([&] { load_dataset(dir / "ragged.csv", DataFormat::csv); }).find("ragged") != std::string::npos);
  write_text(dir / "text.csv", "1,2,0\n1,abc,0\n");
  CHECK(error_of([&] { load_dataset(dir / "text.csv", DataFormat::csv); }).find("non-numeric") != std::string::npos);
  write_text(dir / "frac.csv", "1,2,0.5\n");
  CHECK(error_of([&] { load_dataset(dir / "frac.csv", DataFormat::csv); }).find("not integral") != std::string::npos);
  CHECK(error_of([&] { load_dataset(dir / "missing.csv", DataFormat::csv); }).find("missing") != std::string::npos);
}

TEST_CASE("label outside the declared cluster count") {
  TempDir dir;
  write_text(dir / "l.csv", "1,0,0\n0,1,7\n1,1,2\n");
  CHECK(error_of([&] { load_dataset(dir / "l.csv", DataFormat::csv, true, 3); }).find("label out of range") !=
        std::string::npos);
  DataMatrix d = load_dataset(dir / "l.csv", DataFormat::csv);
  CHECK_THROWS_AS(set_clusters(d, 3), Error);
}

TEST_CASE("l2 normalization") {
  Matrix X(2, 2);
  X << 3, 4, 0.6, 0.8;
  Matrix N = l2_normalize_rows(X);
  CHECK(N(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(N(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK((N.row(1) - X.row(1)).cwiseAbs().maxCoeff() < 1e-12);

  Matrix R = Matrix::Random(5, 4);
  Matrix U = l2_normalize_rows(R);
  for (Index i = 0; i < 5; ++i) {
    double s = 0;
    for (Index j = 0; j < 4; ++j) s += U(i, j) * U(i, j);
    CHECK(std::abs(std::sqrt(s) - 1.0) < 1e-12);
  }
  CHECK((l2_normalize_rows(U) - U).cwiseAbs().maxCoeff() < 1e-12);

  Matrix Z = Matrix::Ones(3, 2);
  Z.row(2).setZero();
  CHECK(error_of([&] { l2_normalize_rows(Z); }).find("row 2") != std::string::npos);
}

TEST_CASE("make_blobs points sit closest to their own center") {
  DataMatrix d = make_blobs(6, 2, 2, 0.01, 3);
  REQUIRE(d.labels);
  Matrix centers = Matrix::Zero(2, 2);
  std::vector<int> counts(2, 0);
  for (Index i = 0; i < 6; ++i) {
    int l = (*d.labels)[static_cast<size_t>(i)];
    centers.row(l) += d.X.row(i);
    ++counts[static_cast<size_t>(l)];
  }
  for (int c = 0; c < 2; ++c) centers.row(c) /= counts[static_cast<size_t>(c)];
  for (Index i = 0; i < 6; ++i) {
    Index nearest = 0;
    (centers.rowwise() - d.X.row(i)).rowwise().squaredNorm().minCoeff(&nearest);
    CHECK(nearest == (*d.labels)[static_cast<size_t>(i)]);
  }
}

TEST_CASE("make_blobs determinism and errors") {
  CHECK(make_blobs(30, 3, 4, 0.1, 5).X == make_blobs(30, 3, 4, 0.1, 5).X);
  CHECK(make_blobs(30, 3, 4, 0.1, 5).X != make_blobs(30, 3, 4, 0.1, 6).X);
  CHECK(error_of([] { make_blobs(10, 1, 2, 0.1, 0); }).find("need at least 2 clusters") != std::string::npos);
  CHECK_THROWS_AS(make_blobs(10, 2, 2, 0.0, 0), Error);
  DataMatrix d = make_blobs(7, 3, 2, 0.1, 0);
  std::vector<int> counts(3, 0);
  for (int l : *d.labels) ++counts[static_cast<size_t>(l)];
  CHECK(counts == std::vector<int>{3, 2, 2});
}

TEST_CASE("binary round trip is bit exact") {
  TempDir dir;
  DataMatrix d = l2_normalize(make_blobs(20, 2, 3, 0.2, 1));
  save_dataset(d, dir / "d.bin", DataFormat::binary);
  DataMatrix back = load_dataset(dir / "d.bin", DataFormat::binary);
  CHECK(back.X == d.X);
  CHECK(*back.labels == *d.labels);
  save_dataset(back, dir / "e.bin", DataFormat::binary);
  std::ifstream a(dir / "d.bin", std::ios::binary), b(dir / "e.bin", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("container corruption is detected") {
  TempDir dir;
  Matrix X = Matrix::Ones(2, 2);
  write_container(dir / "c.bin", X, nullptr, 2);
  Container c = read_container(dir / "c.bin");
  CHECK(c.role == 2);
  CHECK_FALSE(c.labels);
  {
    std::ofstream out(dir / "c.bin", std::ios::binary | std::ios::app);
    out << 'x';
  }
  CHECK_THROWS_AS(read_container(dir / "c.bin"), Error);
  write_text(dir / "bad.bin", "NOPE12345678");
  CHECK_THROWS_AS(read_container(dir / "bad.bin"), Error);
  write_container(dir / "t.bin", X, nullptr);
  std::filesystem::resize_file(dir / "t.bin", 20);
  CHECK_THROWS_AS(read_container(dir / "t.bin"), Error);
}

TEST_CASE("label files") {
  TempDir dir;
  std::vector<int> labels{2, 0, 1};
  write_labels(dir / "l.csv", labels);
  CHECK(read_labels(dir / "l.csv") == labels);
  write_text(dir / "m.csv", "1\n0\nx\n");
  CHECK(error_of([&] { read_labels(dir / "m.csv"); }).find(":3:") != std::string::npos);
}

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "temp_dir.hpp"

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(DCGL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  char buf[512];
  while (size_t got = fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// A small, fast training setup.
void write_small_config(const std::filesystem::path& p) {
  std::ofstream(p) << R"({"c": 3, "latent_dim": 8, "hidden_gcn": 16, "hidden_ae": 16, "k_init": 4, "t": 2, "iter": 4})";
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  TempDir dir;
  CHECK(run("").code == 2);
  CHECK(run("run --data x.csv").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--help").code == 0);
  write_small_config(dir / "c.json");
  REQUIRE(run("gen-blobs --n 30 --out " + q(dir / "b.bin")).code == 0);
  CHECK(run("ablate --data " + q(dir / "b.bin") + " --config " + q(dir / "c.json") + " --variant nope --out " +
            q(dir / "r"))
            .code == 2);
  std::ofstream(dir / "noc.json") << "{}";
  CHECK(run("run --data " + q(dir / "b.bin") + " --config " + q(dir / "noc.json") + " --out " + q(dir / "r")).code ==
        2);
}

TEST_CASE("eval subcommand") {
  TempDir dir;
  std::ofstream(dir / "t.csv") << "0\n0\n1\n1\n";
  std::ofstream(dir / "p.csv") << "0\n1\n0\n1\n";
  std::ofstream(dir / "short.csv") << "0\n1\n";
  std::ofstream(dir / "bad.csv") << "0\n1\nzz\n1\n";
  Outcome same = run("eval " + q(dir / "t.csv") + " " + q(dir / "t.csv"));
  CHECK(same.code == 0);
  auto j = nlohmann::json::parse(same.out);
  CHECK(j["acc"] == 1.0);
  CHECK(j["nmi"] == 1.0);
  auto fixture = nlohmann::json::parse(run("eval " + q(dir / "t.csv") + " " + q(dir / "p.csv")).out);
  CHECK(fixture["acc"] == 0.5);
  CHECK(std::abs(fixture["nmi"].get<double>()) < 1e-12);
  CHECK(run("eval " + q(dir / "t.csv") + " " + q(dir / "short.csv")).code == 3);
  CHECK(run("eval " + q(dir / "t.csv") + " " + q(dir / "bad.csv")).code == 3);
}

TEST_CASE("run writes a reproducible run directory") {
  TempDir dir;
  write_small_config(dir / "c.json");
  REQUIRE(run("gen-blobs --n 60 --c 3 --m 8 --sigma 0.1 --seed 1 --out " + q(dir / "b.csv")).code == 0);
  const std::string base = "run --data " + q(dir / "b.csv") + " --config " + q(dir / "c.json") + " --seed 7";
  Outcome first = run(base + " --out " + q(dir / "r1"));
  REQUIRE(first.code == 0);
  CHECK(first.out.find("ACC") != std::string::npos);
  REQUIRE(run(base + " --out " + q(dir / "r2")).code == 0);
  CHECK(slurp(dir / "r1" / "labels.csv") == slurp(dir / "r2" / "labels.csv"));
  CHECK(slurp(dir / "r1" / "losses.csv") == slurp(dir / "r2" / "losses.csv"));

  auto cfg = nlohmann::json::parse(slurp(dir / "r1" / "config.json"));
  CHECK(cfg["seed"] == 7);
  CHECK(cfg["tau"] == 0.5);
  auto metrics = nlohmann::json::parse(slurp(dir / "r1" / "metrics.json"));
  CHECK(metrics["n"] == 60);
  CHECK(metrics["seed"] == 7);

  // The echoed config alone reproduces the labels.
  REQUIRE(run("run --data " + q(dir / "b.csv") + " --config " + q(dir / "r1" / "config.json") + " --out " +
              q(dir / "r3"))
              .code == 0);
  CHECK(slurp(dir / "r1" / "labels.csv") == slurp(dir / "r3" / "labels.csv"));

  Outcome plot = run("plot --graph " + q(dir / "r1" / "graph_final.bin") + " --labels " +
                     q(dir / "r1" / "labels.csv") + " --out " + q(dir / "adj.png") + " --edges " + q(dir / "e.csv"));
  CHECK(plot.code == 0);
  CHECK(std::filesystem::exists(dir / "adj.json"));
  CHECK(std::filesystem::exists(dir / "e.csv"));
  CHECK(run("plot --embedding " + q(dir / "r1" / "embedding_final.bin") + " --labels " +
            q(dir / "r1" / "labels.csv") + " --out " + q(dir / "h.png"))
            .code == 0);
}

TEST_CASE("flags override the config file") {
  TempDir dir;
  write_small_config(dir / "c.json");
  REQUIRE(run("gen-blobs --n 60 --m 8 --out " + q(dir / "b.bin")).code == 0);
  REQUIRE(run("run --data " + q(dir / "b.bin") + " --config " + q(dir / "c.json") +
              " --iter 2 --tau 0.3 --lambda 0.5 --k-init 5 --out " + q(dir / "r"))
              .code == 0);
  auto cfg = nlohmann::json::parse(slurp(dir / "r" / "config.json"));
  CHECK(cfg["iter"] == 2);
  CHECK(cfg["tau"] == 0.3);
  CHECK(cfg["lambda"] == 0.5);
  CHECK(cfg["k_init"] == 5);
  CHECK(cfg["latent_dim"] == 8);
}

TEST_CASE("ablation sets the variant flags") {
  TempDir dir;
  write_small_config(dir / "c.json");
  REQUIRE(run("gen-blobs --n 60 --m 8 --out " + q(dir / "b.bin")).code == 0);
  REQUIRE(run("ablate --data " + q(dir / "b.bin") + " --config " + q(dir / "c.json") + " --variant wFg --out " +
              q(dir / "r"))
              .code == 0);
  auto cfg = nlohmann::json::parse(slurp(dir / "r" / "config.json"));
  CHECK(cfg["disable_FL_guidance"] == true);
  auto metrics = nlohmann::json::parse(slurp(dir / "r" / "metrics.json"));
  CHECK(metrics["fl_negatives_per_anchor"] == 59);
}

TEST_CASE("data problems exit 3") {
  TempDir dir;
  write_small_config(dir / "c.json");
  std::ofstream(dir / "bad.csv") << "1,2,0\n3,4\n";
  CHECK(run("run --data " + q(dir / "bad.csv") + " --config " + q(dir / "c.json") + " --out " + q(dir / "r")).code ==
        3);
  CHECK(run("run --data " + q(dir / "missing.bin") + " --config " + q(dir / "c.json") + " --out " + q(dir / "r"))
            .code == 3);
}

TEST_CASE("memory guard") {
  TempDir dir;
  write_small_config(dir / "c.json");
  REQUIRE(run("gen-blobs --n 20001 --c 3 --m 1 --out " + q(dir / "big.bin")).code == 0);
  CHECK(run("run --data " + q(dir / "big.bin") + " --config " + q(dir / "c.json") + " --out " + q(dir / "r")).code ==
        2);
}

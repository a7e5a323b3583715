// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dcgl/clustering.hpp"
#include "dcgl/diffusion.hpp"
#include "dcgl/evaluation.hpp"
#include "dcgl/losses.hpp"
#include "dcgl/run_directory.hpp"
#include "dcgl/trainer.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace dcgl;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail, double seconds) {
  std::printf("%s [%2d] %-34s %s (%.2fs)\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <typename F>
void criterion(int id, const std::string& name, F&& body) {
  const auto t0 = Clock::now();
  try {
    auto [ok, detail, limit] = body();
    const double s = since(t0);
    if (limit > 0 && s >= limit) {
      ok = false;
      detail += fmt(", runtime limit %.0fs exceeded", limit);
    }
    report(id, name, ok, detail, s);
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what(), since(t0));
  }
}

struct Outcome {
  bool ok;
  std::string detail;
  double limit_seconds;
};

DataMatrix blobs_fixture() { return l2_normalize(make_blobs(300, 3, 16, 0.05, 0)); }

RunConfig blobs_config() {
  RunConfig cfg;
  cfg.clusters = 3;
  cfg.k_init = 10;
  return cfg;
}

struct SharedRuns {
  std::optional<RunResult> full;
};

SharedRuns shared;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
  std::printf("acceptance suite (threads=%d)\n", configure_threads());

  criterion(1, "closed-form graph vs simplex QP", [] {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> normal;
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
      Matrix X(20, 5);
      for (Index i = 0; i < X.size(); ++i) X.data()[i] = normal(rng);
      const Matrix D = oracle::naive_sq_dists(X);
      const auto row = static_cast<Index>(trial % 20);
      const int k = 1 + trial % 5;
      oracle::Vec d(20);
      for (Index j = 0; j < 20; ++j) d[static_cast<size_t>(j)] = D(row, j);
      Vector got = solve_row_weights(D.row(row).transpose(), row, k);
      oracle::Vec ref = oracle::simplex_qp_row(d, static_cast<size_t>(row), k);
      for (Index j = 0; j < 20; ++j) worst = std::max(worst, std::abs(got(j) - ref[static_cast<size_t>(j)]));
    }
    return Outcome{worst <= 1e-8, fmt("max_abs=%.3g over 100 rows (tol 1e-8)", worst), 1.0};
  });

  criterion(2, "PPR closed form vs 200-term series", [] {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      Matrix W(30, 30);
      for (Index i = 0; i < W.size(); ++i) W.data()[i] = unif(rng);
      W = ((W + W.transpose()) / 2).eval();
      W.diagonal().setZero();
      AffinityGraph G{W, 0, GraphRole::pre_diffusion_G};
      worst = std::max(worst, oracle::compare("ppr", oracle::ppr_series(W, 0.2, 200), ppr_diffusion(G, 0.2).weights).abs_err);
    }
    return Outcome{worst <= 1e-6, fmt("max_abs=%.3g over 20 graphs (tol 1e-6)", worst), 2.0};
  });

  criterion(3, "gradients vs central differences", [] {
    struct Term {
      const char* name;
      ObjectiveWeights w;
    };
    const std::vector<Term> terms{{"L_AE", {1, 0, 0, 0}}, {"L_FL", {0, 1, 0, 0}}, {"L_GL", {0, 0, 1, 0}},
                                  {"L_CL", {0, 0, 0, 1}}, {"L", {}}};
    std::string detail;
    double worst = 0;
    bool gamma_invariant = true;
    for (const auto& term : terms) {
      double term_worst = 0;
      const bool graph_term = std::string(term.name) == "L_GL";
      for (std::uint64_t seed : {1, 2, 3}) {
        GradFixture f = make_grad_fixture(seed);
        ObjectiveWeights w = std::string(term.name) == "L" ? ObjectiveWeights::from_config(f.cfg) : term.w;
        if (graph_term) {
          // gamma/2 ||S||^2 is constant in the parameters but ~1e3 in value,
          // which drowns a central difference at h=1e-5. Check at gamma=0 and
          // require the analytic gradient to be identical at the default gamma.
          GradFixture f0 = f;
          f0.cfg.gamma = 0.0;
          const auto g_default = evaluate_objective(f.X, f.A_hat, f.params, f.graphs, f.cfg, w, true).grads.flatten();
          const auto g_zero = evaluate_objective(f0.X, f0.A_hat, f0.params, f0.graphs, f0.cfg, w, true).grads.flatten();
          gamma_invariant = gamma_invariant && g_default == g_zero;
          term_worst = std::max(term_worst, gradient_error(f0, w));
        } else {
          term_worst = std::max(term_worst, gradient_error(f, w));
        }
      }
      worst = std::max(worst, term_worst);
      detail += std::string(term.name) + "=" + fmt("%.2g ", term_worst);
    }
    detail += gamma_invariant ? "L_GL grads gamma-invariant " : "L_GL grads DEPEND ON gamma ";
    return Outcome{worst <= 1e-4 && gamma_invariant, detail + "(tol 1e-4, h=1e-5)", 30.0};
  });

  criterion(4, "trace identity", [] {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal;
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 5 + trial % 11;
      Matrix S(n, n), H(n, 4);
      for (Index i = 0; i < S.size(); ++i) S.data()[i] = unif(rng);
      S = ((S + S.transpose()) / 2).eval();
      S.diagonal().setZero();
      for (Index i = 0; i < H.size(); ++i) H.data()[i] = normal(rng);
      worst = std::max(worst, std::abs(loss_graph(H, S, 0.0) - oracle::pairwise_smoothness(H, S)));
    }
    return Outcome{worst <= 1e-9, fmt("max_abs=%.3g over 50 instances (tol 1e-9)", worst), 0};
  });

  criterion(5, "spectral recovery of 3 blocks", [] {
    Matrix S = Matrix::Zero(60, 60);
    std::vector<int> truth(60);
    for (int b = 0; b < 3; ++b) S.block(b * 20, b * 20, 20, 20).setOnes();
    S.diagonal().setZero();
    for (int i = 0; i < 60; ++i) truth[static_cast<size_t>(i)] = i / 20;
    const double acc = accuracy(truth, ncut_spectral(AffinityGraph{S, 19, GraphRole::lpg_SL}, 3, 0));
    return Outcome{acc == 1.0, fmt("ACC=%.6f (required 1.0 exactly)", acc), 0};
  });

  criterion(6, "end-to-end blobs (n=300, c=3)", [] {
    RunResult r = train(blobs_fixture(), blobs_config());
    const double acc = r.metrics->acc, nmi = r.metrics->nmi;
    shared.full = std::move(r);
    return Outcome{acc >= 0.95 && nmi >= 0.90,
                   fmt("ACC=%.4f NMI=%.4f epochs=%.0f (need ACC>=0.95, NMI>=0.90)", acc, nmi, shared.full->stop_epoch),
                   180.0};
  });

  criterion(7, "ablation direction", [] {
    const DataMatrix data = blobs_fixture();
    const double full = shared.full ? shared.full->metrics->acc : train(data, blobs_config()).metrics->acc;
    RunConfig wf = blobs_config(), wc = blobs_config();
    apply_variant(wf, "wF");
    apply_variant(wc, "wC");
    const double acc_wf = train(data, wf).metrics->acc;
    const double acc_wc = train(data, wc).metrics->acc;
    const bool ok = full >= std::max(acc_wf, acc_wc) - 0.02;
    return Outcome{ok, fmt("full=%.4f w/F=%.4f w/C=%.4f (full >= max - 0.02)", full, acc_wf, acc_wc), 0};
  });

  criterion(8, "metric fixtures", [] {
    bool ok = true;
    auto near = [&](double got, double want) { ok = ok && std::abs(got - want) <= 1e-12; };
    near(accuracy(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}), 0.5);
    near(accuracy(std::vector<int>{0, 0, 0, 1, 1, 1}, std::vector<int>{0, 0, 1, 1, 1, 0}), 4.0 / 6.0);
    near(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{1, 1, 0, 0}), 1.0);
    near(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}), 0.0);
    std::vector<int> a{0, 0, 1, 1}, b{0, 0, 0, 1};
    near(nmi(a, b), oracle::entropy_nmi(a, b));
    std::mt19937 rng(8);
    std::uniform_int_distribution<int> pick(0, 4);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<int> t(25), p(25), relabeled(25);
      for (auto& v : t) v = pick(rng);
      for (auto& v : p) v = pick(rng);
      std::vector<int> perm{3, 0, 4, 1, 2};
      for (size_t i = 0; i < 25; ++i) relabeled[i] = perm[static_cast<size_t>(p[i])];
      near(accuracy(t, relabeled), accuracy(t, p));
      near(accuracy(t, p), oracle::exhaustive_accuracy(t, p));
    }
    return Outcome{ok, "hand fixtures and relabel invariance (tol 1e-12)", 0};
  });

  criterion(9, "determinism of run outputs", [] {
    TempDir dir;
    const DataMatrix data = blobs_fixture();
    RunConfig cfg = blobs_config();
    cfg.seed = 7;
    for (const char* name : {"a", "b"}) write_run_directory(train(data, cfg), data, cfg, dir / name);
    const bool labels = slurp(dir / "a" / "labels.csv") == slurp(dir / "b" / "labels.csv");
    const bool losses = slurp(dir / "a" / "losses.csv") == slurp(dir / "b" / "losses.csv");
    return Outcome{labels && losses,
                   std::string("labels.csv ") + (labels ? "identical" : "DIFFER") + ", losses.csv " +
                       (losses ? "identical" : "DIFFER"),
                   0};
  });

  criterion(10, "neighbor schedule contract", [] {
    std::vector<std::pair<RunConfig, RunResult>> runs;
    if (shared.full) runs.emplace_back(blobs_config(), *shared.full);
    // A run that reaches the cap floor(n/c) before iter.
    RunConfig capped = blobs_config();
    capped.k_init = 40;
    runs.emplace_back(capped, train(blobs_fixture(), capped));
    bool ok = true;
    int checked = 0;
    for (const auto& [cfg, run] : runs) {
      const int cap = 300 / 3;
      for (const auto& rec : run.history) {
        const int expected = std::min(cfg.k_init * (1 + (rec.epoch - 1) / cfg.t), cap);
        ok = ok && rec.k == expected;
        ++checked;
      }
    }
    return Outcome{ok, fmt("%.0f logged epochs match k_init*(1+floor((e-1)/t)) capped at floor(n/c)", checked), 0};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}

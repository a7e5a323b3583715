#pragma once

#include <cstdint>

#include "dcgl/data_io.hpp"
#include "dcgl/trainer.hpp"
#include "oracles.hpp"

// Tiny end-to-end instance for gradient checks: n=12, m=6, l=4, c=3.
struct GradFixture {
  dcgl::Matrix X;
  dcgl::NormalizedGraph A_hat;
  dcgl::ModelParams params;
  dcgl::EpochGraphs graphs;
  dcgl::RunConfig cfg;
};

inline GradFixture make_grad_fixture(std::uint64_t seed, const char* variant = "full") {
  GradFixture f;
  f.cfg.clusters = 3;
  f.cfg.latent_dim = 4;
  f.cfg.hidden_gcn = 8;
  f.cfg.hidden_ae = 8;
  f.cfg.k_init = 3;
  f.cfg.seed = seed;
  dcgl::apply_variant(f.cfg, variant);
  f.X = dcgl::l2_normalize(dcgl::make_blobs(12, 3, 6, 0.5, seed)).X;
  f.A_hat = dcgl::normalize_graph(dcgl::build_graph(f.X, f.cfg.k_init));
  f.params = dcgl::init_params(f.cfg, 6, 3, seed);
  f.graphs = dcgl::prepare_epoch(f.X, f.A_hat, f.params, 3, f.cfg, seed + 1);
  return f;
}

// Relative error between the analytic gradient of the weighted objective
// and central differences (h = 1e-5), graphs and centroids held fixed.
inline double gradient_error(const GradFixture& f, const dcgl::ObjectiveWeights& w, double h = 1e-5) {
  auto analytic = dcgl::evaluate_objective(f.X, f.A_hat, f.params, f.graphs, f.cfg, w, true).grads.flatten();
  dcgl::ModelParams probe = f.params;
  auto objective = [&](const oracle::Vec& flat) {
    probe.unflatten(flat);
    return dcgl::evaluate_objective(f.X, f.A_hat, probe, f.graphs, f.cfg, w, false).value;
  };
  auto numeric = oracle::finite_diff_grad(objective, f.params.flatten(), h);
  return oracle::relative_error(analytic, numeric);
}

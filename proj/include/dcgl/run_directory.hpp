#pragma once

#include <filesystem>

#include "dcgl/config.hpp"
#include "dcgl/data_io.hpp"
#include "dcgl/trainer.hpp"

namespace dcgl {

/// Writes config.json, losses.csv, labels.csv, graph_final.bin,
/// embedding_final.bin, metrics.json and plots/ under `dir`.
/// Checkpoints are written by the trainer into the same directory.
void write_run_directory(const RunResult& result, const DataMatrix& data, const RunConfig& cfg,
                         const std::filesystem::path& dir);

/// "epoch,l_ae,l_fl,l_gl,l_cl,total,k" with round-trip precision.
void write_loss_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

}  // namespace dcgl

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "banet/config.hpp"
#include "banet/metrics.hpp"
#include "banet/network.hpp"
#include "banet/training.hpp"

namespace banet {

struct TrainRun {
  RunConfig config;
  Network network;
  TrainState state;
  std::vector<LossLogEntry> log;
};

/// Builds the network from config.seed and trains it. When `log` is given,
/// one format_log_line() per iteration is written to it.
TrainRun run_training(const RunConfig& config, const Dataset& data, std::ostream* log = nullptr);

/// Scores the network's in-memory predictions on a dataset.
EvalReport evaluate_network(const Network& net, const Dataset& data);

/// Writes OUT/NAME.pgm per image, plus OUT/diagnostics/NAME_mb.pgm and
/// NAME_mi.pgm when requested. Returns the mean conflict fraction.
double write_predictions(const Network& net, const std::filesystem::path& image_dir,
                         const std::filesystem::path& out_dir, bool diagnostics);

struct AblationRow {
  FusionMode mode;
  double mae = 0.0;
  double weighted_fbeta = 0.0;
  double adaptive_fbeta = 0.0;
};

/// Trains IPS, IPS+BLS and the full model with one shared config and seed,
/// scoring each on `test`.
std::vector<AblationRow> run_ablation(const RunConfig& base, const Dataset& train_set,
                                      const Dataset& test_set, std::ostream* progress = nullptr);

std::string format_ablation(const std::vector<AblationRow>& rows);

}  // namespace banet

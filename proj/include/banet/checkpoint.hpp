#pragma once

#include <filesystem>
#include <string>

#include "banet/config.hpp"
#include "banet/network.hpp"
#include "banet/training.hpp"

namespace banet {

inline constexpr char kCheckpointMagic[] = "BANETCKPT1";

/// Checkpoint layout:
///
///   BANETCKPT1\n
///   manifest <byte count>\n
///   <manifest text>
///   <payload: little-endian IEEE-754 binary64 values>
///
/// The manifest holds "iteration <k>", one "config <key>=<value>" line per
/// config key, "tensor <name> <group> <n> <c> <h> <w> <offset>" for every
/// parameter and "velocity <name> <offset> <count>" for every optimizer
/// buffer. Offsets count doubles from the start of the payload.
void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, const Network& net,
                     const TrainState& state);

struct LoadedCheckpoint {
  RunConfig config;
  Network network;
  TrainState state;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace banet

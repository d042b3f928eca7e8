#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "banet/network.hpp"
#include "banet/training.hpp"

namespace banet {

/// Flat key=value run configuration. '#' starts a comment line; unknown
/// keys are rejected with FormatError.
struct RunConfig {
  std::uint64_t seed = 1;
  NetworkConfig model;
  TrainConfig train;

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  /// One "key=value" line per key, in keys() order; parse(to_text()) round-trips.
  std::string to_text() const;
  static RunConfig parse(const std::string& text);

  /// Training config with the run seed applied.
  TrainConfig train_config() const;
};

RunConfig load_config(const std::filesystem::path& path);

/// BANET_SEED, when set, replaces the configured seed.
void apply_env_overrides(RunConfig& config);

}  // namespace banet

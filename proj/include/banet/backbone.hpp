#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "banet/layers.hpp"

namespace banet {

inline constexpr std::size_t kBackboneBlocks = 5;

/// Toy stand-in for the five residual stages of a ResNet-50 extractor.
///
/// Only the resolution contract is kept: blocks 1-3 halve the extent (H/2,
/// H/4, H/8), blocks 4 and 5 keep stride 1 and dilate by 2 and 4. The
/// full-scale reference width at block 5 is 2048 channels.
struct BackboneConfig {
  std::array<std::size_t, kBackboneBlocks> channels{8, 16, 32, 64, 128};
  std::size_t convs_per_block = 2;
  std::size_t input_channels = 3;
  /// When false, blocks 4-5 run undilated (receptive-field comparisons only).
  bool dilated = true;
};

std::array<std::size_t, kBackboneBlocks> backbone_strides();
std::array<std::size_t, kBackboneBlocks> backbone_dilations(const BackboneConfig& config);

struct FeaturePyramid {
  std::array<Tensor, kBackboneBlocks> levels;  // f1..f5

  const Tensor& f(std::size_t i) const { return levels.at(i - 1); }
};

class Backbone {
 public:
  Backbone(const BackboneConfig& config, Rng& rng);

  /// Requires H, W to be multiples of 8 and at least 16.
  FeaturePyramid forward(Tape& tape, const Tensor& image,
                         Activation act = Activation::kRelu) const;

  void append_parameters(ParameterList& out) const;
  ParameterList parameters() const;
  const BackboneConfig& config() const { return config_; }
  const std::vector<ConvLayer>& block(std::size_t i) const { return blocks_.at(i); }
  std::vector<ConvLayer>& block(std::size_t i) { return blocks_.at(i); }

 private:
  BackboneConfig config_;
  std::array<std::vector<ConvLayer>, kBackboneBlocks> blocks_;
};

Backbone build_backbone(const BackboneConfig& config, std::uint64_t seed);

}  // namespace banet

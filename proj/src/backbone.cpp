#include "banet/backbone.hpp"

#include <string>

#include "banet/error.hpp"

namespace banet {

std::array<std::size_t, kBackboneBlocks> backbone_strides() { return {2, 2, 2, 1, 1}; }

std::array<std::size_t, kBackboneBlocks> backbone_dilations(const BackboneConfig& config) {
  if (!config.dilated) return {1, 1, 1, 1, 1};
  return {1, 1, 1, 2, 4};
}

Backbone::Backbone(const BackboneConfig& config, Rng& rng) : config_(config) {
  if (config.convs_per_block == 0) throw UsageError("backbone: convs_per_block must be positive");
  const auto strides = backbone_strides();
  const auto dilations = backbone_dilations(config);
  std::size_t in = config.input_channels;
  for (std::size_t b = 0; b < kBackboneBlocks; ++b) {
    for (std::size_t k = 0; k < config.convs_per_block; ++k) {
      const std::size_t stride = k == 0 ? strides[b] : 1;
      blocks_[b].push_back(make_conv(rng,
                                     "backbone.block" + std::to_string(b + 1) + ".conv" +
                                         std::to_string(k),
                                     in, config.channels[b], 3, stride, dilations[b]));
      in = config.channels[b];
    }
  }
}

Backbone build_backbone(const BackboneConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  return Backbone(config, rng);
}

FeaturePyramid Backbone::forward(Tape& tape, const Tensor& image, Activation act) const {
  const Shape& s = image.shape();
  if (s.c != config_.input_channels) {
    throw DimensionError("backbone: expected " + std::to_string(config_.input_channels) +
                         " input channels, got " + std::to_string(s.c));
  }
  if (s.h % 8 != 0 || s.w % 8 != 0 || s.h < 16 || s.w < 16) {
    throw DimensionError("backbone: input extent " + std::to_string(s.h) + "x" +
                         std::to_string(s.w) + " must be a multiple of 8 and at least 16");
  }
  FeaturePyramid pyramid;
  Tensor x = image;
  for (std::size_t b = 0; b < kBackboneBlocks; ++b) {
    for (const ConvLayer& conv : blocks_[b]) x = activate(tape, conv(tape, x), act);
    pyramid.levels[b] = x;
  }
  return pyramid;
}

void Backbone::append_parameters(ParameterList& out) const {
  for (std::size_t b = 0; b < kBackboneBlocks; ++b) {
    const std::string group = "pi" + std::to_string(b + 1);
    for (const ConvLayer& conv : blocks_[b]) conv.append_to(out, group);
  }
}

ParameterList Backbone::parameters() const {
  ParameterList out;
  append_parameters(out);
  return out;
}

}  // namespace banet

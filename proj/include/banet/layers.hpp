#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "banet/rng.hpp"
#include "banet/tape.hpp"
#include "banet/tensor.hpp"

namespace banet {

/// A trainable tensor tagged with its optimizer group.
struct Parameter {
  std::string name;
  std::string group;
  Tensor tensor;
  bool decay = true;  // weight decay applies to conv weights only
};

using ParameterList = std::vector<Parameter>;

std::size_t count_scalars(const ParameterList& params);

/// Whether conv layers are followed by ReLU. Linear mode is used by the
/// impulse-response probes, where it makes supports exactly additive.
enum class Activation { kRelu, kLinear };

Tensor activate(Tape& tape, const Tensor& x, Activation act);

/// Square-kernel convolution with bias; padding keeps the extent for stride 1.
struct ConvLayer {
  std::string name;
  Tensor weight;
  Tensor bias;
  ConvGeometry geometry;

  Tensor operator()(Tape& tape, const Tensor& x) const;
  void append_to(ParameterList& out, const std::string& group) const;
  std::size_t in_channels() const { return weight.shape().c; }
  std::size_t out_channels() const { return weight.shape().n; }
};

/// Kaiming fan-in normal weights (std = sqrt(2 / (in * k * k))), zero bias.
ConvLayer make_conv(Rng& rng, std::string name, std::size_t in, std::size_t out,
                    std::size_t kernel, std::size_t stride = 1, std::size_t dilation = 1);

/// Sets every weight and bias of the layer to zero.
void zero_layer(ConvLayer& layer);

}  // namespace banet

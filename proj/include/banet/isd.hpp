#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "banet/layers.hpp"

namespace banet {

/// Integrated successive dilation module with N branches.
///
/// Branch k (1-based) compresses the input with a 1x1 conv c_k and applies a
/// 3x3 conv dilated by 2^(k-1). With inter-branch connections the dilated
/// conv of branch k consumes c_k(x) + b_(k-1), so the signal of branch 1 is
/// carried through every later rate and reaches a cumulative dilation of
/// 2^N - 1. The intra-branch skip adds c_k(x) back after the dilated conv.
/// Two 1x1 layers integrate concat(b_1..b_N).
struct IsdConfig {
  std::size_t branches = 5;
  std::size_t in_channels = 1;
  std::size_t mid_channels = 1;
  std::size_t out_channels = 1;
  /// Disabling this leaves N independent parallel branches (ASPP-M style).
  bool inter_branch = true;
};

/// Dilation rate of each branch: 1, 2, 4, ..., 2^(N-1).
std::vector<std::size_t> isd_rates(std::size_t branches);

struct IsdTrace {
  std::vector<Tensor> branches;  // b_1..b_N
  Tensor output;
};

class Isd {
 public:
  Isd(const IsdConfig& config, Rng& rng, const std::string& prefix = "isd");

  Tensor forward(Tape& tape, const Tensor& x, Activation act = Activation::kRelu) const;
  IsdTrace trace(Tape& tape, const Tensor& x, Activation act = Activation::kRelu) const;

  void append_parameters(ParameterList& out, const std::string& group) const;
  const IsdConfig& config() const { return config_; }
  const std::vector<ConvLayer>& compress() const { return compress_; }
  const std::vector<ConvLayer>& dilated() const { return dilated_; }
  std::vector<ConvLayer*> layers();

 private:
  IsdConfig config_;
  std::vector<ConvLayer> compress_;
  std::vector<ConvLayer> dilated_;
  ConvLayer integrate_;
  ConvLayer project_;
};

Isd build_isd(const IsdConfig& config, std::uint64_t seed);

}  // namespace banet

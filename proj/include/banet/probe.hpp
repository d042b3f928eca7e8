#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "banet/backbone.hpp"
#include "banet/isd.hpp"

namespace banet {

/// Impulse response of an ISD-N module in linear mode (no ReLU, zero bias,
/// non-negative weights so supports cannot cancel). Reach is the largest
/// Chebyshev offset from the impulse with a nonzero response.
struct IsdProbe {
  std::vector<std::size_t> rates;
  std::vector<std::size_t> branch_reach;  // per b_k
  std::size_t deepest_reach = 0;          // b_N
  std::size_t output_reach = 0;           // module output
  std::size_t extent = 0;                 // probe map side
};

IsdProbe probe_isd(std::size_t branches, bool inter_branch = true, std::uint64_t seed = 7);

/// Side length of the input region influencing the centre unit of f5, in
/// linear mode with non-negative weights.
std::size_t backbone_receptive_field(const BackboneConfig& config, std::size_t image_size,
                                     std::uint64_t seed = 7);

}  // namespace banet

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "banet/backbone.hpp"
#include "banet/isd.hpp"
#include "banet/layers.hpp"

namespace banet {

/// Which streams feed the final map.
///  kFull    M = mosaic(phi_B, phi_I, phi_T)
///  kIps     M = phi_I
///  kIpsBls  M = phi_I + phi_B
enum class FusionMode { kFull, kIps, kIpsBls };

std::string to_string(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& text);

struct NetworkConfig {
  BackboneConfig backbone;
  /// Scales the full-size stream widths (128 per boundary level, 256 for the
  /// transition pre-processing layers).
  double width_scale = 0.125;
  std::size_t interior_isd_branches = 5;
  std::size_t transition_isd_branches = 3;
  std::size_t isd_mid_channels = 16;
  std::size_t isd_out_channels = 32;
  FusionMode mode = FusionMode::kFull;
  /// Zero the three output heads so every stream starts at logit 0.
  bool zero_init_heads = false;

  std::size_t boundary_channels() const;
  std::size_t transition_channels() const;
};

struct ForwardRecord {
  FusionMode mode = FusionMode::kFull;
  FeaturePyramid pyramid;
  Tensor phi_b;  // undefined in kIps mode
  Tensor phi_i;
  Tensor phi_t;  // undefined unless kFull
  Tensor m_b;
  Tensor m_i;
  Tensor m;
  Tensor s;
};

struct LossBundle {
  Tensor l0;
  Tensor lb;
  Tensor li;
  Tensor total;

  double value_l0() const { return l0.item(); }
  double value_lb() const { return lb.item(); }
  double value_li() const { return li.item(); }
  double value_total() const { return total.item(); }
};

/// M = phi_B (1 - M_I) M_B + phi_I M_I (1 - M_B) + phi_T (1 - M_I)(1 - M_B).
Tensor mosaic_fuse(Tape& tape, const Tensor& phi_b, const Tensor& phi_i, const Tensor& phi_t,
                   const Tensor& m_b, const Tensor& m_i);

/// Fraction of pixels with M_B * M_I > 0.25, a region the mosaic gives no term.
double conflict_fraction(const Tensor& m_b, const Tensor& m_i);

class BoundaryStream {
 public:
  BoundaryStream(const NetworkConfig& config, Rng& rng);
  Tensor forward(Tape& tape, const FeaturePyramid& pyramid, std::size_t out_h,
                 std::size_t out_w, Activation act = Activation::kRelu) const;
  void append_parameters(ParameterList& out) const;
  ConvLayer& head() { return fuse_; }

 private:
  std::vector<ConvLayer> squeeze_;
  std::vector<ConvLayer> score_;
  ConvLayer fuse_;
};

class InteriorStream {
 public:
  InteriorStream(const NetworkConfig& config, Rng& rng);
  Tensor forward(Tape& tape, const Tensor& f5, std::size_t out_h, std::size_t out_w,
                 Activation act = Activation::kRelu) const;
  void append_parameters(ParameterList& out) const;
  ConvLayer& head() { return head_; }
  const Isd& isd() const { return isd_; }

 private:
  Isd isd_;
  ConvLayer head_;
};

class TransitionStream {
 public:
  TransitionStream(const NetworkConfig& config, Rng& rng);
  Tensor forward(Tape& tape, const Tensor& f2, const Tensor& f5, std::size_t out_h,
                 std::size_t out_w, Activation act = Activation::kRelu) const;
  void append_parameters(ParameterList& out) const;
  ConvLayer& head() { return head_; }
  const Isd& isd() const { return isd_; }

 private:
  ConvLayer pre3_;
  ConvLayer pre1_;
  ConvLayer project_f2_;
  Isd isd_;
  ConvLayer head_;
};

class Network {
 public:
  Network(const NetworkConfig& config, std::uint64_t seed);

  Network(Network&&) = default;
  Network& operator=(Network&&) = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  /// image: 1x3xHxW with H, W multiples of 8.
  ForwardRecord forward(Tape& tape, const Tensor& image) const;

  /// Every trainable tensor, grouped as pi1..pi5 (backbone), piB, piI, piT.
  const ParameterList& parameters() const { return params_; }
  const NetworkConfig& config() const { return config_; }
  const Backbone& backbone() const { return backbone_; }

 private:
  Network(const NetworkConfig& config, Rng&& rng);

  NetworkConfig config_;
  Backbone backbone_;
  std::optional<BoundaryStream> boundary_;
  InteriorStream interior_;
  std::optional<TransitionStream> transition_;
  ParameterList params_;
};

/// L0 = E(S, G), LB = E(M_B, G_B), LI = E(M_I, G); total = L0 + LB + LI.
/// In kIps mode S is sigmoid(phi_I) itself, so only L0 is counted.
LossBundle total_loss(Tape& tape, const ForwardRecord& record, const Tensor& mask,
                      const Tensor& boundary);

/// Learning-rate multiplier of a parameter group: 1 for the backbone, the
/// head multiplier for stream parameters.
double group_lr_multiplier(const std::string& group, double head_multiplier);

}  // namespace banet

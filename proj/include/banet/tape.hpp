#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "banet/tensor.hpp"

namespace banet {

/// One recorded forward operation.
struct TapeNode {
  std::string_view op;
  std::vector<Tensor> inputs;
  Tensor output;
  /// Reads output.grad() and accumulates into the inputs that require grad.
  std::function<void(const TapeNode&)> backward;
};

/// Append-only record of a forward pass.
///
/// Ops record a node only when at least one input requires grad, so a tape
/// used for inference stays empty. backward() visits the recorded nodes once,
/// newest first. Intermediate gradients are reset at the start of each call;
/// leaf gradients (parameters) accumulate until zeroed by the caller.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  void record(TapeNode node);
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<TapeNode>& nodes() const { return nodes_; }
  void clear() { nodes_.clear(); }

 private:
  std::vector<TapeNode> nodes_;
};

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t pad = 0;
};

/// Output extent of a convolution along one axis.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const ConvGeometry& g);

namespace ops {

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& weight, const Tensor& bias,
              const ConvGeometry& geometry);

/// Half-pixel-centers bilinear resize: source = (i + 0.5) * in / out - 0.5, clamped.
Tensor upsample_bilinear(Tape& tape, const Tensor& input, std::size_t out_h, std::size_t out_w);

Tensor sigmoid(Tape& tape, const Tensor& input);
Tensor relu(Tape& tape, const Tensor& input);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
/// scale * x + shift, elementwise.
Tensor affine(Tape& tape, const Tensor& x, double scale, double shift);
Tensor concat_channels(Tape& tape, const std::vector<Tensor>& inputs);
/// Sum of all elements as a 1x1x1x1 tensor.
Tensor sum(Tape& tape, const Tensor& x);

inline constexpr double kBceEpsilon = 1e-12;

/// Mean binary cross-entropy over all elements. Predictions are clamped to
/// [eps, 1 - eps]; the gradient is evaluated at the clamped value.
Tensor bce_loss(Tape& tape, const Tensor& prediction, const Tensor& target);

}  // namespace ops
}  // namespace banet

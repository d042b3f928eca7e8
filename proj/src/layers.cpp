#include "banet/layers.hpp"

#include <algorithm>
#include <cmath>

namespace banet {

std::size_t count_scalars(const ParameterList& params) {
  std::size_t total = 0;
  for (const auto& p : params) total += p.tensor.numel();
  return total;
}

Tensor activate(Tape& tape, const Tensor& x, Activation act) {
  return act == Activation::kRelu ? ops::relu(tape, x) : x;
}

Tensor ConvLayer::operator()(Tape& tape, const Tensor& x) const {
  return ops::conv2d(tape, x, weight, bias, geometry);
}

void ConvLayer::append_to(ParameterList& out, const std::string& group) const {
  out.push_back(Parameter{name + ".weight", group, weight, true});
  out.push_back(Parameter{name + ".bias", group, bias, false});
}

ConvLayer make_conv(Rng& rng, std::string name, std::size_t in, std::size_t out,
                    std::size_t kernel, std::size_t stride, std::size_t dilation) {
  ConvLayer layer;
  layer.name = std::move(name);
  layer.geometry = ConvGeometry{stride, dilation, dilation * (kernel - 1) / 2};
  const double std_dev = std::sqrt(2.0 / static_cast<double>(in * kernel * kernel));
  std::vector<double> w(out * in * kernel * kernel);
  for (double& v : w) v = std_dev * rng.normal();
  layer.weight = Tensor::from(Shape{out, in, kernel, kernel}, std::move(w), true);
  layer.bias = Tensor::zeros(Shape{1, 1, 1, out}, true);
  return layer;
}

void zero_layer(ConvLayer& layer) {
  auto w = layer.weight.mutable_data();
  std::fill(w.begin(), w.end(), 0.0);
  auto b = layer.bias.mutable_data();
  std::fill(b.begin(), b.end(), 0.0);
}

}  // namespace banet

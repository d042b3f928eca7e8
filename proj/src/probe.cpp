#include "banet/probe.hpp"

#include <algorithm>
#include <cmath>

#include "banet/rng.hpp"

namespace banet {

namespace {

void make_probe_weights(ConvLayer& layer) {
  for (double& v : layer.weight.mutable_data()) v = std::abs(v) + 0.1;
  auto b = layer.bias.mutable_data();
  std::fill(b.begin(), b.end(), 0.0);
}

std::size_t reach(const Tensor& t, std::size_t centre) {
  const Shape& s = t.shape();
  std::size_t r = 0;
  for (std::size_t c = 0; c < s.c; ++c)
    for (std::size_t y = 0; y < s.h; ++y)
      for (std::size_t x = 0; x < s.w; ++x) {
        if (t.at(0, c, y, x) == 0.0) continue;
        const std::size_t dy = y > centre ? y - centre : centre - y;
        const std::size_t dx = x > centre ? x - centre : centre - x;
        r = std::max({r, dy, dx});
      }
  return r;
}

}  // namespace

IsdProbe probe_isd(std::size_t branches, bool inter_branch, std::uint64_t seed) {
  IsdConfig cfg{branches, 2, 2, 2, inter_branch};
  Rng rng(seed);
  Isd isd(cfg, rng, "probe");
  for (ConvLayer* layer : isd.layers()) make_probe_weights(*layer);

  IsdProbe out;
  out.rates = isd_rates(branches);
  const std::size_t max_reach = (std::size_t{1} << branches) - 1;
  const std::size_t margin = 4;
  out.extent = 2 * (max_reach + margin) + 1;
  const std::size_t centre = max_reach + margin;

  Tensor impulse = Tensor::zeros(Shape{1, cfg.in_channels, out.extent, out.extent});
  for (std::size_t c = 0; c < cfg.in_channels; ++c) impulse.at(0, c, centre, centre) = 1.0;
  Tape tape;
  const IsdTrace trace = isd.trace(tape, impulse, Activation::kLinear);
  for (const Tensor& b : trace.branches) out.branch_reach.push_back(reach(b, centre));
  out.deepest_reach = out.branch_reach.back();
  out.output_reach = reach(trace.output, centre);
  return out;
}

std::size_t backbone_receptive_field(const BackboneConfig& config, std::size_t image_size,
                                     std::uint64_t seed) {
  Rng rng(seed);
  Backbone net(config, rng);
  for (std::size_t b = 0; b < kBackboneBlocks; ++b) {
    for (ConvLayer& layer : net.block(b)) make_probe_weights(layer);
  }
  Tensor image = Tensor::zeros(Shape{1, config.input_channels, image_size, image_size}, true);
  Tape tape;
  const FeaturePyramid f = net.forward(tape, image, Activation::kLinear);
  const Shape& s = f.f(5).shape();
  Tensor selector = Tensor::zeros(s);
  for (std::size_t c = 0; c < s.c; ++c) selector.at(0, c, s.h / 2, s.w / 2) = 1.0;
  tape.backward(ops::sum(tape, ops::mul(tape, f.f(5), selector)));

  const auto g = image.grad();
  std::size_t lo = image_size, hi = 0;
  for (std::size_t c = 0; c < config.input_channels; ++c)
    for (std::size_t y = 0; y < image_size; ++y)
      for (std::size_t x = 0; x < image_size; ++x) {
        if (g[(c * image_size + y) * image_size + x] == 0.0) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
  return hi >= lo ? hi - lo + 1 : 0;
}

}  // namespace banet

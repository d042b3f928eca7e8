#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "banet/backbone.hpp"
#include "banet/error.hpp"
#include "banet/isd.hpp"
#include "banet/probe.hpp"

using namespace banet;

namespace {

std::size_t expected_backbone_scalars(const BackboneConfig& cfg) {
  std::size_t total = 0, in = cfg.input_channels;
  for (std::size_t c : cfg.channels) {
    total += 9 * in * c + c;
    total += (cfg.convs_per_block - 1) * (9 * c * c + c);
    in = c;
  }
  return total;
}

// Reach of b_N measured from the gradient side: support of d b_N(centre) / d x.
std::size_t gradient_reach(std::size_t n, bool inter) {
  Isd isd = build_isd({n, 1, 1, 1, inter}, 3);
  for (ConvLayer* l : isd.layers()) {
    for (double& v : l->weight.mutable_data()) v = std::abs(v) + 0.1;
    for (double& v : l->bias.mutable_data()) v = 0.0;
  }
  const std::size_t side = 2 * ((std::size_t{1} << n) + 2) + 1, c = side / 2;
  Tensor x = Tensor::zeros({1, 1, side, side}, true);
  Tape tape;
  const IsdTrace tr = isd.trace(tape, x, Activation::kLinear);
  Tensor sel = Tensor::zeros(tr.branches.back().shape());
  sel.at(0, 0, c, c) = 1.0;
  tape.backward(ops::sum(tape, ops::mul(tape, tr.branches.back(), sel)));
  std::size_t r = 0;
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t xx = 0; xx < side; ++xx)
      if (x.grad()[y * side + xx] != 0.0)
        r = std::max({r, y > c ? y - c : c - y, xx > c ? xx - c : c - xx});
  return r;
}

}  // namespace

TEST(Backbone, ParameterCountClosedForm) {
  BackboneConfig cfg;
  EXPECT_EQ(count_scalars(build_backbone(cfg, 1).parameters()), expected_backbone_scalars(cfg));
  cfg.channels = {4, 6, 8, 10, 12};
  cfg.convs_per_block = 3;
  EXPECT_EQ(count_scalars(build_backbone(cfg, 1).parameters()), expected_backbone_scalars(cfg));
}

TEST(Backbone, StrideAndDilationSchedule) {
  const auto s = backbone_strides();
  EXPECT_EQ(std::vector<std::size_t>(s.begin(), s.end()), (std::vector<std::size_t>{2, 2, 2, 1, 1}));
  BackboneConfig cfg;
  auto d = backbone_dilations(cfg);
  EXPECT_EQ(std::vector<std::size_t>(d.begin(), d.end()), (std::vector<std::size_t>{1, 1, 1, 2, 4}));
  cfg.dilated = false;
  d = backbone_dilations(cfg);
  EXPECT_EQ(std::vector<std::size_t>(d.begin(), d.end()), (std::vector<std::size_t>{1, 1, 1, 1, 1}));
}

TEST(Backbone, PyramidResolutions) {
  const Backbone net = build_backbone({}, 2);
  for (std::size_t size : {16u, 24u, 32u, 64u}) {
    Tape tape;
    const FeaturePyramid f = net.forward(tape, Tensor::full({1, 3, size, size}, 0.5));
    EXPECT_EQ(f.f(1).shape().h, size / 2);
    EXPECT_EQ(f.f(2).shape().h, size / 4);
    EXPECT_EQ(f.f(3).shape().h, size / 8);
    EXPECT_EQ(f.f(4).shape().h, size / 8);
    EXPECT_EQ(f.f(5).shape().w, size / 8);
    EXPECT_EQ(f.f(5).shape().c, 128u);
  }
  Tape tape;
  const FeaturePyramid f = net.forward(tape, Tensor::zeros({1, 3, 64, 64}));
  EXPECT_EQ(f.f(2).shape(), (Shape{1, 16, 16, 16}));
  EXPECT_EQ(f.f(5).shape(), (Shape{1, 128, 8, 8}));
  for (double v : f.f(5).data()) EXPECT_EQ(v, 0.0);
}

TEST(Backbone, RejectsBadInput) {
  const Backbone net = build_backbone({}, 2);
  Tape tape;
  EXPECT_THROW(net.forward(tape, Tensor::zeros({1, 3, 60, 64})), DimensionError);
  EXPECT_THROW(net.forward(tape, Tensor::zeros({1, 3, 8, 8})), DimensionError);
  EXPECT_THROW(net.forward(tape, Tensor::zeros({1, 1, 64, 64})), DimensionError);
}

TEST(Backbone, DilationEnlargesReceptiveField) {
  BackboneConfig dilated, plain;
  plain.dilated = false;
  EXPECT_GT(backbone_receptive_field(dilated, 128), backbone_receptive_field(plain, 128));
}

TEST(Isd, RatesDouble) {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto r = isd_rates(n);
    ASSERT_EQ(r.size(), n);
    for (std::size_t k = 0; k < n; ++k) EXPECT_EQ(r[k], std::size_t{1} << k);
  }
  EXPECT_THROW(isd_rates(0), UsageError);
}

TEST(Isd, ProbeReachIsCumulative) {
  for (std::size_t n = 1; n <= 5; ++n) {
    const IsdProbe p = probe_isd(n, true);
    EXPECT_EQ(p.deepest_reach, (std::size_t{1} << n) - 1) << n;
    EXPECT_EQ(p.output_reach, (std::size_t{1} << n) - 1) << n;
    for (std::size_t k = 0; k < n; ++k) EXPECT_EQ(p.branch_reach[k], (std::size_t{2} << k) - 1);
    EXPECT_EQ(gradient_reach(n, true), p.deepest_reach);
  }
}

TEST(Isd, ProbeReachWithoutInterBranch) {
  for (std::size_t n = 1; n <= 5; ++n) {
    const IsdProbe p = probe_isd(n, false);
    for (std::size_t k = 0; k < n; ++k) EXPECT_EQ(p.branch_reach[k], std::size_t{1} << k);
    EXPECT_EQ(gradient_reach(n, false), std::size_t{1} << (n - 1));
  }
}

TEST(Isd, ShapeAndZeroInput) {
  const Isd isd = build_isd({5, 6, 4, 3, true}, 4);
  Tape tape;
  const Tensor y = isd.forward(tape, Tensor::zeros({1, 6, 8, 8}));
  EXPECT_EQ(y.shape(), (Shape{1, 3, 8, 8}));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(isd.forward(tape, Tensor::zeros({1, 5, 8, 8})), DimensionError);
}

TEST(Isd, SingleBranchIsPlainConv) {
  const IsdProbe p = probe_isd(1, true);
  EXPECT_EQ(p.rates, (std::vector<std::size_t>{1}));
  EXPECT_EQ(p.deepest_reach, 1u);
  EXPECT_EQ(probe_isd(1, false).deepest_reach, 1u);
}

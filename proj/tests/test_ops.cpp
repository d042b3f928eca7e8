#include <gtest/gtest.h>

#include <cmath>

#include "banet/error.hpp"
#include "banet/gradcheck.hpp"
#include "banet/rng.hpp"
#include "banet/tape.hpp"

using namespace banet;

namespace {

Tensor random_tensor(Rng& rng, const Shape& s, bool grad = false) {
  std::vector<double> v(s.numel());
  for (auto& x : v) x = rng.normal();
  return Tensor::from(s, std::move(v), grad);
}

}  // namespace

TEST(Conv2d, OnesKernelCountsNeighbours) {
  Tape tape;
  const Tensor x = Tensor::full({1, 1, 3, 3}, 1.0);
  const Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
  const Tensor b = Tensor::zeros({1, 1, 1, 1});
  const Tensor y = ops::conv2d(tape, x, w, b, {1, 1, 1});
  const std::vector<double> expect{4, 6, 4, 6, 9, 6, 4, 6, 4};
  ASSERT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(y.data()[i], expect[i]);
}

TEST(Conv2d, IdentityOneByOne) {
  Rng rng(3);
  Tape tape;
  const Tensor x = random_tensor(rng, {1, 1, 5, 4});
  const Tensor y = ops::conv2d(tape, x, Tensor::full({1, 1, 1, 1}, 1.0), Tensor::zeros({1, 1, 1, 1}), {});
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(Conv2d, DilatedTapsSkipPixels) {
  // With dilation 2 and a centred impulse the 3x3 kernel lands on offsets {-2,0,2}.
  Tape tape;
  Tensor x = Tensor::zeros({1, 1, 7, 7});
  x.at(0, 0, 3, 3) = 1.0;
  const Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
  const Tensor y = ops::conv2d(tape, x, w, Tensor::zeros({1, 1, 1, 1}), {1, 2, 2});
  for (std::size_t yy = 0; yy < 7; ++yy)
    for (std::size_t xx = 0; xx < 7; ++xx) {
      const bool hit = (yy == 1 || yy == 3 || yy == 5) && (xx == 1 || xx == 3 || xx == 5);
      EXPECT_EQ(y.at(0, 0, yy, xx), hit ? 1.0 : 0.0) << yy << "," << xx;
    }
}

TEST(Conv2d, PaddedExtentIsPreserved) {
  for (std::size_t d : {1u, 2u, 4u, 8u}) {
    for (std::size_t n : {5u, 8u, 16u}) {
      EXPECT_EQ(conv_output_extent(n, 3, {1, d, d}), n);
    }
  }
  EXPECT_EQ(conv_output_extent(64, 3, {2, 1, 1}), 32u);
}

TEST(Conv2d, ChannelMismatchThrows) {
  Tape tape;
  EXPECT_THROW(ops::conv2d(tape, Tensor::zeros({1, 2, 4, 4}), Tensor::zeros({1, 3, 3, 3}),
                           Tensor::zeros({1, 1, 1, 1}), {1, 1, 1}),
               DimensionError);
}

TEST(Upsample, HalfPixelCentres) {
  Tape tape;
  const Tensor x = Tensor::from({1, 1, 1, 2}, {0.0, 1.0});
  const Tensor y = ops::upsample_bilinear(tape, x, 1, 4);
  const std::vector<double> expect{0.0, 0.25, 0.75, 1.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(y.data()[i], expect[i], 1e-15);
}

TEST(Upsample, ConstantAndIdentity) {
  Rng rng(5);
  Tape tape;
  const Tensor c = ops::upsample_bilinear(tape, Tensor::full({1, 2, 3, 3}, 0.7), 24, 24);
  for (double v : c.data()) EXPECT_NEAR(v, 0.7, 1e-15);
  const Tensor x = random_tensor(rng, {1, 1, 6, 5});
  const Tensor same = ops::upsample_bilinear(tape, x, 6, 5);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(same.data()[i], x.data()[i], 1e-15);
}

TEST(Elementwise, SigmoidRangeAndValues) {
  Tape tape;
  const Tensor y = ops::sigmoid(tape, Tensor::from({1, 1, 1, 4}, {0.0, 2.0, -800.0, 800.0}));
  EXPECT_DOUBLE_EQ(y.data()[0], 0.5);
  EXPECT_NEAR(y.data()[1], 0.8807970779778823, 1e-15);
  EXPECT_GT(y.data()[2], 0.0);
  EXPECT_LT(y.data()[3], 1.0);
}

TEST(Elementwise, AddMulAffineConcat) {
  Tape tape;
  const Tensor a = Tensor::from({1, 1, 1, 3}, {1, 2, 3});
  const Tensor b = Tensor::from({1, 1, 1, 3}, {-1, 0.5, 4});
  EXPECT_EQ(ops::add(tape, a, b).data()[2], 7.0);
  EXPECT_EQ(ops::mul(tape, a, b).data()[1], 1.0);
  EXPECT_EQ(ops::affine(tape, a, -1.0, 1.0).data()[0], 0.0);
  const Tensor c = ops::concat_channels(tape, {a, b});
  ASSERT_EQ(c.shape(), (Shape{1, 2, 1, 3}));
  EXPECT_EQ(c.at(0, 1, 0, 2), 4.0);
  EXPECT_EQ(ops::sum(tape, a).item(), 6.0);
  EXPECT_THROW(ops::add(tape, a, Tensor::zeros({1, 1, 3, 1})), DimensionError);
}

TEST(Bce, KnownValues) {
  Tape tape;
  EXPECT_NEAR(ops::bce_loss(tape, Tensor::full({1, 1, 2, 2}, 0.5), Tensor::zeros({1, 1, 2, 2})).item(),
              std::log(2.0), 1e-15);
  EXPECT_NEAR(ops::bce_loss(tape, Tensor::scalar(0.9), Tensor::scalar(1.0)).item(), 0.105360516, 1e-9);
  EXPECT_LT(ops::bce_loss(tape, Tensor::from({1, 1, 1, 2}, {1.0, 0.0}), Tensor::from({1, 1, 1, 2}, {1.0, 0.0})).item(),
            1e-10);
}

TEST(Backward, SumGivesOnes) {
  Tape tape;
  Tensor x = Tensor::full({1, 2, 2, 2}, 3.0, true);
  tape.backward(ops::sum(tape, x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SquareGivesTwoX) {
  Rng rng(9);
  Tape tape;
  Tensor x = random_tensor(rng, {1, 1, 3, 3}, true);
  tape.backward(ops::sum(tape, ops::mul(tape, x, x)));
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_DOUBLE_EQ(x.grad()[i], 2.0 * x.data()[i]);
}

TEST(Backward, LeafGradientsAccumulateUntilZeroed) {
  Tensor x = Tensor::full({1, 1, 1, 2}, 1.0, true);
  for (int k = 0; k < 3; ++k) {
    Tape tape;
    tape.backward(ops::sum(tape, x));
  }
  EXPECT_EQ(x.grad()[0], 3.0);
  x.zero_grad();
  EXPECT_EQ(x.grad()[0], 0.0);
}

TEST(Backward, RejectsForeignOrNonScalarLoss) {
  Tape tape, other;
  Tensor x = Tensor::full({1, 1, 1, 2}, 1.0, true);
  const Tensor s = ops::sum(other, x);
  EXPECT_THROW(tape.backward(s), UsageError);
  EXPECT_THROW(tape.backward(ops::mul(tape, x, x)), UsageError);
}

TEST(Backward, UntrackedInputsRecordNothing) {
  Tape tape;
  ops::relu(tape, ops::sigmoid(tape, Tensor::full({1, 1, 2, 2}, 0.3)));
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Backward, ConvMatchesFiniteDifferences) {
  Rng rng(11);
  const Tensor x = random_tensor(rng, {1, 2, 6, 5}, true);
  const Tensor w = random_tensor(rng, {3, 2, 3, 3}, true);
  const Tensor b = random_tensor(rng, {1, 1, 1, 3}, true);
  for (ConvGeometry g : {ConvGeometry{1, 1, 1}, ConvGeometry{2, 1, 1}, ConvGeometry{1, 2, 2}, ConvGeometry{2, 3, 3}}) {
    const Tensor probe = random_tensor(rng, {1, 3, conv_output_extent(6, 3, g), conv_output_extent(5, 3, g)});
    auto loss = [&](Tape& t) { return ops::sum(t, ops::mul(t, ops::conv2d(t, x, w, b, g), probe)); };
    const auto r = check_gradients(loss, {{"x", x}, {"w", w}, {"b", b}});
    EXPECT_LT(r.max_relative_error, 1e-7) << r.worst;
  }
}

TEST(Backward, UpsampleMatchesFiniteDifferences) {
  Rng rng(12);
  const Tensor x = random_tensor(rng, {1, 2, 3, 4}, true);
  const Tensor probe = random_tensor(rng, {1, 2, 10, 7});
  auto loss = [&](Tape& t) { return ops::sum(t, ops::mul(t, ops::upsample_bilinear(t, x, 10, 7), probe)); };
  EXPECT_LT(check_gradients(loss, {{"x", x}}).max_relative_error, 1e-7);
}

TEST(Backward, ElementwiseSuite) {
  EXPECT_LT(run_elementwise_gradcheck(1).max_relative_error, 1e-6);
}

TEST(Determinism, RepeatedForwardBackwardIsBitwise) {
  auto run = [] {
    Rng rng(21);
    const Tensor x = random_tensor(rng, {1, 2, 8, 8}, true);
    const Tensor w = random_tensor(rng, {2, 2, 3, 3}, true);
    Tape t;
    const Tensor y = ops::sigmoid(t, ops::conv2d(t, x, w, Tensor::zeros({1, 1, 1, 2}), {1, 2, 2}));
    const Tensor l = ops::bce_loss(t, y, Tensor::full(y.shape(), 1.0));
    t.backward(l);
    std::vector<double> out(w.grad().begin(), w.grad().end());
    out.push_back(l.item());
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Tensor, FromValidatesLengthAndFiniteness) {
  EXPECT_THROW(Tensor::from({1, 1, 2, 2}, {1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor::from({1, 1, 1, 1}, {std::nan("")}), NumericError);
  const Tensor a = Tensor::full({1, 1, 1, 1}, 2.0);
  const Tensor b = a;
  const Tensor c = a.clone();
  EXPECT_TRUE(a.same_storage(b));
  EXPECT_FALSE(a.same_storage(c));
}

#include "banet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "banet/image.hpp"
#include "banet/morphology.hpp"
#include "banet/rng.hpp"

namespace banet {

double relative_error(double analytic, double numeric, double floor) {
  const double den = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / den;
}

GradCheckResult check_gradients(const std::function<Tensor(Tape&)>& loss_fn,
                                const std::vector<GradTarget>& targets, double step) {
  for (const auto& t : targets) {
    Tensor x = t.tensor;
    x.set_requires_grad(true);
    x.zero_grad();
  }
  {
    Tape tape;
    const Tensor loss = loss_fn(tape);
    tape.backward(loss);
  }
  GradCheckResult result;
  auto eval = [&] {
    Tape tape;
    return loss_fn(tape).item();
  };
  for (const auto& t : targets) {
    Tensor x = t.tensor;
    const std::vector<double> analytic(x.grad().begin(), x.grad().end());
    auto data = x.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + step;
      const double up = eval();
      data[i] = saved - step;
      const double down = eval();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic.empty() ? 0.0 : analytic[i];
      const double err = relative_error(a, numeric);
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst = t.label + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

NetworkConfig gradcheck_network_config() {
  NetworkConfig c;
  c.backbone.channels = {4, 4, 4, 4, 4};
  c.width_scale = 1.0 / 64.0;  // boundary 2, transition 4
  c.isd_mid_channels = 2;
  c.isd_out_channels = 3;
  return c;
}

namespace {

Tensor random_tensor(Rng& rng, const Shape& s, double lo, double hi) {
  std::vector<double> v(s.numel());
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(s, std::move(v));
}

}  // namespace

GradCheckResult run_network_gradcheck(std::size_t size, std::uint64_t seed, std::size_t* parameter_count) {
  Network net(gradcheck_network_config(), seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (const auto& p : net.parameters()) {
    if (p.decay) continue;
    Tensor b = p.tensor;
    for (double& v : b.mutable_data()) v = 0.1 * rng.normal();
  }
  const Tensor image = random_tensor(rng, Shape{1, 3, size, size}, 0.0, 1.0);
  Plane mask(size, size);
  for (std::size_t y = size / 4; y < 3 * size / 4; ++y)
    for (std::size_t x = size / 4 + 1; x < 3 * size / 4; ++x) mask.at(y, x) = 1.0;
  const Tensor g = to_tensor(mask);
  const Tensor gb = to_tensor(make_boundary_gt(mask, 1));

  std::vector<GradTarget> targets;
  for (const auto& p : net.parameters()) targets.push_back({p.name, p.tensor});
  if (parameter_count) *parameter_count = count_scalars(net.parameters());
  return check_gradients(
      [&](Tape& tape) {
        const ForwardRecord r = net.forward(tape, image);
        return total_loss(tape, r, g, gb).total;
      },
      targets);
}

GradCheckResult run_elementwise_gradcheck(std::uint64_t seed) {
  Rng rng(seed);
  const Shape s{1, 2, 3, 4};
  Tensor a = random_tensor(rng, s, -2.0, 2.0);
  Tensor b = random_tensor(rng, s, -2.0, 2.0);
  Tensor c = random_tensor(rng, Shape{1, 1, 3, 4}, -2.0, 2.0);
  Tensor target = random_tensor(rng, Shape{1, 3, 6, 8}, 0.0, 1.0);
  Tensor weights = random_tensor(rng, Shape{1, 3, 6, 8}, -1.0, 1.0);
  return check_gradients(
      [&](Tape& tape) {
        Tensor x = ops::mul(tape, ops::sigmoid(tape, a), ops::affine(tape, b, 0.7, -0.2));
        x = ops::add(tape, x, ops::mul(tape, a, b));
        Tensor cat = ops::concat_channels(tape, {x, c});
        Tensor up = ops::upsample_bilinear(tape, cat, 6, 8);
        Tensor p = ops::sigmoid(tape, up);
        Tensor l1 = ops::bce_loss(tape, p, target);
        Tensor l2 = ops::sum(tape, ops::mul(tape, up, weights));
        return ops::add(tape, l1, ops::affine(tape, l2, 0.01, 0.0));
      },
      {{"a", a}, {"b", b}, {"c", c}});
}

}  // namespace banet

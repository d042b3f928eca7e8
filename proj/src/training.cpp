#include "banet/training.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "banet/error.hpp"
#include "banet/morphology.hpp"

namespace banet {

double poly_lr(double base, std::size_t iter, std::size_t max_iters, double power) {
  if (max_iters == 0) throw UsageError("poly_lr: max_iters must be positive");
  if (iter > max_iters) {
    throw UsageError("poly_lr: iter " + std::to_string(iter) + " exceeds max_iters " +
                     std::to_string(max_iters));
  }
  const double progress = static_cast<double>(iter) / static_cast<double>(max_iters);
  return base * std::pow(1.0 - progress, power);
}

void sgd_step(std::span<double> param, std::span<const double> grad, std::span<double> velocity,
              double lr, double momentum, double weight_decay) {
  if (param.size() != velocity.size() || (!grad.empty() && grad.size() != param.size())) {
    throw DimensionError("sgd_step: parameter, gradient and velocity lengths differ");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad.empty() ? 0.0 : grad[i];
    velocity[i] = momentum * velocity[i] + (g + weight_decay * param[i]);
    param[i] -= lr * velocity[i];
  }
}

SgdOptimizer::SgdOptimizer(ParameterList params, double momentum, double weight_decay,
                           double head_multiplier)
    : params_(std::move(params)),
      momentum_(momentum),
      weight_decay_(weight_decay),
      head_multiplier_(head_multiplier) {
  for (const auto& p : params_) velocities_.emplace_back(p.tensor.numel(), 0.0);
}

double SgdOptimizer::group_lr(const std::string& group, double lr) const {
  return lr * group_lr_multiplier(group, head_multiplier_);
}

void SgdOptimizer::step(double lr) {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor t = params_[k].tensor;
    sgd_step(t.mutable_data(), t.grad(), velocities_[k], group_lr(params_[k].group, lr), momentum_,
             params_[k].decay ? weight_decay_ : 0.0);
  }
}

void SgdOptimizer::zero_grad() {
  for (const auto& p : params_) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
}

Sample augment_flip(const Sample& sample, bool flip) {
  if (!flip) return sample;
  return Sample{sample.name, flip_horizontal(sample.image), flip_horizontal(sample.mask),
                flip_horizontal(sample.boundary)};
}

Dataset load_dataset(const std::filesystem::path& dir, std::size_t boundary_radius) {
  const auto images = dir / "images";
  const auto masks = dir / "masks";
  if (!std::filesystem::is_directory(images) || !std::filesystem::is_directory(masks)) {
    throw IoError("dataset " + dir.string() + " needs images/ and masks/ subdirectories");
  }
  std::set<std::string> stems;
  for (const auto& e : std::filesystem::directory_iterator(images)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") stems.insert(e.path().stem().string());
  }
  Dataset data;
  for (const auto& stem : stems) {
    Sample s;
    s.name = stem;
    s.image = read_ppm(images / (stem + ".ppm"));
    const auto mask_path = masks / (stem + ".pgm");
    if (!std::filesystem::exists(mask_path)) throw DataError("dataset: no mask for image " + stem);
    s.mask = read_pgm(mask_path);
    for (double& v : s.mask.values) v = v >= 0.5 ? 1.0 : 0.0;
    if (s.mask.height != s.image.height || s.mask.width != s.image.width) {
      throw DataError("dataset: image and mask sizes differ for " + stem);
    }
    s.boundary = make_boundary_gt(s.mask, boundary_radius);
    data.samples.push_back(std::move(s));
  }
  if (data.samples.empty()) throw DataError("dataset " + dir.string() + " contains no images");
  return data;
}

std::string format_log_line(const LossLogEntry& e) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g", e.iter, e.lr, e.l0, e.lb, e.li,
                e.total);
  return buf;
}

TrainState train(const Network& net, const Dataset& data, const TrainConfig& config,
                 const LossCallback& on_iteration) {
  if (data.samples.empty()) throw DataError("train: empty dataset");
  const auto& first = data.samples.front();
  for (const auto& s : data.samples) {
    if (s.image.height != first.image.height || s.image.width != first.image.width ||
        !s.mask.same_extent(s.boundary) || s.mask.height != s.image.height ||
        s.mask.width != s.image.width) {
      throw DataError("train: all images and masks must share one size (" + s.name + ")");
    }
  }
  if (first.image.height % 8 != 0 || first.image.width % 8 != 0) {
    throw DataError("train: image extent must be a multiple of 8");
  }

  SgdOptimizer optimizer(net.parameters(), config.momentum, config.weight_decay,
                         config.head_lr_multiplier);
  Rng rng(config.seed);
  std::vector<std::size_t> order;
  std::size_t cursor = 0;

  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    if (cursor == order.size()) {
      order.resize(data.samples.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      cursor = 0;
    }
    const bool flip = config.flip && rng.coin();
    const Sample sample = augment_flip(data.samples[order[cursor++]], flip);

    Tape tape;
    const ForwardRecord record = net.forward(tape, to_tensor(sample.image));
    const LossBundle loss = total_loss(tape, record, to_tensor(sample.mask), to_tensor(sample.boundary));
    optimizer.zero_grad();
    tape.backward(loss.total);

    const double lr = poly_lr(config.base_lr, iter, config.max_iters, config.poly_power);
    optimizer.step(lr);

    if (on_iteration) {
      on_iteration(LossLogEntry{iter + 1, lr, lr * config.head_lr_multiplier, loss.value_l0(),
                                loss.value_lb(), loss.value_li(), loss.value_total()});
    }
  }
  return TrainState{config.max_iters, optimizer.velocities()};
}

Plane predict(const Network& net, const RgbImage& image) {
  Tape tape;
  const Tensor input = to_tensor(image);
  return to_plane(net.forward(tape, input).s);
}

}  // namespace banet

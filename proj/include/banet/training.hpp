#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "banet/image.hpp"
#include "banet/network.hpp"
#include "banet/rng.hpp"

namespace banet {

struct TrainConfig {
  /// Toy-scale default for randomly initialised weights. The full-scale
  /// reference, fine-tuning a pretrained backbone, is 5e-9.
  double base_lr = 0.01;
  double head_lr_multiplier = 10.0;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t max_iters = 2000;
  double poly_power = 0.9;
  std::uint64_t seed = 1;
  std::size_t boundary_radius = 1;
  bool flip = true;
};

/// base * (1 - iter / max_iters)^power; UsageError when iter > max_iters.
double poly_lr(double base, std::size_t iter, std::size_t max_iters, double power);

/// v <- momentum v + (grad + weight_decay param); param <- param - lr v.
void sgd_step(std::span<double> param, std::span<const double> grad, std::span<double> velocity,
              double lr, double momentum, double weight_decay);

/// Momentum SGD over a parameter list; per-group learning rate is
/// lr * group_lr_multiplier(group). Weight decay only touches tensors with decay set.
class SgdOptimizer {
 public:
  SgdOptimizer(ParameterList params, double momentum, double weight_decay, double head_multiplier);

  void step(double lr);
  void zero_grad();

  const ParameterList& parameters() const { return params_; }
  std::vector<std::vector<double>>& velocities() { return velocities_; }
  const std::vector<std::vector<double>>& velocities() const { return velocities_; }
  double group_lr(const std::string& group, double lr) const;

 private:
  ParameterList params_;
  std::vector<std::vector<double>> velocities_;
  double momentum_;
  double weight_decay_;
  double head_multiplier_;
};

struct Sample {
  std::string name;
  RgbImage image;
  Plane mask;
  Plane boundary;
};

/// Flips image, mask and boundary together when `flip` is set.
Sample augment_flip(const Sample& sample, bool flip);

struct Dataset {
  std::vector<Sample> samples;
};

/// Reads images/NAME.ppm and masks/NAME.pgm; boundaries are regenerated from
/// the mask with the given radius so they always match the training config.
Dataset load_dataset(const std::filesystem::path& dir, std::size_t boundary_radius);

struct LossLogEntry {
  std::size_t iter = 0;  // 1-based
  double lr = 0.0;       // backbone-group learning rate
  double head_lr = 0.0;
  double l0 = 0.0;
  double lb = 0.0;
  double li = 0.0;
  double total = 0.0;
};

/// "iter,lr,L0,LB,LI,total" with 9 significant digits.
std::string format_log_line(const LossLogEntry& e);

struct TrainState {
  std::size_t iteration = 0;
  std::vector<std::vector<double>> velocities;
};

using LossCallback = std::function<void(const LossLogEntry&)>;

/// Batch-1 SGD with poly learning rate and optional horizontal flips. The
/// visiting order is a seeded permutation per pass over the data.
TrainState train(const Network& net, const Dataset& data, const TrainConfig& config,
                 const LossCallback& on_iteration = {});

/// Forward pass without recording; returns S as a plane.
Plane predict(const Network& net, const RgbImage& image);

}  // namespace banet

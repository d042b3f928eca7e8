#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "banet/network.hpp"
#include "banet/tape.hpp"

namespace banet {

inline constexpr double kFiniteDifferenceStep = 1e-5;
/// Denominator floor of the relative error. Below it the comparison is
/// effectively absolute at the 1e-10 level, which is the central-difference
/// noise floor in double precision.
inline constexpr double kRelativeErrorFloor = 1e-6;

double relative_error(double analytic, double numeric, double floor = kRelativeErrorFloor);

struct GradCheckResult {
  std::size_t checked = 0;
  double max_relative_error = 0.0;
  std::string worst;  // "<label>[index]"
};

struct GradTarget {
  std::string label;
  Tensor tensor;
};

/// Compares backprop gradients of loss_fn against central differences for
/// every element of every target. loss_fn must rebuild the loss on the given tape.
GradCheckResult check_gradients(const std::function<Tensor(Tape&)>& loss_fn,
                                const std::vector<GradTarget>& targets,
                                double step = kFiniteDifferenceStep);

/// Micro widths for the full three-stream network.
NetworkConfig gradcheck_network_config();

struct NetworkGradCheck {
  GradCheckResult network;
  GradCheckResult elementwise;
  std::size_t parameter_count = 0;
  double seconds = 0.0;
};

/// Full forward + total loss on a 1x3xSxS input; biases are drawn at random
/// so no ReLU sits exactly on its kink.
GradCheckResult run_network_gradcheck(std::size_t size, std::uint64_t seed, std::size_t* parameter_count = nullptr);

/// sigmoid, add, mul, affine, concat, sum, bce and upsample on random small tensors.
GradCheckResult run_elementwise_gradcheck(std::uint64_t seed);

}  // namespace banet

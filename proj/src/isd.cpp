#include "banet/isd.hpp"

#include "banet/error.hpp"

namespace banet {

std::vector<std::size_t> isd_rates(std::size_t branches) {
  if (branches == 0) throw UsageError("isd: at least one branch is required");
  std::vector<std::size_t> rates(branches);
  for (std::size_t k = 0; k < branches; ++k) rates[k] = std::size_t{1} << k;
  return rates;
}

Isd::Isd(const IsdConfig& config, Rng& rng, const std::string& prefix) : config_(config) {
  if (config.branches == 0) throw UsageError("isd: at least one branch is required");
  const auto rates = isd_rates(config.branches);
  for (std::size_t k = 0; k < config.branches; ++k) {
    const std::string branch = prefix + ".branch" + std::to_string(k + 1);
    compress_.push_back(
        make_conv(rng, branch + ".compress", config.in_channels, config.mid_channels, 1));
    dilated_.push_back(make_conv(rng, branch + ".dilated", config.mid_channels,
                                 config.mid_channels, 3, 1, rates[k]));
  }
  integrate_ = make_conv(rng, prefix + ".integrate", config.branches * config.mid_channels,
                         config.mid_channels, 1);
  project_ = make_conv(rng, prefix + ".project", config.mid_channels, config.out_channels, 1);
}

IsdTrace Isd::trace(Tape& tape, const Tensor& x, Activation act) const {
  if (x.shape().c != config_.in_channels) {
    throw DimensionError("isd: expected " + std::to_string(config_.in_channels) +
                         " channels, got " + std::to_string(x.shape().c));
  }
  IsdTrace out;
  Tensor previous;
  for (std::size_t k = 0; k < config_.branches; ++k) {
    Tensor c = activate(tape, compress_[k](tape, x), act);
    Tensor in = (config_.inter_branch && previous.defined()) ? ops::add(tape, c, previous) : c;
    Tensor b = ops::add(tape, activate(tape, dilated_[k](tape, in), act), c);
    out.branches.push_back(b);
    previous = b;
  }
  Tensor merged = out.branches.size() == 1 ? out.branches.front()
                                           : ops::concat_channels(tape, out.branches);
  out.output = project_(tape, activate(tape, integrate_(tape, merged), act));
  return out;
}

Tensor Isd::forward(Tape& tape, const Tensor& x, Activation act) const {
  return trace(tape, x, act).output;
}

void Isd::append_parameters(ParameterList& out, const std::string& group) const {
  for (std::size_t k = 0; k < config_.branches; ++k) {
    compress_[k].append_to(out, group);
    dilated_[k].append_to(out, group);
  }
  integrate_.append_to(out, group);
  project_.append_to(out, group);
}

std::vector<ConvLayer*> Isd::layers() {
  std::vector<ConvLayer*> all;
  for (std::size_t k = 0; k < config_.branches; ++k) {
    all.push_back(&compress_[k]);
    all.push_back(&dilated_[k]);
  }
  all.push_back(&integrate_);
  all.push_back(&project_);
  return all;
}

Isd build_isd(const IsdConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  return Isd(config, rng);
}

}  // namespace banet

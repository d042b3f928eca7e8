#include "banet/network.hpp"

#include <cmath>

#include "banet/error.hpp"

namespace banet {

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kFull:
      return "full";
    case FusionMode::kIps:
      return "ips";
    case FusionMode::kIpsBls:
      return "ips+bls";
  }
  return "full";
}

FusionMode parse_fusion_mode(const std::string& text) {
  if (text == "full") return FusionMode::kFull;
  if (text == "ips") return FusionMode::kIps;
  if (text == "ips+bls") return FusionMode::kIpsBls;
  throw UsageError("unknown fusion mode '" + text + "' (expected full, ips, ips+bls)");
}

namespace {

std::size_t scaled(double reference, double scale) {
  const auto v = static_cast<std::size_t>(std::lround(reference * scale));
  return v == 0 ? 1 : v;
}

}  // namespace

std::size_t NetworkConfig::boundary_channels() const { return scaled(128.0, width_scale); }
std::size_t NetworkConfig::transition_channels() const { return scaled(256.0, width_scale); }

Tensor mosaic_fuse(Tape& tape, const Tensor& phi_b, const Tensor& phi_i, const Tensor& phi_t,
                   const Tensor& m_b, const Tensor& m_i) {
  const Shape& s = phi_b.shape();
  for (const Tensor* t : {&phi_i, &phi_t, &m_b, &m_i}) {
    if (t->shape() != s) {
      throw DimensionError("mosaic_fuse: shape mismatch " + t->shape().str() + " vs " + s.str());
    }
  }
  const Tensor not_i = ops::affine(tape, m_i, -1.0, 1.0);
  const Tensor not_b = ops::affine(tape, m_b, -1.0, 1.0);
  const Tensor boundary_term = ops::mul(tape, ops::mul(tape, phi_b, not_i), m_b);
  const Tensor interior_term = ops::mul(tape, ops::mul(tape, phi_i, m_i), not_b);
  const Tensor transition_term = ops::mul(tape, ops::mul(tape, phi_t, not_i), not_b);
  return ops::add(tape, ops::add(tape, boundary_term, interior_term), transition_term);
}

double conflict_fraction(const Tensor& m_b, const Tensor& m_i) {
  if (m_b.shape() != m_i.shape()) throw DimensionError("conflict_fraction: shape mismatch");
  const auto b = m_b.data();
  const auto i = m_i.data();
  std::size_t hits = 0;
  for (std::size_t k = 0; k < b.size(); ++k) hits += (b[k] * i[k] > 0.25) ? 1 : 0;
  return b.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(b.size());
}

BoundaryStream::BoundaryStream(const NetworkConfig& config, Rng& rng) {
  const std::size_t width = config.boundary_channels();
  for (std::size_t i = 0; i < kBackboneBlocks; ++i) {
    const std::string level = "boundary.level" + std::to_string(i + 1);
    squeeze_.push_back(
        make_conv(rng, level + ".squeeze", config.backbone.channels[i], width, 3));
    score_.push_back(make_conv(rng, level + ".score", width, 1, 1));
  }
  fuse_ = make_conv(rng, "boundary.fuse", kBackboneBlocks, 1, 1);
  if (config.zero_init_heads) zero_layer(fuse_);
}

Tensor BoundaryStream::forward(Tape& tape, const FeaturePyramid& pyramid, std::size_t out_h,
                               std::size_t out_w, Activation act) const {
  std::vector<Tensor> maps;
  for (std::size_t i = 0; i < kBackboneBlocks; ++i) {
    Tensor x = activate(tape, squeeze_[i](tape, pyramid.levels[i]), act);
    x = score_[i](tape, x);
    maps.push_back(ops::upsample_bilinear(tape, x, out_h, out_w));
  }
  return fuse_(tape, ops::concat_channels(tape, maps));
}

void BoundaryStream::append_parameters(ParameterList& out) const {
  for (std::size_t i = 0; i < kBackboneBlocks; ++i) {
    squeeze_[i].append_to(out, "piB");
    score_[i].append_to(out, "piB");
  }
  fuse_.append_to(out, "piB");
}

namespace {

IsdConfig interior_isd(const NetworkConfig& c) {
  return IsdConfig{c.interior_isd_branches, c.backbone.channels[4], c.isd_mid_channels,
                   c.isd_out_channels, true};
}

IsdConfig transition_isd(const NetworkConfig& c) {
  return IsdConfig{c.transition_isd_branches, c.transition_channels(), c.isd_mid_channels,
                   c.isd_out_channels, true};
}

}  // namespace

InteriorStream::InteriorStream(const NetworkConfig& config, Rng& rng)
    : isd_(interior_isd(config), rng, "interior.isd"),
      head_(make_conv(rng, "interior.head", config.isd_out_channels, 1, 1)) {
  if (config.zero_init_heads) zero_layer(head_);
}

Tensor InteriorStream::forward(Tape& tape, const Tensor& f5, std::size_t out_h,
                               std::size_t out_w, Activation act) const {
  Tensor x = head_(tape, isd_.forward(tape, f5, act));
  return ops::upsample_bilinear(tape, x, out_h, out_w);
}

void InteriorStream::append_parameters(ParameterList& out) const {
  isd_.append_parameters(out, "piI");
  head_.append_to(out, "piI");
}

TransitionStream::TransitionStream(const NetworkConfig& config, Rng& rng)
    : pre3_(make_conv(rng, "transition.pre3", config.backbone.channels[4],
                      config.transition_channels(), 3)),
      pre1_(make_conv(rng, "transition.pre1", config.transition_channels(),
                      config.transition_channels(), 1)),
      project_f2_(make_conv(rng, "transition.project_f2", config.backbone.channels[1],
                            config.transition_channels(), 1)),
      isd_(transition_isd(config), rng, "transition.isd"),
      head_(make_conv(rng, "transition.head", config.isd_out_channels, 1, 1)) {
  if (config.zero_init_heads) zero_layer(head_);
}

Tensor TransitionStream::forward(Tape& tape, const Tensor& f2, const Tensor& f5,
                                 std::size_t out_h, std::size_t out_w, Activation act) const {
  Tensor high = activate(tape, pre3_(tape, f5), act);
  high = activate(tape, pre1_(tape, high), act);
  high = ops::upsample_bilinear(tape, high, f2.shape().h, f2.shape().w);
  Tensor low = project_f2_(tape, f2);
  if (low.shape() != high.shape()) {
    throw DimensionError("transition: projected f2 " + low.shape().str() +
                         " does not match pre-processed f5 " + high.shape().str());
  }
  Tensor x = head_(tape, isd_.forward(tape, ops::add(tape, low, high), act));
  return ops::upsample_bilinear(tape, x, out_h, out_w);
}

void TransitionStream::append_parameters(ParameterList& out) const {
  pre3_.append_to(out, "piT");
  pre1_.append_to(out, "piT");
  project_f2_.append_to(out, "piT");
  isd_.append_parameters(out, "piT");
  head_.append_to(out, "piT");
}

Network::Network(const NetworkConfig& config, std::uint64_t seed)
    : Network(config, Rng(seed)) {}

// Streams draw from one stream in a fixed order: backbone, boundary,
// interior, transition.
Network::Network(const NetworkConfig& config, Rng&& rng)
    : config_(config),
      backbone_(config.backbone, rng),
      boundary_(config.mode != FusionMode::kIps
                    ? std::optional<BoundaryStream>(std::in_place, config, rng)
                    : std::nullopt),
      interior_(config, rng),
      transition_(config.mode == FusionMode::kFull
                      ? std::optional<TransitionStream>(std::in_place, config, rng)
                      : std::nullopt) {
  backbone_.append_parameters(params_);
  if (boundary_) boundary_->append_parameters(params_);
  interior_.append_parameters(params_);
  if (transition_) transition_->append_parameters(params_);
}

ForwardRecord Network::forward(Tape& tape, const Tensor& image) const {
  const Shape& s = image.shape();
  if (s.n != 1) throw DimensionError("network: batch size must be 1, got " + s.str());
  ForwardRecord r;
  r.mode = config_.mode;
  r.pyramid = backbone_.forward(tape, image);
  r.phi_i = interior_.forward(tape, r.pyramid.f(5), s.h, s.w);
  r.m_i = ops::sigmoid(tape, r.phi_i);
  if (boundary_) {
    r.phi_b = boundary_->forward(tape, r.pyramid, s.h, s.w);
    r.m_b = ops::sigmoid(tape, r.phi_b);
  }
  switch (config_.mode) {
    case FusionMode::kIps:
      r.m = r.phi_i;
      r.s = r.m_i;
      return r;
    case FusionMode::kIpsBls:
      r.m = ops::add(tape, r.phi_i, r.phi_b);
      break;
    case FusionMode::kFull:
      r.phi_t = transition_->forward(tape, r.pyramid.f(2), r.pyramid.f(5), s.h, s.w);
      r.m = mosaic_fuse(tape, r.phi_b, r.phi_i, r.phi_t, r.m_b, r.m_i);
      break;
  }
  r.s = ops::sigmoid(tape, r.m);
  return r;
}

LossBundle total_loss(Tape& tape, const ForwardRecord& record, const Tensor& mask,
                      const Tensor& boundary) {
  if (mask.shape() != record.s.shape()) {
    throw DimensionError("total_loss: mask " + mask.shape().str() + " vs prediction " +
                         record.s.shape().str());
  }
  LossBundle out;
  out.l0 = ops::bce_loss(tape, record.s, mask);
  if (record.mode == FusionMode::kIps) {
    // IPS only: the final map is the interior map, so its loss is counted once.
    out.lb = Tensor::scalar(0.0);
    out.li = Tensor::scalar(0.0);
  } else {
    if (boundary.shape() != record.m_b.shape()) {
      throw DimensionError("total_loss: boundary " + boundary.shape().str() + " vs prediction " +
                           record.m_b.shape().str());
    }
    out.lb = ops::bce_loss(tape, record.m_b, boundary);
    out.li = ops::bce_loss(tape, record.m_i, mask);
  }
  out.total = ops::add(tape, ops::add(tape, out.l0, out.lb), out.li);
  return out;
}

double group_lr_multiplier(const std::string& group, double head_multiplier) {
  if (group.size() == 3 && group.starts_with("pi") && group[2] >= '1' && group[2] <= '5') {
    return 1.0;
  }
  return head_multiplier;
}

}  // namespace banet

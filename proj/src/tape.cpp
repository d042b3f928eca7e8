#include "banet/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "banet/error.hpp"

namespace banet {

void Tape::record(TapeNode node) { nodes_.push_back(std::move(node)); }

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw UsageError("backward: loss must be a scalar tensor");
  }
  std::ptrdiff_t last = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(nodes_.size()) - 1; i >= 0; --i) {
    if (nodes_[i].output.same_storage(loss)) {
      last = i;
      break;
    }
  }
  if (last < 0) throw UsageError("backward: loss was not produced by this tape");

  for (std::ptrdiff_t i = 0; i <= last; ++i) {
    auto g = nodes_[i].output.mutable_grad();
    std::fill(g.begin(), g.end(), 0.0);
  }
  Tensor seed = loss;
  seed.mutable_grad()[0] = 1.0;
  for (std::ptrdiff_t i = last; i >= 0; --i) {
    const TapeNode& node = nodes_[i];
    node.backward(node);
  }
}

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const ConvGeometry& g) {
  const std::size_t span = g.dilation * (kernel - 1) + 1;
  if (g.stride == 0 || g.dilation == 0 || kernel == 0) {
    throw DimensionError("conv2d: stride, dilation and kernel must be positive");
  }
  if (in + 2 * g.pad < span) {
    throw DimensionError("conv2d: input extent " + std::to_string(in) +
                         " too small for dilated kernel span " + std::to_string(span));
  }
  return (in + 2 * g.pad - span) / g.stride + 1;
}

namespace {

bool any_requires_grad(std::initializer_list<const Tensor*> ts) {
  for (const Tensor* t : ts) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
  }
}

// Output indices o in [lo, hi) whose input index o * stride + offset lies in [0, in).
struct Range {
  std::ptrdiff_t lo;
  std::ptrdiff_t hi;
};

Range valid_range(std::ptrdiff_t out, std::ptrdiff_t in, std::ptrdiff_t stride,
                  std::ptrdiff_t offset) {
  std::ptrdiff_t lo = offset < 0 ? (-offset + stride - 1) / stride : 0;
  std::ptrdiff_t hi = (in - 1 - offset) < 0 ? 0 : (in - 1 - offset) / stride + 1;
  lo = std::min(lo, out);
  hi = std::min(hi, out);
  if (hi < lo) hi = lo;
  return {lo, hi};
}

// Visits every (output plane offset, input plane offset) pair that a single
// kernel tap touches, row by row. `fn(out_row, in_row, count, in_step)`.
template <class Fn>
void for_each_tap_row(std::ptrdiff_t oh, std::ptrdiff_t ow, std::ptrdiff_t ih, std::ptrdiff_t iw,
                      std::ptrdiff_t stride, std::ptrdiff_t y_off, std::ptrdiff_t x_off, Fn&& fn) {
  const Range ys = valid_range(oh, ih, stride, y_off);
  const Range xs = valid_range(ow, iw, stride, x_off);
  if (xs.hi <= xs.lo) return;
  for (std::ptrdiff_t oy = ys.lo; oy < ys.hi; ++oy) {
    const std::ptrdiff_t iy = oy * stride + y_off;
    fn(oy * ow + xs.lo, iy * iw + xs.lo * stride + x_off, xs.hi - xs.lo);
  }
}

}  // namespace

namespace ops {

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& weight, const Tensor& bias,
              const ConvGeometry& g) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (ws.c != is.c) {
    throw DimensionError("conv2d: input has " + std::to_string(is.c) +
                         " channels, weight expects " + std::to_string(ws.c));
  }
  if (bias.defined() && bias.numel() != ws.n) {
    throw DimensionError("conv2d: bias length " + std::to_string(bias.numel()) +
                         " does not match " + std::to_string(ws.n) + " output channels");
  }
  const std::size_t oh = conv_output_extent(is.h, ws.h, g);
  const std::size_t ow = conv_output_extent(is.w, ws.w, g);
  Tensor out = Tensor::zeros(Shape{is.n, ws.n, oh, ow});

  const auto s = static_cast<std::ptrdiff_t>(g.stride);
  const auto d = static_cast<std::ptrdiff_t>(g.dilation);
  const auto p = static_cast<std::ptrdiff_t>(g.pad);
  const auto IH = static_cast<std::ptrdiff_t>(is.h), IW = static_cast<std::ptrdiff_t>(is.w);
  const auto OH = static_cast<std::ptrdiff_t>(oh), OW = static_cast<std::ptrdiff_t>(ow);
  const std::size_t kh = ws.h, kw = ws.w;

  {
    const auto x = input.data();
    const auto w = weight.data();
    auto y = out.mutable_data();
    for (std::size_t n = 0; n < is.n; ++n) {
      for (std::size_t oc = 0; oc < ws.n; ++oc) {
        double* dst = y.data() + (n * ws.n + oc) * oh * ow;
        if (bias.defined()) std::fill(dst, dst + oh * ow, bias.data()[oc]);
        for (std::size_t ic = 0; ic < is.c; ++ic) {
          const double* src = x.data() + (n * is.c + ic) * is.h * is.w;
          const double* wk = w.data() + (oc * ws.c + ic) * kh * kw;
          for (std::size_t ky = 0; ky < kh; ++ky) {
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const double wv = wk[ky * kw + kx];
              if (wv == 0.0) continue;
              const std::ptrdiff_t yo = static_cast<std::ptrdiff_t>(ky) * d - p;
              const std::ptrdiff_t xo = static_cast<std::ptrdiff_t>(kx) * d - p;
              for_each_tap_row(OH, OW, IH, IW, s, yo, xo,
                               [&](std::ptrdiff_t o, std::ptrdiff_t i, std::ptrdiff_t count) {
                                 double* dr = dst + o;
                                 const double* sr = src + i;
                                 for (std::ptrdiff_t k = 0; k < count; ++k) dr[k] += wv * sr[k * s];
                               });
            }
          }
        }
      }
    }
  }
  require_finite(out.data(), "conv2d");

  if (any_requires_grad({&input, &weight, &bias})) {
    out.set_requires_grad(true);
    tape.record(TapeNode{
        "conv2d",
        {input, weight, bias},
        out,
        [kh, kw, IH, IW, OH, OW, s, d, p](const TapeNode& node) {
          Tensor in = node.inputs[0];
          Tensor wt = node.inputs[1];
          Tensor b = node.inputs[2];
          const Shape& is = in.shape();
          const Shape& ws = wt.shape();
          const auto gy = node.output.grad();
          const auto x = in.data();
          const auto w = wt.data();
          const std::size_t oplane = static_cast<std::size_t>(OH * OW);
          const std::size_t iplane = is.h * is.w;
          if (b.defined() && b.requires_grad()) {
            auto gb = b.mutable_grad();
            for (std::size_t n = 0; n < is.n; ++n) {
              for (std::size_t oc = 0; oc < ws.n; ++oc) {
                const double* gr = gy.data() + (n * ws.n + oc) * oplane;
                double acc = 0.0;
                for (std::size_t k = 0; k < oplane; ++k) acc += gr[k];
                gb[oc] += acc;
              }
            }
          }
          const bool need_w = wt.requires_grad();
          const bool need_x = in.requires_grad();
          if (!need_w && !need_x) return;
          std::span<double> gw = need_w ? wt.mutable_grad() : std::span<double>{};
          std::span<double> gx = need_x ? in.mutable_grad() : std::span<double>{};
          for (std::size_t n = 0; n < is.n; ++n) {
            for (std::size_t oc = 0; oc < ws.n; ++oc) {
              const double* gr = gy.data() + (n * ws.n + oc) * oplane;
              for (std::size_t ic = 0; ic < is.c; ++ic) {
                const double* src = x.data() + (n * is.c + ic) * iplane;
                double* gsrc = need_x ? gx.data() + (n * is.c + ic) * iplane : nullptr;
                const std::size_t wbase = (oc * ws.c + ic) * kh * kw;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                  for (std::size_t kx = 0; kx < kw; ++kx) {
                    const double wv = w[wbase + ky * kw + kx];
                    const std::ptrdiff_t yo = static_cast<std::ptrdiff_t>(ky) * d - p;
                    const std::ptrdiff_t xo = static_cast<std::ptrdiff_t>(kx) * d - p;
                    double acc = 0.0;
                    for_each_tap_row(OH, OW, IH, IW, s, yo, xo,
                                     [&](std::ptrdiff_t o, std::ptrdiff_t i, std::ptrdiff_t count) {
                                       const double* go = gr + o;
                                       if (need_w) {
                                         const double* sr = src + i;
                                         for (std::ptrdiff_t k = 0; k < count; ++k)
                                           acc += go[k] * sr[k * s];
                                       }
                                       if (need_x && wv != 0.0) {
                                         double* gi = gsrc + i;
                                         for (std::ptrdiff_t k = 0; k < count; ++k)
                                           gi[k * s] += wv * go[k];
                                       }
                                     });
                    if (need_w) gw[wbase + ky * kw + kx] += acc;
                  }
                }
              }
            }
          }
        }});
  }
  return out;
}

Tensor upsample_bilinear(Tape& tape, const Tensor& input, std::size_t out_h, std::size_t out_w) {
  const Shape& is = input.shape();
  if (is.numel() == 0) throw DimensionError("upsample_bilinear: empty input");
  if (out_h == 0 || out_w == 0) throw DimensionError("upsample_bilinear: zero output extent");

  struct Tap {
    std::size_t i0;
    std::size_t i1;
    double frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t o = 0; o < out; ++o) {
      double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto i0 = static_cast<std::size_t>(std::floor(src));
      const std::size_t i1 = std::min(i0 + 1, in - 1);
      t[o] = Tap{i0, i1, src - static_cast<double>(i0)};
    }
    return t;
  };
  auto ty = taps(is.h, out_h);
  auto tx = taps(is.w, out_w);

  Tensor out = Tensor::zeros(Shape{is.n, is.c, out_h, out_w});
  {
    const auto x = input.data();
    auto y = out.mutable_data();
    for (std::size_t pl = 0; pl < is.n * is.c; ++pl) {
      const double* src = x.data() + pl * is.h * is.w;
      double* dst = y.data() + pl * out_h * out_w;
      for (std::size_t oy = 0; oy < out_h; ++oy) {
        const Tap& a = ty[oy];
        const double* r0 = src + a.i0 * is.w;
        const double* r1 = src + a.i1 * is.w;
        for (std::size_t ox = 0; ox < out_w; ++ox) {
          const Tap& b = tx[ox];
          const double top = (1.0 - b.frac) * r0[b.i0] + b.frac * r0[b.i1];
          const double bot = (1.0 - b.frac) * r1[b.i0] + b.frac * r1[b.i1];
          dst[oy * out_w + ox] = (1.0 - a.frac) * top + a.frac * bot;
        }
      }
    }
  }
  require_finite(out.data(), "upsample_bilinear");

  if (input.requires_grad()) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"upsample_bilinear",
                         {input},
                         out,
                         [ty = std::move(ty), tx = std::move(tx), out_h, out_w](const TapeNode& node) {
                           Tensor in = node.inputs[0];
                           const Shape& is = in.shape();
                           auto gx = in.mutable_grad();
                           const auto gy = node.output.grad();
                           for (std::size_t pl = 0; pl < is.n * is.c; ++pl) {
                             double* dst = gx.data() + pl * is.h * is.w;
                             const double* src = gy.data() + pl * out_h * out_w;
                             for (std::size_t oy = 0; oy < out_h; ++oy) {
                               const Tap& a = ty[oy];
                               for (std::size_t ox = 0; ox < out_w; ++ox) {
                                 const Tap& b = tx[ox];
                                 const double gv = src[oy * out_w + ox];
                                 dst[a.i0 * is.w + b.i0] += (1.0 - a.frac) * (1.0 - b.frac) * gv;
                                 dst[a.i0 * is.w + b.i1] += (1.0 - a.frac) * b.frac * gv;
                                 dst[a.i1 * is.w + b.i0] += a.frac * (1.0 - b.frac) * gv;
                                 dst[a.i1 * is.w + b.i1] += a.frac * b.frac * gv;
                               }
                             }
                           }
                         }});
  }
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& input) {
  // |x| <= 36 keeps the result strictly inside (0, 1) in double precision.
  constexpr double kSaturation = 36.0;
  Tensor out = Tensor::zeros(input.shape());
  {
    const auto x = input.data();
    auto y = out.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = std::clamp(x[i], -kSaturation, kSaturation);
      if (v >= 0.0) {
        y[i] = 1.0 / (1.0 + std::exp(-v));
      } else {
        const double e = std::exp(v);
        y[i] = e / (1.0 + e);
      }
    }
  }
  require_finite(out.data(), "sigmoid");
  if (input.requires_grad()) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"sigmoid", {input}, out, [](const TapeNode& node) {
                           Tensor in = node.inputs[0];
                           auto gx = in.mutable_grad();
                           const auto gy = node.output.grad();
                           const auto y = node.output.data();
                           for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * y[i] * (1.0 - y[i]);
                         }});
  }
  return out;
}

Tensor relu(Tape& tape, const Tensor& input) {
  Tensor out = Tensor::zeros(input.shape());
  {
    const auto x = input.data();
    auto y = out.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
  if (input.requires_grad()) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"relu", {input}, out, [](const TapeNode& node) {
                           Tensor in = node.inputs[0];
                           auto gx = in.mutable_grad();
                           const auto gy = node.output.grad();
                           const auto x = in.data();
                           for (std::size_t i = 0; i < gx.size(); ++i) {
                             if (x[i] > 0.0) gx[i] += gy[i];
                           }
                         }});
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape());
  {
    const auto x = a.data();
    const auto z = b.data();
    auto y = out.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + z[i];
  }
  require_finite(out.data(), "add");
  if (any_requires_grad({&a, &b})) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"add", {a, b}, out, [](const TapeNode& node) {
                           const auto gy = node.output.grad();
                           for (Tensor t : node.inputs) {
                             if (!t.requires_grad()) continue;
                             auto gx = t.mutable_grad();
                             for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
                           }
                         }});
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape());
  {
    const auto x = a.data();
    const auto z = b.data();
    auto y = out.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * z[i];
  }
  require_finite(out.data(), "mul");
  if (any_requires_grad({&a, &b})) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"mul", {a, b}, out, [](const TapeNode& node) {
                           Tensor lhs = node.inputs[0];
                           Tensor rhs = node.inputs[1];
                           const auto gy = node.output.grad();
                           if (lhs.requires_grad()) {
                             auto g = lhs.mutable_grad();
                             const auto v = rhs.data();
                             for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * v[i];
                           }
                           if (rhs.requires_grad()) {
                             auto g = rhs.mutable_grad();
                             const auto v = lhs.data();
                             for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * v[i];
                           }
                         }});
  }
  return out;
}

Tensor affine(Tape& tape, const Tensor& x, double scale, double shift) {
  Tensor out = Tensor::zeros(x.shape());
  {
    const auto v = x.data();
    auto y = out.mutable_data();
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = scale * v[i] + shift;
  }
  require_finite(out.data(), "affine");
  if (x.requires_grad()) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"affine", {x}, out, [scale](const TapeNode& node) {
                           Tensor in = node.inputs[0];
                           auto g = in.mutable_grad();
                           const auto gy = node.output.grad();
                           for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * gy[i];
                         }});
  }
  return out;
}

Tensor concat_channels(Tape& tape, const std::vector<Tensor>& inputs) {
  if (inputs.empty()) throw DimensionError("concat_channels: no inputs");
  const Shape& first = inputs.front().shape();
  std::size_t channels = 0;
  bool grad = false;
  for (const Tensor& t : inputs) {
    const Shape& s = t.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw DimensionError("concat_channels: spatial mismatch " + s.str() + " vs " + first.str());
    }
    channels += s.c;
    grad = grad || t.requires_grad();
  }
  Tensor out = Tensor::zeros(Shape{first.n, channels, first.h, first.w});
  const std::size_t plane = first.h * first.w;
  {
    auto y = out.mutable_data();
    for (std::size_t n = 0; n < first.n; ++n) {
      std::size_t c0 = 0;
      for (const Tensor& t : inputs) {
        const std::size_t len = t.shape().c * plane;
        const auto x = t.data();
        std::copy_n(x.data() + n * len, len, y.data() + (n * channels + c0) * plane);
        c0 += t.shape().c;
      }
    }
  }
  if (grad) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"concat_channels", inputs, out, [channels, plane](const TapeNode& node) {
                           const auto gy = node.output.grad();
                           const std::size_t batch = node.output.shape().n;
                           std::size_t c0 = 0;
                           for (Tensor t : node.inputs) {
                             const std::size_t len = t.shape().c * plane;
                             if (t.requires_grad()) {
                               auto g = t.mutable_grad();
                               for (std::size_t n = 0; n < batch; ++n) {
                                 const double* src = gy.data() + (n * channels + c0) * plane;
                                 for (std::size_t i = 0; i < len; ++i) g[n * len + i] += src[i];
                               }
                             }
                             c0 += t.shape().c;
                           }
                         }});
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  Tensor out = Tensor::scalar(acc);
  if (x.requires_grad()) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"sum", {x}, out, [](const TapeNode& node) {
                           Tensor in = node.inputs[0];
                           auto g = in.mutable_grad();
                           const double gy = node.output.grad()[0];
                           for (double& v : g) v += gy;
                         }});
  }
  return out;
}

Tensor bce_loss(Tape& tape, const Tensor& prediction, const Tensor& target) {
  require_same_shape(prediction, target, "bce_loss");
  const auto p = prediction.data();
  const auto g = target.data();
  const double inv_n = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
    acc -= g[i] * std::log(pc) + (1.0 - g[i]) * std::log(1.0 - pc);
  }
  Tensor out = Tensor::scalar(acc * inv_n);
  if (prediction.requires_grad()) {
    out.set_requires_grad(true);
    tape.record(TapeNode{"bce_loss", {prediction, target}, out, [inv_n](const TapeNode& node) {
                           Tensor pred = node.inputs[0];
                           const auto t = node.inputs[1].data();
                           const auto p = pred.data();
                           auto gp = pred.mutable_grad();
                           const double gy = node.output.grad()[0] * inv_n;
                           for (std::size_t i = 0; i < p.size(); ++i) {
                             const double pc = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
                             gp[i] += gy * (pc - t[i]) / (pc * (1.0 - pc));
                           }
                         }});
  }
  return out;
}

}  // namespace ops
}  // namespace banet

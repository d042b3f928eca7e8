#include "banet/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "banet/error.hpp"
#include "banet/morphology.hpp"
#include "banet/rng.hpp"

namespace banet {

namespace {

using Color = std::array<double, 3>;

enum class ShapeKind { kEllipse, kRectangle, kBlob };

struct ShapeDraw {
  ShapeKind kind;
  double cy, cx, ry, rx, angle;
  double wobble1, phase1, wobble2, phase2;
  int lobes1, lobes2;
};

bool inside(const ShapeDraw& s, double y, double x) {
  const double dy = y - s.cy, dx = x - s.cx;
  const double c = std::cos(s.angle), sn = std::sin(s.angle);
  const double u = (c * dx + sn * dy) / s.rx;
  const double v = (-sn * dx + c * dy) / s.ry;
  switch (s.kind) {
    case ShapeKind::kEllipse:
      return u * u + v * v <= 1.0;
    case ShapeKind::kRectangle:
      return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
    case ShapeKind::kBlob: {
      const double theta = std::atan2(v, u);
      const double r = 1.0 + s.wobble1 * std::sin(s.lobes1 * theta + s.phase1) +
                       s.wobble2 * std::sin(s.lobes2 * theta + s.phase2);
      return std::sqrt(u * u + v * v) <= r;
    }
  }
  return false;
}

Color random_color(Rng& rng) { return {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)}; }

double max_channel_gap(const Color& a, const Color& b) {
  double g = 0.0;
  for (std::size_t c = 0; c < 3; ++c) g = std::max(g, std::abs(a[c] - b[c]));
  return g;
}

SynthSample generate_one(const SynthSpec& spec, Rng& rng, std::size_t index) {
  const std::size_t n = spec.size;
  const double size = static_cast<double>(n);
  for (;;) {
    SynthSample out;
    out.name = [&] {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%04zu", index);
      return std::string(buf);
    }();
    out.image = RgbImage(n, n);
    out.background = RgbImage(n, n);
    out.mask = Plane(n, n);

    const Color bg = random_color(rng);
    const Color gradient = {rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15)};
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        const double t = (static_cast<double>(x) + static_cast<double>(y)) / (2.0 * size) - 0.5;
        for (std::size_t c = 0; c < 3; ++c) {
          const double v = std::clamp(bg[c] + gradient[c] * t + 0.02 * (rng.uniform() - 0.5), 0.0, 1.0);
          out.background.at(c, y, x) = v;
          out.image.at(c, y, x) = v;
        }
      }

    const std::size_t objects = 1 + rng.below(3);
    for (std::size_t k = 0; k < objects; ++k) {
      ShapeDraw s{};
      s.kind = static_cast<ShapeKind>(rng.below(3));
      s.cy = rng.uniform(0.2, 0.8) * size;
      s.cx = rng.uniform(0.2, 0.8) * size;
      s.ry = rng.uniform(0.1, 0.28) * size;
      s.rx = rng.uniform(0.1, 0.28) * size;
      s.angle = rng.uniform(0.0, std::numbers::pi);
      s.wobble1 = rng.uniform(0.1, 0.3);
      s.phase1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
      s.wobble2 = rng.uniform(0.0, 0.15);
      s.phase2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
      s.lobes1 = 2 + static_cast<int>(rng.below(3));
      s.lobes2 = 5 + static_cast<int>(rng.below(3));

      Color base = random_color(rng);
      while (max_channel_gap(base, bg) < 0.35) base = random_color(rng);
      const Color tone = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      const std::size_t cell = 2 + rng.below(3);
      const std::size_t cells = (n + cell - 1) / cell;
      std::vector<unsigned char> pattern(cells * cells);
      for (auto& p : pattern) p = rng.coin() ? 1 : 0;

      Plane own(n, n);
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x)
          own.at(y, x) = inside(s, static_cast<double>(y) + 0.5, static_cast<double>(x) + 0.5) ? 1.0 : 0.0;
      const Plane core = erode(own, kRimWidth);
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
          if (own.at(y, x) == 0.0) continue;
          out.mask.at(y, x) = 1.0;
          const double sign = pattern[(y / cell) * cells + x / cell] ? 0.5 : -0.5;
          const bool rim = core.at(y, x) == 0.0;
          for (std::size_t c = 0; c < 3; ++c) {
            double v = std::clamp(base[c] + spec.interior_texture_amplitude * sign * tone[c], 0.0, 1.0);
            if (rim) v = (1.0 - spec.boundary_contrast) * v + spec.boundary_contrast * out.background.at(c, y, x);
            out.image.at(c, y, x) = v;
          }
        }
    }

    double fg = 0.0;
    for (double v : out.mask.values) fg += v;
    out.foreground_fraction = fg / static_cast<double>(n * n);
    if (out.foreground_fraction < kMinForeground || out.foreground_fraction > kMaxForeground) continue;
    out.boundary = make_boundary_gt(out.mask, spec.boundary_radius);
    return out;
  }
}

}  // namespace

std::vector<SynthSample> generate_synth(const SynthSpec& spec) {
  if (spec.size == 0 || spec.size % 8 != 0) throw UsageError("synth: size must be a positive multiple of 8");
  if (spec.interior_texture_amplitude < 0.0 || spec.interior_texture_amplitude > 1.0 ||
      spec.boundary_contrast < 0.0 || spec.boundary_contrast > 1.0) {
    throw UsageError("synth: texture amplitude and boundary contrast must lie in [0, 1]");
  }
  Rng rng(spec.seed);
  std::vector<SynthSample> out;
  for (std::size_t i = 0; i < spec.count; ++i) out.push_back(generate_one(spec, rng, i));
  return out;
}

SynthManifest synth_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  const auto samples = generate_synth(spec);
  std::error_code ec;
  for (const char* sub : {"images", "masks", "boundaries"}) {
    std::filesystem::create_directories(out_dir / sub, ec);
    if (ec) throw IoError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }
  SynthManifest manifest;
  std::ofstream list(out_dir / "manifest.txt", std::ios::binary | std::ios::trunc);
  if (!list) throw IoError("cannot write " + (out_dir / "manifest.txt").string());
  char buf[256];
  std::snprintf(buf, sizeof(buf), "# count=%zu size=%zu seed=%llu texture=%.17g contrast=%.17g radius=%zu\n",
                spec.count, spec.size, static_cast<unsigned long long>(spec.seed),
                spec.interior_texture_amplitude, spec.boundary_contrast, spec.boundary_radius);
  list << buf;
  for (const auto& s : samples) {
    write_ppm(out_dir / "images" / (s.name + ".ppm"), s.image);
    write_pgm(out_dir / "masks" / (s.name + ".pgm"), s.mask);
    write_pgm(out_dir / "boundaries" / (s.name + ".pgm"), s.boundary);
    std::snprintf(buf, sizeof(buf), "%s,%.9g\n", s.name.c_str(), s.foreground_fraction);
    list << buf;
    manifest.names.push_back(s.name);
    manifest.foreground_fractions.push_back(s.foreground_fraction);
  }
  if (!list) throw IoError("write failed for manifest");
  return manifest;
}

}  // namespace banet

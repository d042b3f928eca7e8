#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "banet/tensor.hpp"

namespace banet {

/// Single-channel H x W map, row-major. Saliency maps and masks.
struct Plane {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), values(h * w, fill) {}

  std::size_t size() const { return values.size(); }
  double at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
  double& at(std::size_t y, std::size_t x) { return values[y * width + x]; }
  bool same_extent(const Plane& o) const { return height == o.height && width == o.width; }
  bool operator==(const Plane&) const = default;
};

/// Three-channel image stored planar (channel, y, x), values in [0, 1].
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  RgbImage() = default;
  RgbImage(std::size_t h, std::size_t w) : height(h), width(w), values(3 * h * w, 0.0) {}
  double& at(std::size_t c, std::size_t y, std::size_t x) { return values[(c * height + y) * width + x]; }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return values[(c * height + y) * width + x];
  }
  bool operator==(const RgbImage&) const = default;
};

Tensor to_tensor(const Plane& p);
Tensor to_tensor(const RgbImage& img);
/// Channel `c` of batch item 0.
Plane to_plane(const Tensor& t, std::size_t c = 0);

Plane flip_horizontal(const Plane& p);
RgbImage flip_horizontal(const RgbImage& img);

/// Binary PGM (P5) and PPM (P6) with maxval 255. Reads scale bytes by 1/255;
/// writes store round(v * 255) clamped to [0, 255].
Plane read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Plane& plane);
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

std::uint8_t quantize_byte(double v);

}  // namespace banet

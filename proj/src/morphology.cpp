#include "banet/morphology.hpp"

#include <algorithm>
#include <vector>

namespace banet {

namespace {

// Separable square-window reduction. `any` selects dilation (OR, outside = 0),
// otherwise erosion (AND, outside = 1).
Plane window_reduce(const Plane& mask, std::size_t radius, bool any) {
  const std::size_t h = mask.height, w = mask.width;
  const auto r = static_cast<std::ptrdiff_t>(radius);
  std::vector<unsigned char> bin(h * w), rows(h * w);
  for (std::size_t i = 0; i < bin.size(); ++i) bin[i] = mask.values[i] >= 0.5 ? 1 : 0;

  auto reduce_line = [&](auto get, auto set, std::ptrdiff_t len) {
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      bool acc = !any;
      for (std::ptrdiff_t k = i - r; k <= i + r; ++k) {
        const bool v = (k < 0 || k >= len) ? !any : get(k) != 0;
        acc = any ? (acc || v) : (acc && v);
      }
      set(i, acc ? 1 : 0);
    }
  };
  for (std::size_t y = 0; y < h; ++y) {
    reduce_line([&](std::ptrdiff_t x) { return bin[y * w + x]; },
                [&](std::ptrdiff_t x, unsigned char v) { rows[y * w + x] = v; },
                static_cast<std::ptrdiff_t>(w));
  }
  Plane out(h, w);
  for (std::size_t x = 0; x < w; ++x) {
    reduce_line([&](std::ptrdiff_t y) { return rows[y * w + x]; },
                [&](std::ptrdiff_t y, unsigned char v) { out.values[y * w + x] = v; },
                static_cast<std::ptrdiff_t>(h));
  }
  return out;
}

}  // namespace

Plane dilate(const Plane& mask, std::size_t radius) { return window_reduce(mask, radius, true); }

Plane erode(const Plane& mask, std::size_t radius) { return window_reduce(mask, radius, false); }

Plane make_boundary_gt(const Plane& mask, std::size_t radius) {
  const Plane grown = dilate(mask, radius);
  const Plane shrunk = erode(mask, radius);
  Plane band(mask.height, mask.width);
  for (std::size_t i = 0; i < band.size(); ++i) {
    band.values[i] = (grown.values[i] != shrunk.values[i]) ? 1.0 : 0.0;
  }
  return band;
}

}  // namespace banet

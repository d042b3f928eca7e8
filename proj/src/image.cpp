#include "banet/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "banet/error.hpp"

namespace banet {

Tensor to_tensor(const Plane& p) {
  return Tensor::from(Shape{1, 1, p.height, p.width}, p.values);
}

Tensor to_tensor(const RgbImage& img) {
  return Tensor::from(Shape{1, 3, img.height, img.width}, img.values);
}

Plane to_plane(const Tensor& t, std::size_t c) {
  const Shape& s = t.shape();
  if (c >= s.c) throw DimensionError("to_plane: channel out of range for " + s.str());
  Plane p(s.h, s.w);
  const auto d = t.data();
  std::copy_n(d.begin() + static_cast<std::ptrdiff_t>(c * s.h * s.w), s.h * s.w, p.values.begin());
  return p;
}

Plane flip_horizontal(const Plane& p) {
  Plane out(p.height, p.width);
  for (std::size_t y = 0; y < p.height; ++y)
    for (std::size_t x = 0; x < p.width; ++x) out.at(y, x) = p.at(y, p.width - 1 - x);
  return out;
}

RgbImage flip_horizontal(const RgbImage& img) {
  RgbImage out(img.height, img.width);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x) out.at(c, y, x) = img.at(c, y, img.width - 1 - x);
  return out;
}

std::uint8_t quantize_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v * 255.0), 0.0, 255.0));
}

namespace {

struct PnmHeader {
  std::size_t width = 0;
  std::size_t height = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Parses "Pn <w> <h> <maxval>" with '#' comments; leaves `pos` at the first
// pixel byte (after the single whitespace that ends the header).
PnmHeader parse_header(const std::string& bytes, char kind, std::size_t& pos,
                       const std::filesystem::path& path) {
  const std::string where = path.string();
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != kind) {
    throw FormatError(where + ": expected magic P" + std::string(1, kind));
  }
  pos = 2;
  auto next_number = [&]() -> std::size_t {
    while (pos < bytes.size()) {
      const auto ch = static_cast<unsigned char>(bytes[pos]);
      if (ch == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(ch)) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      throw FormatError(where + ": malformed header");
    }
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (v > (1u << 24)) throw FormatError(where + ": header value too large");
      ++pos;
    }
    return v;
  };
  PnmHeader h;
  h.width = next_number();
  h.height = next_number();
  const std::size_t maxval = next_number();
  if (h.width == 0 || h.height == 0) throw FormatError(where + ": zero image extent");
  if (maxval != 255) throw FormatError(where + ": only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError(where + ": malformed header");
  }
  ++pos;
  return h;
}

void write_bytes(const std::filesystem::path& path, const std::string& header,
                 const std::vector<std::uint8_t>& pixels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

Plane read_pgm(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  std::size_t pos = 0;
  const PnmHeader h = parse_header(bytes, '5', pos, path);
  if (bytes.size() - pos < h.width * h.height) throw FormatError(path.string() + ": truncated pixel data");
  Plane p(h.height, h.width);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p.values[i] = static_cast<double>(static_cast<unsigned char>(bytes[pos + i])) / 255.0;
  }
  return p;
}

void write_pgm(const std::filesystem::path& path, const Plane& plane) {
  std::vector<std::uint8_t> px(plane.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize_byte(plane.values[i]);
  write_bytes(path, "P5\n" + std::to_string(plane.width) + " " + std::to_string(plane.height) + "\n255\n", px);
}

RgbImage read_ppm(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  std::size_t pos = 0;
  const PnmHeader h = parse_header(bytes, '6', pos, path);
  if (bytes.size() - pos < 3 * h.width * h.height) throw FormatError(path.string() + ": truncated pixel data");
  RgbImage img(h.height, h.width);
  for (std::size_t y = 0; y < h.height; ++y)
    for (std::size_t x = 0; x < h.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const auto b = static_cast<unsigned char>(bytes[pos + (y * h.width + x) * 3 + c]);
        img.at(c, y, x) = static_cast<double>(b) / 255.0;
      }
  return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  std::vector<std::uint8_t> px(3 * image.height * image.width);
  for (std::size_t y = 0; y < image.height; ++y)
    for (std::size_t x = 0; x < image.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) px[(y * image.width + x) * 3 + c] = quantize_byte(image.at(c, y, x));
  write_bytes(path, "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n", px);
}

}  // namespace banet

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "banet/image.hpp"

namespace banet {

/// Synthetic saliency scenes: 1-3 shapes on a smooth background. Object
/// interiors carry strong two-tone texture (interior_texture_amplitude) and
/// a 2-pixel rim blended toward the background (boundary_contrast = 1 makes
/// the rim match the background exactly).
struct SynthSpec {
  std::size_t count = 8;
  std::size_t size = 64;
  std::uint64_t seed = 1;
  double interior_texture_amplitude = 0.5;
  double boundary_contrast = 0.5;
  std::size_t boundary_radius = 1;
};

inline constexpr double kMinForeground = 0.05;
inline constexpr double kMaxForeground = 0.6;
inline constexpr std::size_t kRimWidth = 2;

struct SynthSample {
  std::string name;
  RgbImage image;
  Plane mask;
  Plane boundary;
  double foreground_fraction = 0.0;
  /// Background colour per pixel, exposed for rim checks.
  RgbImage background;
};

/// Deterministic in its argument (including the seed). size must be a positive multiple of 8.
std::vector<SynthSample> generate_synth(const SynthSpec& spec);

struct SynthManifest {
  std::vector<std::string> names;
  std::vector<double> foreground_fractions;
};

/// Writes images/NAME.ppm, masks/NAME.pgm, boundaries/NAME.pgm and manifest.txt.
SynthManifest synth_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace banet

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "banet/image.hpp"

namespace banet {

inline constexpr std::size_t kThresholds = 256;
inline constexpr double kDefaultBeta2 = 0.3;
/// Adaptive thresholds are capped at 1 - this, so the rule is defined when 2 * mean(S) >= 1.
inline constexpr double kAdaptiveCapEpsilon = 1e-12;

double mae(const Plane& saliency, const Plane& mask);

/// (1 + b2) P R / (b2 P + R), 0 when the denominator is 0.
double fbeta(double precision, double recall, double beta2 = kDefaultBeta2);

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 0.0;
};

/// Precision is 1 when nothing is predicted positive; recall is 1 when the
/// mask has no positives.
PrecisionRecall precision_recall(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

/// Per-map min-max normalisation to integers 0..255 (constant maps give 0).
std::vector<std::uint8_t> quantize_minmax(const Plane& saliency);

/// Pooled true/false positive counts per threshold; merge() is associative.
struct SweepCounts {
  std::array<std::uint64_t, kThresholds> tp{};
  std::array<std::uint64_t, kThresholds> fp{};
  std::array<std::uint64_t, kThresholds> fn{};

  void accumulate(const Plane& saliency, const Plane& mask);
  void merge(const SweepCounts& other);
};

struct PRPoint {
  int threshold = 0;
  double precision = 1.0;
  double recall = 0.0;
};

struct Curves {
  std::array<PRPoint, kThresholds> pr{};
  std::array<double, kThresholds> fmeasure{};
};

Curves curves_from_counts(const SweepCounts& counts, double beta2 = kDefaultBeta2);

/// Binarises each quantised map at q >= t for t = 0..255, pooling counts over the set.
Curves threshold_sweep(std::span<const Plane> saliency, std::span<const Plane> masks);

/// Binarise at min(2 mean(S), 1 - eps) and score with fbeta.
double adaptive_fbeta(const Plane& saliency, const Plane& mask, double beta2 = kDefaultBeta2);

/// Constants of the weighted F-measure of Margolin et al. (CVPR 2014).
struct WeightedFConfig {
  double sigma = 5.0;              // Gaussian dependency kernel
  std::size_t kernel_size = 7;
  double importance_decay = 5.0;   // background weight 2 - exp(ln(0.5) / decay * dist)
  double beta2 = 1.0;
};

/// Weighted F-measure: errors inside the object are smoothed by a Gaussian
/// over the nearest-foreground error field, background errors are amplified
/// with distance from the object. Requires at least one foreground pixel.
double weighted_fbeta(const Plane& saliency, const Plane& mask, const WeightedFConfig& config = {});

struct ImageScores {
  std::string name;
  double mae = 0.0;
  double adaptive_fbeta = 0.0;
  double weighted_fbeta = 0.0;
};

struct EvalReport {
  std::vector<ImageScores> images;
  double mean_mae = 0.0;
  double mean_adaptive_fbeta = 0.0;
  double mean_weighted_fbeta = 0.0;
  double max_fmeasure = 0.0;
  double mean_fmeasure = 0.0;
  Curves curves;
};

EvalReport evaluate_pairs(const std::vector<std::string>& names, std::span<const Plane> saliency,
                          std::span<const Plane> masks);

/// Pairs every .pgm in `predictions_dir` with the same filename in `gt_dir`.
EvalReport evaluate(const std::filesystem::path& predictions_dir, const std::filesystem::path& gt_dir);

/// report.txt (key,value), pr_curve.csv (threshold,precision,recall) and
/// fmeasure_curve.csv (threshold,fmeasure); 9 significant digits.
void write_report(const EvalReport& report, const std::filesystem::path& out_dir);

std::string format_report(const EvalReport& report);

}  // namespace banet

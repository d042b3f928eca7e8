#include "banet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "banet/error.hpp"

namespace banet {

namespace {

void require_pair(const Plane& s, const Plane& g, const char* op) {
  if (!s.same_extent(g)) {
    throw DimensionError(std::string(op) + ": saliency " + std::to_string(s.height) + "x" +
                         std::to_string(s.width) + " vs mask " + std::to_string(g.height) + "x" +
                         std::to_string(g.width));
  }
  if (s.size() == 0) throw DimensionError(std::string(op) + ": empty map");
}

bool positive(double g) { return g >= 0.5; }

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

double mae(const Plane& saliency, const Plane& mask) {
  require_pair(saliency, mask, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < saliency.size(); ++i) acc += std::abs(saliency.values[i] - mask.values[i]);
  return acc / static_cast<double>(saliency.size());
}

double fbeta(double precision, double recall, double beta2) {
  const double den = beta2 * precision + recall;
  if (den <= 0.0) return 0.0;
  return (1.0 + beta2) * precision * recall / den;
}

PrecisionRecall precision_recall(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  PrecisionRecall pr;
  pr.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  pr.recall = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return pr;
}

std::vector<std::uint8_t> quantize_minmax(const Plane& saliency) {
  std::vector<std::uint8_t> q(saliency.size(), 0);
  if (saliency.size() == 0) return q;
  const auto [lo, hi] = std::minmax_element(saliency.values.begin(), saliency.values.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return q;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = static_cast<std::uint8_t>(
        std::clamp(std::round((saliency.values[i] - *lo) / range * 255.0), 0.0, 255.0));
  }
  return q;
}

void SweepCounts::accumulate(const Plane& saliency, const Plane& mask) {
  require_pair(saliency, mask, "threshold_sweep");
  const auto q = quantize_minmax(saliency);
  // Histogram per class, then suffix sums give counts of q >= t.
  std::array<std::uint64_t, kThresholds> pos{}, neg{};
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (positive(mask.values[i])) {
      ++pos[q[i]];
    } else {
      ++neg[q[i]];
    }
  }
  const std::uint64_t total_pos = std::accumulate(pos.begin(), pos.end(), std::uint64_t{0});
  std::uint64_t above_pos = 0, above_neg = 0;
  for (std::size_t t = kThresholds; t-- > 0;) {
    above_pos += pos[t];
    above_neg += neg[t];
    tp[t] += above_pos;
    fp[t] += above_neg;
    fn[t] += total_pos - above_pos;
  }
}

void SweepCounts::merge(const SweepCounts& other) {
  for (std::size_t t = 0; t < kThresholds; ++t) {
    tp[t] += other.tp[t];
    fp[t] += other.fp[t];
    fn[t] += other.fn[t];
  }
}

Curves curves_from_counts(const SweepCounts& counts, double beta2) {
  Curves c;
  for (std::size_t t = 0; t < kThresholds; ++t) {
    const PrecisionRecall pr = precision_recall(counts.tp[t], counts.fp[t], counts.fn[t]);
    c.pr[t] = PRPoint{static_cast<int>(t), pr.precision, pr.recall};
    c.fmeasure[t] = fbeta(pr.precision, pr.recall, beta2);
  }
  return c;
}

Curves threshold_sweep(std::span<const Plane> saliency, std::span<const Plane> masks) {
  if (saliency.empty()) throw UsageError("threshold_sweep: empty set");
  if (saliency.size() != masks.size()) throw UsageError("threshold_sweep: unpaired sets");
  SweepCounts counts;
  for (std::size_t i = 0; i < saliency.size(); ++i) counts.accumulate(saliency[i], masks[i]);
  return curves_from_counts(counts);
}

double adaptive_fbeta(const Plane& saliency, const Plane& mask, double beta2) {
  require_pair(saliency, mask, "adaptive_fbeta");
  const double mean =
      std::accumulate(saliency.values.begin(), saliency.values.end(), 0.0) / static_cast<double>(saliency.size());
  const double threshold = std::min(2.0 * mean, 1.0 - kAdaptiveCapEpsilon);
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    const bool pred = saliency.values[i] >= threshold;
    const bool gt = positive(mask.values[i]);
    tp += (pred && gt) ? 1 : 0;
    fp += (pred && !gt) ? 1 : 0;
    fn += (!pred && gt) ? 1 : 0;
  }
  const PrecisionRecall pr = precision_recall(tp, fp, fn);
  return fbeta(pr.precision, pr.recall, beta2);
}

namespace {

struct NearestForeground {
  std::vector<double> distance;       // Euclidean, 0 on foreground
  std::vector<std::size_t> index;     // raster index of the nearest foreground pixel
};

// Expanding search over offsets ordered by squared distance. Among equally
// distant foreground pixels the smallest raster index wins.
NearestForeground nearest_foreground(const std::vector<bool>& fg, std::size_t h, std::size_t w) {
  const auto H = static_cast<std::ptrdiff_t>(h), W = static_cast<std::ptrdiff_t>(w);
  std::map<std::ptrdiff_t, std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>>> rings;
  for (std::ptrdiff_t dy = -(H - 1); dy <= H - 1; ++dy)
    for (std::ptrdiff_t dx = -(W - 1); dx <= W - 1; ++dx) rings[dy * dy + dx * dx].emplace_back(dy, dx);

  NearestForeground out;
  out.distance.assign(h * w, 0.0);
  out.index.assign(h * w, 0);
  for (std::ptrdiff_t y = 0; y < H; ++y) {
    for (std::ptrdiff_t x = 0; x < W; ++x) {
      const auto self = static_cast<std::size_t>(y * W + x);
      if (fg[self]) {
        out.index[self] = self;
        continue;
      }
      for (const auto& [d2, offsets] : rings) {
        std::size_t best = std::numeric_limits<std::size_t>::max();
        for (const auto& [dy, dx] : offsets) {
          const std::ptrdiff_t yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
          const auto idx = static_cast<std::size_t>(yy * W + xx);
          if (fg[idx]) best = std::min(best, idx);
        }
        if (best != std::numeric_limits<std::size_t>::max()) {
          out.index[self] = best;
          out.distance[self] = std::sqrt(static_cast<double>(d2));
          break;
        }
      }
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  std::vector<double> k(size * size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) {
      const double y = static_cast<double>(i) - c, x = static_cast<double>(j) - c;
      k[i * size + j] = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      total += k[i * size + j];
    }
  for (double& v : k) v /= total;
  return k;
}

}  // namespace

double weighted_fbeta(const Plane& saliency, const Plane& mask, const WeightedFConfig& config) {
  require_pair(saliency, mask, "weighted_fbeta");
  const std::size_t h = mask.height, w = mask.width, n = mask.size();
  std::vector<bool> fg(n);
  std::size_t fg_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    fg[i] = positive(mask.values[i]);
    fg_count += fg[i] ? 1 : 0;
  }
  if (fg_count == 0) throw UsageError("weighted_fbeta: mask has no foreground");

  std::vector<double> err(n);
  for (std::size_t i = 0; i < n; ++i) err[i] = std::abs(saliency.values[i] - (fg[i] ? 1.0 : 0.0));

  const NearestForeground nearest = nearest_foreground(fg, h, w);
  std::vector<double> spread(n);
  for (std::size_t i = 0; i < n; ++i) spread[i] = fg[i] ? err[i] : err[nearest.index[i]];

  // Zero-padded 'same' correlation with the normalised Gaussian.
  const auto kernel = gaussian_kernel(config.kernel_size, config.sigma);
  const auto ks = static_cast<std::ptrdiff_t>(config.kernel_size);
  const std::ptrdiff_t half = (ks - 1) / 2;
  std::vector<double> smoothed(n, 0.0);
  for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(h); ++y)
    for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(w); ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = 0; i < ks; ++i) {
        const std::ptrdiff_t yy = y + i - half;
        if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(h)) continue;
        for (std::ptrdiff_t j = 0; j < ks; ++j) {
          const std::ptrdiff_t xx = x + j - half;
          if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(w)) continue;
          acc += kernel[static_cast<std::size_t>(i * ks + j)] * spread[static_cast<std::size_t>(yy * static_cast<std::ptrdiff_t>(w) + xx)];
        }
      }
      smoothed[static_cast<std::size_t>(y * static_cast<std::ptrdiff_t>(w) + x)] = acc;
    }

  const double alpha = std::log(0.5) / config.importance_decay;
  double fg_err = 0.0, bg_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (fg[i]) {
      fg_err += std::min(err[i], smoothed[i]);
    } else {
      bg_err += err[i] * (2.0 - std::exp(alpha * nearest.distance[i]));
    }
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double tp = static_cast<double>(fg_count) - fg_err;
  const double recall = 1.0 - fg_err / static_cast<double>(fg_count);
  const double precision = tp / (eps + tp + bg_err);
  return (1.0 + config.beta2) * recall * precision / (eps + recall + config.beta2 * precision);
}

EvalReport evaluate_pairs(const std::vector<std::string>& names, std::span<const Plane> saliency,
                          std::span<const Plane> masks) {
  if (saliency.empty()) throw UsageError("evaluate: empty set");
  if (saliency.size() != masks.size() || names.size() != saliency.size()) {
    throw UsageError("evaluate: unpaired sets");
  }
  EvalReport report;
  SweepCounts counts;
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    if (!saliency[i].same_extent(masks[i])) {
      throw DataError("evaluate: size mismatch for " + names[i]);
    }
    ImageScores s;
    s.name = names[i];
    s.mae = mae(saliency[i], masks[i]);
    s.adaptive_fbeta = adaptive_fbeta(saliency[i], masks[i]);
    s.weighted_fbeta = weighted_fbeta(saliency[i], masks[i]);
    counts.accumulate(saliency[i], masks[i]);
    report.images.push_back(s);
  }
  const auto count = static_cast<double>(report.images.size());
  for (const auto& s : report.images) {
    report.mean_mae += s.mae / count;
    report.mean_adaptive_fbeta += s.adaptive_fbeta / count;
    report.mean_weighted_fbeta += s.weighted_fbeta / count;
  }
  report.curves = curves_from_counts(counts);
  for (double f : report.curves.fmeasure) {
    report.max_fmeasure = std::max(report.max_fmeasure, f);
    report.mean_fmeasure += f / static_cast<double>(kThresholds);
  }
  return report;
}

namespace {

std::set<std::string> pgm_names(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::set<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      names.insert(entry.path().filename().string());
    }
  }
  return names;
}

}  // namespace

EvalReport evaluate(const std::filesystem::path& predictions_dir, const std::filesystem::path& gt_dir) {
  const auto preds = pgm_names(predictions_dir);
  const auto gts = pgm_names(gt_dir);
  for (const auto& name : preds) {
    if (!gts.contains(name)) throw DataError("evaluate: no ground truth for " + name);
  }
  for (const auto& name : gts) {
    if (!preds.contains(name)) throw DataError("evaluate: no prediction for " + name);
  }
  if (preds.empty()) throw DataError("evaluate: no .pgm files in " + predictions_dir.string());
  std::vector<std::string> names(preds.begin(), preds.end());
  std::vector<Plane> s, g;
  for (const auto& name : names) {
    s.push_back(read_pgm(predictions_dir / name));
    g.push_back(read_pgm(gt_dir / name));
    if (!s.back().same_extent(g.back())) throw DataError("evaluate: size mismatch for " + name);
  }
  return evaluate_pairs(names, s, g);
}

std::string format_report(const EvalReport& report) {
  std::string out;
  auto line = [&](const std::string& k, double v) { out += k + "," + fmt9(v) + "\n"; };
  out += "images," + std::to_string(report.images.size()) + "\n";
  line("mae", report.mean_mae);
  line("adaptive_fbeta", report.mean_adaptive_fbeta);
  line("weighted_fbeta", report.mean_weighted_fbeta);
  line("max_fmeasure", report.max_fmeasure);
  line("mean_fmeasure", report.mean_fmeasure);
  for (const auto& s : report.images) {
    line("image." + s.name + ".mae", s.mae);
    line("image." + s.name + ".adaptive_fbeta", s.adaptive_fbeta);
    line("image." + s.name + ".weighted_fbeta", s.weighted_fbeta);
  }
  return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream f(out_dir / file, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (out_dir / file).string());
    f << text;
  };
  write("report.txt", format_report(report));
  std::string pr, fm;
  for (std::size_t t = 0; t < kThresholds; ++t) {
    const PRPoint& p = report.curves.pr[t];
    pr += std::to_string(p.threshold) + "," + fmt9(p.precision) + "," + fmt9(p.recall) + "\n";
    fm += std::to_string(t) + "," + fmt9(report.curves.fmeasure[t]) + "\n";
  }
  write("pr_curve.csv", pr);
  write("fmeasure_curve.csv", fm);
}

}  // namespace banet

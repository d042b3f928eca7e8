#pragma once

// Straight-line reference implementations used as test oracles. They share no
// code with the library beyond the Plane container.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "banet/image.hpp"
#include "banet/rng.hpp"

namespace oracle {

inline double mosaic(double pb, double pi, double pt, double mb, double mi) {
  return pb * (1.0 - mi) * mb + pi * mi * (1.0 - mb) + pt * (1.0 - mi) * (1.0 - mb);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double mae(const banet::Plane& s, const banet::Plane& g) {
  double acc = 0.0;
  for (std::size_t y = 0; y < s.height; ++y)
    for (std::size_t x = 0; x < s.width; ++x) acc += std::fabs(s.at(y, x) - g.at(y, x));
  return acc / double(s.height * s.width);
}

inline double fbeta(double p, double r, double b2) {
  if (b2 * p + r == 0.0) return 0.0;
  return (1.0 + b2) * p * r / (b2 * p + r);
}

inline void pr_from(double tp, double fp, double fn, double& p, double& r) {
  p = (tp + fp == 0.0) ? 1.0 : tp / (tp + fp);
  r = (tp + fn == 0.0) ? 1.0 : tp / (tp + fn);
}

inline int quantize(double v, double lo, double hi) {
  if (!(hi > lo)) return 0;
  double q = std::round((v - lo) * 255.0 / (hi - lo));
  if (q < 0) q = 0;
  if (q > 255) q = 255;
  return int(q);
}

// Precision/recall per threshold, counts pooled over the set.
inline void sweep(const std::vector<banet::Plane>& s, const std::vector<banet::Plane>& g,
                  std::vector<double>& precision, std::vector<double>& recall,
                  std::vector<double>& fmeasure) {
  precision.assign(256, 0.0);
  recall.assign(256, 0.0);
  fmeasure.assign(256, 0.0);
  for (int t = 0; t < 256; ++t) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      double lo = s[k].values[0], hi = s[k].values[0];
      for (double v : s[k].values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      for (std::size_t i = 0; i < s[k].values.size(); ++i) {
        const bool pred = quantize(s[k].values[i], lo, hi) >= t;
        const bool gt = g[k].values[i] >= 0.5;
        if (pred && gt) tp += 1;
        if (pred && !gt) fp += 1;
        if (!pred && gt) fn += 1;
      }
    }
    pr_from(tp, fp, fn, precision[t], recall[t]);
    fmeasure[t] = fbeta(precision[t], recall[t], 0.3);
  }
}

inline double adaptive_fbeta(const banet::Plane& s, const banet::Plane& g) {
  double sum = 0.0;
  for (double v : s.values) sum += v;
  const double th = std::min(2.0 * sum / double(s.values.size()), 1.0 - 1e-12);
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const bool pred = s.values[i] >= th;
    const bool gt = g.values[i] >= 0.5;
    if (pred && gt) tp += 1;
    if (pred && !gt) fp += 1;
    if (!pred && gt) fn += 1;
  }
  double p, r;
  pr_from(tp, fp, fn, p, r);
  return fbeta(p, r, 0.3);
}

// Weighted F-measure written directly from its definition: error field,
// nearest-foreground propagation (exhaustive scan, first minimum in raster
// order), 7x7 sigma-5 Gaussian with zero padding, distance-based background
// importance, beta^2 = 1.
inline double weighted_fbeta(const banet::Plane& s, const banet::Plane& g) {
  const int h = int(g.height), w = int(g.width);
  auto fg = [&](int y, int x) { return g.at(y, x) >= 0.5; };
  std::vector<double> e(h * w), et(h * w), dist(h * w, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) e[y * w + x] = std::fabs(s.at(y, x) - (fg(y, x) ? 1.0 : 0.0));
  double nfg = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (fg(y, x)) {
        et[y * w + x] = e[y * w + x];
        nfg += 1;
        continue;
      }
      int best = -1;
      long best_d2 = std::numeric_limits<long>::max();
      for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
          if (!fg(yy, xx)) continue;
          const long d2 = long(yy - y) * (yy - y) + long(xx - x) * (xx - x);
          if (d2 < best_d2) {
            best_d2 = d2;
            best = yy * w + xx;
          }
        }
      et[y * w + x] = e[best];
      dist[y * w + x] = std::sqrt(double(best_d2));
    }
  double k[7][7], ksum = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      k[i][j] = std::exp(-double((i - 3) * (i - 3) + (j - 3) * (j - 3)) / 50.0);
      ksum += k[i][j];
    }
  double fg_err = 0.0, bg_err = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (fg(y, x)) {
        double ea = 0.0;
        for (int i = 0; i < 7; ++i)
          for (int j = 0; j < 7; ++j) {
            const int yy = y + i - 3, xx = x + j - 3;
            if (yy >= 0 && yy < h && xx >= 0 && xx < w) ea += k[i][j] / ksum * et[yy * w + xx];
          }
        fg_err += std::min(e[y * w + x], ea);
      } else {
        bg_err += e[y * w + x] * (2.0 - std::exp(std::log(0.5) / 5.0 * dist[y * w + x]));
      }
    }
  const double eps = std::numeric_limits<double>::epsilon();
  const double tpw = nfg - fg_err;
  const double r = 1.0 - fg_err / nfg;
  const double p = tpw / (eps + tpw + bg_err);
  return 2.0 * r * p / (eps + r + p);
}

// Brute-force square-element morphology; outside is background for dilation,
// foreground for erosion.
inline banet::Plane boundary(const banet::Plane& m, int r) {
  const int h = int(m.height), w = int(m.width);
  banet::Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool any = false, all = true;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          const bool inside = yy >= 0 && yy < h && xx >= 0 && xx < w;
          const bool v = inside ? m.at(yy, xx) >= 0.5 : false;
          any = any || v;
          all = all && (inside ? v : true);
        }
      out.at(y, x) = (any != all) ? 1.0 : 0.0;
    }
  return out;
}

// Random 8x8 evaluation instance: a saliency map with a mix of smooth,
// saturated and constant regions, and a mask with at least one positive.
struct Instance {
  banet::Plane s;
  banet::Plane g;
};

inline Instance random_instance(banet::Rng& rng, std::size_t side = 8) {
  Instance in{banet::Plane(side, side), banet::Plane(side, side)};
  const int kind = int(rng.below(4));
  for (std::size_t i = 0; i < side * side; ++i) {
    double v = rng.uniform();
    if (kind == 1) v = std::round(v * 4.0) / 4.0;
    if (kind == 2 && rng.coin(0.3)) v = rng.coin() ? 0.0 : 1.0;
    in.s.values[i] = v;
  }
  const double density = rng.uniform(0.1, 0.7);
  for (auto& v : in.g.values) v = rng.coin(density) ? 1.0 : 0.0;
  in.g.values[rng.below(side * side)] = 1.0;
  if (kind == 3) {
    // correlated prediction
    for (std::size_t i = 0; i < side * side; ++i)
      in.s.values[i] = std::clamp(in.g.values[i] * 0.7 + 0.3 * rng.uniform(), 0.0, 1.0);
  }
  return in;
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "circleflow/error.hpp"
#include "circleflow/image.hpp"
#include "circleflow/optics_sim.hpp"
#include "circleflow/random.hpp"

namespace circleflow::test {

inline Image random_image(int w, int h, int c, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  SplitMix64 rng(seed);
  Image img(w, h, c);
  for (double& v : img.values()) v = lo + (hi - lo) * rng.uniform();
  return img;
}

inline Image ramp_x(int w, int h, int c = 1) {
  Image img(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) img.at(x, y, ch) = static_cast<double>(x) / w;
  return img;
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

inline double dot(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

// Replicate-border true convolution, straight from the definition.
inline double conv_at(const Image& img, const Kernel& k, int x, int y, int c = 0) {
  const int r = k.radius();
  double s = 0.0;
  for (int j = -r; j <= r; ++j) {
    for (int i = -r; i <= r; ++i) {
      const int sx = std::clamp(x - i, 0, img.width() - 1);
      const int sy = std::clamp(y - j, 0, img.height() - 1);
      s += k.at(i + r, j + r) * img.at(sx, sy, c);
    }
  }
  return s;
}

// Sampled anisotropic Gaussian, renormalized.
inline Kernel gaussian_kernel(int side, double sxx, double sxy, double syy, double ox = 0.0, double oy = 0.0) {
  const int r = side / 2;
  const double det = sxx * syy - sxy * sxy;
  std::vector<double> w(static_cast<std::size_t>(side) * side);
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const double x = i - r - ox;
      const double y = j - r - oy;
      w[static_cast<std::size_t>(j) * side + i] = std::exp(-0.5 * (syy * x * x - 2 * sxy * x * y + sxx * y * y) / det);
    }
  }
  return Kernel::normalized(side, w);
}

inline Kernel isotropic(int side, double sigma) { return gaussian_kernel(side, sigma * sigma, 0.0, sigma * sigma); }

// Two-level disk of radius r centered in a w x w canvas, point-sampled 8x8
// per pixel.
inline Image disk(int w, double r, double dark = 0.1, double bright = 0.9, double cx = -1, double cy = -1) {
  if (cx < 0) cx = w / 2.0;
  if (cy < 0) cy = w / 2.0;
  Image img(w, w);
  for (int y = 0; y < w; ++y) {
    for (int x = 0; x < w; ++x) {
      int in = 0;
      for (int sy = 0; sy < 8; ++sy)
        for (int sx = 0; sx < 8; ++sx) {
          const double px = x + (sx + 0.5) / 8.0 - cx;
          const double py = y + (sy + 0.5) / 8.0 - cy;
          in += px * px + py * py < r * r;
        }
      img.at(x, y) = bright + (dark - bright) * in / 64.0;
    }
  }
  return img;
}

// Overlapping random disks painted back to front, 4x4 supersampled; edges at
// all orientations and scales, like a natural scene.
inline Image dead_leaves(int w, int h, std::uint64_t seed, int count = 300) {
  SplitMix64 rng(seed);
  constexpr int ss = 4;
  std::vector<double> fine(static_cast<std::size_t>(w) * h * ss * ss, rng.uniform());
  for (int n = 0; n < count; ++n) {
    const double cx = rng.uniform() * w;
    const double cy = rng.uniform() * h;
    const double r = 2.0 + 14.0 * rng.uniform() * rng.uniform();
    const double v = 0.05 + 0.9 * rng.uniform();
    const int y0 = std::max(0, static_cast<int>((cy - r) * ss));
    const int y1 = std::min(h * ss, static_cast<int>((cy + r) * ss) + 1);
    const int x0 = std::max(0, static_cast<int>((cx - r) * ss));
    const int x1 = std::min(w * ss, static_cast<int>((cx + r) * ss) + 1);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        if (std::hypot((x + 0.5) / ss - cx, (y + 0.5) / ss - cy) < r) fine[static_cast<std::size_t>(y) * w * ss + x] = v;
  }
  Image img(w, h, 1);
  for (int y = 0; y < h * ss; ++y)
    for (int x = 0; x < w * ss; ++x) img.at(x / ss, y / ss) += fine[static_cast<std::size_t>(y) * w * ss + x] / (ss * ss);
  return img;
}

// Noise whose combined variance at mid gray (0.5) is `var`, split evenly
// between the read and shot components.
inline NoiseSpec mid_gray_noise(double var, std::uint64_t seed) {
  NoiseSpec n;
  n.gaussian_var = var / 2;
  n.poisson_scale = 0.5 / (var / 2);
  n.seed = seed;
  return n;
}

template <class F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

}  // namespace circleflow::test

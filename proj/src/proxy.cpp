#include "circleflow/proxy.hpp"

#include <algorithm>

#include "circleflow/error.hpp"
#include "circleflow/imagecore.hpp"

namespace circleflow {

namespace {

// Mean of b over `mask` eroded by r (a pixel survives if its whole window is in the mask).
double eroded_mean(const Image& b, const std::vector<bool>& mask, int r, const char* what) {
  Image m(b.width(), b.height(), 1);
  for (std::size_t i = 0; i < mask.size(); ++i) m.values()[i] = mask[i] ? 1.0 : 0.0;
  const Image er = erode(m, r);
  // Accumulated relative to the first sample so a flat region returns its value exactly.
  double ref = 0.0;
  double sum = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (er.values()[i] > 0.5) {
      if (count == 0) ref = b.values()[i];
      sum += b.values()[i] - ref;
      ++count;
    }
  }
  if (count < kMinRoiPixels) fail(ErrorCode::kEmptyRoi, std::string(what) + " region is too small after erosion");
  return ref + sum / static_cast<double>(count);
}

Image antialiased_latent(const Image& b, double dark, double bright, int s) {
  const int w = b.width();
  const int h = b.height();
  const double mid = 0.5 * (dark + bright);
  auto sample = [&](double fx, double fy) {
    fx = std::clamp(fx, 0.0, w - 1.0);
    fy = std::clamp(fy, 0.0, h - 1.0);
    const int x0 = std::min(static_cast<int>(fx), std::max(0, w - 2));
    const int y0 = std::min(static_cast<int>(fy), std::max(0, h - 2));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double ax = fx - x0;
    const double ay = fy - y0;
    return (1 - ay) * ((1 - ax) * b.at(x0, y0) + ax * b.at(x1, y0)) + ay * ((1 - ax) * b.at(x0, y1) + ax * b.at(x1, y1));
  };
  Image out(w, h, 1);
  const double inv = 1.0 / (static_cast<double>(s) * s);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int dark_count = 0;
      for (int sy = 0; sy < s; ++sy) {
        for (int sx = 0; sx < s; ++sx) {
          if (sample(x + (sx + 0.5) / s - 0.5, y + (sy + 0.5) / s - 0.5) < mid) ++dark_count;
        }
      }
      out.at(x, y) = bright + (dark - bright) * dark_count * inv;
    }
  }
  return out;
}

// Flips pixels that agree with at most one of their 8 neighbours. Toggle
// mapping sends the odd noise outlier deep inside a plateau to the other
// class, and a single such hole is enough to empty the eroded ROI.
void despeckle(std::vector<bool>& mask, int w, int h) {
  std::vector<bool> out = mask;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool v = mask[static_cast<std::size_t>(y) * w + x];
      int same = 0;
      int total = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || x + dx < 0 || x + dx >= w || y + dy < 0 || y + dy >= h) continue;
          ++total;
          same += mask[static_cast<std::size_t>(y + dy) * w + x + dx] == v;
        }
      }
      if (total >= 3 && same <= 1) out[static_cast<std::size_t>(y) * w + x] = !v;
    }
  }
  mask.swap(out);
}

}  // namespace

BinaryProxy build_proxy(const Image& b, int morph_radius, int supersample) {
  require(supersample >= 1 && supersample <= 16, "proxy supersample must be in [1, 16]");
  require(b.channels() == 1, "build_proxy expects a single-channel patch");
  require(b.all_finite(), "patch contains non-finite values");
  const Image d = dilate(b, morph_radius);
  const Image e = erode(b, morph_radius);
  BinaryProxy out;
  out.precursor = Image(b.width(), b.height(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double v = b.values()[i];
    const double hi = d.values()[i];
    const double lo = e.values()[i];
    out.precursor.values()[i] = (hi - v <= v - lo) ? hi : lo;
  }
  out.threshold = otsu_threshold(out.precursor);
  out.dark_mask.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out.dark_mask[i] = out.precursor.values()[i] < out.threshold;
  despeckle(out.dark_mask, b.width(), b.height());
  std::vector<bool> bright(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) bright[i] = !out.dark_mask[i];
  out.dark_level = eroded_mean(b, out.dark_mask, morph_radius, "dark");
  out.bright_level = eroded_mean(b, bright, morph_radius, "bright");
  if (!(out.dark_level < out.bright_level)) {
    fail(ErrorCode::kNoBimodalStructure, "dark level is not below bright level");
  }
  out.image = Image(b.width(), b.height(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.image.values()[i] = out.dark_mask[i] ? out.dark_level : out.bright_level;
  }
  out.latent = supersample == 1 ? out.image : antialiased_latent(b, out.dark_level, out.bright_level, supersample);
  return out;
}

}  // namespace circleflow

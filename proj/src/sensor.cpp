#include "circleflow/sensor.hpp"

#include <array>

#include "circleflow/error.hpp"

namespace circleflow {

namespace {

// Color of the top-left 2x2 cell, row-major: {(0,0), (1,0), (0,1), (1,1)}.
std::array<int, 4> layout(CfaPattern p) {
  switch (p) {
    case CfaPattern::kRGGB: return {0, 1, 1, 2};
    case CfaPattern::kBGGR: return {2, 1, 1, 0};
    case CfaPattern::kGRBG: return {1, 0, 2, 1};
    case CfaPattern::kGBRG: return {1, 2, 0, 1};
  }
  return {0, 1, 1, 2};
}

constexpr double kRbWeights[9] = {0.25, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 0.25};
constexpr double kGWeights[9] = {0.0, 0.25, 0.0, 0.25, 1.0, 0.25, 0.0, 0.25, 0.0};

const double* weights_for(int channel) { return channel == 1 ? kGWeights : kRbWeights; }

// Normalizer of the interpolation at (x, y): total weight of in-bounds
// sampled sites in the 3x3 neighbourhood.
double denom(CfaPattern p, int channel, int w, int h, int x, int y) {
  const double* wt = weights_for(channel);
  double d = 0.0;
  for (int j = -1; j <= 1; ++j) {
    const int yy = y + j;
    if (yy < 0 || yy >= h) continue;
    for (int i = -1; i <= 1; ++i) {
      const int xx = x + i;
      if (xx < 0 || xx >= w) continue;
      if (cfa_color(p, xx, yy) == channel) d += wt[(j + 1) * 3 + (i + 1)];
    }
  }
  return d;
}

}  // namespace

std::string_view cfa_name(CfaPattern p) {
  switch (p) {
    case CfaPattern::kRGGB: return "RGGB";
    case CfaPattern::kBGGR: return "BGGR";
    case CfaPattern::kGRBG: return "GRBG";
    case CfaPattern::kGBRG: return "GBRG";
  }
  return "RGGB";
}

CfaPattern parse_cfa(std::string_view name) {
  if (name == "RGGB") return CfaPattern::kRGGB;
  if (name == "BGGR") return CfaPattern::kBGGR;
  if (name == "GRBG") return CfaPattern::kGRBG;
  if (name == "GBRG") return CfaPattern::kGBRG;
  fail(ErrorCode::kInvalidInput, "unknown CFA pattern '" + std::string(name) + "'");
}

int cfa_color(CfaPattern p, int x, int y) { return layout(p)[(y & 1) * 2 + (x & 1)]; }

CfaPattern shift_pattern(CfaPattern p, int x0, int y0) {
  const std::array<int, 4> want = {cfa_color(p, x0, y0), cfa_color(p, x0 + 1, y0), cfa_color(p, x0, y0 + 1),
                                   cfa_color(p, x0 + 1, y0 + 1)};
  for (CfaPattern q : {CfaPattern::kRGGB, CfaPattern::kBGGR, CfaPattern::kGRBG, CfaPattern::kGBRG}) {
    if (layout(q) == want) return q;
  }
  return p;
}

RawMosaic mosaic(const Image& rgb, CfaPattern pattern) {
  require(rgb.channels() == 3, "mosaic needs a 3-channel image");
  RawMosaic raw{rgb.width(), rgb.height(), pattern, Image(rgb.width(), rgb.height(), 1)};
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) raw.data.at(x, y) = rgb.at(x, y, cfa_color(pattern, x, y));
  }
  return raw;
}

Image capture_plane(const Image& plane, CfaPattern pattern, int channel) {
  require(plane.channels() == 1, "capture_plane expects a single plane");
  require(channel >= 0 && channel < 3, "channel out of range");
  const int w = plane.width();
  const int h = plane.height();
  const double* wt = weights_for(channel);
  Image out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (cfa_color(pattern, x, y) == channel) {
        out.at(x, y) = plane.at(x, y);
        continue;
      }
      double num = 0.0;
      double den = 0.0;
      for (int j = -1; j <= 1; ++j) {
        const int yy = y + j;
        if (yy < 0 || yy >= h) continue;
        for (int i = -1; i <= 1; ++i) {
          const int xx = x + i;
          if (xx < 0 || xx >= w || cfa_color(pattern, xx, yy) != channel) continue;
          const double a = wt[(j + 1) * 3 + (i + 1)];
          num += a * plane.at(xx, yy);
          den += a;
        }
      }
      // A 1-pixel-wide image can leave a site with no same-color neighbour.
      out.at(x, y) = den > 0.0 ? num / den : 0.0;
    }
  }
  return out;
}

Image capture_plane_adjoint(const Image& grad, CfaPattern pattern, int channel) {
  require(grad.channels() == 1, "capture_plane_adjoint expects a single plane");
  const int w = grad.width();
  const int h = grad.height();
  const double* wt = weights_for(channel);
  Image out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double g = grad.at(x, y);
      if (g == 0.0) continue;
      if (cfa_color(pattern, x, y) == channel) {
        out.at(x, y) += g;
        continue;
      }
      const double den = denom(pattern, channel, w, h, x, y);
      if (den <= 0.0) continue;
      for (int j = -1; j <= 1; ++j) {
        const int yy = y + j;
        if (yy < 0 || yy >= h) continue;
        for (int i = -1; i <= 1; ++i) {
          const int xx = x + i;
          if (xx < 0 || xx >= w || cfa_color(pattern, xx, yy) != channel) continue;
          out.at(xx, yy) += g * wt[(j + 1) * 3 + (i + 1)] / den;
        }
      }
    }
  }
  return out;
}

Image demosaic_bilinear(const RawMosaic& raw) {
  require(raw.data.channels() == 1 && raw.data.width() == raw.width && raw.data.height() == raw.height,
          "malformed raw mosaic");
  std::vector<Image> planes;
  for (int c = 0; c < 3; ++c) planes.push_back(capture_plane(raw.data, raw.pattern, c));
  return Image::merge(planes);
}

Image capture_forward(const Image& rgb, CfaPattern pattern) { return demosaic_bilinear(mosaic(rgb, pattern)); }

Image capture_adjoint(const Image& grad_rgb, CfaPattern pattern) {
  require(grad_rgb.channels() == 3, "capture_adjoint expects 3 channels");
  std::vector<Image> planes;
  for (int c = 0; c < 3; ++c) planes.push_back(capture_plane_adjoint(grad_rgb.channel(c), pattern, c));
  return Image::merge(planes);
}

}  // namespace circleflow

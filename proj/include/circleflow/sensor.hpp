#pragma once

#include <string>
#include <string_view>

#include "circleflow/image.hpp"

namespace circleflow {

enum class CfaPattern { kRGGB, kBGGR, kGRBG, kGBRG };

std::string_view cfa_name(CfaPattern p);
CfaPattern parse_cfa(std::string_view name);

// Color index (0 = R, 1 = G, 2 = B) sampled at pixel (x, y).
int cfa_color(CfaPattern p, int x, int y);

// The pattern as seen from a crop whose origin sits at (x0, y0) in the full frame.
CfaPattern shift_pattern(CfaPattern p, int x0, int y0);

struct RawMosaic {
  int width = 0;
  int height = 0;
  CfaPattern pattern = CfaPattern::kRGGB;
  Image data;  // single channel
};

RawMosaic mosaic(const Image& rgb, CfaPattern pattern);

// Bilinear interpolation from same-color neighbours. Each output value is a
// weighted mean over the in-bounds sampled sites of its 3x3 neighbourhood, so
// sampled sites are reproduced exactly and constant planes stay constant.
Image demosaic_bilinear(const RawMosaic& raw);

// demosaic_bilinear(mosaic(rgb)).
Image capture_forward(const Image& rgb, CfaPattern pattern);
// Exact transpose of capture_forward.
Image capture_adjoint(const Image& grad_rgb, CfaPattern pattern);

// The same operator restricted to one color plane: keep the sites of
// `channel` and interpolate them. Since demosaicing never mixes channels,
// capture_forward acts plane by plane.
Image capture_plane(const Image& plane, CfaPattern pattern, int channel);
Image capture_plane_adjoint(const Image& grad, CfaPattern pattern, int channel);

}  // namespace circleflow

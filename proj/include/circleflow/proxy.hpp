#pragma once

#include <vector>

#include "circleflow/image.hpp"

namespace circleflow {

struct BinaryProxy {
  Image image;  // exactly {dark_level, bright_level}
  double dark_level = 0.0;
  double bright_level = 1.0;
  std::vector<bool> dark_mask;
  double threshold = 0.0;
  Image precursor;  // kept for diagnostics
  // Area-averaged rendering of a two-level mask built at `supersample` times
  // the capture resolution; equals `image` when supersample is 1.
  Image latent;
};

// Minimum pixel count of each eroded level-estimation region.
inline constexpr int kMinRoiPixels = 16;

// Two-level proxy of the sharp chart from a blurred single-channel patch.
// The precursor keeps, per pixel, whichever of the dilated and eroded values
// is closer to the observation (toggle mapping), which pushes transition
// pixels to the nearer plateau before Otsu binarization.
// With supersample > 1 the latent is also built: the observation is
// upsampled bilinearly, split halfway between the two levels, and each pixel
// takes the mean level of its sub-samples.
BinaryProxy build_proxy(const Image& b, int morph_radius, int supersample = 1);

}  // namespace circleflow

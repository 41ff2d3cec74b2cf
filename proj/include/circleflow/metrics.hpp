#pragma once

#include <string>
#include <vector>

#include "circleflow/image.hpp"

namespace circleflow {

inline constexpr double kPsnrCap = 300.0;

struct MtfCurve {
  std::vector<double> frequencies;  // cycles / pixel, 0 .. 0.5
  std::vector<double> modulation;
  double orientation = 0.0;  // frequency direction, radians from +x towards +y (down)
};

// PSNR with MAX = peak of gt; identical kernels report kPsnrCap.
double kernel_psnr(const Kernel& est, const Kernel& gt);
// SSIM over valid 7x7 windows (or the whole grid for smaller kernels),
// dynamic range = peak of gt.
double kernel_ssim(const Kernel& est, const Kernel& gt);

// PSNR between images with peak 1.
double image_psnr(const Image& est, const Image& ref);

// Modulation of the kernel's zero-padded (4x side) DFT, normalized at DC and
// sampled along each orientation at n_freq points in [0, 0.5].
std::vector<MtfCurve> mtf_from_psf(const Kernel& k, int n_freq = 65, const std::vector<double>& orientations = {0.0, 1.5707963267948966});

struct SfrResult {
  MtfCurve curve;
  double edge_angle = 0.0;  // estimated, radians from vertical
  std::vector<std::string> warnings;
};

// Slanted-edge SFR of a single-channel patch containing one near-vertical
// edge. Throws NoEdgeFound if no edge is present.
SfrResult slanted_edge_sfr(const Image& patch, double nominal_angle, int n_freq = 65);

// Root-mean-square modulation difference over [0, f_max]; b is linearly
// resampled onto a's frequency grid.
double curve_rms_delta(const MtfCurve& a, const MtfCurve& b, double f_max);

}  // namespace circleflow

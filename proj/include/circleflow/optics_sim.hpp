#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "circleflow/image.hpp"
#include "circleflow/psf_field.hpp"

namespace circleflow {

// Quadratic in field position: c[0] + c[1] u + c[2] v + c[3] u^2 + c[4] u v + c[5] v^2.
struct FieldPoly {
  std::array<double, 6> c{};

  static FieldPoly constant(double v) { return FieldPoly{{v, 0, 0, 0, 0, 0}}; }
  double operator()(double u, double v) const {
    return c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v;
  }
  bool is_constant() const { return c[1] == 0 && c[2] == 0 && c[3] == 0 && c[4] == 0 && c[5] == 0; }
};

// One anisotropic Gaussian of the mixture. `amplitude` is its integral
// weight; offsets are in pixels from the kernel center.
struct GaussianComponent {
  FieldPoly amplitude = FieldPoly::constant(1.0);
  FieldPoly offset_x;
  FieldPoly offset_y;
  FieldPoly cov_xx = FieldPoly::constant(2.25);
  FieldPoly cov_xy;
  FieldPoly cov_yy = FieldPoly::constant(2.25);
};

struct AberrationSpec {
  std::vector<GaussianComponent> components;
  int side = 15;
  std::uint64_t seed = 0;
  // Per-channel multiplier on every covariance (lateral color spread).
  std::array<double, 3> channel_scale{1.0, 1.0, 1.0};
  // Shift the rasterized mixture so its centroid sits on the kernel center.
  // Kernel translation is indistinguishable from chart translation, so
  // ground truth is only defined up to this shift.
  bool center_on_centroid = true;

  // Two-component lens: astigmatic core growing toward the edge plus a
  // coma-like lobe displaced radially.
  static AberrationSpec default_lens(int side = 15);

  // Throws InvalidInput if any covariance is not positive definite over the
  // field or if the mixture at (0, 0) is not a single isotropic Gaussian.
  void validate() const;
};

struct NoiseSpec {
  double gaussian_var = 0.005;
  double poisson_scale = 100.0;
  std::uint64_t seed = 0;

  void validate() const;
  // Variance of the output at mean intensity `level`, before clamping.
  double variance_at(double level) const { return level / poisson_scale + gaussian_var; }
};

Kernel synth_psf(const AberrationSpec& spec, double u, double v, int channel = 0);

// Ground-truth field: one kernel per grid cell evaluated at the cell's field position.
PsfField synth_field(const AberrationSpec& spec, int grid_rows, int grid_cols, int channels, int image_width,
                     int image_height);

// Per-region convolution. Each region is convolved with its own kernel using
// true neighbouring pixels as apron and edge replication only at the image
// border; regions are pasted back with hard boundaries.
Image blur_field(const Image& img, const PsfField& field);

Image add_noise(const Image& img, const NoiseSpec& spec);

}  // namespace circleflow

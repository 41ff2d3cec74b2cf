#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "circleflow/image.hpp"

namespace circleflow {

// Dark circles on a bright background, one circle per pitch x pitch cell.
struct CircleGridSpec {
  int rows = 11;
  int cols = 17;
  double pitch = 64.0;
  double radius = 20.0;
  double dark_level = 0.1;
  double bright_level = 0.9;
  int margin = 0;
  int supersample = 8;
  // Canvas size; 0 selects cols * pitch + 2 * margin (rows for height).
  int width = 0;
  int height = 0;

  void validate() const;
  int canvas_width() const;
  int canvas_height() const;
};

// Maps chart coordinates to image coordinates: p_img = M * [x, y, 1]^T.
struct AffinePerturbation {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static AffinePerturbation identity() { return {}; }
  // Rotation (radians) and isotropic scale about `center`, then translation.
  static AffinePerturbation about_center(double angle, double scale, double tx, double ty, double cx, double cy);

  double determinant() const { return m[0] * m[4] - m[1] * m[3]; }
  void validate() const;
  AffinePerturbation inverse() const;
  std::array<double, 2> apply(double x, double y) const {
    return {m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]};
  }
};

struct AffineRanges {
  double max_rotation_deg = 3.0;
  double min_scale = 0.98;
  double max_scale = 1.02;
  double max_translation = 2.0;
};

// Random orientation-preserving perturbation about the canvas center.
AffinePerturbation sample_affine(std::uint64_t seed, double cx, double cy, const AffineRanges& ranges = {});

// Supersampled coverage rendering of the ideal (unblurred) chart. Warnings
// about circles that leave the canvas are appended to `warnings` when given.
Image render_chart(const CircleGridSpec& spec, const AffinePerturbation& xform,
                   std::vector<std::string>* warnings = nullptr);

// Checkerboard on the same canvas (square side = pitch); used for the
// circle-vs-checkerboard ablation.
Image render_checkerboard(const CircleGridSpec& spec, const AffinePerturbation& xform);

// Straight edge through the image center, rotated `angle` radians from the
// vertical; dark on the left. supersample 1 samples at pixel centers.
Image render_edge(int width, int height, double angle, double dark_level, double bright_level,
                  int supersample = 1);

struct PatchBounds {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct Patch {
  Image image;
  int row = 0;
  int col = 0;
  PatchBounds bounds;
  double u = 0.0;  // normalized field position in [-1, 1], 0 at image center
  double v = 0.0;
};

// Region rectangles of a grid tiling; remainder pixels go to the last row/col.
std::vector<PatchBounds> grid_bounds(int width, int height, int grid_rows, int grid_cols);
std::array<double, 2> field_position(const PatchBounds& b, int width, int height);

std::vector<Patch> patchify(const Image& img, int grid_rows, int grid_cols);
Image reassemble(const std::vector<Patch>& patches, int width, int height);

}  // namespace circleflow

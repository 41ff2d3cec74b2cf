#include "circleflow/chart.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "circleflow/error.hpp"
#include "circleflow/random.hpp"

namespace circleflow {

void CircleGridSpec::validate() const {
  require(rows >= 0 && cols >= 0, "grid rows/cols must be nonnegative");
  require(pitch > 0.0, "pitch must be positive");
  require(radius > 0.0 && radius < pitch / 2.0, "radius must be positive and below pitch/2");
  require(dark_level < bright_level, "dark_level must be below bright_level");
  require(dark_level >= 0.0 && bright_level <= 1.0, "levels must lie in [0, 1]");
  require(margin >= 0, "margin must be nonnegative");
  require(supersample >= 1, "supersample must be >= 1");
  require(canvas_width() > 0 && canvas_height() > 0, "chart canvas is empty");
}

int CircleGridSpec::canvas_width() const {
  return width > 0 ? width : static_cast<int>(std::lround(cols * pitch)) + 2 * margin;
}

int CircleGridSpec::canvas_height() const {
  return height > 0 ? height : static_cast<int>(std::lround(rows * pitch)) + 2 * margin;
}

AffinePerturbation AffinePerturbation::about_center(double angle, double scale, double tx, double ty,
                                                    double cx, double cy) {
  const double c = std::cos(angle) * scale;
  const double s = std::sin(angle) * scale;
  AffinePerturbation a;
  a.m = {c, -s, cx - c * cx + s * cy + tx, s, c, cy - s * cx - c * cy + ty};
  return a;
}

void AffinePerturbation::validate() const {
  for (double v : m) require(std::isfinite(v), "affine coefficients must be finite");
  require(determinant() > 0.0, "affine perturbation must preserve orientation");
}

AffinePerturbation AffinePerturbation::inverse() const {
  const double det = determinant();
  require(det != 0.0, "affine perturbation is singular");
  AffinePerturbation inv;
  inv.m[0] = m[4] / det;
  inv.m[1] = -m[1] / det;
  inv.m[3] = -m[3] / det;
  inv.m[4] = m[0] / det;
  inv.m[2] = -(inv.m[0] * m[2] + inv.m[1] * m[5]);
  inv.m[5] = -(inv.m[3] * m[2] + inv.m[4] * m[5]);
  return inv;
}

AffinePerturbation sample_affine(std::uint64_t seed, double cx, double cy, const AffineRanges& ranges) {
  SplitMix64 rng(seed);
  const double angle = (2.0 * rng.uniform() - 1.0) * ranges.max_rotation_deg * std::numbers::pi / 180.0;
  const double scale = ranges.min_scale + rng.uniform() * (ranges.max_scale - ranges.min_scale);
  const double tx = (2.0 * rng.uniform() - 1.0) * ranges.max_translation;
  const double ty = (2.0 * rng.uniform() - 1.0) * ranges.max_translation;
  return AffinePerturbation::about_center(angle, scale, tx, ty, cx, cy);
}

namespace {

template <typename Inside>
Image render_coverage(int w, int h, int supersample, double dark, double bright,
                      const AffinePerturbation& xform, Inside inside) {
  xform.validate();
  const AffinePerturbation inv = xform.inverse();
  Image out(w, h, 1);
  const double n = static_cast<double>(supersample) * supersample;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int covered = 0;
      for (int sy = 0; sy < supersample; ++sy) {
        const double py = y + (sy + 0.5) / supersample;
        for (int sx = 0; sx < supersample; ++sx) {
          const double px = x + (sx + 0.5) / supersample;
          const auto q = inv.apply(px, py);
          if (inside(q[0], q[1])) ++covered;
        }
      }
      out.at(x, y) = bright + (dark - bright) * (covered / n);
    }
  }
  return out;
}

}  // namespace

Image render_chart(const CircleGridSpec& spec, const AffinePerturbation& xform, std::vector<std::string>* warnings) {
  spec.validate();
  const int w = spec.canvas_width();
  const int h = spec.canvas_height();
  if (warnings != nullptr) {
    for (int r = 0; r < spec.rows; ++r) {
      for (int c = 0; c < spec.cols; ++c) {
        const auto p = xform.apply(spec.margin + (c + 0.5) * spec.pitch, spec.margin + (r + 0.5) * spec.pitch);
        const double reach = spec.radius * std::sqrt(std::abs(xform.determinant()));
        if (p[0] - reach < 0 || p[1] - reach < 0 || p[0] + reach > w || p[1] + reach > h) {
          std::ostringstream msg;
          msg << "circle (" << r << ", " << c << ") is clipped by the canvas";
          warnings->push_back(msg.str());
        }
      }
    }
  }
  const double r2 = spec.radius * spec.radius;
  auto inside = [&](double x, double y) {
    const double gx = (x - spec.margin) / spec.pitch;
    const double gy = (y - spec.margin) / spec.pitch;
    const double c = std::floor(gx);
    const double r = std::floor(gy);
    if (c < 0 || r < 0 || c >= spec.cols || r >= spec.rows) return false;
    const double dx = x - (spec.margin + (c + 0.5) * spec.pitch);
    const double dy = y - (spec.margin + (r + 0.5) * spec.pitch);
    return dx * dx + dy * dy <= r2;
  };
  return render_coverage(w, h, spec.supersample, spec.dark_level, spec.bright_level, xform, inside);
}

Image render_checkerboard(const CircleGridSpec& spec, const AffinePerturbation& xform) {
  spec.validate();
  auto inside = [&](double x, double y) {
    const auto c = static_cast<long long>(std::floor((x - spec.margin) / spec.pitch));
    const auto r = static_cast<long long>(std::floor((y - spec.margin) / spec.pitch));
    return ((r + c) % 2 + 2) % 2 == 0;
  };
  return render_coverage(spec.canvas_width(), spec.canvas_height(), spec.supersample, spec.dark_level,
                         spec.bright_level, xform, inside);
}

Image render_edge(int width, int height, double angle, double dark_level, double bright_level, int supersample) {
  require(width > 0 && height > 0 && supersample >= 1, "invalid edge canvas");
  // Normal of the edge line; points with positive distance are bright.
  const double nx = std::cos(angle);
  const double ny = -std::sin(angle);
  const double cx = width / 2.0;
  const double cy = height / 2.0;
  auto inside = [&](double x, double y) { return (x - cx) * nx + (y - cy) * ny < 0.0; };
  return render_coverage(width, height, supersample, dark_level, bright_level, AffinePerturbation::identity(), inside);
}

std::vector<PatchBounds> grid_bounds(int width, int height, int grid_rows, int grid_cols) {
  if (grid_rows < 1 || grid_cols < 1 || grid_rows > height || grid_cols > width) {
    fail(ErrorCode::kInvalidInput, "grid is empty or larger than the image");
  }
  const int cw = width / grid_cols;
  const int ch = height / grid_rows;
  std::vector<PatchBounds> out;
  out.reserve(static_cast<std::size_t>(grid_rows) * grid_cols);
  for (int r = 0; r < grid_rows; ++r) {
    for (int c = 0; c < grid_cols; ++c) {
      PatchBounds b;
      b.x = c * cw;
      b.y = r * ch;
      b.width = c == grid_cols - 1 ? width - b.x : cw;
      b.height = r == grid_rows - 1 ? height - b.y : ch;
      out.push_back(b);
    }
  }
  return out;
}

std::array<double, 2> field_position(const PatchBounds& b, int width, int height) {
  const double cx = b.x + b.width / 2.0;
  const double cy = b.y + b.height / 2.0;
  return {(cx - width / 2.0) / (width / 2.0), (cy - height / 2.0) / (height / 2.0)};
}

std::vector<Patch> patchify(const Image& img, int grid_rows, int grid_cols) {
  const auto bounds = grid_bounds(img.width(), img.height(), grid_rows, grid_cols);
  std::vector<Patch> out;
  out.reserve(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const PatchBounds& b = bounds[i];
    Patch p;
    p.image = img.crop(b.x, b.y, b.width, b.height);
    p.row = static_cast<int>(i) / grid_cols;
    p.col = static_cast<int>(i) % grid_cols;
    p.bounds = b;
    const auto uv = field_position(b, img.width(), img.height());
    p.u = uv[0];
    p.v = uv[1];
    out.push_back(std::move(p));
  }
  return out;
}

Image reassemble(const std::vector<Patch>& patches, int width, int height) {
  require(!patches.empty(), "no patches to reassemble");
  Image out(width, height, patches.front().image.channels());
  for (const Patch& p : patches) out.paste(p.image, p.bounds.x, p.bounds.y);
  return out;
}

}  // namespace circleflow

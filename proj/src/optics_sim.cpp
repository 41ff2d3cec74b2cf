#include "circleflow/optics_sim.hpp"

#include <algorithm>
#include <cmath>

#include "circleflow/error.hpp"
#include "circleflow/imagecore.hpp"
#include "circleflow/random.hpp"

namespace circleflow {

AberrationSpec AberrationSpec::default_lens(int side) {
  AberrationSpec s;
  s.side = side;
  GaussianComponent core;
  core.cov_xx = FieldPoly{{2.25, 0, 0, 1.6, 0, 0}};
  core.cov_xy = FieldPoly{{0, 0, 0, 0, 1.6, 0}};
  core.cov_yy = FieldPoly{{2.25, 0, 0, 0, 0, 1.6}};
  GaussianComponent coma;
  coma.amplitude = FieldPoly{{0, 0, 0, 0.35, 0, 0.35}};
  coma.offset_x = FieldPoly{{0, 1.6, 0, 0, 0, 0}};
  coma.offset_y = FieldPoly{{0, 0, 1.6, 0, 0, 0}};
  coma.cov_xx = FieldPoly::constant(1.44);
  coma.cov_yy = FieldPoly::constant(1.44);
  s.components = {core, coma};
  return s;
}

void AberrationSpec::validate() const {
  require(side >= 1 && side % 2 == 1, "aberration kernel side must be odd");
  require(!components.empty(), "aberration spec has no components");
  for (double s : channel_scale) require(s > 0.0 && std::isfinite(s), "channel_scale must be positive");
  // Covariances are checked on a dense sample of the unit field square.
  for (int j = 0; j <= 20; ++j) {
    for (int i = 0; i <= 20; ++i) {
      const double u = -1.0 + i * 0.1;
      const double v = -1.0 + j * 0.1;
      for (const auto& g : components) {
        const double a = g.cov_xx(u, v);
        const double b = g.cov_xy(u, v);
        const double d = g.cov_yy(u, v);
        require(a > 0.0 && a * d - b * b > 0.0, "component covariance is not positive definite over the field");
        require(g.amplitude(u, v) >= 0.0, "component amplitude must be nonnegative over the field");
      }
    }
  }
  int active = 0;
  for (const auto& g : components) {
    if (g.amplitude(0, 0) == 0.0) continue;
    ++active;
    require(g.offset_x(0, 0) == 0.0 && g.offset_y(0, 0) == 0.0, "center-field component must be centered");
    require(g.cov_xy(0, 0) == 0.0 && g.cov_xx(0, 0) == g.cov_yy(0, 0), "center-field component must be isotropic");
  }
  require(active == 1, "mixture at the field center must be a single Gaussian");
}

void NoiseSpec::validate() const {
  require(gaussian_var >= 0.0 && std::isfinite(gaussian_var), "gaussian_var must be >= 0");
  require(poisson_scale > 0.0, "poisson_scale must be > 0");
}

namespace {

std::vector<double> rasterize(const AberrationSpec& spec, double u, double v, int channel, double shift_x,
                              double shift_y) {
  const int n = spec.side;
  const int r = n / 2;
  const double cs = spec.channel_scale[static_cast<std::size_t>(channel)];
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& g : spec.components) {
    const double amp = g.amplitude(u, v);
    if (amp <= 0.0) continue;
    const double a = g.cov_xx(u, v) * cs;
    const double b = g.cov_xy(u, v) * cs;
    const double d = g.cov_yy(u, v) * cs;
    const double det = a * d - b * b;
    const double norm = amp / (2.0 * 3.14159265358979323846 * std::sqrt(det));
    const double mx = g.offset_x(u, v) + shift_x;
    const double my = g.offset_y(u, v) + shift_y;
    for (int row = 0; row < n; ++row) {
      for (int col = 0; col < n; ++col) {
        const double x = col - r - mx;
        const double y = row - r - my;
        const double q = (d * x * x - 2.0 * b * x * y + a * y * y) / det;
        w[static_cast<std::size_t>(row) * n + col] += norm * std::exp(-0.5 * q);
      }
    }
  }
  return w;
}

}  // namespace

Kernel synth_psf(const AberrationSpec& spec, double u, double v, int channel) {
  spec.validate();
  require(channel >= 0 && channel < 3, "channel out of range");
  double sx = 0.0;
  double sy = 0.0;
  if (spec.center_on_centroid) {
    // Analytic centroid of the continuous mixture.
    double total = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    for (const auto& g : spec.components) {
      const double amp = std::max(0.0, g.amplitude(u, v));
      total += amp;
      cx += amp * g.offset_x(u, v);
      cy += amp * g.offset_y(u, v);
    }
    if (total > 0.0) {
      sx = -cx / total;
      sy = -cy / total;
    }
  }
  auto w = rasterize(spec, u, v, channel, sx, sy);
  return Kernel::normalized(spec.side, std::move(w));
}

PsfField synth_field(const AberrationSpec& spec, int grid_rows, int grid_cols, int channels, int image_width,
                     int image_height) {
  PsfField field(grid_rows, grid_cols, channels, image_width, image_height);
  const auto bounds = field.bounds();
  for (int r = 0; r < grid_rows; ++r) {
    for (int c = 0; c < grid_cols; ++c) {
      const auto uv = field_position(bounds[static_cast<std::size_t>(r) * grid_cols + c], image_width, image_height);
      for (int ch = 0; ch < channels; ++ch) field.set(r, c, ch, synth_psf(spec, uv[0], uv[1], ch));
    }
  }
  return field;
}

Image blur_field(const Image& img, const PsfField& field) {
  require(img.width() == field.image_width() && img.height() == field.image_height(),
          "PSF field does not match image size");
  require(field.channels() == 1 || field.channels() == img.channels(), "PSF field channel count mismatch");
  Image out(img.width(), img.height(), img.channels());
  const auto bounds = field.bounds();
  for (int r = 0; r < field.grid_rows(); ++r) {
    for (int c = 0; c < field.grid_cols(); ++c) {
      const PatchBounds& b = bounds[static_cast<std::size_t>(r) * field.grid_cols() + c];
      for (int ch = 0; ch < img.channels(); ++ch) {
        const Kernel& k = field.kernel_for(r, c, ch);
        require(k.side() <= std::min(b.width, b.height), "kernel side exceeds region size");
        const int a = k.radius();
        // Apron of true pixels where available; replication beyond the image.
        const int x0 = std::max(0, b.x - a);
        const int y0 = std::max(0, b.y - a);
        const int x1 = std::min(img.width(), b.x + b.width + a);
        const int y1 = std::min(img.height(), b.y + b.height + a);
        Image sub = img.channel(ch).crop(x0, y0, x1 - x0, y1 - y0);
        Image blurred = conv2d(sub, k);
        for (int y = 0; y < b.height; ++y) {
          for (int x = 0; x < b.width; ++x) out.at(b.x + x, b.y + y, ch) = blurred.at(b.x - x0 + x, b.y - y0 + y);
        }
      }
    }
  }
  return out;
}

Image add_noise(const Image& img, const NoiseSpec& spec) {
  spec.validate();
  Image out(img.width(), img.height(), img.channels());
  const double sigma = std::sqrt(spec.gaussian_var);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        SplitMix64 rng(SplitMix64::derive(spec.seed, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y),
                                          static_cast<std::uint64_t>(c)));
        const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
        const double photons = static_cast<double>(rng.poisson(v * spec.poisson_scale));
        double s = photons / spec.poisson_scale;
        if (sigma > 0.0) s += sigma * rng.normal();
        out.at(x, y, c) = std::clamp(s, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace circleflow

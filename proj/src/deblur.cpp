#include "circleflow/deblur.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "circleflow/error.hpp"

namespace circleflow {

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Weight of a region spanning [lo, hi) at pixel x, with cosine ramps of
// half-width t around interior boundaries.
double axis_weight(int x, int lo, int hi, int extent, int t) {
  const double p = x + 0.5;
  auto rise = [t](double d) {  // d = distance past the boundary center
    if (t == 0) return d >= 0.0 ? 1.0 : 0.0;
    if (d <= -t) return 0.0;
    if (d >= t) return 1.0;
    return 0.5 - 0.5 * std::cos(std::numbers::pi * (d + t) / (2.0 * t));
  };
  double w = 1.0;
  if (lo > 0) w *= rise(p - lo);
  if (hi < extent) w *= 1.0 - rise(p - hi);
  return w;
}

const Kernel& kernel_or_nearest(const PsfField& f, int row, int col, int ch) {
  const int c = f.channels() == 1 ? 0 : ch;
  if (f.at(row, col, c)) return *f.at(row, col, c);
  const Kernel* best = nullptr;
  int best_d = 1 << 30;
  for (int r = 0; r < f.grid_rows(); ++r) {
    for (int q = 0; q < f.grid_cols(); ++q) {
      if (!f.at(r, q, c)) continue;
      const int d = std::abs(r - row) + std::abs(q - col);
      if (d < best_d) {
        best_d = d;
        best = &*f.at(r, q, c);
      }
    }
  }
  if (best == nullptr) fail(ErrorCode::kInvalidInput, "PSF field has no calibrated kernels");
  return *best;
}

// Wiener restoration of one tile (replicate padding already applied).
std::vector<double> restore_tile(const std::vector<double>& tile, int tw, int th, const Kernel& k, double nsr) {
  const int nh = tw / 2 + 1;
  std::vector<double> buf(tile);
  std::vector<double> kern(static_cast<std::size_t>(tw) * th, 0.0);
  const int r = k.radius();
  for (int j = 0; j < k.side(); ++j) {
    for (int i = 0; i < k.side(); ++i) {
      const int y = ((j - r) % th + th) % th;
      const int x = ((i - r) % tw + tw) % tw;
      kern[static_cast<std::size_t>(y) * tw + x] += k.at(i, j);
    }
  }
  std::vector<std::complex<double>> Y(static_cast<std::size_t>(th) * nh);
  std::vector<std::complex<double>> K(Y.size());
  fftw_plan fy;
  fftw_plan fk;
  fftw_plan inv;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fy = fftw_plan_dft_r2c_2d(th, tw, buf.data(), reinterpret_cast<fftw_complex*>(Y.data()), FFTW_ESTIMATE);
    fk = fftw_plan_dft_r2c_2d(th, tw, kern.data(), reinterpret_cast<fftw_complex*>(K.data()), FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(th, tw, reinterpret_cast<fftw_complex*>(Y.data()), buf.data(), FFTW_ESTIMATE);
  }
  fftw_execute(fy);
  fftw_execute(fk);
  double min_power = 1e300;
  for (std::size_t i = 0; i < Y.size(); ++i) {
    const double p = std::norm(K[i]);
    min_power = std::min(min_power, p);
    Y[i] = std::conj(K[i]) * Y[i] / (p + nsr);
  }
  bool divergent = nsr == 0.0 && min_power < 1e-12;
  if (!divergent) fftw_execute(inv);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(fy);
    fftw_destroy_plan(fk);
    fftw_destroy_plan(inv);
  }
  if (divergent) fail(ErrorCode::kDivergentRestoration, "kernel spectrum has zeros and nsr is 0");
  const double scale = 1.0 / (static_cast<double>(tw) * th);
  for (double& v : buf) v *= scale;
  return buf;
}

}  // namespace

Image wiener_deblur(const Image& img, const PsfField& field, double nsr) {
  require(nsr >= 0.0 && std::isfinite(nsr), "nsr must be >= 0");
  require(img.width() == field.image_width() && img.height() == field.image_height(),
          "PSF field does not match image size");
  require(field.channels() == 1 || field.channels() == img.channels(), "PSF field channel count mismatch");
  const int w = img.width();
  const int h = img.height();
  const auto bounds = field.bounds();
  int max_radius = 0;
  int min_extent = std::min(w, h);
  for (const auto& b : bounds) min_extent = std::min({min_extent, b.width, b.height});
  for (int r = 0; r < field.grid_rows(); ++r) {
    for (int c = 0; c < field.grid_cols(); ++c) {
      for (int ch = 0; ch < img.channels(); ++ch) max_radius = std::max(max_radius, kernel_or_nearest(field, r, c, ch).radius());
    }
  }
  const int taper = std::min(max_radius, min_extent / 2);

  Image out(w, h, img.channels());
  for (int r = 0; r < field.grid_rows(); ++r) {
    for (int c = 0; c < field.grid_cols(); ++c) {
      const PatchBounds& b = bounds[static_cast<std::size_t>(r) * field.grid_cols() + c];
      for (int ch = 0; ch < img.channels(); ++ch) {
        const Kernel& k = kernel_or_nearest(field, r, c, ch);
        const int apron = taper + std::max(k.side(), 16);
        const int tx = b.x - apron;
        const int ty = b.y - apron;
        const int tw = b.width + 2 * apron;
        const int th = b.height + 2 * apron;
        std::vector<double> tile(static_cast<std::size_t>(tw) * th);
        for (int y = 0; y < th; ++y) {
          const int sy = std::clamp(ty + y, 0, h - 1);
          for (int x = 0; x < tw; ++x) tile[static_cast<std::size_t>(y) * tw + x] = img.at(std::clamp(tx + x, 0, w - 1), sy, ch);
        }
        const std::vector<double> rest = restore_tile(tile, tw, th, k, nsr);
        const int x0 = std::max(0, b.x - taper);
        const int x1 = std::min(w, b.x + b.width + taper);
        const int y0 = std::max(0, b.y - taper);
        const int y1 = std::min(h, b.y + b.height + taper);
        for (int y = y0; y < y1; ++y) {
          const double wy = axis_weight(y, b.y, b.y + b.height, h, taper);
          if (wy == 0.0) continue;
          for (int x = x0; x < x1; ++x) {
            const double wx = axis_weight(x, b.x, b.x + b.width, w, taper);
            if (wx == 0.0) continue;
            out.at(x, y, ch) += wx * wy * rest[static_cast<std::size_t>(y - ty) * tw + (x - tx)];
          }
        }
      }
    }
  }
  return out.clamped01();
}

}  // namespace circleflow

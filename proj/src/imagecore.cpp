#include "circleflow/imagecore.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "circleflow/error.hpp"

namespace circleflow {
namespace {

// Replicate-padded copy of one channel, margin `pad` on every side.
std::vector<double> pad_replicate(const Image& img, int c, int pad) {
  const int w = img.width();
  const int h = img.height();
  const int pw = w + 2 * pad;
  const int ph = h + 2 * pad;
  std::vector<double> out(static_cast<std::size_t>(pw) * ph);
  for (int y = 0; y < ph; ++y) {
    const int sy = std::clamp(y - pad, 0, h - 1);
    for (int x = 0; x < pw; ++x) {
      const int sx = std::clamp(x - pad, 0, w - 1);
      out[static_cast<std::size_t>(y) * pw + x] = img.at(sx, sy, c);
    }
  }
  return out;
}

void check_weights(std::span<const double> weights, int side) {
  require(side > 0 && side % 2 == 1, "kernel side must be odd");
  require(weights.size() == static_cast<std::size_t>(side) * side, "kernel weight count must be side^2");
}

struct Axis {
  int i0 = 0;      // left knot of the interpolation cell
  double a = 0.0;  // fractional position inside the cell
  bool outside = false;
  bool knot = false;  // exactly on an integer sample position
};

Axis locate(double s, int n) {
  Axis ax;
  if (n == 1) {
    ax.outside = s != 0.0;
    ax.knot = s == 0.0;
    return ax;
  }
  if (s < 0.0 || s > n - 1) ax.outside = true;
  const double sc = std::clamp(s, 0.0, static_cast<double>(n - 1));
  const double fl = std::floor(sc);
  ax.i0 = std::min(static_cast<int>(fl), n - 2);
  ax.a = sc - ax.i0;
  ax.knot = !ax.outside && sc == fl;
  return ax;
}

void check_flow(const Image& img, const FlowField& v) {
  if (img.width() != v.width || img.height() != v.height) {
    fail(ErrorCode::kInvalidInput, "flow field dimensions do not match image");
  }
}

Image morph(const Image& img, int radius, bool take_max) {
  if (radius < 1) fail(ErrorCode::kInvalidInput, "morphology radius must be >= 1");
  require(img.channels() == 1, "morphology expects a single-channel image");
  const int w = img.width();
  const int h = img.height();
  auto pick = [take_max](double a, double b) { return take_max ? std::max(a, b) : std::min(a, b); };
  Image tmp(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = img.at(x, y);
      for (int t = std::max(0, x - radius); t <= std::min(w - 1, x + radius); ++t) acc = pick(acc, img.at(t, y));
      tmp.at(x, y) = acc;
    }
  }
  Image out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = tmp.at(x, y);
      for (int t = std::max(0, y - radius); t <= std::min(h - 1, y + radius); ++t) acc = pick(acc, tmp.at(x, t));
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

Image conv2d(const Image& img, const Kernel& k) { return conv2d_weights(img, k.data(), k.side()); }

Image conv2d_weights(const Image& img, std::span<const double> weights, int side) {
  check_weights(weights, side);
  const int w = img.width();
  const int h = img.height();
  const int r = side / 2;
  const int pw = w + 2 * r;
  Image out(w, h, img.channels());
  std::vector<double> row(static_cast<std::size_t>(w));
  for (int c = 0; c < img.channels(); ++c) {
    const std::vector<double> padded = pad_replicate(img, c, r);
    for (int y = 0; y < h; ++y) {
      std::fill(row.begin(), row.end(), 0.0);
      for (int j = 0; j < side; ++j) {
        const double* src_row = &padded[static_cast<std::size_t>(y + 2 * r - j) * pw];
        for (int i = 0; i < side; ++i) {
          const double wt = weights[static_cast<std::size_t>(j) * side + i];
          if (wt == 0.0) continue;
          const double* src = src_row + 2 * r - i;
          for (int x = 0; x < w; ++x) row[x] += wt * src[x];
        }
      }
      for (int x = 0; x < w; ++x) out.at(x, y, c) = row[x];
    }
  }
  return out;
}

ConvGradients conv2d_backward(const Image& img, std::span<const double> weights, int side,
                              const Image& grad_out, bool want_image_grad) {
  check_weights(weights, side);
  require(img.channels() == 1 && grad_out.channels() == 1, "conv2d_backward expects single-channel planes");
  require(img.width() == grad_out.width() && img.height() == grad_out.height(),
          "gradient shape does not match image");
  const int w = img.width();
  const int h = img.height();
  const int r = side / 2;
  const int pw = w + 2 * r;
  const int ph = h + 2 * r;
  const std::vector<double> padded = pad_replicate(img, 0, r);
  const std::span<const double> g = grad_out.data();

  ConvGradients out;
  out.kernel.assign(static_cast<std::size_t>(side) * side, 0.0);
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        const double* src = &padded[static_cast<std::size_t>(y + 2 * r - j) * pw + 2 * r - i];
        const double* gr = &g[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) acc += gr[x] * src[x];
      }
      out.kernel[static_cast<std::size_t>(j) * side + i] = acc;
    }
  }

  if (!want_image_grad) return out;
  std::vector<double> gpad(static_cast<std::size_t>(pw) * ph, 0.0);
  for (int y = 0; y < h; ++y) {
    const double* gr = &g[static_cast<std::size_t>(y) * w];
    for (int j = 0; j < side; ++j) {
      double* dst_row = &gpad[static_cast<std::size_t>(y + 2 * r - j) * pw];
      for (int i = 0; i < side; ++i) {
        const double wt = weights[static_cast<std::size_t>(j) * side + i];
        if (wt == 0.0) continue;
        double* dst = dst_row + 2 * r - i;
        for (int x = 0; x < w; ++x) dst[x] += wt * gr[x];
      }
    }
  }
  // Fold the replicated margin back onto the border pixels it copied.
  out.image = Image(w, h, 1);
  for (int y = 0; y < ph; ++y) {
    const int sy = std::clamp(y - r, 0, h - 1);
    for (int x = 0; x < pw; ++x) {
      const int sx = std::clamp(x - r, 0, w - 1);
      out.image.at(sx, sy) += gpad[static_cast<std::size_t>(y) * pw + x];
    }
  }
  return out;
}

Image warp(const Image& img, const FlowField& v) {
  check_flow(img, v);
  const int w = img.width();
  const int h = img.height();
  Image out(w, h, img.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = v.index(x, y);
      const double fx = v.dx[p];
      const double fy = v.dy[p];
      if (fx == 0.0 && fy == 0.0) {
        for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(x, y, c);
        continue;
      }
      const Axis ax = locate(x + fx, w);
      const Axis ay = locate(y + fy, h);
      const int x1 = std::min(ax.i0 + 1, w - 1);
      const int y1 = std::min(ay.i0 + 1, h - 1);
      for (int c = 0; c < img.channels(); ++c) {
        const double top = img.at(ax.i0, ay.i0, c) * (1.0 - ax.a) + img.at(x1, ay.i0, c) * ax.a;
        const double bot = img.at(ax.i0, y1, c) * (1.0 - ax.a) + img.at(x1, y1, c) * ax.a;
        out.at(x, y, c) = top * (1.0 - ay.a) + bot * ay.a;
      }
    }
  }
  return out;
}

FlowField warp_backward_flow(const Image& img, const FlowField& v, const Image& grad_out) {
  check_flow(img, v);
  require(img.channels() == 1 && grad_out.channels() == 1, "warp_backward_flow expects single-channel planes");
  require(grad_out.width() == img.width() && grad_out.height() == img.height(), "gradient shape mismatch");
  const int w = img.width();
  const int h = img.height();
  FlowField g(w, h);

  // Slope along x of the row-interpolated signal inside cell [cx, cx+1].
  auto slope_x = [&](int cx, int y0, int y1, double ay) {
    return (1.0 - ay) * (img.at(cx + 1, y0) - img.at(cx, y0)) + ay * (img.at(cx + 1, y1) - img.at(cx, y1));
  };
  auto slope_y = [&](int cy, int x0, int x1, double ax) {
    return (1.0 - ax) * (img.at(x0, cy + 1) - img.at(x0, cy)) + ax * (img.at(x1, cy + 1) - img.at(x1, cy));
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = v.index(x, y);
      const double go = grad_out.at(x, y);
      if (go == 0.0) continue;
      const Axis ax = locate(x + v.dx[p], w);
      const Axis ay = locate(y + v.dy[p], h);
      const int x1 = std::min(ax.i0 + 1, w - 1);
      const int y1 = std::min(ay.i0 + 1, h - 1);

      double dvx = 0.0;
      if (!ax.outside && w > 1) {
        if (ax.knot) {
          const int k = ax.i0 + (ax.a > 0.5 ? 1 : 0);  // knot index (a is 0 or 1 here)
          const double left = k >= 1 ? slope_x(k - 1, ay.i0, y1, ay.a) : 0.0;
          const double right = k <= w - 2 ? slope_x(k, ay.i0, y1, ay.a) : 0.0;
          dvx = 0.5 * (left + right);
        } else {
          dvx = slope_x(ax.i0, ay.i0, y1, ay.a);
        }
      }
      double dvy = 0.0;
      if (!ay.outside && h > 1) {
        if (ay.knot) {
          const int k = ay.i0 + (ay.a > 0.5 ? 1 : 0);
          const double up = k >= 1 ? slope_y(k - 1, ax.i0, x1, ax.a) : 0.0;
          const double down = k <= h - 2 ? slope_y(k, ax.i0, x1, ax.a) : 0.0;
          dvy = 0.5 * (up + down);
        } else {
          dvy = slope_y(ay.i0, ax.i0, x1, ax.a);
        }
      }
      g.dx[p] = go * dvx;
      g.dy[p] = go * dvy;
    }
  }
  return g;
}

Image dilate(const Image& img, int radius) { return morph(img, radius, true); }

Image erode(const Image& img, int radius) { return morph(img, radius, false); }

double otsu_threshold(const Image& img) {
  require(img.channels() == 1, "otsu_threshold expects a single-channel image");
  constexpr int kBins = 256;
  std::array<double, kBins> hist{};
  for (double v : img.data()) {
    const int bin = std::clamp(static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * kBins)), 0, kBins - 1);
    hist[bin] += 1.0;
  }
  const int occupied = static_cast<int>(std::count_if(hist.begin(), hist.end(), [](double n) { return n > 0.0; }));
  if (occupied < 2) fail(ErrorCode::kNoBimodalStructure, "image has fewer than two intensity levels");

  double total = 0.0;
  double total_moment = 0.0;
  for (int i = 0; i < kBins; ++i) {
    total += hist[i];
    total_moment += hist[i] * (i + 0.5);
  }
  double w0 = 0.0;
  double m0 = 0.0;
  double best = -1.0;
  int best_t = 1;
  for (int t = 1; t < kBins; ++t) {
    w0 += hist[t - 1];
    m0 += hist[t - 1] * (t - 0.5);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = m0 / w0;
    const double mu1 = (total_moment - m0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return static_cast<double>(best_t) / kBins;
}

std::pair<Image, Image> gradient_xy(const Image& img) {
  require(img.width() >= 2 && img.height() >= 2, "gradient_xy needs at least 2x2 pixels");
  const int w = img.width();
  const int h = img.height();
  Image gx(w, h, img.channels());
  Image gy(w, h, img.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        if (x + 1 < w) gx.at(x, y, c) = img.at(x + 1, y, c) - img.at(x, y, c);
        if (y + 1 < h) gy.at(x, y, c) = img.at(x, y + 1, c) - img.at(x, y, c);
      }
    }
  }
  return {std::move(gx), std::move(gy)};
}

Image downsample2(const Image& img) {
  if (img.width() < 2 || img.height() < 2) fail(ErrorCode::kInvalidInput, "downsample2 needs at least 2x2 pixels");
  const int w = img.width();
  const int h = img.height();
  const int ow = (w + 1) / 2;
  const int oh = (h + 1) / 2;
  Image out(ow, oh, img.channels());
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int j = -1; j <= 1; ++j) {
          const int sy = std::clamp(2 * oy + j, 0, h - 1);
          const double wy = j == 0 ? 0.5 : 0.25;
          for (int i = -1; i <= 1; ++i) {
            const int sx = std::clamp(2 * ox + i, 0, w - 1);
            const double wx = i == 0 ? 0.5 : 0.25;
            acc += wx * wy * img.at(sx, sy, c);
          }
        }
        out.at(ox, oy, c) = acc;
      }
    }
  }
  return out;
}

namespace {

struct Tap {
  int i0;
  int i1;
  double a;
};

Tap upsample_tap(int out_index, int in_size) {
  const double s = std::clamp((out_index + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(in_size - 1));
  const int i0 = static_cast<int>(std::floor(s));
  return {i0, std::min(i0 + 1, in_size - 1), s - i0};
}

}  // namespace

FlowField upsample_flow(const FlowField& v, int out_w, int out_h) {
  if (v.width < 1 || v.height < 1 || (v.width == 1 && v.height == 1)) {
    fail(ErrorCode::kInvalidInput, "upsample_flow needs a field larger than 1x1");
  }
  require(out_w >= 1 && out_h >= 1 && out_w <= 2 * v.width && out_h <= 2 * v.height,
          "upsample_flow target must fit within twice the input size");
  FlowField out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const Tap ty = upsample_tap(y, v.height);
    for (int x = 0; x < out_w; ++x) {
      const Tap tx = upsample_tap(x, v.width);
      const double w00 = (1.0 - tx.a) * (1.0 - ty.a);
      const double w01 = tx.a * (1.0 - ty.a);
      const double w10 = (1.0 - tx.a) * ty.a;
      const double w11 = tx.a * ty.a;
      const std::size_t p00 = v.index(tx.i0, ty.i0);
      const std::size_t p01 = v.index(tx.i1, ty.i0);
      const std::size_t p10 = v.index(tx.i0, ty.i1);
      const std::size_t p11 = v.index(tx.i1, ty.i1);
      const std::size_t o = out.index(x, y);
      out.dx[o] = 2.0 * (w00 * v.dx[p00] + w01 * v.dx[p01] + w10 * v.dx[p10] + w11 * v.dx[p11]);
      out.dy[o] = 2.0 * (w00 * v.dy[p00] + w01 * v.dy[p01] + w10 * v.dy[p10] + w11 * v.dy[p11]);
    }
  }
  return out;
}

FlowField upsample_flow(const FlowField& v) { return upsample_flow(v, 2 * v.width, 2 * v.height); }

FlowField upsample_flow_adjoint(const FlowField& grad_fine, int in_w, int in_h) {
  require(in_w >= 1 && in_h >= 1 && grad_fine.width <= 2 * in_w && grad_fine.height <= 2 * in_h,
          "upsample_flow_adjoint size mismatch");
  FlowField out(in_w, in_h);
  for (int y = 0; y < grad_fine.height; ++y) {
    const Tap ty = upsample_tap(y, in_h);
    for (int x = 0; x < grad_fine.width; ++x) {
      const Tap tx = upsample_tap(x, in_w);
      const std::size_t o = grad_fine.index(x, y);
      const double gx = 2.0 * grad_fine.dx[o];
      const double gy = 2.0 * grad_fine.dy[o];
      const double w00 = (1.0 - tx.a) * (1.0 - ty.a);
      const double w01 = tx.a * (1.0 - ty.a);
      const double w10 = (1.0 - tx.a) * ty.a;
      const double w11 = tx.a * ty.a;
      out.dx[out.index(tx.i0, ty.i0)] += w00 * gx;
      out.dx[out.index(tx.i1, ty.i0)] += w01 * gx;
      out.dx[out.index(tx.i0, ty.i1)] += w10 * gx;
      out.dx[out.index(tx.i1, ty.i1)] += w11 * gx;
      out.dy[out.index(tx.i0, ty.i0)] += w00 * gy;
      out.dy[out.index(tx.i1, ty.i0)] += w01 * gy;
      out.dy[out.index(tx.i0, ty.i1)] += w10 * gy;
      out.dy[out.index(tx.i1, ty.i1)] += w11 * gy;
    }
  }
  return out;
}

}  // namespace circleflow

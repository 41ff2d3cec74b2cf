#include "circleflow/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "circleflow/error.hpp"

namespace circleflow {

double kernel_psnr(const Kernel& est, const Kernel& gt) {
  require(est.side() == gt.side(), "kernel sides differ");
  double mse = 0.0;
  for (std::size_t i = 0; i < gt.values().size(); ++i) {
    const double d = est.values()[i] - gt.values()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(gt.values().size());
  if (mse == 0.0) return kPsnrCap;
  const double peak = gt.max();
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double kernel_ssim(const Kernel& est, const Kernel& gt) {
  require(est.side() == gt.side(), "kernel sides differ");
  const int n = gt.side();
  const int win = std::min(7, n);
  const double range = gt.max();
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  const double cnt = static_cast<double>(win) * win;
  double total = 0.0;
  int windows = 0;
  for (int y0 = 0; y0 + win <= n; ++y0) {
    for (int x0 = 0; x0 + win <= n; ++x0) {
      double mx = 0.0;
      double my = 0.0;
      for (int y = y0; y < y0 + win; ++y) {
        for (int x = x0; x < x0 + win; ++x) {
          mx += est.at(x, y);
          my += gt.at(x, y);
        }
      }
      mx /= cnt;
      my /= cnt;
      double vx = 0.0;
      double vy = 0.0;
      double cxy = 0.0;
      for (int y = y0; y < y0 + win; ++y) {
        for (int x = x0; x < x0 + win; ++x) {
          const double a = est.at(x, y) - mx;
          const double b = gt.at(x, y) - my;
          vx += a * a;
          vy += b * b;
          cxy += a * b;
        }
      }
      const double dof = cnt > 1.0 ? cnt - 1.0 : 1.0;
      vx /= dof;
      vy /= dof;
      cxy /= dof;
      total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++windows;
    }
  }
  return total / windows;
}

double image_psnr(const Image& est, const Image& ref) {
  require(est.same_shape(ref) && !ref.empty(), "images differ in shape");
  double mse = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = est.values()[i] - ref.values()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(ref.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

namespace {

// FFTW planning is not thread-safe.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<MtfCurve> mtf_from_psf(const Kernel& k, int n_freq, const std::vector<double>& orientations) {
  require(n_freq >= 2, "need at least two frequency samples");
  const int side = k.side();
  const int n = 4 * side;
  std::vector<double> in(static_cast<std::size_t>(n) * n, 0.0);
  // Kernel center at the origin so the phase is irrelevant; magnitude only.
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) in[static_cast<std::size_t>(r) * n + c] = k.at(c, r);
  }
  const int nh = n / 2 + 1;
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(n) * nh);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_plan plan = fftw_plan_dft_r2c_2d(n, n, in.data(), reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  const double dc = std::abs(spec[0]);
  // |F| on the full periodic grid, using Hermitian symmetry for the missing half.
  auto mag = [&](int ky, int kx) {
    ky = ((ky % n) + n) % n;
    kx = ((kx % n) + n) % n;
    if (kx < nh) return std::abs(spec[static_cast<std::size_t>(ky) * nh + kx]);
    return std::abs(spec[static_cast<std::size_t>((n - ky) % n) * nh + (n - kx)]);
  };
  std::vector<MtfCurve> out;
  for (double theta : orientations) {
    MtfCurve curve;
    curve.orientation = theta;
    for (int i = 0; i < n_freq; ++i) {
      const double f = 0.5 * i / (n_freq - 1);
      const double fx = f * std::cos(theta) * n;
      const double fy = f * std::sin(theta) * n;
      const int x0 = static_cast<int>(std::floor(fx));
      const int y0 = static_cast<int>(std::floor(fy));
      const double ax = fx - x0;
      const double ay = fy - y0;
      const double m = (1 - ay) * ((1 - ax) * mag(y0, x0) + ax * mag(y0, x0 + 1)) +
                       ay * ((1 - ax) * mag(y0 + 1, x0) + ax * mag(y0 + 1, x0 + 1));
      curve.frequencies.push_back(f);
      curve.modulation.push_back(i == 0 ? 1.0 : m / dc);
    }
    out.push_back(std::move(curve));
  }
  return out;
}

SfrResult slanted_edge_sfr(const Image& patch, double nominal_angle, int n_freq) {
  require(patch.channels() == 1, "slanted_edge_sfr expects a single channel");
  require(n_freq >= 2, "need at least two frequency samples");
  const int w = patch.width();
  const int h = patch.height();
  if (w < 8 || h < 4) fail(ErrorCode::kNoEdgeFound, "patch too small for edge analysis");

  double lo = patch.values().front();
  double hi = lo;
  for (double v : patch.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double contrast = hi - lo;
  if (!(contrast > 1e-6)) fail(ErrorCode::kNoEdgeFound, "patch has no contrast");

  // Edge location per row: centroid of |d/dx|.
  std::vector<double> ys;
  std::vector<double> xs;
  for (int y = 0; y < h; ++y) {
    double sw = 0.0;
    double sx = 0.0;
    for (int x = 1; x + 1 < w; ++x) {
      const double d = std::abs(patch.at(x + 1, y) - patch.at(x - 1, y)) * 0.5;
      sw += d;
      sx += d * x;
    }
    if (sw > 0.05 * contrast) {
      ys.push_back(y);
      xs.push_back(sx / sw);
    }
  }
  if (ys.size() < 2) fail(ErrorCode::kNoEdgeFound, "no edge detected in the patch");
  // x = a + b y by least squares.
  double my = 0.0;
  double mx = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    my += ys[i];
    mx += xs[i];
  }
  my /= static_cast<double>(ys.size());
  mx /= static_cast<double>(ys.size());
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (ys[i] - my) * (xs[i] - mx);
  }
  const double slope = syy > 0.0 ? sxy / syy : 0.0;
  const double a = mx - slope * my;

  SfrResult res;
  res.edge_angle = std::atan(slope);
  const double deg = std::abs(res.edge_angle) * 180.0 / std::numbers::pi;
  if (deg <= 1.0 || deg >= 15.0) {
    res.warnings.push_back("UnreliableAngle: estimated edge angle " + std::to_string(deg) + " deg is outside (1, 15)");
  }
  if (std::abs(std::abs(res.edge_angle) - std::abs(nominal_angle)) > 2.0 * std::numbers::pi / 180.0) {
    res.warnings.push_back("estimated edge angle differs from the nominal angle by more than 2 deg");
  }

  // Oversampled ESF along the edge normal.
  constexpr double kBin = 0.25;
  const double cosang = std::cos(res.edge_angle);
  double dmin = 1e300;
  double dmax = -1e300;
  std::vector<double> dist(patch.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = (x - (a + slope * y)) * cosang;
      dist[static_cast<std::size_t>(y) * w + x] = d;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  }
  const int nbins = static_cast<int>(std::floor((dmax - dmin) / kBin)) + 1;
  std::vector<double> sum(static_cast<std::size_t>(nbins), 0.0);
  std::vector<int> cnt(static_cast<std::size_t>(nbins), 0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const int bin = std::min(nbins - 1, static_cast<int>(std::floor((dist[i] - dmin) / kBin)));
    sum[static_cast<std::size_t>(bin)] += patch.values()[i];
    ++cnt[static_cast<std::size_t>(bin)];
  }
  std::vector<double> esf(static_cast<std::size_t>(nbins), 0.0);
  std::vector<int> filled;
  for (int i = 0; i < nbins; ++i) {
    if (cnt[static_cast<std::size_t>(i)] > 0) {
      esf[static_cast<std::size_t>(i)] = sum[static_cast<std::size_t>(i)] / cnt[static_cast<std::size_t>(i)];
      filled.push_back(i);
    }
  }
  // Empty bins: linear interpolation between filled neighbours.
  for (int i = 0; i < nbins; ++i) {
    if (cnt[static_cast<std::size_t>(i)] > 0) continue;
    auto it = std::lower_bound(filled.begin(), filled.end(), i);
    if (it == filled.begin()) {
      esf[static_cast<std::size_t>(i)] = esf[static_cast<std::size_t>(*it)];
    } else if (it == filled.end()) {
      esf[static_cast<std::size_t>(i)] = esf[static_cast<std::size_t>(filled.back())];
    } else {
      const int r = *it;
      const int l = *(it - 1);
      const double t = static_cast<double>(i - l) / (r - l);
      esf[static_cast<std::size_t>(i)] =
          (1 - t) * esf[static_cast<std::size_t>(l)] + t * esf[static_cast<std::size_t>(r)];
    }
  }
  std::vector<double> lsf(static_cast<std::size_t>(nbins), 0.0);
  for (int i = 1; i + 1 < nbins; ++i) {
    lsf[static_cast<std::size_t>(i)] = 0.5 * (esf[static_cast<std::size_t>(i + 1)] - esf[static_cast<std::size_t>(i - 1)]);
  }
  // Hamming window centered on the LSF peak.
  int peak = 0;
  for (int i = 0; i < nbins; ++i) {
    if (std::abs(lsf[static_cast<std::size_t>(i)]) > std::abs(lsf[static_cast<std::size_t>(peak)])) peak = i;
  }
  const int half = std::min(peak, nbins - 1 - peak);
  if (half < 4) fail(ErrorCode::kNoEdgeFound, "edge too close to the patch border");
  const int len = 2 * half + 1;
  std::vector<double> win(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    const double hw = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (len - 1));
    win[static_cast<std::size_t>(i)] = hw * lsf[static_cast<std::size_t>(peak - half + i)];
  }
  auto dtft = [&](double f) {
    std::complex<double> s = 0.0;
    for (int i = 0; i < len; ++i) {
      s += win[static_cast<std::size_t>(i)] * std::polar(1.0, -2.0 * std::numbers::pi * f * (i - half) * kBin);
    }
    return std::abs(s);
  };
  const double dc = dtft(0.0);
  if (!(dc > 0.0)) fail(ErrorCode::kNoEdgeFound, "line spread function has no mass");
  // Direction of the edge normal in the same convention as mtf_from_psf.
  res.curve.orientation = -res.edge_angle;
  for (int i = 0; i < n_freq; ++i) {
    const double f = 0.5 * i / (n_freq - 1);
    double m = i == 0 ? 1.0 : dtft(f) / dc;
    if (i > 0) {
      const double arg = 2.0 * std::numbers::pi * f * kBin;
      m /= std::sin(arg) / arg;
    }
    res.curve.frequencies.push_back(f);
    res.curve.modulation.push_back(m);
  }
  return res;
}

double curve_rms_delta(const MtfCurve& a, const MtfCurve& b, double f_max) {
  require(b.frequencies.size() >= 2 && b.frequencies.size() == b.modulation.size(), "curve b is malformed");
  require(a.frequencies.size() == a.modulation.size(), "curve a is malformed");
  double acc = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < a.frequencies.size(); ++i) {
    const double f = a.frequencies[i];
    if (f > f_max + 1e-12 || f < b.frequencies.front() - 1e-12 || f > b.frequencies.back() + 1e-12) continue;
    auto it = std::lower_bound(b.frequencies.begin(), b.frequencies.end(), f);
    std::size_t j = static_cast<std::size_t>(it - b.frequencies.begin());
    double mb = 0.0;
    if (j == 0) {
      mb = b.modulation.front();
    } else if (j >= b.frequencies.size()) {
      mb = b.modulation.back();
    } else {
      const double t = (f - b.frequencies[j - 1]) / (b.frequencies[j] - b.frequencies[j - 1]);
      mb = (1 - t) * b.modulation[j - 1] + t * b.modulation[j];
    }
    const double d = a.modulation[i] - mb;
    acc += d * d;
    ++n;
  }
  if (n == 0) fail(ErrorCode::kInvalidInput, "curves do not overlap below f_max");
  return std::sqrt(acc / n);
}

}  // namespace circleflow

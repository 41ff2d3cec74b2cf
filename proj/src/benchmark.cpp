#include "circleflow/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <numbers>

#include "circleflow/error.hpp"
#include "circleflow/metrics.hpp"
#include "circleflow/sensor.hpp"

namespace circleflow {

CircleGridSpec BenchmarkSpec::small_chart() {
  CircleGridSpec s;
  s.rows = 3;
  s.cols = 3;
  s.pitch = 64.0;
  s.radius = 20.0;
  return s;
}

Image simulate_capture(const BenchmarkSpec& spec, Image* sharp, Image* blurred, PsfField* truth) {
  const int w = spec.chart.canvas_width();
  const int h = spec.chart.canvas_height();
  const auto xform = AffinePerturbation::about_center(spec.rotation_deg * std::numbers::pi / 180.0, 1.0, spec.shift_x,
                                                      spec.shift_y, w / 2.0, h / 2.0);
  const Image plane =
      spec.optim.use_circle_chart ? render_chart(spec.chart, xform) : render_checkerboard(spec.chart, xform);
  const Image rgb = Image::merge({plane, plane, plane});
  PsfField gt = synth_field(spec.lens, spec.grid_rows, spec.grid_cols, 3, w, h);
  Image b = blur_field(rgb, gt);
  if (blurred != nullptr) *blurred = b;
  if (spec.noise) b = add_noise(b, *spec.noise);
  if (sharp != nullptr) *sharp = rgb;
  if (truth != nullptr) *truth = std::move(gt);
  return capture_forward(b, spec.optim.cfa);
}

namespace {

Kernel padded(const Kernel& k, int side) {
  if (k.side() == side) return k;
  const int off = (side - k.side()) / 2;
  std::vector<double> w(static_cast<std::size_t>(side) * side, 0.0);
  for (int j = 0; j < k.side(); ++j)
    for (int i = 0; i < k.side(); ++i) w[static_cast<std::size_t>(j + off) * side + i + off] = k.at(i, j);
  return Kernel(side, std::move(w));
}

}  // namespace

std::vector<CellScore> score_field(const PsfField& est, const PsfField& gt) {
  require(est.grid_rows() == gt.grid_rows() && est.grid_cols() == gt.grid_cols(), "fields differ in grid shape");
  std::vector<CellScore> out;
  for (int r = 0; r < est.grid_rows(); ++r) {
    for (int c = 0; c < est.grid_cols(); ++c) {
      for (int ch = 0; ch < est.channels(); ++ch) {
        const auto& k = est.at(r, c, ch);
        if (!k) continue;
        const Kernel& g0 = gt.kernel_for(r, c, ch);
        const int side = std::max(k->side(), g0.side());
        const Kernel e = padded(*k, side);
        const Kernel g = padded(g0, side);
        out.push_back({r, c, ch, kernel_psnr(e, g), kernel_ssim(e, g)});
      }
    }
  }
  return out;
}

BenchmarkResult run_synthetic_benchmark(const BenchmarkSpec& spec) {
  BenchmarkResult res;
  res.observed = simulate_capture(spec, &res.sharp, &res.blurred, &res.truth);
  OptimConfig cfg = spec.optim;
  cfg.kernel_side = spec.lens.side;
  const auto t0 = std::chrono::steady_clock::now();
  res.calibration = calibrate_field(res.observed, spec.grid_rows, spec.grid_cols, cfg, spec.jobs);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.scores = score_field(res.calibration.field, res.truth);
  if (!res.scores.empty()) {
    res.min_psnr = res.scores.front().psnr;
    res.min_ssim = res.scores.front().ssim;
    for (const auto& s : res.scores) {
      res.mean_psnr += s.psnr;
      res.mean_ssim += s.ssim;
      res.min_psnr = std::min(res.min_psnr, s.psnr);
      res.min_ssim = std::min(res.min_ssim, s.ssim);
    }
    res.mean_psnr /= static_cast<double>(res.scores.size());
    res.mean_ssim /= static_cast<double>(res.scores.size());
  }
  return res;
}

}  // namespace circleflow

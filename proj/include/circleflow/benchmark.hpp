#pragma once

#include <optional>
#include <vector>

#include "circleflow/chart.hpp"
#include "circleflow/optics_sim.hpp"
#include "circleflow/optim.hpp"

namespace circleflow {

// Synthetic round trip: render, blur with a known field, add noise, Bayer
// sample, demosaic, calibrate, score against ground truth.
struct BenchmarkSpec {
  CircleGridSpec chart = small_chart();
  AberrationSpec lens = AberrationSpec::default_lens(15);
  std::optional<NoiseSpec> noise;
  // Chart placement relative to the pixel grid (pixels / degrees).
  double shift_x = 0.0;
  double shift_y = 0.0;
  double rotation_deg = 0.0;
  int grid_rows = 3;
  int grid_cols = 3;
  OptimConfig optim;
  int jobs = 1;

  // 3 x 3 circles at pitch 64 on a 192 x 192 canvas.
  static CircleGridSpec small_chart();
};

struct CellScore {
  int row = 0;
  int col = 0;
  int channel = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct BenchmarkResult {
  Image sharp;     // ideal chart, 3 channels
  Image blurred;   // before noise
  Image observed;  // demosaiced noisy capture that was calibrated
  PsfField truth;
  FieldCalibration calibration;
  std::vector<CellScore> scores;  // holes are skipped
  double mean_psnr = 0.0;
  double min_psnr = 0.0;
  double mean_ssim = 0.0;
  double min_ssim = 0.0;
  double seconds = 0.0;  // calibration wall time
};

// Renders the observation only (no calibration).
Image simulate_capture(const BenchmarkSpec& spec, Image* sharp = nullptr, Image* blurred = nullptr,
                       PsfField* truth = nullptr);

BenchmarkResult run_synthetic_benchmark(const BenchmarkSpec& spec);

// Scores every calibrated cell of `est` against `gt`. Kernels of different
// sides are compared on the larger grid, the smaller one zero-padded.
std::vector<CellScore> score_field(const PsfField& est, const PsfField& gt);

}  // namespace circleflow

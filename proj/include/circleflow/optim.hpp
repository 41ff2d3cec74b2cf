#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "circleflow/image.hpp"
#include "circleflow/psf_field.hpp"
#include "circleflow/sensor.hpp"

namespace circleflow {

enum class Parameterization { kLogitGrid, kCoordMlp };

struct OptimConfig {
  int kernel_side = 21;
  int pyramid_levels = 2;
  // The finest optimized flow level is 2^flow_coarsening times coarser than
  // the patch; 0 optimizes a per-pixel flow at the last level.
  int flow_coarsening = 2;
  int iterations = 150;  // per pyramid level
  double flow_step = 0.04;
  double kernel_step = 0.05;
  double mlp_step = 1e-3;
  // Steps decay exponentially within each level down to step * step_decay.
  double step_decay = 0.1;
  double grad_weight = 0.3;
  double smooth_weight = 0.03;
  double smooth_anneal = 0.5;  // smoothness weight multiplier per level
  double center_weight = 1.0;  // penalty on the squared kernel centroid (flow runs only)
  double kernel_smooth_weight = 0.15;  // squared forward differences of the kernel weights
  double kernel_init_sigma = 2.0;
  Parameterization parameterization = Parameterization::kLogitGrid;
  int mlp_hidden = 64;
  double mlp_omega0 = 30.0;
  int morph_radius = 0;  // 0 = kernel_side / 2
  // Sub-pixel factor of the antialiased proxy that the flow warps; 1 warps
  // the pixel-binary proxy directly.
  int proxy_supersample = 4;
  // Translation applied to the proxy before optimization; injects a known
  // misregistration for ablations and recovery tests.
  double proxy_offset_x = 0.0;
  double proxy_offset_y = 0.0;
  bool use_flow = true;
  bool demosaic_aware = true;
  bool use_circle_chart = true;  // benchmark target: circles or checkerboard
  CfaPattern cfa = CfaPattern::kRGGB;
  std::uint64_t seed = 0;

  void validate() const;
  int effective_morph_radius() const { return morph_radius > 0 ? morph_radius : kernel_side / 2; }
};

// How a single color plane was sampled: the CFA pattern as seen from the
// plane's origin and the plane's color index.
struct PlaneSampling {
  CfaPattern pattern = CfaPattern::kRGGB;
  int channel = 1;
};

struct CalibrationResult {
  Kernel kernel;
  Image latent;
  FlowField flow;
  std::vector<double> loss_trace;  // fidelity + gradient loss, one per iteration
  double final_fidelity = 0.0;
  double final_gradient_loss = 0.0;
  double dark_level = 0.0;
  double bright_level = 0.0;
};

// conv2d per channel, then capture_forward when demosaic_aware.
Image reblur(const Image& latent, const Kernel& k, bool demosaic_aware, CfaPattern pattern);

// Mean absolute error plus grad_weight times the mean absolute errors of the
// x and y forward differences.
double loss_total(const Image& b_hat, const Image& b, double grad_weight = 1.0);
struct LossParts {
  double fidelity = 0.0;
  double gradient = 0.0;
};
LossParts loss_parts(const Image& b_hat, const Image& b);
// Subgradient of loss_total with respect to b_hat (sign(0) = 0).
Image loss_total_grad(const Image& b_hat, const Image& b, double grad_weight = 1.0);

// Joint flow/kernel optimization on one single-channel patch.
CalibrationResult calibrate_patch(const Image& b, const OptimConfig& cfg, const PlaneSampling& sampling = {});
// Same loop with a caller-supplied starting latent instead of the binary
// proxy (oracle experiments and tests).
CalibrationResult calibrate_patch_from(const Image& b, const Image& start_latent, const OptimConfig& cfg,
                                       const PlaneSampling& sampling = {});

struct CellFailure {
  int row = 0;
  int col = 0;
  int channel = 0;
  std::string code;
  std::string message;
};

struct FieldCalibration {
  PsfField field;
  std::vector<std::optional<CalibrationResult>> results;  // (row * cols + col) * channels + channel
  std::vector<CellFailure> failures;
};

// Calibrates every grid cell and channel. A 3-channel input is treated as a
// demosaiced capture with pattern cfg.cfa anchored at the image origin.
// Failed cells become holes; more than 20% failures raises CalibrationFailed.
// Results do not depend on `jobs`.
FieldCalibration calibrate_field(const Image& img, int grid_rows, int grid_cols, const OptimConfig& cfg,
                                 int jobs = 1);

struct GradCheckReport {
  double max_relative_error = 0.0;
  int probes = 0;
  int skipped = 0;  // probes whose stencil crossed a kink and were redrawn
};

// Reverse-mode gradients against central differences (h = 1e-4) on a small
// synthetic problem built from cfg (kernel side and parameterization).
GradCheckReport grad_check(const OptimConfig& cfg, int probes);

}  // namespace circleflow

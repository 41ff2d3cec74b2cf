#include "circleflow/optim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "circleflow/chart.hpp"
#include "circleflow/error.hpp"
#include "circleflow/flowalign.hpp"
#include "circleflow/imagecore.hpp"
#include "circleflow/proxy.hpp"
#include "circleflow/psfmodel.hpp"
#include "circleflow/random.hpp"

namespace circleflow {

void OptimConfig::validate() const {
  require(kernel_side >= 1 && kernel_side % 2 == 1, "kernel_side must be odd");
  require(pyramid_levels >= 1, "pyramid_levels must be >= 1");
  require(flow_coarsening >= 0 && flow_coarsening <= 8, "flow_coarsening must be in [0, 8]");
  require(iterations >= 1, "iterations must be >= 1");
  require(flow_step > 0.0 && kernel_step > 0.0 && mlp_step > 0.0, "step sizes must be positive");
  require(step_decay > 0.0 && step_decay <= 1.0, "step_decay must lie in (0, 1]");
  require(grad_weight >= 0.0 && smooth_weight >= 0.0 && smooth_anneal > 0.0, "loss weights must be nonnegative");
  require(kernel_init_sigma > 0.0, "kernel_init_sigma must be positive");
  require(std::abs(proxy_offset_x) <= 4.0 && std::abs(proxy_offset_y) <= 4.0, "proxy offset must be within 4 px");
  require(center_weight >= 0.0 && kernel_smooth_weight >= 0.0, "penalty weights must be nonnegative");
  require(mlp_hidden >= 1 && mlp_omega0 > 0.0, "invalid MLP shape");
  require(morph_radius >= 0, "morph_radius must be nonnegative");
  require(proxy_supersample >= 1 && proxy_supersample <= 16, "proxy_supersample must be in [1, 16]");
}

Image reblur(const Image& latent, const Kernel& k, bool demosaic_aware, CfaPattern pattern) {
  Image out = conv2d(latent, k);
  if (!demosaic_aware) return out;
  require(latent.channels() == 3, "demosaic-aware reblur needs a 3-channel latent");
  return capture_forward(out, pattern);
}

LossParts loss_parts(const Image& b_hat, const Image& b) {
  require(b_hat.same_shape(b), "loss operands differ in shape");
  require(!b.empty(), "loss of empty images");
  const int w = b.width();
  const int h = b.height();
  const int nc = b.channels();
  double fid = 0.0;
  double gx = 0.0;
  double gy = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < nc; ++c) {
        const double r = b_hat.at(x, y, c) - b.at(x, y, c);
        fid += std::abs(r);
        if (x + 1 < w) gx += std::abs(b_hat.at(x + 1, y, c) - b.at(x + 1, y, c) - r);
        if (y + 1 < h) gy += std::abs(b_hat.at(x, y + 1, c) - b.at(x, y + 1, c) - r);
      }
    }
  }
  const double n = static_cast<double>(b.size());
  return {fid / n, (gx + gy) / n};
}

double loss_total(const Image& b_hat, const Image& b, double grad_weight) {
  const LossParts p = loss_parts(b_hat, b);
  return p.fidelity + grad_weight * p.gradient;
}

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Image loss_total_grad(const Image& b_hat, const Image& b, double grad_weight) {
  require(b_hat.same_shape(b), "loss operands differ in shape");
  const int w = b.width();
  const int h = b.height();
  const int nc = b.channels();
  const double inv = 1.0 / static_cast<double>(b.size());
  Image g(w, h, nc);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < nc; ++c) {
        const double r = b_hat.at(x, y, c) - b.at(x, y, c);
        g.at(x, y, c) += sgn(r) * inv;
        if (x + 1 < w) {
          const double s = grad_weight * inv * sgn(b_hat.at(x + 1, y, c) - b.at(x + 1, y, c) - r);
          g.at(x + 1, y, c) += s;
          g.at(x, y, c) -= s;
        }
        if (y + 1 < h) {
          const double s = grad_weight * inv * sgn(b_hat.at(x, y + 1, c) - b.at(x, y + 1, c) - r);
          g.at(x, y + 1, c) += s;
          g.at(x, y, c) -= s;
        }
      }
    }
  }
  return g;
}

namespace {

struct Adam {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;

  void reset(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    t = 0;
  }

  void step(std::vector<double>& x, const std::vector<double>& g, double lr) {
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

// Replicate-padded copy of a single plane with apron r.
struct Padded {
  int w = 0;
  int h = 0;
  int r = 0;
  int pw = 0;
  std::vector<double> v;

  Padded(const Image& img, int radius) : w(img.width()), h(img.height()), r(radius), pw(img.width() + 2 * radius) {
    const int ph = h + 2 * r;
    v.resize(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y) {
      const int sy = std::clamp(y - r, 0, h - 1);
      for (int x = 0; x < pw; ++x) v[static_cast<std::size_t>(y) * pw + x] = img.at(std::clamp(x - r, 0, w - 1), sy);
    }
  }
};

// The joint objective on one plane: parameters, forward pass and reverse pass.
class Problem {
 public:
  Problem(Image i0, Image b, const OptimConfig& cfg, const PlaneSampling& sampling)
      : cfg_(cfg), sampling_(sampling), i0_(std::move(i0)), b_(std::move(b)) {
    const int side = cfg.kernel_side;
    if (cfg.parameterization == Parameterization::kCoordMlp) {
      mlp_ = CoordMlp::siren(side, cfg.mlp_hidden, cfg.mlp_omega0, cfg.seed);
    } else {
      logits_ = LogitGrid::gaussian(side, cfg.kernel_init_sigma);
    }
    if (cfg.use_flow) flow_ = init_flow(b_.width(), b_.height(), cfg.pyramid_levels + cfg.flow_coarsening);
    const std::size_t n = b_.pixel_count();
    sites_.assign(n, 1);
    if (cfg.demosaic_aware) {
      for (int y = 0; y < b_.height(); ++y) {
        for (int x = 0; x < b_.width(); ++x) {
          sites_[static_cast<std::size_t>(y) * b_.width() + x] =
              cfa_color(sampling.pattern, x, y) == sampling.channel ? 1 : 0;
        }
      }
    }
  }

  bool mlp() const { return cfg_.parameterization == Parameterization::kCoordMlp; }
  std::vector<double>& kernel_params() { return mlp() ? mlp_.params() : logits_.logits; }
  FlowParams& flow() { return flow_; }
  const Image& proxy() const { return i0_; }

  std::vector<double> kernel_weights() const { return softmax(mlp() ? mlp_.logits() : logits_.logits); }

  FlowField full_flow() const {
    return cfg_.use_flow ? compose_flow(flow_) : FlowField(b_.width(), b_.height());
  }

  struct Eval {
    double fidelity = 0.0;
    double gradient = 0.0;
    double smooth = 0.0;
    double center = 0.0;
    double rough = 0.0;
    double data_loss() const { return fidelity + gradient; }
    double penalty() const { return smooth + center + rough; }
  };

  struct Grads {
    std::vector<double> kernel;
    std::vector<FlowField> flow;
  };

  // Objective = fidelity + grad_weight * gradient term + smooth_weight * smoothness
  // + center_weight * |kernel centroid|^2. The last term only applies with flow,
  // where a global warp and a kernel shift are otherwise interchangeable.
  Eval evaluate(double smooth_weight, Grads* grads, std::vector<long>* signature = nullptr) const {
    const int side = cfg_.kernel_side;
    const int r = side / 2;
    const int w = b_.width();
    const int h = b_.height();
    const std::vector<double> k = kernel_weights();
    Kernel(side, k);  // structural check of the unit-sum invariant
    std::vector<double> kf(k.rbegin(), k.rend());

    FlowField v = full_flow();
    const Image latent = cfg_.use_flow ? warp(i0_, v) : i0_;
    const Padded pad(latent, 2 * r);
    const int shift = r;  // output (x, y) reads padded window starting at (x + shift, y + shift)

    Image rb(w, h, 1);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!sites_[static_cast<std::size_t>(y) * w + x]) continue;
        double s = 0.0;
        for (int j = 0; j < side; ++j) {
          const double* prow = pad.v.data() + static_cast<std::size_t>(y + shift + j) * pad.pw + x + shift;
          const double* krow = kf.data() + static_cast<std::size_t>(j) * side;
          for (int i = 0; i < side; ++i) s += krow[i] * prow[i];
        }
        rb.at(x, y) = s;
      }
    }
    const Image bh = cfg_.demosaic_aware ? capture_plane(rb, sampling_.pattern, sampling_.channel) : rb;
    const LossParts parts = loss_parts(bh, b_);
    Eval e;
    e.fidelity = parts.fidelity;
    e.gradient = cfg_.grad_weight * parts.gradient;
    double cx = 0.0;
    double cy = 0.0;
    const bool centered = cfg_.use_flow && cfg_.center_weight > 0.0;
    if (cfg_.use_flow) e.smooth = smooth_weight * flow_smoothness(v);
    if (centered) {
      for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
          cx += k[static_cast<std::size_t>(j) * side + i] * (i - r);
          cy += k[static_cast<std::size_t>(j) * side + i] * (j - r);
        }
      }
      e.center = cfg_.center_weight * (cx * cx + cy * cy);
    }
    std::vector<double> grough;
    if (cfg_.kernel_smooth_weight > 0.0) {
      grough.assign(k.size(), 0.0);
      double acc = 0.0;
      for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
          const std::size_t a = static_cast<std::size_t>(j) * side + i;
          if (i + 1 < side) {
            const double d = k[a + 1] - k[a];
            acc += d * d;
            grough[a + 1] += 2.0 * d;
            grough[a] -= 2.0 * d;
          }
          if (j + 1 < side) {
            const double d = k[a + side] - k[a];
            acc += d * d;
            grough[a + side] += 2.0 * d;
            grough[a] -= 2.0 * d;
          }
        }
      }
      e.rough = cfg_.kernel_smooth_weight * acc;
    }

    if (signature != nullptr) {
      signature->clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double rr = bh.at(x, y) - b_.at(x, y);
          signature->push_back(static_cast<long>(sgn(rr)));
          if (x + 1 < w) signature->push_back(static_cast<long>(sgn(bh.at(x + 1, y) - b_.at(x + 1, y) - rr)));
          if (y + 1 < h) signature->push_back(static_cast<long>(sgn(bh.at(x, y + 1) - b_.at(x, y + 1) - rr)));
          if (cfg_.use_flow) {
            const std::size_t i = v.index(x, y);
            signature->push_back(static_cast<long>(std::floor(x + v.dx[i])));
            signature->push_back(static_cast<long>(std::floor(y + v.dy[i])));
          }
        }
      }
    }
    if (grads == nullptr) return e;

    const Image g_bh = loss_total_grad(bh, b_, cfg_.grad_weight);
    const Image g_rb = cfg_.demosaic_aware ? capture_plane_adjoint(g_bh, sampling_.pattern, sampling_.channel) : g_bh;

    std::vector<double> gkf(kf.size(), 0.0);
    std::vector<double> gpad(cfg_.use_flow ? pad.v.size() : 0, 0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double g = g_rb.at(x, y);
        if (g == 0.0) continue;
        for (int j = 0; j < side; ++j) {
          const std::size_t off = static_cast<std::size_t>(y + shift + j) * pad.pw + x + shift;
          const double* prow = pad.v.data() + off;
          double* gk = gkf.data() + static_cast<std::size_t>(j) * side;
          for (int i = 0; i < side; ++i) gk[i] += g * prow[i];
          if (!gpad.empty()) {
            const double* krow = kf.data() + static_cast<std::size_t>(j) * side;
            double* gp = gpad.data() + off;
            for (int i = 0; i < side; ++i) gp[i] += g * krow[i];
          }
        }
      }
    }
    std::vector<double> gk(gkf.rbegin(), gkf.rend());
    if (centered) {
      for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
          gk[static_cast<std::size_t>(j) * side + i] += 2.0 * cfg_.center_weight * (cx * (i - r) + cy * (j - r));
        }
      }
    }
    for (std::size_t i = 0; i < grough.size(); ++i) gk[i] += cfg_.kernel_smooth_weight * grough[i];
    const std::vector<double> glog = softmax_backward(k, gk);
    grads->kernel = mlp() ? mlp_.backward(glog) : glog;

    grads->flow.clear();
    if (cfg_.use_flow) {
      Image glat(w, h, 1);
      const int ph = h + 2 * pad.r;
      for (int py = 0; py < ph; ++py) {
        const int sy = std::clamp(py - pad.r, 0, h - 1);
        for (int px = 0; px < pad.pw; ++px) {
          glat.at(std::clamp(px - pad.r, 0, w - 1), sy) += gpad[static_cast<std::size_t>(py) * pad.pw + px];
        }
      }
      FlowField gv = warp_backward_flow(i0_, v, glat);
      if (smooth_weight > 0.0) {
        const FlowField gs = flow_smoothness_grad(v);
        for (std::size_t i = 0; i < gv.size(); ++i) {
          gv.dx[i] += smooth_weight * gs.dx[i];
          gv.dy[i] += smooth_weight * gs.dy[i];
        }
      }
      grads->flow = compose_flow_adjoint(flow_, gv);
    }
    return e;
  }

 private:
  OptimConfig cfg_;
  PlaneSampling sampling_;
  Image i0_;
  Image b_;
  LogitGrid logits_;
  CoordMlp mlp_;
  FlowParams flow_;
  std::vector<char> sites_;
};

}  // namespace

namespace {

void check_patch(const Image& b, const OptimConfig& cfg, const PlaneSampling& sampling) {
  cfg.validate();
  require(b.channels() == 1, "calibrate_patch expects a single color plane");
  require(b.all_finite(), "patch contains non-finite values");
  require(b.width() >= cfg.kernel_side && b.height() >= cfg.kernel_side, "patch is smaller than the kernel");
  require(sampling.channel >= 0 && sampling.channel < 3, "sampling channel out of range");
}

CalibrationResult run_loop(Problem& prob, const OptimConfig& cfg);

}  // namespace

CalibrationResult calibrate_patch(const Image& b, const OptimConfig& cfg, const PlaneSampling& sampling) {
  check_patch(b, cfg, sampling);
  const BinaryProxy proxy = build_proxy(b, cfg.effective_morph_radius(), cfg.proxy_supersample);
  Image start = proxy.latent;
  if (cfg.proxy_offset_x != 0.0 || cfg.proxy_offset_y != 0.0) {
    start = warp(start, FlowField(b.width(), b.height(), cfg.proxy_offset_x, cfg.proxy_offset_y));
  }
  Problem prob(std::move(start), b, cfg, sampling);
  CalibrationResult res = run_loop(prob, cfg);
  res.dark_level = proxy.dark_level;
  res.bright_level = proxy.bright_level;
  return res;
}

CalibrationResult calibrate_patch_from(const Image& b, const Image& start_latent, const OptimConfig& cfg,
                                       const PlaneSampling& sampling) {
  check_patch(b, cfg, sampling);
  require(start_latent.same_shape(b), "starting latent must match the patch");
  Problem prob(start_latent, b, cfg, sampling);
  return run_loop(prob, cfg);
}

namespace {

CalibrationResult run_loop(Problem& prob, const OptimConfig& cfg) {
  CalibrationResult res;
  res.loss_trace.reserve(static_cast<std::size_t>(cfg.iterations) * cfg.pyramid_levels);
  const double kstep = prob.mlp() ? cfg.mlp_step : cfg.kernel_step;
  Adam kadam;
  Adam fx;
  Adam fy;
  Problem::Grads g;
  // Kernel moments carry over between levels and its step decays over the
  // whole run; each new flow level starts from zero with a short ramp so the
  // first, sign-sized Adam steps do not undo the coarser fit.
  kadam.reset(prob.kernel_params().size());
  const int total = cfg.iterations * cfg.pyramid_levels;
  const double ramp = std::max(1.0, 0.3 * cfg.iterations);
  for (int level = 0; level < cfg.pyramid_levels; ++level) {
    FlowField* active = nullptr;
    if (cfg.use_flow) {
      prob.flow().current = level;
      active = &prob.flow().levels[static_cast<std::size_t>(level)];
      fx.reset(active->dx.size());
      fy.reset(active->dy.size());
    }
    const double sw = cfg.smooth_weight * std::pow(cfg.smooth_anneal, level);
    for (int it = 0; it < cfg.iterations; ++it) {
      const Problem::Eval e = prob.evaluate(sw, &g);
      const double loss = e.data_loss();
      if (!std::isfinite(loss + e.penalty())) {
        fail(ErrorCode::kNonFiniteLoss, "non-finite loss at level " + std::to_string(level) + ", iteration " +
                                            std::to_string(it));
      }
      res.loss_trace.push_back(loss);
      const int done = level * cfg.iterations + it;
      const double kfrac = total > 1 ? static_cast<double>(done) / (total - 1) : 0.0;
      kadam.step(prob.kernel_params(), g.kernel, kstep * std::pow(cfg.step_decay, kfrac));
      if (active != nullptr) {
        const double frac = cfg.iterations > 1 ? static_cast<double>(it) / (cfg.iterations - 1) : 0.0;
        const double lr = cfg.flow_step * std::pow(cfg.step_decay, frac) * std::min(1.0, (it + 1) / ramp);
        fx.step(active->dx, g.flow[static_cast<std::size_t>(level)].dx, lr);
        fy.step(active->dy, g.flow[static_cast<std::size_t>(level)].dy, lr);
      }
    }
  }
  const Problem::Eval fin = prob.evaluate(0.0, nullptr);
  if (!std::isfinite(fin.data_loss())) fail(ErrorCode::kNonFiniteLoss, "non-finite loss after the final step");
  res.kernel = Kernel(cfg.kernel_side, prob.kernel_weights());
  res.flow = prob.full_flow();
  res.latent = cfg.use_flow ? warp(prob.proxy(), res.flow) : prob.proxy();
  res.final_fidelity = fin.fidelity;
  res.final_gradient_loss = fin.gradient;
  return res;
}

}  // namespace

FieldCalibration calibrate_field(const Image& img, int grid_rows, int grid_cols, const OptimConfig& cfg, int jobs) {
  cfg.validate();
  require(img.channels() == 1 || img.channels() == 3, "image must have 1 or 3 channels");
  const int channels = img.channels();
  FieldCalibration out;
  out.field = PsfField(grid_rows, grid_cols, channels, img.width(), img.height());
  const auto bounds = out.field.bounds();
  const std::size_t tasks = bounds.size() * static_cast<std::size_t>(channels);
  out.results.resize(tasks);
  std::vector<std::optional<CellFailure>> failures(tasks);
  std::vector<Image> planes;
  for (int c = 0; c < channels; ++c) planes.push_back(img.channel(c));

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks) return;
      const std::size_t cell = t / static_cast<std::size_t>(channels);
      const int ch = static_cast<int>(t % static_cast<std::size_t>(channels));
      const PatchBounds& b = bounds[cell];
      OptimConfig local = cfg;
      local.seed = SplitMix64::derive(cfg.seed, cell, static_cast<std::uint64_t>(ch));
      // A single plane carries no CFA layout, so it is fitted without the sensor model.
      if (channels == 1) local.demosaic_aware = false;
      PlaneSampling sampling{shift_pattern(cfg.cfa, b.x, b.y), ch};
      try {
        out.results[t] = calibrate_patch(planes[static_cast<std::size_t>(ch)].crop(b.x, b.y, b.width, b.height), local,
                                         sampling);
      } catch (const Error& e) {
        failures[t] = CellFailure{static_cast<int>(cell) / grid_cols, static_cast<int>(cell) % grid_cols, ch,
                                  std::string(error_code_name(e.code())), e.what()};
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  for (std::size_t t = 0; t < tasks; ++t) {
    const int cell = static_cast<int>(t / static_cast<std::size_t>(channels));
    const int ch = static_cast<int>(t % static_cast<std::size_t>(channels));
    if (out.results[t]) {
      out.field.set(cell / grid_cols, cell % grid_cols, ch, out.results[t]->kernel);
    } else if (failures[t]) {
      out.failures.push_back(*failures[t]);
    }
  }
  if (static_cast<double>(out.failures.size()) > 0.2 * static_cast<double>(tasks)) {
    fail(ErrorCode::kCalibrationFailed, std::to_string(out.failures.size()) + " of " + std::to_string(tasks) +
                                            " cells failed; first: " + out.failures.front().message);
  }
  return out;
}

GradCheckReport grad_check(const OptimConfig& cfg_in, int probes) {
  cfg_in.validate();
  require(cfg_in.kernel_side <= 9, "grad_check needs a kernel side of at most 9");
  require(probes >= 1, "need at least one probe");
  OptimConfig cfg = cfg_in;
  cfg.pyramid_levels = std::min(cfg.pyramid_levels, 3);
  cfg.flow_coarsening = std::min(cfg.flow_coarsening, 4 - cfg.pyramid_levels);

  // One blurred circle on a 32 x 32 patch.
  CircleGridSpec spec;
  spec.rows = 1;
  spec.cols = 1;
  spec.pitch = 32.0;
  spec.radius = 9.0;
  spec.supersample = 4;
  const Image sharp = render_chart(spec, AffinePerturbation::about_center(0.05, 1.0, 0.3, -0.2, 16.0, 16.0));
  const PlaneSampling sampling{cfg.cfa, 0};
  Image b = conv2d(sharp, kernel_from_logits(LogitGrid::gaussian(cfg.kernel_side, 1.2)));
  if (cfg.demosaic_aware) b = capture_plane(b, sampling.pattern, sampling.channel);
  const BinaryProxy proxy = build_proxy(b, std::max(1, cfg.kernel_side / 2));

  Problem prob(proxy.image, b, cfg, sampling);
  SplitMix64 rng(SplitMix64::derive(cfg.seed, 0x67636b));
  // Move off the initial point so no quantity sits exactly on a kink.
  for (double& p : prob.kernel_params()) p += 0.1 * rng.normal();
  if (cfg.use_flow) {
    prob.flow().current = cfg.pyramid_levels - 1;
    for (auto& lv : prob.flow().levels) {
      for (double& d : lv.dx) d += 0.15 * rng.normal();
      for (double& d : lv.dy) d += 0.15 * rng.normal();
    }
  }
  const double sw = cfg.smooth_weight;
  auto objective = [&](std::vector<long>* sig) {
    const auto e = prob.evaluate(sw, nullptr, sig);
    return e.data_loss() + e.penalty();
  };
  Problem::Grads g;
  std::vector<long> sig0;
  prob.evaluate(sw, &g, &sig0);

  constexpr double h = 1e-4;
  GradCheckReport rep;
  const int max_attempts = probes * 50;
  for (int attempt = 0; attempt < max_attempts && rep.probes < probes; ++attempt) {
    double* param = nullptr;
    double analytic = 0.0;
    const bool pick_flow = cfg.use_flow && (rng.next() & 1U);
    if (pick_flow) {
      const std::size_t l = rng.next() % static_cast<std::size_t>(cfg.pyramid_levels);
      FlowField& lv = prob.flow().levels[l];
      const std::size_t i = rng.next() % lv.size();
      const bool along_x = (rng.next() & 1U) != 0;
      param = along_x ? &lv.dx[i] : &lv.dy[i];
      analytic = along_x ? g.flow[l].dx[i] : g.flow[l].dy[i];
    } else {
      auto& kp = prob.kernel_params();
      const std::size_t i = rng.next() % kp.size();
      param = &kp[i];
      analytic = g.kernel[i];
    }
    const double saved = *param;
    std::vector<long> sp;
    std::vector<long> sm;
    *param = saved + h;
    const double fp = objective(&sp);
    *param = saved - h;
    const double fm = objective(&sm);
    *param = saved;
    if (sp != sig0 || sm != sig0) {
      ++rep.skipped;
      continue;
    }
    const double fd = (fp - fm) / (2.0 * h);
    const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8});
    rep.max_relative_error = std::max(rep.max_relative_error, rel);
    ++rep.probes;
  }
  return rep;
}

}  // namespace circleflow

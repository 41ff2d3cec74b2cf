#include "circleflow/flowalign.hpp"

#include "circleflow/error.hpp"
#include "circleflow/imagecore.hpp"

namespace circleflow {

namespace {

int level_dim(int full, int levels, int l) {
  const int f = 1 << (levels - 1 - l);
  return (full + f - 1) / f;
}

}  // namespace

FlowParams init_flow(int width, int height, int levels) {
  require(width >= 1 && height >= 1, "flow dimensions must be positive");
  require(levels >= 1 && levels <= 16, "pyramid levels must be in [1, 16]");
  if (level_dim(width, levels, 0) < 4 || level_dim(height, levels, 0) < 4) {
    fail(ErrorCode::kInvalidInput, "too many pyramid levels for the image size");
  }
  FlowParams p;
  p.width = width;
  p.height = height;
  for (int l = 0; l < levels; ++l) p.levels.emplace_back(level_dim(width, levels, l), level_dim(height, levels, l));
  return p;
}

FlowField compose_flow(const FlowParams& p) {
  require(!p.levels.empty() && p.current >= 0 && p.current < p.level_count(), "invalid flow pyramid");
  FlowField acc = p.levels.front();
  for (int l = 1; l < p.level_count(); ++l) {
    const FlowField& lv = p.levels[static_cast<std::size_t>(l)];
    acc = upsample_flow(acc, lv.width, lv.height);
    if (l <= p.current) acc += lv;
  }
  return acc;
}

std::vector<FlowField> compose_flow_adjoint(const FlowParams& p, const FlowField& grad_full) {
  const int n = p.level_count();
  std::vector<FlowField> out;
  for (const auto& lv : p.levels) out.emplace_back(lv.width, lv.height);
  FlowField g = grad_full;
  for (int l = n - 1; l >= 0; --l) {
    if (l <= p.current) out[static_cast<std::size_t>(l)] = g;
    if (l > 0) {
      const FlowField& below = p.levels[static_cast<std::size_t>(l - 1)];
      g = upsample_flow_adjoint(g, below.width, below.height);
    }
  }
  return out;
}

double flow_smoothness(const FlowField& v) {
  if (v.size() == 0) return 0.0;
  double s = 0.0;
  for (int y = 0; y < v.height; ++y) {
    for (int x = 0; x < v.width; ++x) {
      const std::size_t i = v.index(x, y);
      if (x + 1 < v.width) {
        const double a = v.dx[i + 1] - v.dx[i];
        const double b = v.dy[i + 1] - v.dy[i];
        s += a * a + b * b;
      }
      if (y + 1 < v.height) {
        const std::size_t j = i + static_cast<std::size_t>(v.width);
        const double a = v.dx[j] - v.dx[i];
        const double b = v.dy[j] - v.dy[i];
        s += a * a + b * b;
      }
    }
  }
  return s / static_cast<double>(v.size());
}

FlowField flow_smoothness_grad(const FlowField& v) {
  FlowField g(v.width, v.height);
  if (v.size() == 0) return g;
  const double scale = 2.0 / static_cast<double>(v.size());
  for (int y = 0; y < v.height; ++y) {
    for (int x = 0; x < v.width; ++x) {
      const std::size_t i = v.index(x, y);
      if (x + 1 < v.width) {
        const double a = scale * (v.dx[i + 1] - v.dx[i]);
        const double b = scale * (v.dy[i + 1] - v.dy[i]);
        g.dx[i + 1] += a;
        g.dx[i] -= a;
        g.dy[i + 1] += b;
        g.dy[i] -= b;
      }
      if (y + 1 < v.height) {
        const std::size_t j = i + static_cast<std::size_t>(v.width);
        const double a = scale * (v.dx[j] - v.dx[i]);
        const double b = scale * (v.dy[j] - v.dy[i]);
        g.dx[j] += a;
        g.dx[i] -= a;
        g.dy[j] += b;
        g.dy[i] -= b;
      }
    }
  }
  return g;
}

}  // namespace circleflow

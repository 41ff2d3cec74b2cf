#pragma once

#include <vector>

#include "circleflow/image.hpp"

namespace circleflow {

// Coarse-to-fine pyramid of residual flows, coarsest first.
struct FlowParams {
  std::vector<FlowField> levels;
  int current = 0;  // finest level included in the composition
  int width = 0;
  int height = 0;

  int level_count() const { return static_cast<int>(levels.size()); }
};

// Level l has size ceil(W / 2^(L-1-l)) x ceil(H / 2^(L-1-l)).
FlowParams init_flow(int width, int height, int levels);

// Full-resolution flow from levels 0..current, each carried up the pyramid by
// upsample_flow (which doubles magnitudes at every step).
FlowField compose_flow(const FlowParams& p);

// Gradient with respect to every level (levels above `current` get zeros),
// given dL/d(full-resolution flow).
std::vector<FlowField> compose_flow_adjoint(const FlowParams& p, const FlowField& grad_full);

// Mean over pixels of the squared forward differences of dx and dy (the last
// column / row contributes no difference).
double flow_smoothness(const FlowField& v);
FlowField flow_smoothness_grad(const FlowField& v);

}  // namespace circleflow

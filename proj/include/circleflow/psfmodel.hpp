#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "circleflow/image.hpp"

namespace circleflow {

struct LogitGrid {
  int side = 0;
  std::vector<double> logits;

  static LogitGrid constant(int side, double value = 0.0);
  // Logits of a discrete isotropic Gaussian of width sigma (log-domain, so the
  // realized kernel is that Gaussian).
  static LogitGrid gaussian(int side, double sigma);
};

// Max-subtracted softmax over all cells.
std::vector<double> softmax(std::span<const double> logits);
// dL/d(logits) given the softmax output and dL/d(output).
std::vector<double> softmax_backward(std::span<const double> weights, std::span<const double> grad_weights);

Kernel kernel_from_logits(const LogitGrid& g);

// Coordinate network mapping a kernel cell center (normalized to [-1, 1]^2)
// to a logit. Hidden layers use sin(omega0 * (W x + b)); the output layer is
// linear. Parameters live in one flat vector: per layer W (out x in,
// row-major) followed by b.
class CoordMlp {
 public:
  CoordMlp() = default;
  CoordMlp(int side, std::vector<int> widths, double omega0);

  // Sinusoidal-network initialization: first layer U(-1/in, 1/in), later
  // layers U(-sqrt(6/in)/omega0, +), later biases zero.
  static CoordMlp siren(int side, int hidden, double omega0, std::uint64_t seed);

  int side() const { return side_; }
  double omega0() const { return omega0_; }
  const std::vector<int>& widths() const { return widths_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Logits at every cell center, row-major.
  std::vector<double> logits() const;
  // dL/d(params) given dL/d(logits).
  std::vector<double> backward(std::span<const double> grad_logits) const;

 private:
  struct Tape {
    std::vector<std::vector<double>> acts;  // per layer input, side^2 x width
    std::vector<std::vector<double>> pre;   // per hidden layer pre-activation
  };
  std::vector<double> forward(Tape* tape) const;
  std::size_t weight_offset(std::size_t layer) const;

  int side_ = 0;
  double omega0_ = 30.0;
  std::vector<int> widths_;
  std::vector<double> params_;
  std::vector<double> coords_;  // side^2 x 2
};

Kernel mlp_kernel(const CoordMlp& m);

// Euclidean projection onto {w >= 0, sum w = 1}.
std::vector<double> project_to_simplex(std::span<const double> v);

// Ridge-regularized least squares for k in b = i_sharp * k, using only rows
// near edges of i_sharp, followed by simplex projection. The ridge is scaled by
// the mean diagonal of the normal matrix.
Kernel esf_linear_solve(const Image& i_sharp, const Image& b, int side, double ridge = 1e-6);

struct RankDiagnostic {
  double condition = 0.0;  // sigma_max / sigma_min (infinity when singular)
  int effective_rank = 0;  // singular values above 1e-6 sigma_max
  int rows = 0;
};

RankDiagnostic column_rank_diagnostic(const Image& i_sharp, int side);

}  // namespace circleflow

#include "circleflow/psfmodel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "circleflow/error.hpp"
#include "circleflow/random.hpp"

namespace circleflow {

LogitGrid LogitGrid::constant(int side, double value) {
  require(side >= 1 && side % 2 == 1, "logit grid side must be odd");
  return LogitGrid{side, std::vector<double>(static_cast<std::size_t>(side) * side, value)};
}

LogitGrid LogitGrid::gaussian(int side, double sigma) {
  LogitGrid g = constant(side, 0.0);
  require(sigma > 0.0, "sigma must be positive");
  const int r = side / 2;
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const double x = col - r;
      const double y = row - r;
      g.logits[static_cast<std::size_t>(row) * side + col] = -(x * x + y * y) / (2.0 * sigma * sigma);
    }
  }
  return g;
}

std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), "softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> w(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(logits[i] - m);
    s += w[i];
  }
  for (double& x : w) x /= s;
  return w;
}

std::vector<double> softmax_backward(std::span<const double> weights, std::span<const double> grad_weights) {
  double dot = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) dot += weights[i] * grad_weights[i];
  std::vector<double> g(weights.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = weights[i] * (grad_weights[i] - dot);
  return g;
}

Kernel kernel_from_logits(const LogitGrid& g) {
  require(g.side >= 1 && g.side % 2 == 1, "logit grid side must be odd");
  require(g.logits.size() == static_cast<std::size_t>(g.side) * g.side, "logit grid size mismatch");
  for (double v : g.logits) require(std::isfinite(v), "logits must be finite");
  return Kernel(g.side, softmax(g.logits));
}

CoordMlp::CoordMlp(int side, std::vector<int> widths, double omega0)
    : side_(side), omega0_(omega0), widths_(std::move(widths)) {
  require(side >= 1 && side % 2 == 1, "MLP kernel side must be odd");
  require(widths_.size() >= 2 && widths_.front() == 2 && widths_.back() == 1, "MLP must map 2 inputs to 1 output");
  require(omega0 > 0.0, "omega0 must be positive");
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    require(widths_[l + 1] >= 1, "layer width must be positive");
    n += static_cast<std::size_t>(widths_[l]) * widths_[l + 1] + widths_[l + 1];
  }
  params_.assign(n, 0.0);
  coords_.resize(static_cast<std::size_t>(side) * side * 2);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * side + col;
      coords_[2 * i] = side == 1 ? 0.0 : 2.0 * col / (side - 1) - 1.0;
      coords_[2 * i + 1] = side == 1 ? 0.0 : 2.0 * row / (side - 1) - 1.0;
    }
  }
}

CoordMlp CoordMlp::siren(int side, int hidden, double omega0, std::uint64_t seed) {
  CoordMlp m(side, {2, hidden, hidden, 1}, omega0);
  SplitMix64 rng(SplitMix64::derive(seed, 0x5173));
  for (std::size_t l = 0; l + 1 < m.widths_.size(); ++l) {
    const int in = m.widths_[l];
    const int out = m.widths_[l + 1];
    const double bound = l == 0 ? 1.0 / in : std::sqrt(6.0 / in) / omega0;
    std::size_t off = m.weight_offset(l);
    for (int i = 0; i < in * out; ++i) m.params_[off++] = (2.0 * rng.uniform() - 1.0) * bound;
    for (int i = 0; i < out; ++i) m.params_[off++] = l == 0 ? (2.0 * rng.uniform() - 1.0) * bound : 0.0;
  }
  return m;
}

std::size_t CoordMlp::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += static_cast<std::size_t>(widths_[l]) * widths_[l + 1] + widths_[l + 1];
  return off;
}

std::vector<double> CoordMlp::forward(Tape* tape) const {
  const std::size_t n = static_cast<std::size_t>(side_) * side_;
  std::vector<double> a = coords_;
  const std::size_t layers = widths_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    const double* W = params_.data() + weight_offset(l);
    const double* b = W + static_cast<std::size_t>(in) * out;
    std::vector<double> z(n * out);
    for (std::size_t p = 0; p < n; ++p) {
      for (int o = 0; o < out; ++o) {
        double s = b[o];
        for (int i = 0; i < in; ++i) s += W[static_cast<std::size_t>(o) * in + i] * a[p * in + i];
        z[p * out + o] = s;
      }
    }
    if (tape != nullptr) tape->acts.push_back(a);
    if (l + 1 == layers) return z;
    if (tape != nullptr) tape->pre.push_back(z);
    for (double& v : z) v = std::sin(omega0_ * v);
    a = std::move(z);
  }
  return a;
}

std::vector<double> CoordMlp::logits() const { return forward(nullptr); }

std::vector<double> CoordMlp::backward(std::span<const double> grad_logits) const {
  Tape tape;
  forward(&tape);
  const std::size_t n = static_cast<std::size_t>(side_) * side_;
  require(grad_logits.size() == n, "gradient size mismatch");
  std::vector<double> grads(params_.size(), 0.0);
  std::vector<double> gz(grad_logits.begin(), grad_logits.end());
  for (std::size_t l = widths_.size() - 1; l-- > 0;) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    const std::size_t off = weight_offset(l);
    const double* W = params_.data() + off;
    double* gW = grads.data() + off;
    double* gb = gW + static_cast<std::size_t>(in) * out;
    const std::vector<double>& a = tape.acts[l];
    std::vector<double> ga(l > 0 ? n * in : 0, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      for (int o = 0; o < out; ++o) {
        const double g = gz[p * out + o];
        if (g == 0.0) continue;
        gb[o] += g;
        for (int i = 0; i < in; ++i) {
          gW[static_cast<std::size_t>(o) * in + i] += g * a[p * in + i];
          if (l > 0) ga[p * in + i] += g * W[static_cast<std::size_t>(o) * in + i];
        }
      }
    }
    if (l == 0) break;
    const std::vector<double>& z = tape.pre[l - 1];
    gz.assign(n * in, 0.0);
    for (std::size_t j = 0; j < gz.size(); ++j) gz[j] = ga[j] * omega0_ * std::cos(omega0_ * z[j]);
  }
  return grads;
}

Kernel mlp_kernel(const CoordMlp& m) { return Kernel(m.side(), softmax(m.logits())); }

std::vector<double> project_to_simplex(std::span<const double> v) {
  require(!v.empty(), "cannot project an empty vector");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::max(0.0, v[i] - theta);
  // Renormalize away the rounding residue so the Kernel invariant holds.
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s;
  return w;
}

namespace {

// Rows of the convolution operator k -> i_sharp * k for pixels within `side`
// (Chebyshev distance) of an intensity boundary. With no boundary at all every
// pixel is used.
Eigen::MatrixXd edge_operator(const Image& img, int side, std::vector<std::size_t>* pixels, bool* has_edges) {
  require(img.channels() == 1, "expected a single-channel image");
  require(side >= 1 && side % 2 == 1, "kernel side must be odd");
  const int w = img.width();
  const int h = img.height();
  std::vector<char> edge(static_cast<std::size_t>(w) * h, 0);
  bool any = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = img.at(x, y);
      const bool e = (x + 1 < w && img.at(x + 1, y) != v) || (y + 1 < h && img.at(x, y + 1) != v) ||
                     (x > 0 && img.at(x - 1, y) != v) || (y > 0 && img.at(x, y - 1) != v);
      edge[static_cast<std::size_t>(y) * w + x] = e ? 1 : 0;
      any = any || e;
    }
  }
  *has_edges = any;
  // Chebyshev dilation of the edge mask by `side`.
  std::vector<char> near(edge.size(), any ? 0 : 1);
  if (any) {
    std::vector<char> tmp(edge.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int i = std::max(0, x - side); i <= std::min(w - 1, x + side); ++i) {
          if (edge[static_cast<std::size_t>(y) * w + i]) {
            tmp[static_cast<std::size_t>(y) * w + x] = 1;
            break;
          }
        }
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int j = std::max(0, y - side); j <= std::min(h - 1, y + side); ++j) {
          if (tmp[static_cast<std::size_t>(j) * w + x]) {
            near[static_cast<std::size_t>(y) * w + x] = 1;
            break;
          }
        }
      }
    }
  }
  pixels->clear();
  for (std::size_t i = 0; i < near.size(); ++i) {
    if (near[i]) pixels->push_back(i);
  }
  const int r = side / 2;
  const int n = side * side;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(pixels->size()), n);
  for (std::size_t row = 0; row < pixels->size(); ++row) {
    const int x = static_cast<int>((*pixels)[row] % static_cast<std::size_t>(w));
    const int y = static_cast<int>((*pixels)[row] / static_cast<std::size_t>(w));
    for (int kr = 0; kr < side; ++kr) {
      const int sy = std::clamp(y + r - kr, 0, h - 1);
      for (int kc = 0; kc < side; ++kc) {
        const int sx = std::clamp(x + r - kc, 0, w - 1);
        A(static_cast<Eigen::Index>(row), kr * side + kc) = img.at(sx, sy);
      }
    }
  }
  return A;
}

}  // namespace

Kernel esf_linear_solve(const Image& i_sharp, const Image& b, int side, double ridge) {
  require(i_sharp.channels() == 1 && b.channels() == 1 && i_sharp.same_shape(b), "images must be aligned single planes");
  require(ridge >= 0.0, "ridge must be nonnegative");
  std::vector<std::size_t> pixels;
  bool has_edges = false;
  const Eigen::MatrixXd A = edge_operator(i_sharp, side, &pixels, &has_edges);
  if (!has_edges) fail(ErrorCode::kSingularSystem, "sharp image has no edges; operator columns are identical");
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(pixels.size()));
  for (std::size_t i = 0; i < pixels.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = b.values()[pixels[i]];
  Eigen::MatrixXd G = A.transpose() * A;
  const Eigen::Index n = G.rows();
  if (ridge == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (!(es.eigenvalues().minCoeff() > 1e-12 * top)) {
      fail(ErrorCode::kSingularSystem, "boundary operator is rank deficient and no ridge was given");
    }
  }
  const double lambda = ridge * G.trace() / static_cast<double>(n);
  G.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) fail(ErrorCode::kSingularSystem, "normal equations are not positive definite");
  const Eigen::VectorXd k = llt.solve(A.transpose() * rhs);
  std::vector<double> raw(k.data(), k.data() + k.size());
  return Kernel(side, project_to_simplex(raw));
}

RankDiagnostic column_rank_diagnostic(const Image& i_sharp, int side) {
  std::vector<std::size_t> pixels;
  bool has_edges = false;
  const Eigen::MatrixXd A = edge_operator(i_sharp, side, &pixels, &has_edges);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const double smax = ev.maxCoeff();
  const double smin = ev.minCoeff();
  RankDiagnostic d;
  d.rows = static_cast<int>(pixels.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-6 * smax) ++d.effective_rank;
  }
  d.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  return d;
}

}  // namespace circleflow

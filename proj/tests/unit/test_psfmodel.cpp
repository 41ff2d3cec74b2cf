#include <gtest/gtest.h>

#include <cmath>

#include "circleflow/chart.hpp"
#include "circleflow/imagecore.hpp"
#include "circleflow/psfmodel.hpp"
#include "helpers.hpp"

namespace circleflow {
namespace {

TEST(Softmax, Examples) {
  const Kernel u = kernel_from_logits(LogitGrid::constant(3, 0.7));
  for (double w : u.values()) EXPECT_NEAR(w, 1.0 / 9, 1e-15);
  const auto two = softmax(std::vector<double>{0.0, std::log(3.0)});
  EXPECT_NEAR(two[0], 0.25, 1e-15);
  EXPECT_NEAR(two[1], 0.75, 1e-15);
  // 1 - w = (n-1) e^-20 / (1 + (n-1) e^-20), below 1e-8 up to n = 5 cells.
  const auto peak = softmax(std::vector<double>{0.0, 20.0, 0.0, 0.0});
  EXPECT_GT(peak[1], 1 - 1e-8);
  LogitGrid g = LogitGrid::constant(5);
  g.logits[7] = 20.0;
  EXPECT_LE(1 - kernel_from_logits(g).values()[7], 24 * std::exp(-20.0));
}

TEST(Softmax, ShiftInvariantAndStable) {
  LogitGrid g = LogitGrid::constant(7);
  SplitMix64 rng(1);
  for (double& v : g.logits) v = 3 * rng.normal();
  const Kernel a = kernel_from_logits(g);
  for (double& v : g.logits) v += 1234.5;
  const Kernel b = kernel_from_logits(g);
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
  EXPECT_NEAR(b.sum(), 1.0, 1e-12);
}

TEST(Softmax, GaussianInit) {
  const Kernel k = kernel_from_logits(LogitGrid::gaussian(11, 1.3));
  const Kernel ref = test::isotropic(11, 1.3);
  for (std::size_t i = 0; i < k.values().size(); ++i) EXPECT_NEAR(k.values()[i], ref.values()[i], 1e-12);
}

TEST(Softmax, BackwardMatchesDifferences) {
  std::vector<double> z{0.3, -1.0, 2.0, 0.1, 0.0};
  const std::vector<double> c{1.0, -2.0, 0.5, 3.0, -1.0};
  auto f = [&](const std::vector<double>& l) {
    const auto w = softmax(l);
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += c[i] * w[i];
    return s;
  };
  const auto g = softmax_backward(softmax(z), c);
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto p = z, m = z;
    p[i] += 1e-6;
    m[i] -= 1e-6;
    EXPECT_NEAR(g[i], (f(p) - f(m)) / 2e-6, 1e-8);
  }
  // A uniform shift of the logits has zero directional derivative.
  double sum = 0;
  for (double v : g) sum += v;
  EXPECT_NEAR(sum, 0.0, 1e-14);
}

TEST(Mlp, ZeroWeightsGiveUniform) {
  CoordMlp m = CoordMlp::siren(7, 16, 30.0, 1);
  for (double& p : m.params()) p = 0.0;
  const Kernel k = mlp_kernel(m);
  for (double w : k.values()) EXPECT_NEAR(w, 1.0 / 49, 1e-15);
}

TEST(Mlp, RandomNetworksEmitValidKernels) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Kernel k = mlp_kernel(CoordMlp::siren(9, 64, 30.0, s));
    EXPECT_NEAR(k.sum(), 1.0, 1e-6);
    for (double w : k.values()) EXPECT_GE(w, 0.0);
  }
}

TEST(Mlp, SirenInitBounds) {
  const CoordMlp m = CoordMlp::siren(5, 8, 30.0, 3);
  ASSERT_EQ(m.widths(), (std::vector<int>{2, 8, 8, 1}));
  ASSERT_EQ(m.params().size(), 2u * 8 + 8 + 8 * 8 + 8 + 8 + 1);
  // First layer weights and biases within 1/2.
  for (int i = 0; i < 24; ++i) EXPECT_LE(std::abs(m.params()[i]), 0.5);
  const double bound = std::sqrt(6.0 / 8) / 30.0;
  for (int i = 24; i < 24 + 64; ++i) EXPECT_LE(std::abs(m.params()[i]), bound);
  for (int i = 24 + 64; i < 24 + 72; ++i) EXPECT_EQ(m.params()[i], 0.0);
}

TEST(Mlp, WeightGradientMatchesDifferences) {
  CoordMlp m = CoordMlp::siren(5, 12, 30.0, 7);
  const std::size_t cell = 12;  // the center
  auto weight = [&](const CoordMlp& net) { return mlp_kernel(net).values()[cell]; };
  const Kernel k = mlp_kernel(m);
  std::vector<double> unit(25, 0.0);
  unit[cell] = 1.0;
  const auto grad = m.backward(softmax_backward(k.values(), unit));
  ASSERT_EQ(grad.size(), m.params().size());
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t i = 0; i < m.params().size(); i += 3) {
    CoordMlp p = m, q = m;
    p.params()[i] += h;
    q.params()[i] -= h;
    const double fd = (weight(p) - weight(q)) / (2 * h);
    const double rel = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, rel);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Simplex, Projection) {
  const auto p = project_to_simplex(std::vector<double>{0.5, 0.2, -0.3, 1.0});
  double s = 0;
  for (double v : p) {
    EXPECT_GE(v, 0.0);
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-14);
  // Already on the simplex: unchanged.
  const std::vector<double> on{0.1, 0.6, 0.3};
  const auto q = project_to_simplex(on);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(q[i], on[i], 1e-15);
  // Brute force on two coordinates: the projection of (a, b) is the closest
  // point on the segment from (1, 0) to (0, 1).
  const auto r = project_to_simplex(std::vector<double>{2.0, 0.5});
  EXPECT_NEAR(r[0], 1.0, 1e-15);
  EXPECT_NEAR(r[1], 0.0, 1e-15);
  const auto t = project_to_simplex(std::vector<double>{0.4, 0.8});
  EXPECT_NEAR(t[0], 0.3, 1e-15);
  EXPECT_NEAR(t[1], 0.7, 1e-15);
}

Image circle_target(int w = 48, double r = 12) {
  CircleGridSpec s;
  s.rows = s.cols = 1;
  s.pitch = w;
  s.radius = r;
  s.supersample = 8;
  return render_chart(s, AffinePerturbation::about_center(0.0, 1.0, 0.37, -0.21, w / 2.0, w / 2.0));
}

TEST(Esf, RecoversKernelExactly) {
  const Image sharp = circle_target();
  const Kernel truth = test::gaussian_kernel(9, 2.0, 0.6, 1.1, 0.3, -0.2);
  const RankDiagnostic d = column_rank_diagnostic(sharp, 9);
  ASSERT_EQ(d.effective_rank, 81);
  const Kernel k = esf_linear_solve(sharp, conv2d(sharp, truth), 9, 1e-8);
  double err = 0;
  for (std::size_t i = 0; i < 81; ++i) err = std::max(err, std::abs(k.values()[i] - truth.values()[i]));
  EXPECT_LT(err, 1e-4);
}

TEST(Esf, DeltaKernel) {
  const Image sharp = circle_target();
  const Kernel k = esf_linear_solve(sharp, sharp, 7, 1e-8);
  EXPECT_GT(k.at(3, 3), 0.99);
}

TEST(Esf, ConstantIsSingular) {
  const Image flat(32, 32, 1, 0.5);
  EXPECT_EQ(test::error_of([&] { esf_linear_solve(flat, flat, 5, 1e-6); }), ErrorCode::kSingularSystem);
  EXPECT_EQ(column_rank_diagnostic(flat, 9).effective_rank, 1);
}

TEST(Esf, CircleOutranksStraightEdge) {
  const Image circle = circle_target();
  const Image edge = render_edge(48, 48, 0.0, 0.1, 0.9);
  const RankDiagnostic c = column_rank_diagnostic(circle, 9);
  const RankDiagnostic e = column_rank_diagnostic(edge, 9);
  EXPECT_EQ(c.effective_rank, 81);
  EXPECT_LT(e.effective_rank, 81);
  EXPECT_TRUE(std::isfinite(c.condition));
  // A rank-deficient system with no ridge cannot be solved.
  EXPECT_EQ(test::error_of([&] { esf_linear_solve(edge, edge, 9, 0.0); }), ErrorCode::kSingularSystem);
}

}  // namespace
}  // namespace circleflow

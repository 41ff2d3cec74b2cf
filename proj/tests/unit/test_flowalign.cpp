#include <gtest/gtest.h>

#include "circleflow/flowalign.hpp"
#include "circleflow/imagecore.hpp"
#include "helpers.hpp"

namespace circleflow {
namespace {

void fill_random(FlowField& f, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (auto& v : f.dx) v = rng.normal();
  for (auto& v : f.dy) v = rng.normal();
}

double oracle_smoothness(const FlowField& v) {
  double s = 0;
  for (int y = 0; y < v.height; ++y) {
    for (int x = 0; x < v.width; ++x) {
      const auto i = v.index(x, y);
      if (x + 1 < v.width) {
        const auto j = v.index(x + 1, y);
        s += (v.dx[j] - v.dx[i]) * (v.dx[j] - v.dx[i]) + (v.dy[j] - v.dy[i]) * (v.dy[j] - v.dy[i]);
      }
      if (y + 1 < v.height) {
        const auto j = v.index(x, y + 1);
        s += (v.dx[j] - v.dx[i]) * (v.dx[j] - v.dx[i]) + (v.dy[j] - v.dy[i]) * (v.dy[j] - v.dy[i]);
      }
    }
  }
  return s / static_cast<double>(v.size());
}

TEST(Flow, LevelSizes) {
  const FlowParams p = init_flow(64, 64, 3);
  ASSERT_EQ(p.level_count(), 3);
  EXPECT_EQ(p.levels[0].width, 16);
  EXPECT_EQ(p.levels[1].width, 32);
  EXPECT_EQ(p.levels[2].height, 64);
  const FlowParams odd = init_flow(45, 37, 3);
  EXPECT_EQ(odd.levels[0].width, 12);
  EXPECT_EQ(odd.levels[0].height, 10);
  EXPECT_EQ(odd.levels[1].width, 23);
  const FlowParams one = init_flow(20, 20, 1);
  ASSERT_EQ(one.level_count(), 1);
  EXPECT_EQ(one.levels[0].width, 20);
  EXPECT_EQ(test::error_of([] { init_flow(16, 16, 4); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(test::error_of([] { init_flow(16, 16, 0); }), ErrorCode::kInvalidInput);
}

TEST(Flow, ZeroPyramidIsIdentityWarp) {
  FlowParams p = init_flow(32, 24, 3);
  p.current = 2;
  const FlowField v = compose_flow(p);
  for (double d : v.dx) EXPECT_EQ(d, 0.0);
  const Image img = test::random_image(32, 24, 1, 1);
  EXPECT_EQ(warp(img, v).values(), img.values());
}

TEST(Flow, CoarseUniformDoubles) {
  FlowParams p = init_flow(32, 32, 2);
  p.levels[0] = FlowField(16, 16, 1.0, 0.0);
  p.current = 1;
  const FlowField v = compose_flow(p);
  EXPECT_EQ(v.width, 32);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_NEAR(v.dx[i], 2.0, 1e-15);
    EXPECT_EQ(v.dy[i], 0.0);
  }
}

TEST(Flow, ComposeMatchesSequentialOracle) {
  FlowParams p = init_flow(30, 22, 2);
  fill_random(p.levels[0], 1);
  fill_random(p.levels[1], 2);
  p.current = 1;
  FlowField want = upsample_flow(p.levels[0], 30, 22);
  want += p.levels[1];
  const FlowField got = compose_flow(p);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got.dx[i], want.dx[i], 1e-14);
    EXPECT_NEAR(got.dy[i], want.dy[i], 1e-14);
  }
  // Levels above current are ignored.
  p.current = 0;
  const FlowField coarse = compose_flow(p);
  const FlowField up = upsample_flow(p.levels[0], 30, 22);
  for (std::size_t i = 0; i < coarse.size(); ++i) EXPECT_NEAR(coarse.dx[i], up.dx[i], 1e-14);
}

TEST(Flow, ComposeIsLinearAndAdjointHolds) {
  FlowParams a = init_flow(24, 20, 3);
  FlowParams b = init_flow(24, 20, 3);
  FlowParams s = init_flow(24, 20, 3);
  a.current = b.current = s.current = 2;
  for (int l = 0; l < 3; ++l) {
    fill_random(a.levels[l], 10 + l);
    fill_random(b.levels[l], 20 + l);
    for (std::size_t i = 0; i < s.levels[l].size(); ++i) {
      s.levels[l].dx[i] = 2 * a.levels[l].dx[i] - b.levels[l].dx[i];
      s.levels[l].dy[i] = 2 * a.levels[l].dy[i] - b.levels[l].dy[i];
    }
  }
  const FlowField va = compose_flow(a);
  const FlowField vb = compose_flow(b);
  const FlowField vs = compose_flow(s);
  for (std::size_t i = 0; i < vs.size(); ++i) EXPECT_NEAR(vs.dx[i], 2 * va.dx[i] - vb.dx[i], 1e-12);

  FlowField g(24, 20);
  fill_random(g, 99);
  const auto adj = compose_flow_adjoint(a, g);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < va.size(); ++i) lhs += va.dx[i] * g.dx[i] + va.dy[i] * g.dy[i];
  for (int l = 0; l < 3; ++l)
    for (std::size_t i = 0; i < a.levels[l].size(); ++i)
      rhs += a.levels[l].dx[i] * adj[l].dx[i] + a.levels[l].dy[i] * adj[l].dy[i];
  EXPECT_NEAR(lhs, rhs, 1e-9);
}

TEST(Smoothness, Examples) {
  EXPECT_EQ(flow_smoothness(FlowField(10, 8, 0.3, -1.2)), 0.0);
  const int w = 10;
  FlowField lin(w, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < w; ++x) lin.dx[lin.index(x, y)] = static_cast<double>(x) / w;
  // (1/W)^2 on every pixel that has a right neighbour.
  EXPECT_NEAR(flow_smoothness(lin), (w - 1) * 6 * (1.0 / (w * w)) / (w * 6), 1e-15);
  FlowField r(9, 7);
  fill_random(r, 5);
  EXPECT_NEAR(flow_smoothness(r), oracle_smoothness(r), 1e-13);
  EXPECT_GT(flow_smoothness(r), 0.0);
}

TEST(Smoothness, GradientMatchesDifferences) {
  FlowField r(7, 6);
  fill_random(r, 6);
  const FlowField g = flow_smoothness_grad(r);
  const double h = 1e-6;
  for (std::size_t i : {0u, 8u, 20u, 41u}) {
    FlowField p = r, m = r;
    p.dx[i] += h;
    m.dx[i] -= h;
    EXPECT_NEAR(g.dx[i], (flow_smoothness(p) - flow_smoothness(m)) / (2 * h), 1e-8);
    p = r;
    m = r;
    p.dy[i] += h;
    m.dy[i] -= h;
    EXPECT_NEAR(g.dy[i], (flow_smoothness(p) - flow_smoothness(m)) / (2 * h), 1e-8);
  }
}

}  // namespace
}  // namespace circleflow

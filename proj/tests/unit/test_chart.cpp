#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "circleflow/chart.hpp"
#include "helpers.hpp"

namespace circleflow {
namespace {

TEST(Chart, EmptyGridIsBright) {
  CircleGridSpec s;
  s.rows = s.cols = 0;
  s.width = 40;
  s.height = 30;
  const Image img = render_chart(s, AffinePerturbation::identity());
  EXPECT_EQ(img.width(), 40);
  for (double v : img.values()) EXPECT_EQ(v, s.bright_level);
}

TEST(Chart, DiskAreaMatchesAnalytic) {
  CircleGridSpec s;
  s.rows = s.cols = 1;
  s.pitch = 48;
  s.radius = 10;
  s.supersample = 8;
  const Image img = render_chart(s, AffinePerturbation::identity());
  double coverage = 0.0;
  for (double v : img.values()) coverage += (s.bright_level - v) / (s.bright_level - s.dark_level);
  const double area = std::numbers::pi * 100.0;
  EXPECT_NEAR(coverage / area, 1.0, 0.005);
}

TEST(Chart, PaperGridGives187Cells) {
  CircleGridSpec s;  // 11 x 17 at pitch 64
  s.supersample = 2;
  const Image img = render_chart(s, AffinePerturbation::identity());
  EXPECT_EQ(img.width(), 17 * 64);
  EXPECT_EQ(img.height(), 11 * 64);
  const auto patches = patchify(img, 11, 17);
  ASSERT_EQ(patches.size(), 187u);
  // Each cell holds exactly one centered circle.
  for (const Patch& p : patches) {
    EXPECT_EQ(p.image.width(), 64);
    EXPECT_LT(p.image.at(32, 32), 0.2);
    EXPECT_GT(p.image.at(2, 2), 0.8);
  }
}

TEST(Chart, SingleCellIsWholeImage) {
  const Image img = test::random_image(30, 20, 1, 1);
  const auto p = patchify(img, 1, 1);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].image.values(), img.values());
  EXPECT_DOUBLE_EQ(p[0].u, 0.0);
  EXPECT_DOUBLE_EQ(p[0].v, 0.0);
}

TEST(Chart, PatchifyReassembles) {
  const Image img = test::random_image(64, 64, 3, 2);
  const auto p = patchify(img, 2, 2);
  ASSERT_EQ(p.size(), 4u);
  for (const Patch& q : p) {
    EXPECT_EQ(q.image.width(), 32);
    EXPECT_EQ(q.image.height(), 32);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) EXPECT_EQ(q.image.at(x, y, 1), img.at(q.bounds.x + x, q.bounds.y + y, 1));
  }
  EXPECT_EQ(reassemble(p, 64, 64).values(), img.values());
  // Field positions are symmetric about the center.
  EXPECT_DOUBLE_EQ(p[0].u, -p[3].u);
  EXPECT_DOUBLE_EQ(p[0].v, -p[3].v);
}

TEST(Chart, RemainderGoesToLastCell) {
  const auto b = grid_bounds(70, 50, 2, 3);
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(b[2].x + b[2].width, 70);
  EXPECT_EQ(b[5].y + b[5].height, 50);
  EXPECT_EQ(test::error_of([] { grid_bounds(4, 4, 5, 1); }), ErrorCode::kInvalidInput);
}

TEST(Chart, MonotoneInRadius) {
  CircleGridSpec s;
  s.rows = 2;
  s.cols = 2;
  s.pitch = 40;
  s.supersample = 4;
  const auto xf = AffinePerturbation::about_center(0.03, 1.01, 0.7, -0.3, 40, 40);
  Image prev;
  for (double r : {6.0, 9.5, 13.0, 19.0}) {
    s.radius = r;
    const Image img = render_chart(s, xf);
    if (!prev.empty())
      for (std::size_t i = 0; i < img.size(); ++i) EXPECT_LE(img.values()[i], prev.values()[i]);
    prev = img;
  }
}

TEST(Chart, MixedPixelsSitOnBoundaries) {
  CircleGridSpec s;
  s.rows = 2;
  s.cols = 3;
  const Image img = render_chart(s, AffinePerturbation::identity());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double v = img.at(x, y);
      if (std::abs(v - s.dark_level) <= 1.0 / 256 || std::abs(v - s.bright_level) <= 1.0 / 256) continue;
      const double cx = (std::floor(x / s.pitch) + 0.5) * s.pitch;
      const double cy = (std::floor(y / s.pitch) + 0.5) * s.pitch;
      EXPECT_NEAR(std::hypot(x + 0.5 - cx, y + 0.5 - cy), s.radius, 1.0);
    }
  }
}

TEST(Chart, InvalidSpecs) {
  CircleGridSpec s;
  s.radius = 40;
  EXPECT_EQ(test::error_of([&] { render_chart(s, {}); }), ErrorCode::kInvalidInput);
  AffinePerturbation flip;
  flip.m = {-1, 0, 0, 0, 1, 0};
  EXPECT_EQ(test::error_of([&] { flip.validate(); }), ErrorCode::kInvalidInput);
}

TEST(Chart, ClippedCircleWarns) {
  CircleGridSpec s;
  s.rows = s.cols = 2;
  AffinePerturbation shift;
  shift.m = {1, 0, 20, 0, 1, 0};
  std::vector<std::string> warnings;
  render_chart(s, shift, &warnings);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(Chart, SampledAffineIsInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = sample_affine(seed, 100, 80);
    const double scale = std::sqrt(a.determinant());
    EXPECT_GE(scale, 0.98 - 1e-12);
    EXPECT_LE(scale, 1.02 + 1e-12);
    EXPECT_LE(std::abs(std::atan2(a.m[3], a.m[0])), 3.0 * std::numbers::pi / 180 + 1e-12);
    const auto c = a.apply(100, 80);
    EXPECT_LE(std::abs(c[0] - 100), 2.0 + 1e-9);
    EXPECT_LE(std::abs(c[1] - 80), 2.0 + 1e-9);
  }
}

}  // namespace
}  // namespace circleflow

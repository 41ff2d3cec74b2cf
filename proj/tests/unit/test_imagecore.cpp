#include <gtest/gtest.h>

#include <cmath>

#include "circleflow/imagecore.hpp"
#include "helpers.hpp"

namespace circleflow {
namespace {

using test::error_of;
using test::random_image;

TEST(Conv2d, DeltaKernelIsIdentity) {
  const Image img = random_image(13, 9, 3, 1);
  const Image out = conv2d(img, Kernel::delta(3));
  EXPECT_EQ(out.values(), img.values());
}

TEST(Conv2d, ConstantImageIsFixedPoint) {
  const Image img(17, 11, 1, 0.5);
  const Kernel k = test::gaussian_kernel(7, 2.0, 0.6, 1.1, 0.7, -0.4);
  const Image out = conv2d(img, k);
  for (double v : out.values()) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(Conv2d, RampMatchesNestedLoop) {
  const Image img = test::ramp_x(5, 5);
  const Image out = conv2d(img, Kernel::uniform(3));
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) EXPECT_NEAR(out.at(x, y), test::conv_at(img, Kernel::uniform(3), x, y), 1e-14);
}

TEST(Conv2d, AsymmetricKernelIsFlipped) {
  // A kernel with all mass at column 0 (offset -1) moves content right:
  // out(x) = sum k(i) img(x - i), so out(x) = img(x + 1).
  std::vector<double> w(9, 0.0);
  w[3] = 1.0;
  const Kernel k(3, w);
  const Image img = random_image(8, 6, 1, 4);
  const Image out = conv2d(img, k);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_DOUBLE_EQ(out.at(x, y), test::conv_at(img, k, x, y));
  EXPECT_DOUBLE_EQ(out.at(2, 3), img.at(3, 3));
}

TEST(Conv2d, RandomKernelMatchesOracle) {
  const Image img = random_image(12, 10, 3, 7);
  const Kernel k = Kernel::normalized(5, random_image(5, 5, 1, 8).values());
  const Image out = conv2d(img, k);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 12; ++x) EXPECT_NEAR(out.at(x, y, c), test::conv_at(img, k, x, y, c), 1e-13);
}

TEST(Conv2d, BackwardIsAdjoint) {
  const Image img = random_image(11, 9, 1, 3);
  const std::vector<double> w = random_image(5, 5, 1, 5).values();
  const Image g = random_image(11, 9, 1, 6, -1, 1);
  const auto grads = conv2d_backward(img, w, 5, g);
  // <conv(x), g> is linear in x and in w separately.
  const double lhs = test::dot(conv2d_weights(img, w, 5), g);
  EXPECT_NEAR(test::dot(img, grads.image), lhs, 1e-10);
  double kw = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) kw += w[i] * grads.kernel[i];
  EXPECT_NEAR(kw, lhs, 1e-10);
}

TEST(Warp, ZeroFlowIsBitIdentity) {
  const Image img = random_image(10, 7, 1, 2);
  EXPECT_EQ(warp(img, FlowField(10, 7)).values(), img.values());
}

TEST(Warp, UnitFlowShiftsLeft) {
  const Image img = random_image(10, 7, 1, 2);
  const Image out = warp(img, FlowField(10, 7, 1.0, 0.0));
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) EXPECT_EQ(out.at(x, y), img.at(x + 1, y));
    EXPECT_EQ(out.at(9, y), img.at(9, y));  // clamped
  }
}

TEST(Warp, IntegerFlowIsIndexShift) {
  const Image img = random_image(12, 12, 1, 9);
  const Image out = warp(img, FlowField(12, 12, -2.0, 3.0));
  for (int y = 0; y < 9; ++y)
    for (int x = 2; x < 12; ++x) EXPECT_EQ(out.at(x, y), img.at(x - 2, y + 3));
}

TEST(Warp, HalfPixelOnRamp) {
  const int w = 16;
  const Image img = test::ramp_x(w, 4);
  const Image out = warp(img, FlowField(w, 4, 0.5, 0.0));
  for (int x = 0; x < w - 1; ++x) EXPECT_NEAR(out.at(x, 2), (x + 0.5) / w, 1e-14);
}

TEST(Warp, SizeMismatchIsInvalid) {
  EXPECT_EQ(error_of([] { warp(Image(4, 4), FlowField(5, 4)); }), ErrorCode::kInvalidInput);
}

TEST(Morphology, ConstantUnchanged) {
  const Image img(9, 9, 1, 0.3);
  EXPECT_EQ(dilate(img, 2).values(), img.values());
  EXPECT_EQ(erode(img, 2).values(), img.values());
}

TEST(Morphology, DilateSinglePixel) {
  Image img(7, 7);
  img.at(3, 3) = 1.0;
  const Image d = dilate(img, 1);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x)
      EXPECT_EQ(d.at(x, y), (std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1) ? 1.0 : 0.0);
}

TEST(Morphology, ErodeMatchesWindowedMin) {
  const Image img = random_image(8, 8, 1, 11);
  for (int r : {1, 2}) {
    const Image e = erode(img, r);
    const Image d = dilate(img, r);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        double lo = 1e9, hi = -1e9;
        for (int j = std::max(0, y - r); j <= std::min(7, y + r); ++j)
          for (int i = std::max(0, x - r); i <= std::min(7, x + r); ++i) {
            lo = std::min(lo, img.at(i, j));
            hi = std::max(hi, img.at(i, j));
          }
        EXPECT_EQ(e.at(x, y), lo);
        EXPECT_EQ(d.at(x, y), hi);
        EXPECT_LE(e.at(x, y), img.at(x, y));
        EXPECT_GE(d.at(x, y), img.at(x, y));
      }
    }
  }
}

TEST(Morphology, ZeroRadiusIsInvalid) {
  EXPECT_EQ(error_of([] { dilate(Image(4, 4), 0); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(error_of([] { erode(Image(4, 4), 0); }), ErrorCode::kInvalidInput);
}

// Exhaustive between-class variance over the 255 split points, computed
// from bin-center intensities with plain two-pass class means.
double otsu_oracle(const Image& img) {
  std::vector<int> bins;
  for (double v : img.values()) bins.push_back(std::min(255, static_cast<int>(std::floor(v * 256))));
  double best = -1;
  int best_t = 0;
  for (int t = 1; t < 256; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int b : bins) {
      const double c = (b + 0.5) / 256.0;
      if (b < t) {
        n0 += 1;
        s0 += c;
      } else {
        n1 += 1;
        s1 += c;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double d = s0 / n0 - s1 / n1;
    const double between = n0 * n1 * d * d;
    if (between > best * (1 + 1e-12)) {
      best = between;
      best_t = t;
    }
  }
  return best_t / 256.0;
}

TEST(Otsu, PerfectlyBimodal) {
  Image img(10, 10);
  for (int i = 50; i < 100; ++i) img.values()[i] = 1.0;
  const double t = otsu_threshold(img);
  EXPECT_GT(t, 0.0);
  EXPECT_LE(t, 1.0);
  EXPECT_DOUBLE_EQ(t, 1.0 / 256.0);  // lowest maximizing split
}

TEST(Otsu, GaussianClusters) {
  SplitMix64 rng(5);
  Image img(100, 100);
  for (std::size_t i = 0; i < img.size(); ++i)
    img.values()[i] = std::clamp((i % 2 ? 0.2 : 0.8) + 0.05 * rng.normal(), 0.0, 1.0);
  // The clusters do not overlap, so every split in the gap maximizes the
  // between-class variance equally and the lowest one is returned.
  double top0 = 0, bottom1 = 1;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (i % 2)
      top0 = std::max(top0, img.values()[i]);
    else
      bottom1 = std::min(bottom1, img.values()[i]);
  }
  const double t = otsu_threshold(img);
  EXPECT_GT(t, top0);
  EXPECT_LE(t, bottom1);
  EXPECT_NEAR(t, top0, 1.0 / 256);
  EXPECT_DOUBLE_EQ(t, otsu_oracle(img));
}

TEST(Otsu, AgreesWithExhaustiveScan) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Image img = random_image(20, 15, 1, 100 + s);
    EXPECT_DOUBLE_EQ(otsu_threshold(img), otsu_oracle(img)) << "seed " << s;
  }
  const Image d = test::disk(32, 9);
  EXPECT_DOUBLE_EQ(otsu_threshold(d), otsu_oracle(d));
}

TEST(Otsu, ConstantIsNotBimodal) {
  EXPECT_EQ(error_of([] { otsu_threshold(Image(8, 8, 1, 0.5)); }), ErrorCode::kNoBimodalStructure);
}

TEST(Gradient, ConstantAndRamp) {
  auto [gx0, gy0] = gradient_xy(Image(6, 5, 1, 0.4));
  for (double v : gx0.values()) EXPECT_EQ(v, 0.0);
  for (double v : gy0.values()) EXPECT_EQ(v, 0.0);
  const int w = 8;
  auto [gx, gy] = gradient_xy(test::ramp_x(w, 5));
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < w - 1; ++x) EXPECT_NEAR(gx.at(x, y), 1.0 / w, 1e-15);
    EXPECT_EQ(gx.at(w - 1, y), 0.0);
  }
  for (double v : gy.values()) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, RandomMatchesDifferences) {
  const Image img = random_image(4, 4, 1, 12);
  auto [gx, gy] = gradient_xy(img);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      EXPECT_EQ(gx.at(x, y), x < 3 ? img.at(x + 1, y) - img.at(x, y) : 0.0);
      EXPECT_EQ(gy.at(x, y), y < 3 ? img.at(x, y + 1) - img.at(x, y) : 0.0);
    }
  }
}

TEST(Pyramid, DownsampleConstant) {
  const Image d = downsample2(Image(9, 6, 3, 0.7));
  EXPECT_EQ(d.width(), 5);
  EXPECT_EQ(d.height(), 3);
  for (double v : d.values()) EXPECT_NEAR(v, 0.7, 1e-15);
  EXPECT_EQ(error_of([] { downsample2(Image(1, 1)); }), ErrorCode::kInvalidInput);
}

TEST(Pyramid, UpsampleFlow) {
  const FlowField z = upsample_flow(FlowField(5, 4));
  EXPECT_EQ(z.width, 10);
  EXPECT_EQ(z.height, 8);
  for (double v : z.dx) EXPECT_EQ(v, 0.0);
  const FlowField u = upsample_flow(FlowField(5, 4, 1.0, 0.0), 9, 7);
  EXPECT_EQ(u.width, 9);
  EXPECT_EQ(u.height, 7);
  for (double v : u.dx) EXPECT_NEAR(v, 2.0, 1e-15);
  for (double v : u.dy) EXPECT_EQ(v, 0.0);
}

TEST(Pyramid, UpsampleAdjoint) {
  FlowField c(5, 4);
  FlowField g(10, 8);
  SplitMix64 rng(3);
  for (auto& v : c.dx) v = rng.normal();
  for (auto& v : c.dy) v = rng.normal();
  for (auto& v : g.dx) v = rng.normal();
  for (auto& v : g.dy) v = rng.normal();
  const FlowField up = upsample_flow(c);
  const FlowField adj = upsample_flow_adjoint(g, 5, 4);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < up.size(); ++i) lhs += up.dx[i] * g.dx[i] + up.dy[i] * g.dy[i];
  for (std::size_t i = 0; i < c.size(); ++i) rhs += c.dx[i] * adj.dx[i] + c.dy[i] * adj.dy[i];
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

}  // namespace
}  // namespace circleflow

#include <gtest/gtest.h>

#include "circleflow/sensor.hpp"
#include "helpers.hpp"

namespace circleflow {
namespace {

constexpr CfaPattern kAll[] = {CfaPattern::kRGGB, CfaPattern::kBGGR, CfaPattern::kGRBG, CfaPattern::kGBRG};

TEST(Cfa, ParityTable) {
  // Colors at (0,0), (1,0), (0,1), (1,1).
  const int table[4][4] = {{0, 1, 1, 2}, {2, 1, 1, 0}, {1, 0, 2, 1}, {1, 2, 0, 1}};
  for (int p = 0; p < 4; ++p) {
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) EXPECT_EQ(cfa_color(kAll[p], x, y), table[p][(y % 2) * 2 + x % 2]);
    EXPECT_EQ(parse_cfa(cfa_name(kAll[p])), kAll[p]);
  }
  EXPECT_EQ(shift_pattern(CfaPattern::kRGGB, 1, 0), CfaPattern::kGRBG);
  EXPECT_EQ(shift_pattern(CfaPattern::kRGGB, 1, 1), CfaPattern::kBGGR);
  EXPECT_EQ(test::error_of([] { parse_cfa("XYZW"); }), ErrorCode::kInvalidInput);
}

TEST(Mosaic, GrayIsConstant) {
  const RawMosaic raw = mosaic(Image(6, 4, 3, 0.5), CfaPattern::kRGGB);
  for (double v : raw.data.values()) EXPECT_EQ(v, 0.5);
}

TEST(Mosaic, PureRedFollowsParity) {
  Image red(6, 6, 3);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) red.at(x, y, 0) = 0.5;
  const RawMosaic raw = mosaic(red, CfaPattern::kRGGB);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_EQ(raw.data.at(x, y), (x % 2 == 0 && y % 2 == 0) ? 0.5 : 0.0);
}

TEST(Mosaic, SingleChannelIsInvalid) {
  EXPECT_EQ(test::error_of([] { mosaic(Image(4, 4), CfaPattern::kRGGB); }), ErrorCode::kInvalidInput);
}

TEST(Demosaic, ConstantRoundTrip) {
  for (CfaPattern p : kAll) {
    const Image out = demosaic_bilinear(mosaic(Image(9, 7, 3, 0.3), p));
    for (double v : out.values()) EXPECT_NEAR(v, 0.3, 1e-15);
  }
}

TEST(Demosaic, LinearInteriorIsExact) {
  Image img(12, 10, 3);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 0.05 * x + 0.02 * y + 0.1 * c;
  for (CfaPattern p : kAll) {
    const Image out = demosaic_bilinear(mosaic(img, p));
    for (int y = 1; y < 9; ++y)
      for (int x = 1; x < 11; ++x)
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.at(x, y, c), img.at(x, y, c), 1e-14);
  }
}

TEST(Demosaic, KnotsArePreserved) {
  const Image img = test::random_image(11, 9, 3, 1);
  for (CfaPattern p : kAll) {
    const RawMosaic raw = mosaic(img, p);
    const Image out = demosaic_bilinear(raw);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 11; ++x) EXPECT_EQ(out.at(x, y, cfa_color(p, x, y)), raw.data.at(x, y));
  }
}

TEST(Capture, Linearity) {
  const Image x = test::random_image(10, 8, 3, 2);
  const Image y = test::random_image(10, 8, 3, 3);
  Image comb(10, 8, 3);
  for (std::size_t i = 0; i < comb.size(); ++i) comb.values()[i] = 0.7 * x.values()[i] - 1.3 * y.values()[i];
  const Image fx = capture_forward(x, CfaPattern::kGRBG);
  const Image fy = capture_forward(y, CfaPattern::kGRBG);
  const Image fc = capture_forward(comb, CfaPattern::kGRBG);
  for (std::size_t i = 0; i < fc.size(); ++i)
    EXPECT_NEAR(fc.values()[i], 0.7 * fx.values()[i] - 1.3 * fy.values()[i], 1e-14);
}

TEST(Capture, Idempotent) {
  const Image x = test::random_image(13, 9, 3, 4);
  for (CfaPattern p : kAll) {
    const Image once = capture_forward(x, p);
    EXPECT_LT(test::max_abs_diff(capture_forward(once, p), once), 1e-15);
  }
}

TEST(Capture, AdjointIdentity) {
  for (CfaPattern p : kAll) {
    const Image x = test::random_image(15, 11, 3, 5, -1, 1);
    const Image y = test::random_image(15, 11, 3, 6, -1, 1);
    EXPECT_NEAR(test::dot(capture_forward(x, p), y), test::dot(x, capture_adjoint(y, p)), 1e-10);
    for (int c = 0; c < 3; ++c) {
      const Image xp = x.channel(c);
      const Image yp = y.channel(c);
      EXPECT_NEAR(test::dot(capture_plane(xp, p, c), yp), test::dot(xp, capture_plane_adjoint(yp, p, c)), 1e-10);
    }
  }
}

TEST(Capture, PlaneMatchesFullOperator) {
  const Image x = test::random_image(10, 10, 3, 7);
  const Image full = capture_forward(x, CfaPattern::kBGGR);
  for (int c = 0; c < 3; ++c)
    EXPECT_EQ(capture_plane(x.channel(c), CfaPattern::kBGGR, c).values(), full.channel(c).values());
}

// Gray images are not generally fixed points: R/B and G are interpolated
// with different stencils. Constant and affine gray images are.
TEST(Capture, GrayFixedPointsAreAffineOnly) {
  Image affine(12, 12, 3);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x)
      for (int c = 0; c < 3; ++c) affine.at(x, y, c) = 0.2 + 0.03 * x - 0.01 * y;
  const Image fa = capture_forward(affine, CfaPattern::kRGGB);
  for (int y = 1; y < 11; ++y)
    for (int x = 1; x < 11; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(fa.at(x, y, c), affine.at(x, y, c), 1e-14);
  EXPECT_LT(test::max_abs_diff(capture_forward(Image(7, 7, 3, 0.6), CfaPattern::kRGGB), Image(7, 7, 3, 0.6)), 1e-15);

  Image step(12, 12, 3, 0.1);
  for (int y = 0; y < 12; ++y)
    for (int x = 6; x < 12; ++x)
      for (int c = 0; c < 3; ++c) step.at(x, y, c) = 0.9;
  EXPECT_GT(test::max_abs_diff(capture_forward(step, CfaPattern::kRGGB), step), 0.1);
}

}  // namespace
}  // namespace circleflow

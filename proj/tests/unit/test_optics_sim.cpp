#include <gtest/gtest.h>

#include <cmath>

#include "circleflow/imagecore.hpp"
#include "circleflow/optics_sim.hpp"
#include "helpers.hpp"

namespace circleflow {
namespace {

AberrationSpec single(double var, int side) {
  AberrationSpec s;
  GaussianComponent g;
  g.cov_xx = FieldPoly::constant(var);
  g.cov_yy = FieldPoly::constant(var);
  s.components = {g};
  s.side = side;
  return s;
}

TEST(SynthPsf, NarrowGaussianIsNearDelta) {
  const Kernel k = synth_psf(single(0.04, 9), 0, 0);
  EXPECT_GT(k.at(4, 4), 0.95);
}

TEST(SynthPsf, IsotropicMatchesClosedForm) {
  const Kernel k = synth_psf(single(1.5 * 1.5, 21), 0, 0);
  double z = 0;
  for (int j = -10; j <= 10; ++j)
    for (int i = -10; i <= 10; ++i) z += std::exp(-(i * i + j * j) / (2 * 2.25));
  for (int j = -10; j <= 10; ++j)
    for (int i = -10; i <= 10; ++i) EXPECT_NEAR(k.at(i + 10, j + 10), std::exp(-(i * i + j * j) / 4.5) / z, 1e-12);
}

TEST(SynthPsf, UnitSumEverywhere) {
  const AberrationSpec lens = AberrationSpec::default_lens(15);
  for (double u : {-1.0, -0.3, 0.0, 0.8})
    for (double v : {-0.9, 0.0, 0.5})
      for (int ch = 0; ch < 3; ++ch) {
        const Kernel k = synth_psf(lens, u, v, ch);
        EXPECT_NEAR(k.sum(), 1.0, 1e-6);
        for (double w : k.values()) EXPECT_GE(w, 0.0);
      }
}

TEST(SynthPsf, CentroidIsCentered) {
  const Kernel k = synth_psf(AberrationSpec::default_lens(21), 0.6, -0.4);
  double cx = 0, cy = 0;
  for (int j = 0; j < 21; ++j)
    for (int i = 0; i < 21; ++i) {
      cx += (i - 10) * k.at(i, j);
      cy += (j - 10) * k.at(i, j);
    }
  EXPECT_NEAR(cx, 0.0, 0.02);
  EXPECT_NEAR(cy, 0.0, 0.02);
}

TEST(SynthPsf, InvalidSpecs) {
  AberrationSpec s = single(2.0, 9);
  s.components[0].cov_xx.c[3] = -5.0;  // negative at the field edge
  EXPECT_EQ(test::error_of([&] { synth_psf(s, 0, 0); }), ErrorCode::kInvalidInput);
  AberrationSpec t = single(2.0, 9);
  t.components[0].cov_xy = FieldPoly::constant(0.5);  // anisotropic at center
  EXPECT_EQ(test::error_of([&] { synth_psf(t, 0, 0); }), ErrorCode::kInvalidInput);
}

TEST(BlurField, DeltaFieldIsIdentity) {
  const Image img = test::random_image(40, 30, 3, 1);
  const Image out = blur_field(img, PsfField::uniform(3, 2, 3, 40, 30, Kernel::delta(5)));
  EXPECT_EQ(out.values(), img.values());
}

TEST(BlurField, SingleCellIsGlobalConv) {
  const Image img = test::random_image(33, 27, 1, 2);
  const Kernel k = test::gaussian_kernel(7, 2.0, 0.5, 1.2);
  EXPECT_EQ(blur_field(img, PsfField::uniform(1, 1, 1, 33, 27, k)).values(), conv2d(img, k).values());
}

TEST(BlurField, PerRegionApronOracle) {
  const Image img = test::ramp_x(32, 32);
  Image rnd = test::random_image(32, 32, 1, 3);
  for (std::size_t i = 0; i < img.size(); ++i) rnd.values()[i] = 0.5 * rnd.values()[i] + img.values()[i];
  PsfField f(2, 2, 1, 32, 32);
  f.set(0, 0, 0, test::isotropic(5, 0.8));
  f.set(0, 1, 0, test::gaussian_kernel(5, 1.5, 0.4, 0.7));
  f.set(1, 0, 0, Kernel::uniform(3));
  f.set(1, 1, 0, test::gaussian_kernel(7, 1.0, -0.3, 2.0, 0.5, 0.2));
  for (const Image& src : {img, rnd}) {
    const Image out = blur_field(src, f);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        EXPECT_NEAR(out.at(x, y), test::conv_at(src, *f.at(y / 16, x / 16, 0), x, y), 1e-13);
  }
}

TEST(BlurField, ConstantImageUnchanged) {
  const Image img(64, 48, 3, 0.35);
  const PsfField f = synth_field(AberrationSpec::default_lens(9), 3, 4, 3, 64, 48);
  const Image out = blur_field(img, f);
  for (double v : out.values()) EXPECT_NEAR(v, 0.35, 1e-12);
}

TEST(BlurField, KernelLargerThanRegion) {
  EXPECT_EQ(test::error_of([] { blur_field(Image(8, 8), PsfField::uniform(2, 2, 1, 8, 8, Kernel::delta(5))); }),
            ErrorCode::kInvalidInput);
}

TEST(Noise, NoiselessLimit) {
  const Image img = test::random_image(30, 30, 1, 4);
  NoiseSpec n;
  n.gaussian_var = 0.0;
  n.poisson_scale = 1e9;
  EXPECT_LT(test::max_abs_diff(add_noise(img, n), img), 1e-4);
}

TEST(Noise, VarianceNearOnePercent) {
  const Image img(128, 128, 1, 0.5);
  NoiseSpec n;
  n.gaussian_var = 0.005;
  n.poisson_scale = 100.0;  // 0.5 / 100 = 0.005
  ASSERT_NEAR(n.variance_at(0.5), 0.01, 1e-15);
  const Image out = add_noise(img, n);
  const double m = out.mean();
  double var = 0;
  for (double v : out.values()) var += (v - m) * (v - m);
  var /= static_cast<double>(out.size() - 1);
  EXPECT_GE(var, 0.008);
  EXPECT_LE(var, 0.012);
  // Mean-preserving within 3 sigma / sqrt(N).
  EXPECT_LT(std::abs(m - 0.5), 3 * std::sqrt(0.01 / out.size()));
}

TEST(Noise, Deterministic) {
  const Image img = test::random_image(20, 20, 3, 5);
  NoiseSpec n;
  n.seed = 77;
  EXPECT_EQ(add_noise(img, n).values(), add_noise(img, n).values());
  NoiseSpec m = n;
  m.seed = 78;
  EXPECT_NE(add_noise(img, n).values(), add_noise(img, m).values());
}

}  // namespace
}  // namespace circleflow

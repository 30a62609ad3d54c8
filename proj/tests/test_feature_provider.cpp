#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "pvqa/feature_file.hpp"
#include "pvqa/feature_provider.hpp"
#include "test_util.hpp"

using namespace pvqa;
using namespace pvqa::test;

namespace {

double max_abs(std::span<const float> v) {
  double m = 0.0;
  for (float x : v) m = std::max(m, std::abs(static_cast<double>(x)));
  return m;
}

// Declares k = 4 but returns 3 channels.
class LyingProvider final : public ImageFeatureProvider {
 public:
  const BackboneSpec& spec() const override { return spec_; }
  FeatureMap features(const Frame&) const override { return FeatureMap(1, 1, 3); }
  std::string preprocessing() const override { return "none"; }

 private:
  BackboneSpec spec_ = synthetic_spec(4);
};

}  // namespace

TEST(BackboneSpecs, ChannelCounts) {
  EXPECT_EQ(vgg19_spec().k, 512);
  EXPECT_EQ(resnet50_spec().k, 2048);
  EXPECT_EQ(inceptionv3_spec().k, 2048);
  EXPECT_EQ(vgg19_fr_spec().k, 512);
  EXPECT_NE(vgg19_spec().tap_point, vgg19_fr_spec().tap_point);
  EXPECT_EQ(synthetic_spec(37).k, 37);
  EXPECT_ERRC(parse_backbone("ResNet50"), Errc::invalid_argument);
  EXPECT_EQ(to_string(Backbone::inceptionv3), "inceptionv3");
  EXPECT_ERRC(parse_backbone("alexnet"), Errc::invalid_argument);
}

TEST(SyntheticProvider, SeedSevenIsDeterministic) {
  Rng rng(1);
  const Frame f = random_frame(rng, 64, 64);
  const SyntheticProvider a(7, 16, 8), b(7, 16, 8);
  const FeatureMap fa = a.features(f);
  EXPECT_EQ(fa, a.features(f));
  EXPECT_EQ(fa, b.features(f));
  EXPECT_EQ(fa.h(), 8);
  EXPECT_EQ(fa.w(), 8);
  EXPECT_EQ(fa.k(), 16);
  EXPECT_TRUE(fa.finite());
}

TEST(SyntheticProvider, OutputShapeFloorsByDownscale) {
  Rng rng(2);
  const SyntheticProvider p(3, 5, 4);
  const FeatureMap m = p.features(random_frame(rng, 30, 21));
  EXPECT_EQ(m.h(), 7);
  EXPECT_EQ(m.w(), 5);
  EXPECT_EQ(m.k(), 5);
  EXPECT_ERRC(p.features(random_frame(rng, 3, 30)), Errc::shape_mismatch);
}

TEST(SyntheticProvider, DifferentSeedsDiffer) {
  Rng rng(3);
  const Frame f = random_frame(rng, 64, 64);
  EXPECT_NE(SyntheticProvider(1, 16, 8).features(f), SyntheticProvider(2, 16, 8).features(f));
}

TEST(SyntheticProvider, ZeroImageGivesZeroFeaturesWithoutBias) {
  const Frame zero = constant_frame(32, 32, 0);
  const FeatureMap m = SyntheticProvider(7, 12, 4).features(zero);
  EXPECT_EQ(max_abs(m.values()), 0.0);
  const FeatureMap biased = SyntheticProvider(7, 12, 4, true).features(zero);
  EXPECT_GT(max_abs(biased.values()), 0.0);
}

TEST(SyntheticProvider, SmallPerturbationsGiveSmallChanges) {
  Rng rng(4);
  const SyntheticProvider p(7, 32, 8);
  for (int trial = 0; trial < 20; ++trial) {
    Frame f = random_frame(rng, 64, 64);
    for (auto& v : f.samples()) v = static_cast<std::uint8_t>(64 + v / 2);
    const FeatureMap base = p.features(f);
    const double scale = max_abs(base.values());
    ASSERT_GT(scale, 0.0);

    Frame g = f;
    const int i = static_cast<int>(rng.index(64)), j = static_cast<int>(rng.index(64));
    const int c = static_cast<int>(rng.index(3));
    g.at(i, j, c) = static_cast<std::uint8_t>(g.at(i, j, c) + 1);
    const FeatureMap moved = p.features(g);
    double diff = 0.0;
    for (std::size_t n = 0; n < base.values().size(); ++n)
      diff = std::max(diff, std::abs(static_cast<double>(moved.values()[n]) - base.values()[n]));
    EXPECT_LT(diff, 1e-2 * scale);
  }
}

TEST(FeaturesForImage, ChecksDeclaredChannelCount) {
  EXPECT_ERRC(features_for_image(constant_frame(4, 4, 1), LyingProvider{}), Errc::shape_mismatch);
}

TEST(FeatureFileProvider, IndexThreeIsFourthMap) {
  TempDir dir;
  Rng rng(5);
  std::vector<FeatureMap> maps;
  for (int i = 0; i < 20; ++i) maps.push_back(random_map(rng, 3, 2, 6));
  write_feature_file(maps, dir / "v.pvqf");
  const FeatureFileProvider p(dir / "v.pvqf", synthetic_spec(6));
  ASSERT_EQ(p.size(), 20u);
  EXPECT_EQ(p.map(3), maps[3]);
  EXPECT_EQ(p.maps(), maps);
  EXPECT_ERRC(p.map(20), Errc::invalid_argument);
}

TEST(FeatureFileProvider, ResNetSpecAgainstK512FileIsShapeMismatch) {
  TempDir dir;
  write_feature_file(std::vector{FeatureMap(1, 1, 512)}, dir / "v.pvqf");
  EXPECT_ERRC(FeatureFileProvider(dir / "v.pvqf", resnet50_spec()), Errc::shape_mismatch);
  EXPECT_ERRC(FeatureFileProvider(dir / "missing.pvqf", resnet50_spec()),
              Errc::provider_unavailable);
}

TEST(Ssa, ConstantMapGivesConstantVector) {
  FeatureMap m(3, 4, 5);
  for (auto& v : m.values()) v = 2.5f;
  const auto s = ssa(m);
  ASSERT_EQ(s.size(), 5u);
  for (double v : s) EXPECT_DOUBLE_EQ(v, 2.5);
}

TEST(Ssa, TwoCellsAverage) {
  const FeatureMap m(2, 1, 1, {1.0f, 3.0f});
  EXPECT_EQ(ssa(m), std::vector<double>{2.0});
}

TEST(Ssa, MatchesLoopOracleOnResNetSizedMap) {
  Rng rng(6);
  const FeatureMap m = random_map(rng, 7, 7, 2048, 0.0, 10.0);
  const auto s = ssa(m);
  ASSERT_EQ(s.size(), 2048u);
  for (int c = 0; c < 2048; ++c) {
    double sum = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) sum += m.at(i, j, c);
    EXPECT_NEAR(s[static_cast<std::size_t>(c)], sum / 49.0, 1e-12 * (1.0 + std::abs(sum)));
  }
}

TEST(Ssa, IsLinear) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureMap x = random_map(rng, 5, 6, 9), y = random_map(rng, 5, 6, 9);
    const double a = rng.uniform(-3.0, 3.0), b = rng.uniform(-3.0, 3.0);
    FeatureMap mix(5, 6, 9);
    for (std::size_t n = 0; n < mix.values().size(); ++n)
      mix.values()[n] = static_cast<float>(a * x.values()[n] + b * y.values()[n]);
    const auto sx = ssa(x), sy = ssa(y), sm = ssa(mix);
    for (std::size_t c = 0; c < 9; ++c) {
      const double expect = a * sx[c] + b * sy[c];
      EXPECT_NEAR(sm[c], expect, 1e-6 * std::max(1.0, std::abs(expect)));
    }
  }
}

#include <cmath>

#include <gtest/gtest.h>

#include "pvqa/fr_metrics.hpp"
#include "pvqa/synthetic_data.hpp"
#include "test_util.hpp"

using namespace pvqa;
using namespace pvqa::test;

namespace {

SyntheticOptions small() {
  SyntheticOptions o;
  o.height = 32;
  o.width = 40;
  return o;
}

}  // namespace

TEST(SyntheticVideos, SeedDeterminesEverything) {
  const auto a = make_synthetic_videos(4, 9, small()), b = make_synthetic_videos(4, 9, small());
  const auto c = make_synthetic_videos(4, 10, small());
  for (std::size_t v = 0; v < 4; ++v) {
    EXPECT_EQ(a[v].record.mos, b[v].record.mos);
    for (std::size_t n = 0; n < 20; ++n)
      EXPECT_TRUE(same(a[v].record.frames[n].samples(), b[v].record.frames[n].samples()));
  }
  EXPECT_FALSE(same(a[0].record.frames[0].samples(), c[0].record.frames[0].samples()));
}

TEST(SyntheticVideos, RecordsAreValidWithMosInRange) {
  const auto videos = make_synthetic_videos(50, 1, small());
  ASSERT_EQ(videos.size(), 50u);
  EXPECT_EQ(videos[7].record.id, "syn0007");
  for (const auto& sv : videos) {
    const VideoRecord& r = sv.record;
    EXPECT_NO_THROW(validate(r));
    EXPECT_EQ(r.frames.size(), 20u);
    EXPECT_EQ(r.reference.size(), 20u);
    EXPECT_EQ(r.frames[0].height(), 32);
    EXPECT_EQ(r.frames[0].width(), 40);
    ASSERT_TRUE(r.mos.has_value());
    EXPECT_GE(*r.mos, 0.0);
    EXPECT_LE(*r.mos, 100.0);
    EXPECT_GE(sv.blur, 0.0);
    EXPECT_LT(sv.blur, 1.0);
  }
}

TEST(SyntheticVideos, ContextFramesAreTheReference) {
  for (const auto& sv : make_synthetic_videos(5, 2, small()))
    for (std::size_t n = 0; n < 4; ++n)
      EXPECT_TRUE(same(sv.record.frames[n].samples(), sv.record.reference[n].samples()));
}

TEST(SyntheticVideos, MosFollowsBlurWithoutNoise) {
  SyntheticOptions o = small();
  o.mos_noise = 0.0;
  for (const auto& sv : make_synthetic_videos(20, 3, o))
    EXPECT_NEAR(*sv.record.mos, 100.0 - 60.0 * sv.blur, 1e-12);
}

TEST(SyntheticVideos, PredictedFramesDegradeOverTime) {
  for (const auto& sv : make_synthetic_videos(10, 4, small())) {
    if (sv.blur < 0.3) continue;
    const auto& r = sv.record;
    EXPECT_LT(frame_mse(r.frames[4], r.reference[4]), frame_mse(r.frames[19], r.reference[19]))
        << r.id;
  }
}

TEST(SyntheticVideos, StillCameraGivesStaticContext) {
  SyntheticOptions o = small();
  o.pan_step = 0;
  const auto v = make_synthetic_videos(1, 5, o);
  for (std::size_t n = 1; n < 20; ++n)
    EXPECT_TRUE(same(v[0].record.reference[n].samples(), v[0].record.reference[0].samples()));
}

TEST(SyntheticVideos, InvalidOptions) {
  SyntheticOptions o;
  o.min_period = 5;
  o.max_period = 4;
  EXPECT_ERRC(make_synthetic_videos(1, 1, o), Errc::invalid_argument);
  EXPECT_ERRC(make_synthetic_videos(0, 1), Errc::invalid_argument);
}

TEST(GaussianBlur, ZeroSigmaIsIdentityAndBlurIsMonotone) {
  Rng rng(6);
  const Frame f = random_frame(rng, 24, 24);
  EXPECT_TRUE(same(gaussian_blur(f, 0.0).samples(), f.samples()));
  double previous = 0.0;
  for (double sigma : {0.5, 1.0, 2.0, 3.0}) {
    const double e = frame_mse(gaussian_blur(f, sigma), f);
    EXPECT_GT(e, previous);
    previous = e;
  }
  const Frame flat = constant_frame(9, 7, 131);
  EXPECT_TRUE(same(gaussian_blur(flat, 2.5).samples(), flat.samples()));
}

TEST(SyntheticDataset, WrittenManifestLoadsBack) {
  TempDir dir;
  const auto videos = make_synthetic_videos(3, 8, small());
  const auto path = write_synthetic_dataset(videos, dir.path());
  EXPECT_EQ(path, dir / "manifest.json");
  const DatasetManifest m = load_manifest(path);
  ASSERT_EQ(m.entries.size(), 3u);
  const VideoRecord r = load_video(m.entries[2]);
  EXPECT_EQ(r.id, videos[2].record.id);
  EXPECT_EQ(r.mos, videos[2].record.mos);
  ASSERT_EQ(r.reference.size(), 20u);
  for (std::size_t n = 0; n < 20; ++n) {
    EXPECT_TRUE(same(r.frames[n].samples(), videos[2].record.frames[n].samples()));
    EXPECT_TRUE(same(r.reference[n].samples(), videos[2].record.reference[n].samples()));
  }
}

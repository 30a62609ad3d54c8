#include "pvqa/rfd.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "pvqa/error.hpp"
#include "pvqa/mcs.hpp"
#include "pvqa/parallel.hpp"

namespace pvqa {

Frame rescaled_frame_difference(const Frame& a, const Frame& b) {
  require(!a.empty() && a.same_shape(b), Errc::shape_mismatch,
          "frame difference of frames with different dimensions");
  const auto sa = a.samples();
  const auto sb = b.samples();
  constexpr int C = Frame::kChannels;
  std::array<int, C> lo, hi;
  lo.fill(std::numeric_limits<int>::max());
  hi.fill(std::numeric_limits<int>::min());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const int d = static_cast<int>(sb[i]) - static_cast<int>(sa[i]);
    const std::size_t c = i % C;
    lo[c] = std::min(lo[c], d);
    hi[c] = std::max(hi[c], d);
  }
  Frame out(a.height(), a.width());
  auto so = out.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const std::size_t c = i % C;
    const int range = hi[c] - lo[c];
    if (range == 0) continue;
    // round((d - lo) * 255 / range) with halves rounded up; numerator >= 0 so
    // this equals rounding half away from zero, computed exactly in integers.
    const int num = (static_cast<int>(sb[i]) - static_cast<int>(sa[i]) - lo[c]) * 255;
    so[i] = static_cast<std::uint8_t>((2 * num + range) / (2 * range));
  }
  return out;
}

std::vector<Frame> rfd_images(std::span<const Frame> frames) {
  require(frames.size() >= 2, Errc::insufficient_data, "frame differences need at least 2 frames");
  std::vector<Frame> out;
  out.reserve(frames.size() - 1);
  for (std::size_t n = 0; n + 1 < frames.size(); ++n)
    out.push_back(rescaled_frame_difference(frames[n], frames[n + 1]));
  return out;
}

std::vector<double> rfd_features_from_maps(std::span<const FeatureMap> rfd_maps) {
  std::vector<double> out;
  if (rfd_maps.empty()) return out;
  const std::size_t k = static_cast<std::size_t>(rfd_maps.front().k());
  out.reserve(k * rfd_maps.size());
  for (const auto& m : rfd_maps) {
    require(m.k() == rfd_maps.front().k(), Errc::shape_mismatch,
            "RFD feature maps must share a channel count");
    const auto v = ssa(m);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<double> rfd_video_features(std::span<const Frame> frames,
                                       const ImageFeatureProvider& provider, int jobs) {
  require(frames.size() >= 2, Errc::insufficient_data, "RFD features need at least 2 frames");
  const std::size_t diffs = frames.size() - 1;
  const std::size_t k = static_cast<std::size_t>(provider.spec().k);
  std::vector<double> out(k * diffs);
  parallel_for(diffs, jobs, [&](std::size_t d) {
    const Frame image = rescaled_frame_difference(frames[d], frames[d + 1]);
    const auto v = ssa(features_for_image(image, provider));
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(d * k));
  });
  return out;
}

double rfd_dissimilarity(std::span<const double> x, std::span<const double> y) {
  return 1.0 - cosine_similarity(x, y);
}

}  // namespace pvqa

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pvqa/video.hpp"

namespace pvqa {

// Planted-quality videos: a smooth random texture drifts across the frame and
// the predicted frames are blurred progressively. The ground-truth future is
// the unblurred drift, and
//   MOS = clamp(100 - mos_slope * blur + N(0, mos_noise), 0, 100)
// with blur strength drawn uniformly from [0, 1].
struct SyntheticOptions {
  int height = 64;
  int width = 64;
  int n_context = 4;
  int n_predicted = 16;
  double max_sigma = 3.0;  // Gaussian sigma of the last frame at blur 1
  // The camera jitters between two positions `pan_step` pixels apart along
  // one of the eight compass directions, switching every 2 to 6 frames.
  // 0 keeps it still.
  int pan_step = 8;
  double min_period = 3.0;  // detail wavelengths in pixels
  double max_period = 12.0;
  double mos_slope = 60.0;
  double mos_noise = 3.0;
};

struct SyntheticVideo {
  VideoRecord record;
  double blur = 0.0;
};

std::vector<SyntheticVideo> make_synthetic_videos(int count, std::uint64_t seed,
                                                  const SyntheticOptions& options = {});

// Writes every video as PNG frames under dir/<id>/ plus dir/manifest.json and
// returns the manifest path.
std::filesystem::path write_synthetic_dataset(std::span<const SyntheticVideo> videos,
                                              const std::filesystem::path& dir);

// Separable Gaussian blur with mirrored borders, rounded back to 8 bits.
// sigma <= 0 returns the input.
Frame gaussian_blur(const Frame& frame, double sigma);

}  // namespace pvqa

#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pvqa/frame.hpp"

namespace pvqa {

// p.q / (|p| |q|), clamped to [-1, 1]. Defined as 0 when either vector is
// zero. Accumulates in double.
double cosine_similarity(std::span<const double> p, std::span<const double> q);
double cosine_similarity(std::span<const float> p, std::span<const float> q);

// For every cell of the context map, the cell of the predicted map whose
// channel vector is most cosine-similar to it.
struct MotionField {
  int h = 0;
  int w = 0;
  std::vector<int> match;          // row-major cell index into the predicted map
  std::vector<double> similarity;  // best similarity per context cell

  std::pair<int, int> target(int i, int j) const {
    const int m = match[static_cast<std::size_t>(i) * w + j];
    return {m / w, m % w};
  }
};

// Exhaustive search over the whole predicted map, or over the square
// neighbourhood |di|, |dj| <= window when a window radius is given. Ties go to
// the smallest row-major index.
MotionField motion_compensate(const FeatureMap& context, const FeatureMap& predicted,
                              std::optional<int> window = std::nullopt);

// The predicted map resampled through the motion field.
FeatureMap compensated_map(const FeatureMap& predicted, const MotionField& field);

// Per-channel cosine similarity between the context plane and the
// motion-compensated plane (each flattened over cells). Length k.
std::vector<double> mcs_frame_features(const FeatureMap& context, const FeatureMap& predicted,
                                       std::optional<int> window = std::nullopt);

// MCS features of a whole video: maps[n_context - 1] is the reference for every
// predicted map maps[n_context .. N-1]; results concatenated frame-major,
// channel-minor (length k * (N - n_context)).
std::vector<double> mcs_video_features(std::span<const FeatureMap> maps, int n_context,
                                       std::optional<int> window = std::nullopt, int jobs = 1);

}  // namespace pvqa

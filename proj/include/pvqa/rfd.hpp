#pragma once

#include <span>
#include <vector>

#include "pvqa/feature_provider.hpp"
#include "pvqa/frame.hpp"

namespace pvqa {

// The signed difference b - a stretched per color channel so its minimum maps
// to 0 and its maximum to 255 (rounded half away from zero). A channel whose
// difference is constant becomes all zeros.
Frame rescaled_frame_difference(const Frame& a, const Frame& b);

// One RFD image per adjacent pair of frames, in temporal order (N - 1 images).
std::vector<Frame> rfd_images(std::span<const Frame> frames);

// SSA of the backbone features of every RFD image, concatenated
// difference-major, channel-minor (length k * (N - 1)).
std::vector<double> rfd_video_features(std::span<const Frame> frames,
                                       const ImageFeatureProvider& provider, int jobs = 1);

// Same layout, from precomputed RFD feature maps.
std::vector<double> rfd_features_from_maps(std::span<const FeatureMap> rfd_maps);

// 1 - cosine similarity.
double rfd_dissimilarity(std::span<const double> x, std::span<const double> y);

}  // namespace pvqa

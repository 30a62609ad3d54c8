#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pvqa/feature_provider.hpp"
#include "pvqa/frame.hpp"
#include "pvqa/video.hpp"

namespace pvqa {

enum class FrMetric { mse, ssim, msssim, gradient_difference, feature_mse, feature_cosine };
enum class Polarity { higher_is_better, lower_is_better };

std::string_view to_string(FrMetric m);
FrMetric parse_fr_metric(std::string_view name);
Polarity polarity(FrMetric m);
bool needs_features(FrMetric m);

// Mean squared error over all samples (values on [0, 255]).
double frame_mse(const Frame& pred, const Frame& ref);

// Mean SSIM on BT.601 luma with an 11x11 Gaussian window (sigma 1.5),
// evaluated at every position where the window fits.
double frame_ssim(const Frame& pred, const Frame& ref);

// Multi-scale SSIM with the standard five weights. Coarser scales are dropped
// when the image gets smaller than the window; the remaining weights are
// renormalised. At least two scales are required.
double frame_msssim(const Frame& pred, const Frame& ref);
int msssim_scale_count(int height, int width);

// Per-pixel mean of | |grad ref| - |grad pred| | over horizontal and vertical
// forward differences, summed over channels.
double gradient_difference(const Frame& pred, const Frame& ref);

// MSE and cosine similarity of flattened feature tensors.
double feature_mse(const FeatureMap& pred, const FeatureMap& ref);
double feature_cosine(const FeatureMap& pred, const FeatureMap& ref);
double feature_mse(const Frame& pred, const Frame& ref, const ImageFeatureProvider& provider);
double feature_cosine(const Frame& pred, const Frame& ref, const ImageFeatureProvider& provider);

struct FrScore {
  std::vector<double> per_frame;  // one value per predicted frame
  double aggregate = 0.0;         // mean of per_frame
  Polarity polarity = Polarity::higher_is_better;
};

// Applies a pixel-domain metric to every predicted frame (index >= n_context).
FrScore fr_video_score(FrMetric metric, std::span<const Frame> pred, std::span<const Frame> ref,
                       int n_context, const ImageFeatureProvider* provider = nullptr);
FrScore fr_video_score(FrMetric metric, const VideoRecord& video,
                       const ImageFeatureProvider* provider = nullptr);
// Feature-space metrics from precomputed maps of both videos.
FrScore fr_video_score(FrMetric metric, std::span<const FeatureMap> pred,
                       std::span<const FeatureMap> ref, int n_context);

}  // namespace pvqa

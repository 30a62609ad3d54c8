#include "pvqa/frame.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pvqa/error.hpp"

namespace pvqa {

Frame::Frame(int height, int width)
    : Frame(height, width,
            std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(height, 0)) *
                                      std::max(width, 0) * kChannels)) {}

Frame::Frame(int height, int width, std::vector<std::uint8_t> samples)
    : height_(height), width_(width), samples_(std::move(samples)) {
  require(height >= 1 && width >= 1, Errc::invalid_argument,
          "frame dimensions must be positive, got " + std::to_string(height) + "x" +
              std::to_string(width));
  require(samples_.size() == pixel_count() * kChannels, Errc::shape_mismatch,
          "frame sample count does not match " + std::to_string(height) + "x" +
              std::to_string(width) + "x3");
}

FeatureMap::FeatureMap(int h, int w, int k)
    : FeatureMap(h, w, k,
                 std::vector<float>(static_cast<std::size_t>(std::max(h, 0)) * std::max(w, 0) *
                                    std::max(k, 0))) {}

FeatureMap::FeatureMap(int h, int w, int k, std::vector<float> values)
    : h_(h), w_(w), k_(k), values_(std::move(values)) {
  require(h >= 1 && w >= 1 && k >= 1, Errc::invalid_argument,
          "feature map dimensions must be positive");
  require(values_.size() == cells() * static_cast<std::size_t>(k), Errc::shape_mismatch,
          "feature map value count does not match h*w*k");
}

bool FeatureMap::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
}

}  // namespace pvqa

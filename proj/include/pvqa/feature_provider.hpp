#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pvqa/frame.hpp"

namespace pvqa {

enum class Backbone { vgg19, resnet50, inceptionv3, synthetic };

std::string_view to_string(Backbone b);
Backbone parse_backbone(std::string_view name);

struct BackboneSpec {
  Backbone name = Backbone::synthetic;
  std::string tap_point;
  int k = 0;
  int input_side = 0;  // 0: no resizing (synthetic)

  friend bool operator==(const BackboneSpec&, const BackboneSpec&) = default;
};

// Taps used by the learned model: the last convolutional stage before the
// classifier (global pooling) of each network.
BackboneSpec vgg19_spec();
BackboneSpec resnet50_spec();
BackboneSpec inceptionv3_spec();
// Tap used by the feature-space full-reference baselines.
BackboneSpec vgg19_fr_spec();
BackboneSpec synthetic_spec(int k);
BackboneSpec spec_for(Backbone b, int synthetic_k = 64);

// Produces one FeatureMap per image. Implementations are immutable after
// construction, so concurrent calls are safe.
class ImageFeatureProvider {
 public:
  virtual ~ImageFeatureProvider() = default;
  virtual const BackboneSpec& spec() const = 0;
  virtual FeatureMap features(const Frame& image) const = 0;
  // Free-form description of input preprocessing, stored in sidecars.
  virtual std::string preprocessing() const = 0;
};

// Runs the provider and checks the result against its declared channel count.
FeatureMap features_for_image(const Frame& image, const ImageFeatureProvider& provider);

// Deterministic stand-in backbone: three stages of 3x3 convolution (zero
// padding), ReLU and average pooling with weights drawn from `seed`. Widths are
// 8, 16 and k channels; the three pooling factors multiply to `downscale`, so
// the output is floor(H/downscale) x floor(W/downscale) x k. Each input
// channel has its mean removed and is scaled by 1/255, so without bias an
// all-zero image (a static video's frame difference) maps to zeros.
class SyntheticProvider final : public ImageFeatureProvider {
 public:
  SyntheticProvider(std::uint64_t seed, int k, int downscale, bool with_bias = false);

  const BackboneSpec& spec() const override { return spec_; }
  FeatureMap features(const Frame& image) const override;
  std::string preprocessing() const override;

  std::uint64_t seed() const { return seed_; }
  int downscale() const { return downscale_; }

 private:
  struct Stage {
    int in_channels = 0;
    int out_channels = 0;
    int pool = 1;
    std::vector<float> weights;  // [out][ky][kx][in]
    std::vector<float> bias;     // [out]
  };

  BackboneSpec spec_;
  std::uint64_t seed_;
  int downscale_;
  bool with_bias_;
  std::array<Stage, 3> stages_;
};

std::unique_ptr<ImageFeatureProvider> synthetic_provider(std::uint64_t seed, int k, int downscale);

// Serves maps stored in a PVQF file by position (frame index or difference
// index). Rejects files whose channel count disagrees with `expected`.
class FeatureFileProvider {
 public:
  FeatureFileProvider(const std::filesystem::path& path, BackboneSpec expected);

  const BackboneSpec& spec() const { return spec_; }
  std::size_t size() const { return maps_.size(); }
  const FeatureMap& map(std::size_t index) const;
  const std::vector<FeatureMap>& maps() const { return maps_; }

 private:
  BackboneSpec spec_;
  std::vector<FeatureMap> maps_;
};

// Simple spatial averaging: element c is the mean of channel c over all cells.
std::vector<double> ssa(const FeatureMap& map);

}  // namespace pvqa

#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>

#include "pvqa/feature_provider.hpp"

namespace pvqa {

// Per-channel input normalisation applied after scaling samples to [0, 1].
struct InputNormalization {
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> stddev{0.229, 0.224, 0.225};
};

// Runs a network stored in ONNX format, truncated at the tap layer. Frames
// are resized bilinearly to spec.input_side (both sides), normalised and fed
// as one NCHW RGB batch; the first output must be 1 x k x h x w.
//
// Only available when built with OpenCV's dnn module; otherwise construction
// throws Errc::provider_unavailable.
class OnnxProvider final : public ImageFeatureProvider {
 public:
  OnnxProvider(const std::filesystem::path& model, BackboneSpec spec,
               InputNormalization norm = {});
  ~OnnxProvider() override;

  const BackboneSpec& spec() const override { return spec_; }
  FeatureMap features(const Frame& image) const override;
  std::string preprocessing() const override;

  static bool available();

 private:
  struct Impl;
  BackboneSpec spec_;
  InputNormalization norm_;
  std::filesystem::path model_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pvqa

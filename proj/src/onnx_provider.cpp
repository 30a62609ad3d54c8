#include "pvqa/onnx_provider.hpp"

#include <mutex>
#include <sstream>

#include "pvqa/error.hpp"

#ifdef PVQA_HAVE_ONNX
#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>
#endif

namespace pvqa {

#ifdef PVQA_HAVE_ONNX

struct OnnxProvider::Impl {
  // cv::dnn::Net::forward mutates internal buffers.
  std::mutex mutex;
  cv::dnn::Net net;
};

bool OnnxProvider::available() { return true; }

OnnxProvider::OnnxProvider(const std::filesystem::path& model, BackboneSpec spec,
                           InputNormalization norm)
    : spec_(std::move(spec)), norm_(norm), model_(model), impl_(std::make_unique<Impl>()) {
  require(std::filesystem::exists(model), Errc::provider_unavailable,
          "model file not found: " + model.string());
  require(spec_.k >= 1, Errc::invalid_argument, "backbone spec needs k >= 1");
  try {
    impl_->net = cv::dnn::readNetFromONNX(model.string());
  } catch (const cv::Exception& e) {
    fail(Errc::provider_unavailable, "cannot load " + model.string() + ": " + e.what());
  }
  require(!impl_->net.empty(), Errc::provider_unavailable,
          "cannot load " + model.string() + ": empty network");
  impl_->net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
  impl_->net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
}

FeatureMap OnnxProvider::features(const Frame& image) const {
  require(!image.empty(), Errc::invalid_argument, "empty image");
  cv::Mat rgb(image.height(), image.width(), CV_8UC3,
              const_cast<std::uint8_t*>(image.samples().data()));
  cv::Mat resized;
  if (spec_.input_side > 0 &&
      (image.height() != spec_.input_side || image.width() != spec_.input_side))
    cv::resize(rgb, resized, cv::Size(spec_.input_side, spec_.input_side), 0, 0,
               cv::INTER_LINEAR);
  else
    resized = rgb;

  const int h = resized.rows, w = resized.cols;
  const int dims[] = {1, 3, h, w};
  cv::Mat blob(4, dims, CV_32F);
  auto* out = blob.ptr<float>();
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < h; ++i) {
      const auto* row = resized.ptr<std::uint8_t>(i);
      for (int j = 0; j < w; ++j)
        out[(static_cast<std::size_t>(c) * h + i) * w + j] = static_cast<float>(
            (row[j * 3 + c] / 255.0 - norm_.mean[static_cast<std::size_t>(c)]) /
            norm_.stddev[static_cast<std::size_t>(c)]);
    }

  cv::Mat result;
  {
    std::lock_guard lock(impl_->mutex);
    try {
      impl_->net.setInput(blob);
      result = impl_->net.forward().clone();
    } catch (const cv::Exception& e) {
      fail(Errc::provider_unavailable, "inference failed: " + std::string(e.what()));
    }
  }
  require(result.dims == 4 && result.size[0] == 1, Errc::shape_mismatch,
          "network output must be 1 x k x h x w");
  const int k = result.size[1], oh = result.size[2], ow = result.size[3];
  require(k == spec_.k, Errc::shape_mismatch,
          "network produced " + std::to_string(k) + " channels, backbone declares " +
              std::to_string(spec_.k));
  std::vector<float> values(static_cast<std::size_t>(oh) * ow * k);
  const auto* src = result.ptr<float>();
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j)
        values[(static_cast<std::size_t>(i) * ow + j) * k + c] =
            src[(static_cast<std::size_t>(c) * oh + i) * ow + j];
  return FeatureMap(oh, ow, k, std::move(values));
}

#else

struct OnnxProvider::Impl {};

bool OnnxProvider::available() { return false; }

OnnxProvider::OnnxProvider(const std::filesystem::path& model, BackboneSpec spec,
                           InputNormalization norm)
    : spec_(std::move(spec)), norm_(norm), model_(model) {
  fail(Errc::provider_unavailable, "this build has no ONNX support (OpenCV dnn not found)");
}

FeatureMap OnnxProvider::features(const Frame&) const {
  fail(Errc::provider_unavailable, "this build has no ONNX support");
}

#endif

OnnxProvider::~OnnxProvider() = default;

std::string OnnxProvider::preprocessing() const {
  std::ostringstream os;
  os << "onnx model=" << model_.filename().string() << "; bilinear resize to "
     << spec_.input_side << "x" << spec_.input_side << "; scale 1/255; mean=" << norm_.mean[0]
     << "," << norm_.mean[1] << "," << norm_.mean[2] << " std=" << norm_.stddev[0] << ","
     << norm_.stddev[1] << "," << norm_.stddev[2];
  return os.str();
}

}  // namespace pvqa

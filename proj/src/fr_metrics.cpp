#include "pvqa/fr_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "pvqa/error.hpp"
#include "pvqa/mcs.hpp"

namespace pvqa {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
constexpr std::array<double, 5> kMsssimWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

constexpr std::array<std::pair<FrMetric, std::string_view>, 6> kMetrics{{
    {FrMetric::mse, "mse"},
    {FrMetric::ssim, "ssim"},
    {FrMetric::msssim, "msssim"},
    {FrMetric::gradient_difference, "gradient-difference"},
    {FrMetric::feature_mse, "feature-mse"},
    {FrMetric::feature_cosine, "feature-cosine"},
}};

struct Plane {
  int h = 0;
  int w = 0;
  std::vector<double> v;
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * w + j]; }
};

Plane luma(const Frame& f) {
  Plane p{f.height(), f.width(), std::vector<double>(f.pixel_count())};
  for (int i = 0; i < f.height(); ++i)
    for (int j = 0; j < f.width(); ++j)
      p.v[static_cast<std::size_t>(i) * f.width() + j] =
          0.299 * f.at(i, j, 0) + 0.587 * f.at(i, j, 1) + 0.114 * f.at(i, j, 2);
  return p;
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double sum = 0.0;
  for (int t = 0; t < kWindow; ++t) {
    const double x = t - kWindow / 2;
    g[static_cast<std::size_t>(t)] = std::exp(-x * x / (2.0 * kSigma * kSigma));
    sum += g[static_cast<std::size_t>(t)];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Separable Gaussian filter keeping only positions where the window fits.
Plane filter_valid(const Plane& in) {
  static const auto g = gaussian_taps();
  const int oh = in.h - kWindow + 1;
  const int ow = in.w - kWindow + 1;
  Plane rows{in.h, ow, std::vector<double>(static_cast<std::size_t>(in.h) * ow)};
  for (int i = 0; i < in.h; ++i)
    for (int j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += g[static_cast<std::size_t>(t)] * in.at(i, j + t);
      rows.v[static_cast<std::size_t>(i) * ow + j] = acc;
    }
  Plane out{oh, ow, std::vector<double>(static_cast<std::size_t>(oh) * ow)};
  for (int i = 0; i < oh; ++i)
    for (int j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += g[static_cast<std::size_t>(t)] * rows.at(i + t, j);
      out.v[static_cast<std::size_t>(i) * ow + j] = acc;
    }
  return out;
}

Plane multiply(const Plane& a, const Plane& b) {
  Plane out{a.h, a.w, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

// Mean SSIM and mean contrast-structure term of two planes.
std::pair<double, double> ssim_terms(const Plane& x, const Plane& y) {
  const Plane mx = filter_valid(x);
  const Plane my = filter_valid(y);
  const Plane sxx = filter_valid(multiply(x, x));
  const Plane syy = filter_valid(multiply(y, y));
  const Plane sxy = filter_valid(multiply(x, y));
  double ssim_sum = 0.0, cs_sum = 0.0;
  for (std::size_t i = 0; i < mx.v.size(); ++i) {
    const double ux = mx.v[i], uy = my.v[i];
    const double vx = sxx.v[i] - ux * ux;
    const double vy = syy.v[i] - uy * uy;
    const double cxy = sxy.v[i] - ux * uy;
    const double cs = (2.0 * cxy + kC2) / (vx + vy + kC2);
    const double l = (2.0 * ux * uy + kC1) / (ux * ux + uy * uy + kC1);
    ssim_sum += l * cs;
    cs_sum += cs;
  }
  const double n = static_cast<double>(mx.v.size());
  return {ssim_sum / n, cs_sum / n};
}

Plane downsample2(const Plane& in) {
  Plane out{in.h / 2, in.w / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.h) * out.w);
  for (int i = 0; i < out.h; ++i)
    for (int j = 0; j < out.w; ++j)
      out.v[static_cast<std::size_t>(i) * out.w + j] =
          0.25 * (in.at(2 * i, 2 * j) + in.at(2 * i, 2 * j + 1) + in.at(2 * i + 1, 2 * j) +
                  in.at(2 * i + 1, 2 * j + 1));
  return out;
}

void check_frames(const Frame& pred, const Frame& ref) {
  require(!pred.empty() && pred.same_shape(ref), Errc::shape_mismatch,
          "predicted and reference frames differ in size");
}

}  // namespace

std::string_view to_string(FrMetric m) {
  for (const auto& [value, name] : kMetrics)
    if (value == m) return name;
  return "?";
}

FrMetric parse_fr_metric(std::string_view name) {
  for (const auto& [value, n] : kMetrics)
    if (n == name) return value;
  fail(Errc::invalid_argument, "unknown full-reference metric '" + std::string(name) + "'");
}

Polarity polarity(FrMetric m) {
  switch (m) {
    case FrMetric::mse:
    case FrMetric::gradient_difference:
    case FrMetric::feature_mse: return Polarity::lower_is_better;
    default: return Polarity::higher_is_better;
  }
}

bool needs_features(FrMetric m) {
  return m == FrMetric::feature_mse || m == FrMetric::feature_cosine;
}

double frame_mse(const Frame& pred, const Frame& ref) {
  check_frames(pred, ref);
  const auto a = pred.samples();
  const auto b = ref.samples();
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    ss += d * d;
  }
  return ss / static_cast<double>(a.size());
}

double frame_ssim(const Frame& pred, const Frame& ref) {
  check_frames(pred, ref);
  require(pred.height() >= kWindow && pred.width() >= kWindow, Errc::invalid_argument,
          "SSIM needs images of at least 11x11");
  return ssim_terms(luma(pred), luma(ref)).first;
}

int msssim_scale_count(int height, int width) {
  int scales = 0;
  while (scales < static_cast<int>(kMsssimWeights.size()) && std::min(height, width) >= kWindow) {
    ++scales;
    height /= 2;
    width /= 2;
  }
  return scales;
}

double frame_msssim(const Frame& pred, const Frame& ref) {
  check_frames(pred, ref);
  const int scales = msssim_scale_count(pred.height(), pred.width());
  require(scales >= 2, Errc::invalid_argument,
          "MS-SSIM needs at least two scales (images of at least 22x22)");
  double weight_sum = 0.0;
  for (int s = 0; s < scales; ++s) weight_sum += kMsssimWeights[static_cast<std::size_t>(s)];

  Plane x = luma(pred);
  Plane y = luma(ref);
  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    const auto [ssim, cs] = ssim_terms(x, y);
    const double term = std::max(s + 1 == scales ? ssim : cs, 0.0);
    result *= std::pow(term, kMsssimWeights[static_cast<std::size_t>(s)] / weight_sum);
    if (s + 1 < scales) {
      x = downsample2(x);
      y = downsample2(y);
    }
  }
  return result;
}

double gradient_difference(const Frame& pred, const Frame& ref) {
  check_frames(pred, ref);
  require(pred.height() >= 2 && pred.width() >= 2, Errc::invalid_argument,
          "gradient difference needs images of at least 2x2");
  double total = 0.0;
  for (int i = 0; i < pred.height(); ++i)
    for (int j = 0; j < pred.width(); ++j)
      for (int c = 0; c < Frame::kChannels; ++c) {
        if (j + 1 < pred.width()) {
          const int gr = std::abs(ref.at(i, j + 1, c) - ref.at(i, j, c));
          const int gp = std::abs(pred.at(i, j + 1, c) - pred.at(i, j, c));
          total += std::abs(gr - gp);
        }
        if (i + 1 < pred.height()) {
          const int gr = std::abs(ref.at(i + 1, j, c) - ref.at(i, j, c));
          const int gp = std::abs(pred.at(i + 1, j, c) - pred.at(i, j, c));
          total += std::abs(gr - gp);
        }
      }
  return total / static_cast<double>(pred.pixel_count());
}

double feature_mse(const FeatureMap& pred, const FeatureMap& ref) {
  require(pred.same_shape(ref), Errc::shape_mismatch, "feature maps differ in shape");
  const auto a = pred.values();
  const auto b = ref.values();
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    ss += d * d;
  }
  return ss / static_cast<double>(a.size());
}

double feature_cosine(const FeatureMap& pred, const FeatureMap& ref) {
  require(pred.same_shape(ref), Errc::shape_mismatch, "feature maps differ in shape");
  return cosine_similarity(pred.values(), ref.values());
}

double feature_mse(const Frame& pred, const Frame& ref, const ImageFeatureProvider& provider) {
  check_frames(pred, ref);
  return feature_mse(features_for_image(pred, provider), features_for_image(ref, provider));
}

double feature_cosine(const Frame& pred, const Frame& ref, const ImageFeatureProvider& provider) {
  check_frames(pred, ref);
  return feature_cosine(features_for_image(pred, provider), features_for_image(ref, provider));
}

FrScore fr_video_score(FrMetric metric, std::span<const Frame> pred, std::span<const Frame> ref,
                       int n_context, const ImageFeatureProvider* provider) {
  require(pred.size() == ref.size(), Errc::shape_mismatch,
          "predicted and reference videos differ in length");
  require(n_context >= 1 && pred.size() > static_cast<std::size_t>(n_context),
          Errc::insufficient_data, "video has no predicted frames");
  require(!needs_features(metric) || provider != nullptr, Errc::provider_unavailable,
          std::string(to_string(metric)) + " needs a feature provider");
  FrScore score;
  score.polarity = polarity(metric);
  for (std::size_t n = static_cast<std::size_t>(n_context); n < pred.size(); ++n) {
    double v = 0.0;
    switch (metric) {
      case FrMetric::mse: v = frame_mse(pred[n], ref[n]); break;
      case FrMetric::ssim: v = frame_ssim(pred[n], ref[n]); break;
      case FrMetric::msssim: v = frame_msssim(pred[n], ref[n]); break;
      case FrMetric::gradient_difference: v = gradient_difference(pred[n], ref[n]); break;
      case FrMetric::feature_mse: v = feature_mse(pred[n], ref[n], *provider); break;
      case FrMetric::feature_cosine: v = feature_cosine(pred[n], ref[n], *provider); break;
    }
    score.per_frame.push_back(v);
  }
  double sum = 0.0;
  for (double v : score.per_frame) sum += v;
  score.aggregate = sum / static_cast<double>(score.per_frame.size());
  return score;
}

FrScore fr_video_score(FrMetric metric, const VideoRecord& video,
                       const ImageFeatureProvider* provider) {
  require(!video.reference.empty(), Errc::validation,
          video.id + ": full-reference metrics need reference frames");
  return fr_video_score(metric, video.frames, video.reference, video.n_context, provider);
}

FrScore fr_video_score(FrMetric metric, std::span<const FeatureMap> pred,
                       std::span<const FeatureMap> ref, int n_context) {
  require(needs_features(metric), Errc::invalid_argument,
          std::string(to_string(metric)) + " is not a feature-space metric");
  require(pred.size() == ref.size(), Errc::shape_mismatch,
          "predicted and reference feature sequences differ in length");
  require(n_context >= 1 && pred.size() > static_cast<std::size_t>(n_context),
          Errc::insufficient_data, "video has no predicted frames");
  FrScore score;
  score.polarity = polarity(metric);
  for (std::size_t n = static_cast<std::size_t>(n_context); n < pred.size(); ++n)
    score.per_frame.push_back(metric == FrMetric::feature_mse ? feature_mse(pred[n], ref[n])
                                                              : feature_cosine(pred[n], ref[n]));
  double sum = 0.0;
  for (double v : score.per_frame) sum += v;
  score.aggregate = sum / static_cast<double>(score.per_frame.size());
  return score;
}

}  // namespace pvqa

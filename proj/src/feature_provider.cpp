#include "pvqa/feature_provider.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "pvqa/error.hpp"
#include "pvqa/feature_file.hpp"
#include "pvqa/rng.hpp"

namespace pvqa {

namespace {

constexpr std::array<std::pair<Backbone, std::string_view>, 4> kBackbones{{
    {Backbone::vgg19, "vgg19"},
    {Backbone::resnet50, "resnet50"},
    {Backbone::inceptionv3, "inceptionv3"},
    {Backbone::synthetic, "synthetic"},
}};

// Splits `downscale` into three pooling factors whose product is `downscale`,
// largest first, balancing prime factors across stages.
std::array<int, 3> pooling_factors(int downscale) {
  std::vector<int> primes;
  for (int n = downscale, p = 2; n > 1;) {
    if (p * p > n) {
      primes.push_back(n);
      break;
    }
    if (n % p == 0) {
      primes.push_back(p);
      n /= p;
    } else {
      ++p;
    }
  }
  std::sort(primes.rbegin(), primes.rend());
  std::array<int, 3> factors{1, 1, 1};
  for (int p : primes) *std::min_element(factors.begin(), factors.end()) *= p;
  std::sort(factors.rbegin(), factors.rend());
  return factors;
}

// Planar-interleaved activation buffer: [row][col][channel].
struct Activation {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<float> v;
};

Activation conv3x3_relu(const Activation& in, int out_channels, const std::vector<float>& weights,
                        const std::vector<float>& bias) {
  Activation out{in.h, in.w, out_channels,
                 std::vector<float>(static_cast<std::size_t>(in.h) * in.w * out_channels)};
  const int taps = 9 * in.c;
  std::vector<float> patch(static_cast<std::size_t>(taps));
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      std::size_t t = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy;
          const int xx = x + dx;
          if (yy < 0 || yy >= in.h || xx < 0 || xx >= in.w) {
            std::fill_n(patch.begin() + static_cast<std::ptrdiff_t>(t), in.c, 0.0f);
          } else {
            const float* src = &in.v[(static_cast<std::size_t>(yy) * in.w + xx) * in.c];
            std::copy_n(src, in.c, patch.begin() + static_cast<std::ptrdiff_t>(t));
          }
          t += static_cast<std::size_t>(in.c);
        }
      }
      float* dst = &out.v[(static_cast<std::size_t>(y) * in.w + x) * out_channels];
      for (int o = 0; o < out_channels; ++o) {
        const float* wrow = &weights[static_cast<std::size_t>(o) * taps];
        float acc = bias.empty() ? 0.0f : bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < taps; ++i) acc += wrow[i] * patch[static_cast<std::size_t>(i)];
        dst[o] = acc > 0.0f ? acc : 0.0f;
      }
    }
  }
  return out;
}

Activation average_pool(const Activation& in, int p) {
  if (p == 1) return in;
  Activation out{in.h / p, in.w / p, in.c, {}};
  out.v.assign(static_cast<std::size_t>(out.h) * out.w * out.c, 0.0f);
  const float scale = 1.0f / static_cast<float>(p * p);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      float* dst = &out.v[(static_cast<std::size_t>(y) * out.w + x) * out.c];
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          const float* src =
              &in.v[(static_cast<std::size_t>(y * p + dy) * in.w + (x * p + dx)) * in.c];
          for (int c = 0; c < in.c; ++c) dst[c] += src[c];
        }
      }
      for (int c = 0; c < out.c; ++c) dst[c] *= scale;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Backbone b) {
  for (const auto& [value, name] : kBackbones)
    if (value == b) return name;
  return "?";
}

Backbone parse_backbone(std::string_view name) {
  for (const auto& [value, n] : kBackbones)
    if (n == name) return value;
  fail(Errc::invalid_argument, "unknown backbone '" + std::string(name) + "'");
}

BackboneSpec vgg19_spec() {
  return {Backbone::vgg19, "block5_conv4 (last convolution before the classifier)", 512, 224};
}

BackboneSpec resnet50_spec() {
  return {Backbone::resnet50, "conv5_block3_out (before global average pooling)", 2048, 224};
}

BackboneSpec inceptionv3_spec() {
  return {Backbone::inceptionv3, "mixed10 (before global average pooling)", 2048, 299};
}

BackboneSpec vgg19_fr_spec() { return {Backbone::vgg19, "block5_conv4", 512, 224}; }

BackboneSpec synthetic_spec(int k) { return {Backbone::synthetic, "stage3_relu_pool", k, 0}; }

BackboneSpec spec_for(Backbone b, int synthetic_k) {
  switch (b) {
    case Backbone::vgg19: return vgg19_spec();
    case Backbone::resnet50: return resnet50_spec();
    case Backbone::inceptionv3: return inceptionv3_spec();
    case Backbone::synthetic: return synthetic_spec(synthetic_k);
  }
  return synthetic_spec(synthetic_k);
}

FeatureMap features_for_image(const Frame& image, const ImageFeatureProvider& provider) {
  require(!image.empty(), Errc::invalid_argument, "empty image");
  FeatureMap map = provider.features(image);
  require(map.k() == provider.spec().k, Errc::shape_mismatch,
          "provider returned " + std::to_string(map.k()) + " channels, backbone declares " +
              std::to_string(provider.spec().k));
  return map;
}

SyntheticProvider::SyntheticProvider(std::uint64_t seed, int k, int downscale, bool with_bias)
    : spec_(synthetic_spec(k)), seed_(seed), downscale_(downscale), with_bias_(with_bias) {
  require(k >= 1, Errc::invalid_argument, "synthetic provider needs k >= 1");
  require(downscale >= 1, Errc::invalid_argument, "synthetic provider needs downscale >= 1");
  const auto pools = pooling_factors(downscale);
  const std::array<int, 3> widths{8, 16, k};
  Rng rng(seed);
  int in_channels = Frame::kChannels;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    Stage& stage = stages_[s];
    stage.in_channels = in_channels;
    stage.out_channels = widths[s];
    stage.pool = pools[s];
    const int fan_in = 9 * in_channels;
    const double limit = std::sqrt(6.0 / fan_in);
    stage.weights.resize(static_cast<std::size_t>(stage.out_channels) * fan_in);
    for (auto& w : stage.weights) w = static_cast<float>(rng.uniform(-limit, limit));
    if (with_bias_) {
      stage.bias.resize(static_cast<std::size_t>(stage.out_channels));
      for (auto& b : stage.bias) b = static_cast<float>(rng.uniform(-0.1, 0.1));
    }
    in_channels = stage.out_channels;
  }
}

FeatureMap SyntheticProvider::features(const Frame& image) const {
  require(image.height() >= downscale_ && image.width() >= downscale_, Errc::shape_mismatch,
          "image smaller than the synthetic provider's downscale factor");
  Activation a{image.height(), image.width(), Frame::kChannels,
               std::vector<float>(image.samples().size())};
  // Per-channel mean removal keeps the flat component from swamping the first
  // layer and maps an all-zero image to all-zero features.
  std::array<double, Frame::kChannels> channel_mean{};
  const auto samples = image.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) channel_mean[i % Frame::kChannels] += samples[i];
  for (auto& m : channel_mean) m /= static_cast<double>(image.pixel_count());
  for (std::size_t i = 0; i < samples.size(); ++i)
    a.v[i] = static_cast<float>((samples[i] - channel_mean[i % Frame::kChannels]) / 255.0);
  for (const auto& stage : stages_)
    a = average_pool(conv3x3_relu(a, stage.out_channels, stage.weights, stage.bias), stage.pool);
  return FeatureMap(a.h, a.w, a.c, std::move(a.v));
}

std::string SyntheticProvider::preprocessing() const {
  std::ostringstream os;
  os << "synthetic seed=" << seed_ << " k=" << spec_.k << " downscale=" << downscale_
     << " bias=" << (with_bias_ ? "yes" : "no") << "; per-channel mean removed, scaled by 1/255, no resize";
  return os.str();
}

std::unique_ptr<ImageFeatureProvider> synthetic_provider(std::uint64_t seed, int k, int downscale) {
  return std::make_unique<SyntheticProvider>(seed, k, downscale);
}

FeatureFileProvider::FeatureFileProvider(const std::filesystem::path& path, BackboneSpec expected)
    : spec_(std::move(expected)) {
  require(std::filesystem::exists(path), Errc::provider_unavailable,
          "feature file not found: " + path.string());
  maps_ = read_feature_file(path);
  for (const auto& m : maps_)
    require(m.k() == spec_.k, Errc::shape_mismatch,
            path.string() + " declares k=" + std::to_string(m.k()) + " but backbone " +
                std::string(to_string(spec_.name)) + " expects k=" + std::to_string(spec_.k));
}

const FeatureMap& FeatureFileProvider::map(std::size_t index) const {
  require(index < maps_.size(), Errc::invalid_argument,
          "feature map index " + std::to_string(index) + " out of range (" +
              std::to_string(maps_.size()) + " stored)");
  return maps_[index];
}

std::vector<double> ssa(const FeatureMap& map) {
  std::vector<double> out(static_cast<std::size_t>(map.k()), 0.0);
  for (std::size_t cell = 0; cell < map.cells(); ++cell) {
    const auto v = map.cell(cell);
    for (std::size_t c = 0; c < v.size(); ++c) out[c] += v[c];
  }
  const double n = static_cast<double>(map.cells());
  for (auto& x : out) x /= n;
  return out;
}

}  // namespace pvqa

#include "pvqa/synthetic_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "pvqa/error.hpp"
#include "pvqa/image_io.hpp"
#include "pvqa/rng.hpp"

namespace pvqa {

namespace {

struct Wave {
  double fx = 0.0, fy = 0.0;
  std::array<double, 3> amplitude{};
  std::array<double, 3> phase{};

  double at(double x, double y, std::size_t c) const {
    return amplitude[c] * std::sin(2.0 * std::numbers::pi * (fx * x + fy * y) + phase[c]);
  }
};

// A coarse colour layout plus a fine texture whose strength follows a smooth
// envelope, so scenes mix detailed and flat regions the way natural frames do.
struct Texture {
  std::array<double, 3> base{};
  std::array<Wave, 3> layout;
  std::array<Wave, 6> detail;
  std::array<Wave, 2> envelope;

  double value(double x, double y, int c) const {
    const auto ch = static_cast<std::size_t>(c);
    double v = base[ch];
    for (const auto& w : layout) v += w.at(x, y, ch);
    double e = 0.5;
    for (const auto& w : envelope) e += w.at(x, y, 0);
    e = std::clamp(e, 0.0, 1.0);
    double d = 0.0;
    for (const auto& w : detail) d += w.at(x, y, ch);
    return v + e * d;
  }
};

Wave random_wave(Rng& rng, double min_period, double max_period) {
  Wave w;
  const double period = rng.uniform(min_period, max_period);
  const double angle = rng.uniform(0.0, std::numbers::pi);
  w.fx = std::cos(angle) / period;
  w.fy = std::sin(angle) / period;
  for (auto& a : w.amplitude) a = rng.uniform(0.5, 1.0);
  for (auto& p : w.phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return w;
}

// Rescales a group of waves to a common per-channel RMS so that videos differ
// in pattern but not in overall contrast.
template <std::size_t N>
void normalise(std::array<Wave, N>& waves, double rms) {
  for (std::size_t c = 0; c < 3; ++c) {
    double power = 0.0;
    for (const auto& w : waves) power += 0.5 * w.amplitude[c] * w.amplitude[c];
    for (auto& w : waves) w.amplitude[c] *= rms / std::sqrt(power);
  }
}

Texture random_texture(Rng& rng, double min_period, double max_period) {
  Texture t;
  for (auto& b : t.base) b = rng.uniform(110.0, 145.0);
  for (auto& w : t.layout) w = random_wave(rng, 4.0 * max_period, 8.0 * max_period);
  for (auto& w : t.detail) w = random_wave(rng, min_period, max_period);
  for (auto& w : t.envelope) w = random_wave(rng, 2.0 * max_period, 5.0 * max_period);
  normalise(t.layout, 25.0);
  normalise(t.detail, 36.0);
  normalise(t.envelope, 0.45);
  return t;
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Frame render(const Texture& t, int height, int width, double dx, double dy) {
  Frame f(height, width);
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j)
      for (int c = 0; c < Frame::kChannels; ++c) f.at(i, j, c) = to_u8(t.value(j + dx, i + dy, c));
  return f;
}

int mirror(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

constexpr int kCompass[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

constexpr std::array kDatasets{SourceDataset::bair,  SourceDataset::bdd100k, SourceDataset::caltech,
                               SourceDataset::kitti, SourceDataset::kth,     SourceDataset::msr,
                               SourceDataset::penn,  SourceDataset::push,    SourceDataset::ucf101};

}  // namespace

Frame gaussian_blur(const Frame& frame, double sigma) {
  if (sigma <= 0.0) return frame;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * t * t / (sigma * sigma));
    taps[static_cast<std::size_t>(t + radius)] = v;
    sum += v;
  }
  for (auto& v : taps) v /= sum;

  const int h = frame.height(), w = frame.width(), ch = Frame::kChannels;
  std::vector<double> rows(frame.samples().size());
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t)
          acc += taps[static_cast<std::size_t>(t + radius)] * frame.at(i, mirror(j + t, w), c);
        rows[(static_cast<std::size_t>(i) * w + j) * ch + c] = acc;
      }
  Frame out(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t)
          acc += taps[static_cast<std::size_t>(t + radius)] *
                 rows[(static_cast<std::size_t>(mirror(i + t, h)) * w + j) * ch + c];
        out.at(i, j, c) = to_u8(acc);
      }
  return out;
}

std::vector<SyntheticVideo> make_synthetic_videos(int count, std::uint64_t seed,
                                                  const SyntheticOptions& o) {
  require(count >= 1, Errc::invalid_argument, "need at least one synthetic video");
  require(o.min_period > 0.0 && o.min_period <= o.max_period, Errc::invalid_argument,
          "texture periods must satisfy 0 < min <= max");
  require(o.pan_step >= 0, Errc::invalid_argument, "pan step must be non-negative");
  require(o.height >= 1 && o.width >= 1 && o.n_context >= 1 && o.n_predicted >= 1,
          Errc::invalid_argument, "synthetic video dimensions must be positive");
  Rng rng(seed);
  std::vector<SyntheticVideo> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int v = 0; v < count; ++v) {
    const Texture tex = random_texture(rng, o.min_period, o.max_period);
    const int direction = static_cast<int>(rng.index(8));
    const int pan_x = kCompass[static_cast<std::size_t>(direction)][0] * o.pan_step;
    const int pan_y = kCompass[static_cast<std::size_t>(direction)][1] * o.pan_step;
    const int period = 2 + static_cast<int>(rng.index(5));
    const int phase = static_cast<int>(rng.index(static_cast<std::uint64_t>(period)));
    const double blur = rng.uniform();
    const double noise = rng.normal(0.0, o.mos_noise);

    SyntheticVideo sv;
    sv.blur = blur;
    VideoRecord& r = sv.record;
    char id[32];
    std::snprintf(id, sizeof id, "syn%04d", v);
    r.id = id;
    r.n_context = o.n_context;
    r.n_predicted = o.n_predicted;
    r.dataset = kDatasets[static_cast<std::size_t>(v) % kDatasets.size()];
    r.predictor = "synthetic-blur";
    r.distortion_tags = {Distortion::blur};
    r.mos = std::clamp(100.0 - o.mos_slope * blur + noise, 0.0, 100.0);
    for (int n = 0; n < r.n_frames(); ++n) {
      const int steps = ((n + phase) / period) % 2;
      Frame truth = render(tex, o.height, o.width, pan_x * steps, pan_y * steps);
      if (n < o.n_context) {
        r.frames.push_back(truth);
      } else {
        const double progress = static_cast<double>(n - o.n_context + 1) / o.n_predicted;
        r.frames.push_back(gaussian_blur(truth, blur * o.max_sigma * progress));
      }
      r.reference.push_back(std::move(truth));
    }
    out.push_back(std::move(sv));
  }
  return out;
}

std::filesystem::path write_synthetic_dataset(std::span<const SyntheticVideo> videos,
                                              const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  DatasetManifest manifest;
  for (const auto& sv : videos) {
    const VideoRecord& r = sv.record;
    const fs::path vdir = dir / r.id;
    fs::create_directories(vdir);
    ManifestEntry e;
    e.id = r.id;
    e.n_context = r.n_context;
    e.n_predicted = r.n_predicted;
    e.dataset = r.dataset;
    e.predictor = r.predictor;
    e.distortion_tags = r.distortion_tags;
    e.is_stochastic_model = r.is_stochastic_model;
    e.mos = r.mos;
    char name[32];
    for (std::size_t n = 0; n < r.frames.size(); ++n) {
      std::snprintf(name, sizeof name, "frame_%03zu.png", n);
      write_image(r.frames[n], vdir / name);
      e.frame_paths.push_back(vdir / name);
    }
    for (std::size_t n = 0; n < r.reference.size(); ++n) {
      std::snprintf(name, sizeof name, "ref_%03zu.png", n);
      write_image(r.reference[n], vdir / name);
      e.reference_paths.push_back(vdir / name);
    }
    manifest.entries.push_back(std::move(e));
  }
  const fs::path path = dir / "manifest.json";
  save_manifest(manifest, path);
  return path;
}

}  // namespace pvqa

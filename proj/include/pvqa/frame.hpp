#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pvqa {

// An 8-bit RGB image, row-major, channel-last.
class Frame {
 public:
  static constexpr int kChannels = 3;

  Frame() = default;
  Frame(int height, int width);
  Frame(int height, int width, std::vector<std::uint8_t> samples);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const { return height_ == 0; }

  std::uint8_t at(int row, int col, int ch) const { return samples_[offset(row, col, ch)]; }
  std::uint8_t& at(int row, int col, int ch) { return samples_[offset(row, col, ch)]; }

  std::span<const std::uint8_t> samples() const { return samples_; }
  std::span<std::uint8_t> samples() { return samples_; }

  bool same_shape(const Frame& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t offset(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * kChannels + ch;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> samples_;
};

// One image's backbone activations: an h x w grid of k-channel vectors,
// stored [row][col][channel].
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int h, int w, int k);
  FeatureMap(int h, int w, int k, std::vector<float> values);

  int h() const { return h_; }
  int w() const { return w_; }
  int k() const { return k_; }
  std::size_t cells() const { return static_cast<std::size_t>(h_) * static_cast<std::size_t>(w_); }

  float at(int i, int j, int c) const { return values_[offset(i, j, c)]; }
  float& at(int i, int j, int c) { return values_[offset(i, j, c)]; }

  // Channel vector at a cell; cell = i * w + j.
  std::span<const float> cell(std::size_t cell) const {
    return std::span<const float>(values_).subspan(cell * k_, k_);
  }
  std::span<float> cell(std::size_t cell) {
    return std::span<float>(values_).subspan(cell * k_, k_);
  }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  bool same_shape(const FeatureMap& other) const {
    return h_ == other.h_ && w_ == other.w_ && k_ == other.k_;
  }

  // True when every value is finite.
  bool finite() const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t offset(int i, int j, int c) const {
    return (static_cast<std::size_t>(i) * w_ + j) * k_ + c;
  }

  int h_ = 0;
  int w_ = 0;
  int k_ = 0;
  std::vector<float> values_;
};

}  // namespace pvqa

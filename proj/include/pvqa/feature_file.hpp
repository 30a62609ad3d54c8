#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvqa/frame.hpp"

namespace pvqa {

// PVQF layout, all integers unsigned 32-bit little-endian:
//   0..3 "PVQF" | 4..7 version (1) | 8..11 n_maps | 12..15 h | 16..19 w | 20..23 k
//   then n_maps*h*w*k little-endian float32 in [map][row][col][channel] order.
// No padding and no trailer.
inline constexpr std::uint32_t kPvqfVersion = 1;
inline constexpr std::size_t kPvqfHeaderBytes = 24;

std::vector<std::uint8_t> encode_feature_maps(std::span<const FeatureMap> maps);
std::vector<FeatureMap> decode_feature_maps(std::span<const std::uint8_t> bytes);

void write_feature_file(std::span<const FeatureMap> maps, const std::filesystem::path& path);
std::vector<FeatureMap> read_feature_file(const std::filesystem::path& path);

// Text metadata stored next to a PVQF file (same basename, ".meta"), one
// "key: value" per line.
struct FeatureSidecar {
  std::string backbone;
  std::string tap_point;
  std::string preprocessing;
  std::string exporter_version;
  std::optional<std::uint32_t> crc32;  // of the PVQF file bytes
  std::map<std::string, std::string> extra;
};

std::filesystem::path sidecar_path(const std::filesystem::path& feature_file);
void write_sidecar(const FeatureSidecar& meta, const std::filesystem::path& path);
FeatureSidecar read_sidecar(const std::filesystem::path& path);

}  // namespace pvqa

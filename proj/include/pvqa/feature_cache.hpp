#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pvqa/feature_provider.hpp"
#include "pvqa/quality_model.hpp"
#include "pvqa/video.hpp"

namespace pvqa {

// Written to the exporter_version field of sidecars produced by this library.
inline constexpr std::string_view kToolkitVersion = "pvqa 1.0.0";

// Which per-video PVQF files a cache holds. File names are
// <id>.frames.pvqf, <id>.rfd.pvqf and <id>.reference.pvqf, each with a
// .meta sidecar.
enum class CacheKind { frames, rfd, reference };

std::string_view to_string(CacheKind kind);
std::filesystem::path cache_path(const std::filesystem::path& dir, std::string_view id,
                                 CacheKind kind);

enum class CacheAction { written, skipped, rewritten };

struct CacheOutcome {
  CacheKind kind = CacheKind::frames;
  std::filesystem::path path;
  CacheAction action = CacheAction::written;
};

// A cached file is reused when its sidecar names the same backbone, tap and
// preprocessing and its CRC-32 matches the file. Otherwise the maps are
// extracted again and a warning explains why.
std::vector<CacheOutcome> cache_video_features(const ManifestEntry& entry,
                                               const ImageFeatureProvider& provider,
                                               const std::filesystem::path& dir,
                                               std::span<const CacheKind> kinds, int jobs = 1);

// True when `path` holds a PVQF file whose sidecar matches `provider` and the
// recorded checksum. `reason` explains a false result.
bool cache_entry_valid(const std::filesystem::path& path, const ImageFeatureProvider& provider,
                       std::string* reason = nullptr);

// Reads cached maps, checking the checksum and channel count.
std::vector<FeatureMap> read_cached_maps(const std::filesystem::path& dir, std::string_view id,
                                         CacheKind kind, const BackboneSpec& backbone);

// MapsLoader over a cache directory for the given feature set.
MapsLoader cache_loader(const std::filesystem::path& dir, const BackboneSpec& backbone,
                        FeatureSet set);

}  // namespace pvqa

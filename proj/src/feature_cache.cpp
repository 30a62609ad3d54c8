#include "pvqa/feature_cache.hpp"

#include "pvqa/byte_io.hpp"
#include "pvqa/error.hpp"
#include "pvqa/feature_file.hpp"
#include "pvqa/image_io.hpp"
#include "pvqa/log.hpp"
#include "pvqa/parallel.hpp"
#include "pvqa/rfd.hpp"

namespace pvqa {

namespace fs = std::filesystem;

namespace {

FeatureSidecar sidecar_for(const ImageFeatureProvider& provider, const ManifestEntry& entry,
                           CacheKind kind, std::uint32_t crc) {
  FeatureSidecar meta;
  meta.backbone = std::string(to_string(provider.spec().name));
  meta.tap_point = provider.spec().tap_point;
  meta.preprocessing = provider.preprocessing();
  meta.exporter_version = std::string(kToolkitVersion);
  meta.crc32 = crc;
  meta.extra["video_id"] = entry.id;
  meta.extra["content"] = std::string(to_string(kind));
  return meta;
}

std::vector<Frame> images_for(const ManifestEntry& entry, CacheKind kind) {
  const auto& paths = kind == CacheKind::reference ? entry.reference_paths : entry.frame_paths;
  require(!paths.empty(), Errc::validation, entry.id + ": no reference frames listed");
  std::vector<Frame> frames;
  frames.reserve(paths.size());
  for (const auto& p : paths) frames.push_back(read_image(p));
  if (kind != CacheKind::rfd) return frames;
  return rfd_images(frames);
}

}  // namespace

std::string_view to_string(CacheKind kind) {
  switch (kind) {
    case CacheKind::frames: return "frames";
    case CacheKind::rfd: return "rfd";
    case CacheKind::reference: return "reference";
  }
  return "?";
}

fs::path cache_path(const fs::path& dir, std::string_view id, CacheKind kind) {
  return dir / (std::string(id) + "." + std::string(to_string(kind)) + ".pvqf");
}

bool cache_entry_valid(const fs::path& path, const ImageFeatureProvider& provider,
                       std::string* reason) {
  const auto why = [&](std::string r) {
    if (reason) *reason = std::move(r);
    return false;
  };
  const fs::path meta_path = sidecar_path(path);
  if (!fs::exists(path)) return why("missing");
  if (!fs::exists(meta_path)) return why("sidecar missing");
  FeatureSidecar meta;
  try {
    meta = read_sidecar(meta_path);
  } catch (const Error& e) {
    return why(std::string("unreadable sidecar: ") + e.what());
  }
  if (meta.backbone != to_string(provider.spec().name) ||
      meta.tap_point != provider.spec().tap_point ||
      meta.preprocessing != provider.preprocessing())
    return why("extracted with a different backbone or preprocessing");
  if (!meta.crc32) return why("sidecar has no checksum");
  if (detail::crc32(detail::read_file_bytes(path.string())) != *meta.crc32)
    return why("checksum mismatch");
  return true;
}

std::vector<CacheOutcome> cache_video_features(const ManifestEntry& entry,
                                               const ImageFeatureProvider& provider,
                                               const fs::path& dir,
                                               std::span<const CacheKind> kinds, int jobs) {
  fs::create_directories(dir);
  std::vector<CacheOutcome> out;
  for (CacheKind kind : kinds) {
    CacheOutcome o{kind, cache_path(dir, entry.id, kind), CacheAction::written};
    if (kind == CacheKind::reference && entry.reference_paths.empty()) continue;
    if (fs::exists(o.path)) {
      std::string reason;
      if (cache_entry_valid(o.path, provider, &reason)) {
        o.action = CacheAction::skipped;
        out.push_back(std::move(o));
        continue;
      }
      log::warn(o.path.string() + ": " + reason + "; extracting again");
      o.action = CacheAction::rewritten;
    }
    const auto images = images_for(entry, kind);
    std::vector<FeatureMap> maps(images.size());
    parallel_for(images.size(), jobs,
                 [&](std::size_t i) { maps[i] = features_for_image(images[i], provider); });
    const auto bytes = encode_feature_maps(maps);
    // Sidecar first: a crash between the two writes leaves a checksum that
    // does not match, which the next run repairs.
    write_sidecar(sidecar_for(provider, entry, kind, detail::crc32(bytes)), sidecar_path(o.path));
    detail::write_file_bytes(o.path.string(), bytes);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<FeatureMap> read_cached_maps(const fs::path& dir, std::string_view id, CacheKind kind,
                                         const BackboneSpec& backbone) {
  const fs::path path = cache_path(dir, id, kind);
  require(fs::exists(path), Errc::provider_unavailable,
          "no cached features at " + path.string() + " (run the features command first)");
  const auto bytes = detail::read_file_bytes(path.string());
  const fs::path meta_path = sidecar_path(path);
  if (fs::exists(meta_path)) {
    const auto meta = read_sidecar(meta_path);
    require(!meta.crc32 || *meta.crc32 == detail::crc32(bytes), Errc::checksum_mismatch,
            path.string() + ": checksum does not match its sidecar");
    require(meta.backbone.empty() || meta.backbone == to_string(backbone.name),
            Errc::validation,
            path.string() + " holds " + meta.backbone + " features, expected " +
                std::string(to_string(backbone.name)));
  }
  auto maps = decode_feature_maps(bytes);
  for (const auto& m : maps)
    require(m.k() == backbone.k, Errc::shape_mismatch,
            path.string() + " declares k=" + std::to_string(m.k()) + " but the backbone expects k=" +
                std::to_string(backbone.k));
  return maps;
}

MapsLoader cache_loader(const fs::path& dir, const BackboneSpec& backbone, FeatureSet set) {
  return [dir, backbone, set](const ManifestEntry& entry) {
    VideoFeatureMaps maps;
    if (uses_frame_maps(set)) {
      maps.frames = read_cached_maps(dir, entry.id, CacheKind::frames, backbone);
      require(static_cast<int>(maps.frames.size()) == entry.n_context + entry.n_predicted,
              Errc::validation, entry.id + ": cached frame maps do not match the frame count");
    }
    if (uses_rfd_maps(set)) {
      maps.rfd = read_cached_maps(dir, entry.id, CacheKind::rfd, backbone);
      require(static_cast<int>(maps.rfd.size()) == entry.n_context + entry.n_predicted - 1,
              Errc::validation, entry.id + ": cached RFD maps do not match the frame count");
    }
    return maps;
  };
}

}  // namespace pvqa

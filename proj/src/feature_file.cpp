#include "pvqa/feature_file.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pvqa/byte_io.hpp"
#include "pvqa/error.hpp"

namespace pvqa {

namespace fs = std::filesystem;

std::vector<std::uint8_t> encode_feature_maps(std::span<const FeatureMap> maps) {
  int h = 0, w = 0, k = 0;
  if (!maps.empty()) {
    h = maps.front().h();
    w = maps.front().w();
    k = maps.front().k();
  }
  for (const auto& m : maps)
    require(m.h() == h && m.w() == w && m.k() == k, Errc::shape_mismatch,
            "feature maps in one file must share (h, w, k)");

  detail::ByteWriter out;
  out.raw("PVQF");
  out.u32(kPvqfVersion);
  out.u32(static_cast<std::uint32_t>(maps.size()));
  out.u32(static_cast<std::uint32_t>(h));
  out.u32(static_cast<std::uint32_t>(w));
  out.u32(static_cast<std::uint32_t>(k));
  out.bytes().reserve(kPvqfHeaderBytes + maps.size() * static_cast<std::size_t>(h) * w * k * 4);
  for (const auto& m : maps)
    for (float v : m.values()) out.f32(v);
  return std::move(out.bytes());
}

std::vector<FeatureMap> decode_feature_maps(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes);
  require(bytes.size() >= 4, Errc::truncated, "feature file shorter than its magic");
  require(in.raw(4) == "PVQF", Errc::bad_magic, "not a PVQF feature file");
  require(bytes.size() >= kPvqfHeaderBytes, Errc::truncated, "feature file header truncated");
  const std::uint32_t version = in.u32();
  require(version == kPvqfVersion, Errc::unsupported_version,
          "unsupported PVQF version " + std::to_string(version));
  const std::uint32_t n = in.u32();
  const std::uint32_t h = in.u32();
  const std::uint32_t w = in.u32();
  const std::uint32_t k = in.u32();
  if (n == 0) {
    require(in.remaining() == 0, Errc::parse_error, "trailing bytes after empty PVQF header");
    return {};
  }
  require(h >= 1 && w >= 1 && k >= 1, Errc::parse_error, "PVQF header has a zero dimension");
  const std::size_t per_map = static_cast<std::size_t>(h) * w * k;
  require(per_map <= std::numeric_limits<std::size_t>::max() / 4 / n, Errc::parse_error,
          "PVQF dimensions overflow");
  const std::size_t payload = per_map * n * 4;
  require(in.remaining() >= payload, Errc::truncated,
          "PVQF payload truncated: expected " + std::to_string(payload) + " bytes, found " +
              std::to_string(in.remaining()));
  require(in.remaining() == payload, Errc::parse_error, "trailing bytes after PVQF payload");

  std::vector<FeatureMap> maps;
  maps.reserve(n);
  for (std::uint32_t m = 0; m < n; ++m) {
    std::vector<float> values(per_map);
    for (auto& v : values) v = in.f32();
    maps.emplace_back(static_cast<int>(h), static_cast<int>(w), static_cast<int>(k),
                      std::move(values));
  }
  return maps;
}

void write_feature_file(std::span<const FeatureMap> maps, const fs::path& path) {
  const auto bytes = encode_feature_maps(maps);
  detail::write_file_bytes(path.string(), bytes);
}

std::vector<FeatureMap> read_feature_file(const fs::path& path) {
  return decode_feature_maps(detail::read_file_bytes(path.string()));
}

fs::path sidecar_path(const fs::path& feature_file) {
  fs::path p = feature_file;
  p.replace_extension(".meta");
  return p;
}

void write_sidecar(const FeatureSidecar& meta, const fs::path& path) {
  std::ostringstream out;
  out << "backbone: " << meta.backbone << '\n';
  out << "tap_point: " << meta.tap_point << '\n';
  out << "preprocessing: " << meta.preprocessing << '\n';
  out << "exporter_version: " << meta.exporter_version << '\n';
  if (meta.crc32)
    out << "crc32: " << std::hex << std::setw(8) << std::setfill('0') << *meta.crc32 << std::dec
        << '\n';
  for (const auto& [key, value] : meta.extra) out << key << ": " << value << '\n';
  const auto text = out.str();
  detail::write_file_bytes(
      path.string(),
      std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

FeatureSidecar read_sidecar(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::io_failure, "cannot open sidecar " + path.string());
  FeatureSidecar meta;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    require(colon != std::string::npos, Errc::parse_error,
            path.string() + ": malformed sidecar line '" + line + "'");
    std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    if (key == "backbone") meta.backbone = value;
    else if (key == "tap_point") meta.tap_point = value;
    else if (key == "preprocessing") meta.preprocessing = value;
    else if (key == "exporter_version") meta.exporter_version = value;
    else if (key == "crc32") {
      try {
        meta.crc32 = static_cast<std::uint32_t>(std::stoul(value, nullptr, 16));
      } catch (const std::exception&) {
        fail(Errc::parse_error, path.string() + ": bad crc32 '" + value + "'");
      }
    } else {
      meta.extra[key] = value;
    }
  }
  return meta;
}

}  // namespace pvqa

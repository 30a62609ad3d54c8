#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pvqa/frame.hpp"

namespace pvqa {

enum class SourceDataset { bair, bdd100k, caltech, kitti, kth, msr, penn, push, ucf101 };
enum class Distortion { blur, shape, disappearance, color, natural };

std::string_view to_string(SourceDataset d);
std::string_view to_string(Distortion d);
SourceDataset parse_dataset(std::string_view name);
Distortion parse_distortion(std::string_view name);

// A predicted (or natural) video with its study metadata. `reference` holds
// the ground-truth future when one is available; only full-reference
// baselines use it.
struct VideoRecord {
  std::string id;
  std::vector<Frame> frames;
  int n_context = 4;
  int n_predicted = 16;
  SourceDataset dataset = SourceDataset::bair;
  std::string predictor;
  std::set<Distortion> distortion_tags;
  bool is_stochastic_model = false;
  std::optional<double> mos;
  std::vector<Frame> reference;

  int n_frames() const { return n_context + n_predicted; }
};

// Throws Errc::validation when the record breaks the frame-count or frame-shape
// invariants.
void validate(const VideoRecord& video);

struct ManifestEntry {
  std::string id;
  std::vector<std::filesystem::path> frame_paths;
  std::vector<std::filesystem::path> reference_paths;
  int n_context = 4;
  int n_predicted = 16;
  SourceDataset dataset = SourceDataset::bair;
  std::string predictor;
  std::set<Distortion> distortion_tags;
  bool is_stochastic_model = false;
  std::optional<double> mos;
};

struct DatasetManifest {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(std::string_view id) const;
  std::vector<std::string> ids() const;
};

// Parses and validates a JSON manifest. Relative frame paths resolve against
// the manifest's directory. With `check_files` false the frame files are not
// probed (used when only cached features are needed).
DatasetManifest load_manifest(const std::filesystem::path& path, bool check_files = true);
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                               bool check_files = true);

// Paths are written relative to the manifest's directory when possible.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Reads the frames of an entry (and of its reference, if listed).
VideoRecord load_video(const ManifestEntry& entry);

}  // namespace pvqa

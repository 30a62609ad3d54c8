#include "pvqa/video.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "pvqa/error.hpp"
#include "pvqa/image_io.hpp"

namespace pvqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<SourceDataset, std::string_view>, 9> kDatasets{{
    {SourceDataset::bair, "BAIR"},
    {SourceDataset::bdd100k, "BDD100K"},
    {SourceDataset::caltech, "Caltech"},
    {SourceDataset::kitti, "KITTI"},
    {SourceDataset::kth, "KTH"},
    {SourceDataset::msr, "MSR"},
    {SourceDataset::penn, "PENN"},
    {SourceDataset::push, "PUSH"},
    {SourceDataset::ucf101, "UCF101"},
}};

constexpr std::array<std::pair<Distortion, std::string_view>, 5> kDistortions{{
    {Distortion::blur, "blur"},
    {Distortion::shape, "shape"},
    {Distortion::disappearance, "disappearance"},
    {Distortion::color, "color"},
    {Distortion::natural, "natural"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string entry_context(std::size_t index, const std::string& id) {
  return "manifest entry " + std::to_string(index) + (id.empty() ? "" : " ('" + id + "')");
}

ManifestEntry parse_entry(const json& j, std::size_t index, const fs::path& base_dir,
                          bool check_files) {
  ManifestEntry e;
  const auto ctx = [&] { return entry_context(index, e.id); };
  try {
    e.id = j.at("id").get<std::string>();
    for (const auto& p : j.at("frames")) e.frame_paths.push_back(base_dir / p.get<std::string>());
    if (j.contains("reference_frames"))
      for (const auto& p : j.at("reference_frames"))
        e.reference_paths.push_back(base_dir / p.get<std::string>());
    e.n_context = j.at("n_context").get<int>();
    e.n_predicted = j.at("n_predicted").get<int>();
    e.dataset = parse_dataset(j.at("dataset").get<std::string>());
    e.predictor = j.value("predictor", std::string{});
    if (j.contains("distortion_tags"))
      for (const auto& t : j.at("distortion_tags"))
        e.distortion_tags.insert(parse_distortion(t.get<std::string>()));
    e.is_stochastic_model = j.value("is_stochastic_model", false);
    if (j.contains("mos") && !j.at("mos").is_null()) e.mos = j.at("mos").get<double>();
  } catch (const json::exception& ex) {
    fail(Errc::parse_error, ctx() + ": " + ex.what());
  } catch (const Error& ex) {
    fail(Errc::validation, ctx() + ": " + ex.what());
  }

  require(!e.id.empty(), Errc::validation, ctx() + ": empty id");
  require(e.n_context >= 1 && e.n_predicted >= 1, Errc::validation,
          ctx() + ": n_context and n_predicted must be >= 1");
  const auto n = static_cast<std::size_t>(e.n_context + e.n_predicted);
  require(e.frame_paths.size() == n, Errc::validation,
          ctx() + ": expected " + std::to_string(n) + " frames (n_context + n_predicted), got " +
              std::to_string(e.frame_paths.size()));
  require(e.reference_paths.empty() || e.reference_paths.size() == n, Errc::validation,
          ctx() + ": reference_frames must list " + std::to_string(n) + " frames");
  if (e.mos)
    require(*e.mos >= 0.0 && *e.mos <= 100.0, Errc::validation, ctx() + ": mos outside [0,100]");
  if (check_files) {
    for (const auto* paths : {&e.frame_paths, &e.reference_paths})
      for (const auto& p : *paths)
        require(fs::exists(p), Errc::validation, ctx() + ": missing frame file " + p.string());
  }
  return e;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  if (base.empty()) return p.generic_string();
  auto rel = p.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

}  // namespace

std::string_view to_string(SourceDataset d) {
  for (const auto& [value, name] : kDatasets)
    if (value == d) return name;
  return "?";
}

std::string_view to_string(Distortion d) {
  for (const auto& [value, name] : kDistortions)
    if (value == d) return name;
  return "?";
}

SourceDataset parse_dataset(std::string_view name) {
  for (const auto& [value, n] : kDatasets)
    if (iequals(n, name)) return value;
  fail(Errc::validation, "unknown dataset '" + std::string(name) + "'");
}

Distortion parse_distortion(std::string_view name) {
  for (const auto& [value, n] : kDistortions)
    if (iequals(n, name)) return value;
  fail(Errc::validation, "unknown distortion tag '" + std::string(name) + "'");
}

void validate(const VideoRecord& video) {
  require(video.n_context >= 1 && video.n_predicted >= 1, Errc::validation,
          video.id + ": n_context and n_predicted must be >= 1");
  const auto n = static_cast<std::size_t>(video.n_frames());
  require(video.frames.size() == n, Errc::validation,
          video.id + ": frame count " + std::to_string(video.frames.size()) +
              " != n_context + n_predicted = " + std::to_string(n));
  for (const auto& f : video.frames)
    require(f.same_shape(video.frames.front()), Errc::validation,
            video.id + ": frames differ in size");
  if (!video.reference.empty()) {
    require(video.reference.size() == n, Errc::validation,
            video.id + ": reference frame count mismatch");
    for (const auto& f : video.reference)
      require(f.same_shape(video.frames.front()), Errc::validation,
              video.id + ": reference frames differ in size from the video");
  }
  if (video.mos)
    require(*video.mos >= 0.0 && *video.mos <= 100.0, Errc::validation,
            video.id + ": mos outside [0,100]");
}

const ManifestEntry* DatasetManifest::find(std::string_view id) const {
  for (const auto& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

std::vector<std::string> DatasetManifest::ids() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.id);
  return out;
}

DatasetManifest parse_manifest(std::string_view text, const fs::path& base_dir,
                               bool check_files) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& ex) {
    fail(Errc::parse_error, std::string("manifest is not valid JSON: ") + ex.what());
  }
  require(root.is_object(), Errc::parse_error, "manifest root must be an object");

  DatasetManifest manifest;
  try {
    manifest.schema_version = root.at("schema_version").get<int>();
  } catch (const json::exception& ex) {
    fail(Errc::parse_error, std::string("manifest schema_version: ") + ex.what());
  }
  require(manifest.schema_version == DatasetManifest::kSchemaVersion, Errc::unsupported_version,
          "unsupported manifest schema_version " + std::to_string(manifest.schema_version));

  const auto it = root.find("entries");
  require(it != root.end() && it->is_array(), Errc::parse_error,
          "manifest must contain an 'entries' list");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < it->size(); ++i) {
    auto entry = parse_entry((*it)[i], i, base_dir, check_files);
    require(seen.insert(entry.id).second, Errc::validation, "duplicate id '" + entry.id + "'");
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path, bool check_files) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::io_failure, "cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path(), check_files);
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = path.parent_path();
  json root;
  root["schema_version"] = manifest.schema_version;
  root["entries"] = json::array();
  for (const auto& e : manifest.entries) {
    json j;
    j["id"] = e.id;
    j["frames"] = json::array();
    for (const auto& p : e.frame_paths) j["frames"].push_back(relative_to(p, base));
    if (!e.reference_paths.empty()) {
      j["reference_frames"] = json::array();
      for (const auto& p : e.reference_paths) j["reference_frames"].push_back(relative_to(p, base));
    }
    j["n_context"] = e.n_context;
    j["n_predicted"] = e.n_predicted;
    j["dataset"] = to_string(e.dataset);
    j["predictor"] = e.predictor;
    j["distortion_tags"] = json::array();
    for (auto t : e.distortion_tags) j["distortion_tags"].push_back(to_string(t));
    j["is_stochastic_model"] = e.is_stochastic_model;
    if (e.mos) j["mos"] = *e.mos;
    root["entries"].push_back(std::move(j));
  }
  std::ofstream out(path);
  require(static_cast<bool>(out), Errc::io_failure, "cannot write manifest " + path.string());
  out << root.dump(2) << '\n';
  require(static_cast<bool>(out), Errc::io_failure, "failed writing manifest " + path.string());
}

VideoRecord load_video(const ManifestEntry& entry) {
  VideoRecord v;
  v.id = entry.id;
  v.n_context = entry.n_context;
  v.n_predicted = entry.n_predicted;
  v.dataset = entry.dataset;
  v.predictor = entry.predictor;
  v.distortion_tags = entry.distortion_tags;
  v.is_stochastic_model = entry.is_stochastic_model;
  v.mos = entry.mos;
  v.frames.reserve(entry.frame_paths.size());
  for (const auto& p : entry.frame_paths) v.frames.push_back(read_image(p));
  for (const auto& p : entry.reference_paths) v.reference.push_back(read_image(p));
  validate(v);
  return v;
}

}  // namespace pvqa

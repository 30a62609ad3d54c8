#include "pvqa/quality_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pvqa/byte_io.hpp"
#include "pvqa/error.hpp"
#include "pvqa/feature_file.hpp"
#include "pvqa/mcs.hpp"
#include "pvqa/parallel.hpp"
#include "pvqa/rfd.hpp"

namespace pvqa {

namespace {

constexpr std::array<std::pair<FeatureSet, std::string_view>, 5> kSets{{
    {FeatureSet::mcs, "mcs"},
    {FeatureSet::rfd, "rfd"},
    {FeatureSet::ssa, "ssa"},
    {FeatureSet::mcs_rfd, "mcs+rfd"},
    {FeatureSet::ssa_rfd, "ssa+rfd"},
}};

std::vector<double> ssa_video_features(std::span<const FeatureMap> maps) {
  std::vector<double> out;
  for (const auto& m : maps) {
    const auto v = ssa(m);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

int common_k(const VideoFeatureMaps& maps) {
  if (!maps.frames.empty()) return maps.frames.front().k();
  if (!maps.rfd.empty()) return maps.rfd.front().k();
  return 0;
}

}  // namespace

std::string_view to_string(FeatureSet s) {
  for (const auto& [value, name] : kSets)
    if (value == s) return name;
  return "?";
}

FeatureSet parse_feature_set(std::string_view name) {
  for (const auto& [value, n] : kSets)
    if (n == name) return value;
  fail(Errc::invalid_argument, "unknown feature set '" + std::string(name) + "'");
}

bool uses_frame_maps(FeatureSet s) { return s != FeatureSet::rfd; }

bool uses_rfd_maps(FeatureSet s) {
  return s == FeatureSet::rfd || s == FeatureSet::mcs_rfd || s == FeatureSet::ssa_rfd;
}

std::size_t feature_length(FeatureSet s, int k, int n_context, int n_predicted) {
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t n = static_cast<std::size_t>(n_context + n_predicted);
  const std::size_t np = static_cast<std::size_t>(n_predicted);
  switch (s) {
    case FeatureSet::mcs: return kk * np;
    case FeatureSet::rfd: return kk * (n - 1);
    case FeatureSet::ssa: return kk * n;
    case FeatureSet::mcs_rfd: return kk * (n + np - 1);
    case FeatureSet::ssa_rfd: return kk * (2 * n - 1);
  }
  return 0;
}

VideoFeatureMaps extract_feature_maps(const VideoRecord& video,
                                      const ImageFeatureProvider& provider, bool frame_maps,
                                      bool rfd_maps, int jobs) {
  validate(video);
  VideoFeatureMaps out;
  const std::size_t n = video.frames.size();
  if (frame_maps) out.frames.resize(n);
  if (rfd_maps) out.rfd.resize(n - 1);
  const std::size_t tasks = (frame_maps ? n : 0) + (rfd_maps ? n - 1 : 0);
  parallel_for(tasks, jobs, [&](std::size_t t) {
    if (frame_maps && t < n) {
      out.frames[t] = features_for_image(video.frames[t], provider);
    } else {
      const std::size_t d = frame_maps ? t - n : t;
      out.rfd[d] = features_for_image(
          rescaled_frame_difference(video.frames[d], video.frames[d + 1]), provider);
    }
  });
  return out;
}

std::vector<double> assemble_features(const VideoFeatureMaps& maps, int n_context, FeatureSet set,
                                      std::optional<int> mcs_window) {
  std::vector<double> out;
  if (uses_frame_maps(set)) {
    require(!maps.frames.empty(), Errc::insufficient_data,
            std::string(to_string(set)) + " features need per-frame maps");
    const auto head = set == FeatureSet::mcs || set == FeatureSet::mcs_rfd
                          ? mcs_video_features(maps.frames, n_context, mcs_window)
                          : ssa_video_features(maps.frames);
    out.insert(out.end(), head.begin(), head.end());
  }
  if (uses_rfd_maps(set)) {
    require(!maps.rfd.empty(), Errc::insufficient_data,
            std::string(to_string(set)) + " features need RFD maps");
    if (!maps.frames.empty())
      require(maps.rfd.size() + 1 == maps.frames.size(), Errc::validation,
              "RFD map count must be one less than the frame map count");
    const auto tail = rfd_features_from_maps(maps.rfd);
    out.insert(out.end(), tail.begin(), tail.end());
  }
  return out;
}

std::vector<double> assemble_features(const VideoRecord& video,
                                      const ImageFeatureProvider& provider, FeatureSet set) {
  const auto maps = extract_feature_maps(video, provider, uses_frame_maps(set), uses_rfd_maps(set));
  auto out = assemble_features(maps, video.n_context, set);
  require(out.size() == feature_length(set, provider.spec().k, video.n_context, video.n_predicted),
          Errc::shape_mismatch, "assembled feature length does not match the feature set");
  return out;
}

double QualityModel::predict(std::span<const double> features) const {
  const Eigen::Map<const Eigen::VectorXd> row(features.data(),
                                              static_cast<Eigen::Index>(features.size()));
  return reg.predict(pca_transform(pca, Eigen::VectorXd(row)));
}

Eigen::VectorXd QualityModel::predict(const Eigen::MatrixXd& features) const {
  return reg.predict(pca_transform(pca, features));
}

QualityModel fit_quality_model(const Eigen::MatrixXd& features, const Eigen::VectorXd& mos,
                               int k_prime, const BackboneSpec& backbone,
                               const FeatureConfig& config) {
  require(features.rows() == mos.size(), Errc::shape_mismatch,
          "one MOS value per training video is required");
  require(features.rows() >= 2, Errc::insufficient_data, "training needs at least 2 videos");
  require(mos.allFinite(), Errc::validation, "every training video needs a MOS");
  QualityModel model;
  model.backbone = backbone;
  model.config = config;
  model.pca = pca_fit(features, k_prime);
  model.reg = linreg_fit(pca_transform(model.pca, features), mos);
  return model;
}

std::optional<std::size_t> FeatureTable::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return i;
  return std::nullopt;
}

std::map<FeatureSet, FeatureTable> build_feature_tables(const DatasetManifest& manifest,
                                                        const MapsLoader& load_maps,
                                                        const BackboneSpec& backbone,
                                                        std::span<const FeatureSet> sets,
                                                        int jobs) {
  require(!manifest.entries.empty(), Errc::insufficient_data, "manifest has no entries");
  require(!sets.empty(), Errc::invalid_argument, "no feature set requested");
  const int n_context = manifest.entries.front().n_context;
  const int n_predicted = manifest.entries.front().n_predicted;
  for (const auto& e : manifest.entries)
    require(e.n_context == n_context && e.n_predicted == n_predicted, Errc::validation,
            "all videos must share n_context and n_predicted ('" + e.id + "' differs)");

  const std::size_t n = manifest.entries.size();
  std::map<FeatureSet, FeatureTable> tables;
  for (FeatureSet s : sets) {
    FeatureTable& t = tables[s];
    t.ids = manifest.ids();
    t.backbone = backbone;
    t.config = {n_context, n_predicted, s};
    const auto d = feature_length(s, backbone.k, n_context, n_predicted);
    t.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    t.mos.resize(static_cast<Eigen::Index>(n));
  }
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    const VideoFeatureMaps maps = load_maps(entry);
    require(common_k(maps) == backbone.k, Errc::shape_mismatch,
            entry.id + ": feature maps have k=" + std::to_string(common_k(maps)) +
                ", backbone expects " + std::to_string(backbone.k));
    for (FeatureSet s : sets) {
      FeatureTable& t = tables.at(s);
      const auto v = assemble_features(maps, n_context, s);
      require(static_cast<Eigen::Index>(v.size()) == t.x.cols(), Errc::shape_mismatch,
              entry.id + ": assembled " + std::to_string(v.size()) + " features, expected " +
                  std::to_string(t.x.cols()));
      t.x.row(static_cast<Eigen::Index>(i)) =
          Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      t.mos(static_cast<Eigen::Index>(i)) =
          entry.mos ? *entry.mos : std::numeric_limits<double>::quiet_NaN();
    }
  });
  return tables;
}

MapsLoader provider_loader(const ImageFeatureProvider& provider, FeatureSet set) {
  return [&provider, set](const ManifestEntry& entry) {
    return extract_feature_maps(load_video(entry), provider, uses_frame_maps(set),
                                uses_rfd_maps(set));
  };
}

QualityModel train(const FeatureTable& table, std::span<const std::size_t> rows, int k_prime) {
  require(rows.size() >= 2, Errc::insufficient_data, "training needs at least 2 videos");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), table.x.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] < table.size(), Errc::invalid_argument, "training row out of range");
    const auto src = static_cast<Eigen::Index>(rows[r]);
    require(std::isfinite(table.mos(src)), Errc::validation,
            "training video '" + table.ids[rows[r]] + "' has no MOS");
    x.row(static_cast<Eigen::Index>(r)) = table.x.row(src);
    y(static_cast<Eigen::Index>(r)) = table.mos(src);
  }
  return fit_quality_model(x, y, k_prime, table.backbone, table.config);
}

QualityModel train(const DatasetManifest& manifest, std::span<const std::string> ids,
                   const ImageFeatureProvider& provider, int k_prime, FeatureSet set, int jobs) {
  DatasetManifest subset;
  subset.schema_version = manifest.schema_version;
  for (const auto& id : ids) {
    const ManifestEntry* e = manifest.find(id);
    require(e != nullptr, Errc::validation, "unknown training id '" + id + "'");
    require(e->mos.has_value(), Errc::validation, "training video '" + id + "' has no MOS");
    subset.entries.push_back(*e);
  }
  const std::array<FeatureSet, 1> sets{set};
  const auto tables =
      build_feature_tables(subset, provider_loader(provider, set), provider.spec(), sets, jobs);
  const FeatureTable& table = tables.at(set);
  std::vector<std::size_t> rows(table.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return train(table, rows, k_prime);
}

double predict(const QualityModel& model, const VideoFeatureMaps& maps) {
  const auto v = assemble_features(maps, model.config.n_context, model.config.feature_set);
  require(static_cast<int>(v.size()) == model.pca.dim(), Errc::validation,
          "video features (" + std::to_string(v.size()) + ") do not match the model (" +
              std::to_string(model.pca.dim()) + ")");
  return model.predict(v);
}

double predict(const QualityModel& model, const VideoRecord& video,
               const ImageFeatureProvider& provider) {
  require(provider.spec() == model.backbone, Errc::validation,
          "provider backbone does not match the model's backbone");
  require(video.n_context == model.config.n_context &&
              video.n_predicted == model.config.n_predicted,
          Errc::validation,
          video.id + ": frame counts do not match the model's configuration");
  const auto set = model.config.feature_set;
  return predict(model, extract_feature_maps(video, provider, uses_frame_maps(set),
                                             uses_rfd_maps(set)));
}

std::vector<std::uint8_t> encode_model(const QualityModel& model) {
  detail::ByteWriter payload;
  payload.i32(model.config.n_context);
  payload.i32(model.config.n_predicted);
  payload.u8(static_cast<std::uint8_t>(model.config.feature_set));
  payload.u8(static_cast<std::uint8_t>(model.backbone.name));
  payload.str(model.backbone.tap_point);
  payload.i32(model.backbone.k);
  payload.i32(model.backbone.input_side);

  const auto& pca = model.pca;
  payload.i32(pca.requested_k);
  payload.u64(static_cast<std::uint64_t>(pca.mean.size()));
  payload.u64(static_cast<std::uint64_t>(pca.basis.cols()));
  for (Eigen::Index i = 0; i < pca.mean.size(); ++i) payload.f64(pca.mean(i));
  for (Eigen::Index c = 0; c < pca.basis.cols(); ++c)
    for (Eigen::Index r = 0; r < pca.basis.rows(); ++r) payload.f64(pca.basis(r, c));
  for (Eigen::Index i = 0; i < pca.explained_variance.size(); ++i)
    payload.f64(pca.explained_variance(i));

  payload.u64(static_cast<std::uint64_t>(model.reg.weights.size()));
  for (Eigen::Index i = 0; i < model.reg.weights.size(); ++i) payload.f64(model.reg.weights(i));
  payload.f64(model.reg.intercept);

  detail::ByteWriter out;
  out.raw("PVQM");
  out.u32(kModelVersion);
  out.u64(payload.bytes().size());
  out.u32(detail::crc32(payload.bytes()));
  out.bytes().insert(out.bytes().end(), payload.bytes().begin(), payload.bytes().end());
  return std::move(out.bytes());
}

QualityModel decode_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader header(bytes);
  require(bytes.size() >= 4, Errc::truncated, "model file shorter than its magic");
  require(header.raw(4) == "PVQM", Errc::bad_magic, "not a PVQM model file");
  const std::uint32_t version = header.u32();
  require(version == kModelVersion, Errc::unsupported_version,
          "model file version " + std::to_string(version) + " is not supported (expected " +
              std::to_string(kModelVersion) + ")");
  const std::uint64_t size = header.u64();
  const std::uint32_t crc = header.u32();
  require(header.remaining() == size, Errc::truncated, "model payload size mismatch");
  const auto body = bytes.subspan(header.position());
  require(detail::crc32(body) == crc, Errc::checksum_mismatch, "model file checksum mismatch");

  detail::ByteReader in(body);
  QualityModel model;
  model.config.n_context = in.i32();
  model.config.n_predicted = in.i32();
  const auto set = in.u8();
  require(set <= static_cast<std::uint8_t>(FeatureSet::ssa_rfd), Errc::parse_error,
          "model file: bad feature set");
  model.config.feature_set = static_cast<FeatureSet>(set);
  const auto backbone = in.u8();
  require(backbone <= static_cast<std::uint8_t>(Backbone::synthetic), Errc::parse_error,
          "model file: bad backbone");
  model.backbone.name = static_cast<Backbone>(backbone);
  model.backbone.tap_point = in.str();
  model.backbone.k = in.i32();
  model.backbone.input_side = in.i32();

  auto& pca = model.pca;
  pca.requested_k = in.i32();
  const auto d = static_cast<Eigen::Index>(in.u64());
  const auto kp = static_cast<Eigen::Index>(in.u64());
  // mean, basis, variances, weight count, weights, intercept
  const auto ud = static_cast<std::uint64_t>(d), ukp = static_cast<std::uint64_t>(kp);
  require(d >= 0 && kp >= 0 && ud < (1ull << 32) && ukp < (1ull << 32) &&
              (ud * (ukp + 1) + 2 * ukp + 2) * 8 <= in.remaining(),
          Errc::truncated, "model file: PCA block truncated");
  pca.mean.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) pca.mean(i) = in.f64();
  pca.basis.resize(d, kp);
  for (Eigen::Index c = 0; c < kp; ++c)
    for (Eigen::Index r = 0; r < d; ++r) pca.basis(r, c) = in.f64();
  pca.explained_variance.resize(kp);
  for (Eigen::Index i = 0; i < kp; ++i) pca.explained_variance(i) = in.f64();

  const auto nw = static_cast<Eigen::Index>(in.u64());
  require(nw == kp, Errc::parse_error, "model file: regression size differs from PCA size");
  model.reg.weights.resize(nw);
  for (Eigen::Index i = 0; i < nw; ++i) model.reg.weights(i) = in.f64();
  model.reg.intercept = in.f64();
  require(in.remaining() == 0, Errc::parse_error, "model file: trailing bytes");
  return model;
}

void save_model(const QualityModel& model, const std::filesystem::path& path) {
  detail::write_file_bytes(path.string(), encode_model(model));
}

QualityModel load_model(const std::filesystem::path& path) {
  return decode_model(detail::read_file_bytes(path.string()));
}

}  // namespace pvqa

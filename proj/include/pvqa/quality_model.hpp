#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pvqa/feature_provider.hpp"
#include "pvqa/pca.hpp"
#include "pvqa/video.hpp"

namespace pvqa {

enum class FeatureSet { mcs, rfd, ssa, mcs_rfd, ssa_rfd };

std::string_view to_string(FeatureSet s);  // "mcs", "rfd", "ssa", "mcs+rfd", "ssa+rfd"
FeatureSet parse_feature_set(std::string_view name);

bool uses_frame_maps(FeatureSet s);
bool uses_rfd_maps(FeatureSet s);

// Length of the assembled vector:
//   mcs k*Np, rfd k*(N-1), ssa k*N, mcs+rfd k*(N+Np-1), ssa+rfd k*(2N-1).
std::size_t feature_length(FeatureSet s, int k, int n_context, int n_predicted);

// Backbone maps of one video: one per frame and one per RFD image. Either list
// may be empty when the feature set does not need it.
struct VideoFeatureMaps {
  std::vector<FeatureMap> frames;
  std::vector<FeatureMap> rfd;
};

VideoFeatureMaps extract_feature_maps(const VideoRecord& video,
                                      const ImageFeatureProvider& provider, bool frame_maps = true,
                                      bool rfd_maps = true, int jobs = 1);

// Concatenates the requested blocks, MCS (or SSA) first and RFD second.
std::vector<double> assemble_features(const VideoFeatureMaps& maps, int n_context, FeatureSet set,
                                      std::optional<int> mcs_window = std::nullopt);
std::vector<double> assemble_features(const VideoRecord& video,
                                      const ImageFeatureProvider& provider, FeatureSet set);

struct FeatureConfig {
  int n_context = 4;
  int n_predicted = 16;
  FeatureSet feature_set = FeatureSet::mcs_rfd;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

// PCA followed by linear regression on the projected features.
struct QualityModel {
  PcaModel pca;
  LinearModel reg;
  BackboneSpec backbone;
  FeatureConfig config;

  double predict(std::span<const double> features) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
};

QualityModel fit_quality_model(const Eigen::MatrixXd& features, const Eigen::VectorXd& mos,
                               int k_prime, const BackboneSpec& backbone,
                               const FeatureConfig& config);

// Assembled features of many videos, one row per id.
struct FeatureTable {
  std::vector<std::string> ids;
  Eigen::MatrixXd x;
  Eigen::VectorXd mos;  // NaN where a record has no MOS
  BackboneSpec backbone;
  FeatureConfig config;

  std::size_t size() const { return ids.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;
};

using MapsLoader = std::function<VideoFeatureMaps(const ManifestEntry&)>;

// Builds one table per requested feature set from a single pass over the
// manifest. All entries must share n_context and n_predicted.
std::map<FeatureSet, FeatureTable> build_feature_tables(const DatasetManifest& manifest,
                                                        const MapsLoader& load_maps,
                                                        const BackboneSpec& backbone,
                                                        std::span<const FeatureSet> sets,
                                                        int jobs = 1);

// Loader that decodes frames and runs `provider` on them.
MapsLoader provider_loader(const ImageFeatureProvider& provider, FeatureSet set);

QualityModel train(const FeatureTable& table, std::span<const std::size_t> rows, int k_prime);
QualityModel train(const DatasetManifest& manifest, std::span<const std::string> ids,
                   const ImageFeatureProvider& provider, int k_prime, FeatureSet set,
                   int jobs = 1);

// Unclamped quality score of one video.
double predict(const QualityModel& model, const VideoRecord& video,
               const ImageFeatureProvider& provider);
double predict(const QualityModel& model, const VideoFeatureMaps& maps);

// Binary model file: "PVQM", version, payload size, CRC-32 of the payload,
// then the configuration, backbone, PCA and regression parameters.
inline constexpr std::uint32_t kModelVersion = 1;

std::vector<std::uint8_t> encode_model(const QualityModel& model);
QualityModel decode_model(std::span<const std::uint8_t> bytes);
void save_model(const QualityModel& model, const std::filesystem::path& path);
QualityModel load_model(const std::filesystem::path& path);

}  // namespace pvqa

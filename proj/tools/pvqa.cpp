// Command-line front end: feature caching, training, prediction, benchmarks,
// ablation sweeps and subjective-score processing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvqa/byte_io.hpp"
#include "pvqa/error.hpp"
#include "pvqa/evaluation.hpp"
#include "pvqa/feature_cache.hpp"
#include "pvqa/feature_provider.hpp"
#include "pvqa/fr_metrics.hpp"
#include "pvqa/log.hpp"
#include "pvqa/onnx_provider.hpp"
#include "pvqa/parallel.hpp"
#include "pvqa/quality_model.hpp"
#include "pvqa/stats.hpp"
#include "pvqa/subjective.hpp"
#include "pvqa/synthetic_data.hpp"
#include "pvqa/video.hpp"

namespace fs = std::filesystem;
using namespace pvqa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return kExitUsage;
    case Errc::degenerate: return kExitNumeric;
    default: return kExitData;
  }
}

// Files created by the running command; removed again if it fails.
class Outputs {
 public:
  void write(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    detail::write_file_bytes(path.string(),
                             {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    created_.push_back(path);
  }
  void track(const fs::path& path) { created_.push_back(path); }
  void discard() {
    std::error_code ec;
    for (const auto& p : created_) fs::remove(p, ec);
    created_.clear();
  }

 private:
  std::vector<fs::path> created_;
};

struct Options {
  std::string manifest;
  std::string features_dir;
  std::string backbone = "synthetic";
  std::string onnx_model;
  int synthetic_k = 64;
  int synthetic_downscale = 8;
  std::uint64_t synthetic_seed = 7;
  std::string model;
  std::string feature_set = "mcs+rfd";
  int k_prime = 240;
  int splits = 100;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;

  // command specific
  std::vector<std::string> metrics{"ours"};
  std::vector<std::string> ids;
  bool reference = false;
  std::string sweep_kind = "k-prime";
  std::vector<double> fractions;
  std::vector<int> k_values;
  int scatter_trials = 10;
  double threshold = 15.0;
  std::string scores;
  std::string rescale = "global";
  int count = 300;
  int pan_step = 8;
};

void add_manifest(CLI::App* c, Options& o, bool required = true) {
  auto* opt = c->add_option("--manifest", o.manifest, "Dataset manifest (JSON)")
                  ->envname("PVQA_MANIFEST");
  if (required) opt->required();
}

void add_backbone(CLI::App* c, Options& o) {
  c->add_option("--features-dir", o.features_dir, "Directory of cached PVQF features")
      ->envname("PVQA_FEATURES_DIR");
  c->add_option("--backbone", o.backbone, "Feature backbone")
      ->check(CLI::IsMember({"vgg19", "resnet50", "inceptionv3", "synthetic"}))
      ->envname("PVQA_BACKBONE");
  c->add_option("--onnx-model", o.onnx_model, "ONNX model truncated at the backbone tap")
      ->envname("PVQA_ONNX_MODEL");
  c->add_option("--synthetic-k", o.synthetic_k, "Channels of the synthetic backbone")
      ->check(CLI::PositiveNumber)
      ->envname("PVQA_SYNTHETIC_K");
  c->add_option("--synthetic-downscale", o.synthetic_downscale,
                "Spatial downscale of the synthetic backbone")
      ->check(CLI::PositiveNumber)
      ->envname("PVQA_SYNTHETIC_DOWNSCALE");
  c->add_option("--synthetic-seed", o.synthetic_seed, "Weight seed of the synthetic backbone")
      ->envname("PVQA_SYNTHETIC_SEED");
}

void add_jobs(CLI::App* c, Options& o) {
  c->add_option("--jobs", o.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->envname("PVQA_JOBS");
}

void add_seed(CLI::App* c, Options& o) {
  c->add_option("--seed", o.seed, "Seed of the random protocol")->required()->envname("PVQA_SEED");
}

void add_feature_set(CLI::App* c, Options& o) {
  c->add_option("--feature-set", o.feature_set, "Features of the learned model")
      ->check(CLI::IsMember({"mcs", "rfd", "ssa", "mcs+rfd", "ssa+rfd"}))
      ->envname("PVQA_FEATURE_SET");
}

void add_k_prime(CLI::App* c, Options& o) {
  c->add_option("--k-prime", o.k_prime, "Principal components kept")
      ->check(CLI::PositiveNumber)
      ->envname("PVQA_K_PRIME");
}

void add_splits(CLI::App* c, Options& o) {
  c->add_option("--splits", o.splits, "Random train/test trials")
      ->check(CLI::PositiveNumber)
      ->envname("PVQA_SPLITS");
  c->add_option("--train-fraction", o.train_fraction, "Training share of each split")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("PVQA_TRAIN_FRACTION");
}

BackboneSpec backbone_spec(const Options& o) {
  const Backbone b = parse_backbone(o.backbone);
  return b == Backbone::synthetic ? synthetic_spec(o.synthetic_k) : spec_for(b);
}

// Provider for on-the-fly extraction; empty when only cached features can be
// used.
std::unique_ptr<ImageFeatureProvider> make_provider(const Options& o) {
  const Backbone b = parse_backbone(o.backbone);
  if (b == Backbone::synthetic)
    return std::make_unique<SyntheticProvider>(o.synthetic_seed, o.synthetic_k,
                                               o.synthetic_downscale);
  if (!o.onnx_model.empty()) return std::make_unique<OnnxProvider>(o.onnx_model, spec_for(b));
  return nullptr;
}

DatasetManifest read_manifest(const Options& o, bool need_frames) {
  return load_manifest(o.manifest, need_frames);
}

// Frame and RFD maps for one video, from the cache when a features directory
// was given, else from the provider.
class MapsSource {
 public:
  explicit MapsSource(const Options& o) : spec_(backbone_spec(o)), provider_(make_provider(o)) {
    if (!o.features_dir.empty()) dir_ = o.features_dir;
    require(dir_ || provider_, Errc::provider_unavailable,
            "backbone " + o.backbone +
                " needs cached features (--features-dir) or an ONNX model (--onnx-model)");
  }

  const BackboneSpec& spec() const { return spec_; }
  const ImageFeatureProvider* provider() const { return provider_.get(); }

  MapsLoader loader(bool frames, bool rfd) const {
    const FeatureSet set = frames && rfd ? FeatureSet::mcs_rfd
                           : frames      ? FeatureSet::mcs
                                         : FeatureSet::rfd;
    if (dir_) return cache_loader(*dir_, spec_, set);
    return provider_loader(*provider_, set);
  }

  std::vector<FeatureMap> reference_maps(const ManifestEntry& e) const {
    if (dir_) return read_cached_maps(*dir_, e.id, CacheKind::reference, spec_);
    const VideoRecord v = load_video(e);
    require(!v.reference.empty(), Errc::validation, e.id + ": no reference frames listed");
    std::vector<FeatureMap> maps;
    for (const auto& f : v.reference) maps.push_back(features_for_image(f, *provider_));
    return maps;
  }

 private:
  BackboneSpec spec_;
  std::unique_ptr<ImageFeatureProvider> provider_;
  std::optional<fs::path> dir_;
};

std::map<FeatureSet, FeatureTable> tables_for(const DatasetManifest& m, const MapsSource& src,
                                              std::span<const FeatureSet> sets, int jobs) {
  bool frames = false, rfd = false;
  for (FeatureSet s : sets) {
    frames = frames || uses_frame_maps(s);
    rfd = rfd || uses_rfd_maps(s);
  }
  return build_feature_tables(m, src.loader(frames, rfd), src.spec(), sets, jobs);
}

std::vector<double> manifest_mos(const DatasetManifest& m) {
  std::vector<double> mos;
  for (const auto& e : m.entries) {
    require(e.mos.has_value(), Errc::validation, "video '" + e.id + "' has no MOS");
    mos.push_back(*e.mos);
  }
  return mos;
}

bool is_feature_set(const std::string& name) {
  try {
    parse_feature_set(name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// ---- commands -------------------------------------------------------------

int cmd_synth(const Options& o, Outputs& out) {
  require(!o.out.empty(), Errc::invalid_argument, "--out directory is required");
  SyntheticOptions so;
  so.pan_step = o.pan_step;
  const auto videos = make_synthetic_videos(o.count, o.seed, so);
  const auto path = write_synthetic_dataset(videos, o.out);
  out.track(path);
  std::cout << path.string() << '\n';
  return kExitOk;
}

int cmd_features(const Options& o) {
  require(!o.features_dir.empty(), Errc::invalid_argument, "--features-dir is required");
  const auto provider = make_provider(o);
  require(provider != nullptr, Errc::provider_unavailable,
          "backbone " + o.backbone + " needs --onnx-model to extract features");
  const DatasetManifest m = read_manifest(o, true);
  std::vector<CacheKind> kinds{CacheKind::frames, CacheKind::rfd};
  if (o.reference) kinds.push_back(CacheKind::reference);

  int written = 0, skipped = 0, rewritten = 0, worst = kExitOk;
  std::vector<std::string> failures;
  for (const auto& e : m.entries) {
    try {
      for (const auto& r : cache_video_features(e, *provider, o.features_dir, kinds, o.jobs)) {
        if (r.action == CacheAction::written) ++written;
        if (r.action == CacheAction::skipped) ++skipped;
        if (r.action == CacheAction::rewritten) ++rewritten;
      }
    } catch (const Error& err) {
      failures.push_back(e.id + ": " + err.what());
      worst = std::max(worst, exit_code(err.code()));
    }
  }
  std::cout << "written " << written << ", skipped " << skipped << ", re-extracted " << rewritten
            << ", failed " << failures.size() << '\n';
  for (const auto& f : failures) std::cerr << "error: " << f << '\n';
  return worst;
}

int cmd_train(const Options& o, Outputs& out) {
  require(!o.model.empty(), Errc::invalid_argument, "--model output path is required");
  const MapsSource src(o);
  const DatasetManifest m = read_manifest(o, o.features_dir.empty());
  const FeatureSet set = parse_feature_set(o.feature_set);
  const std::array sets{set};
  const FeatureTable table = tables_for(m, src, sets, o.jobs).at(set);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (std::isfinite(table.mos(static_cast<Eigen::Index>(i)))) rows.push_back(i);
  require(rows.size() >= 2, Errc::insufficient_data, "fewer than 2 videos have a MOS");
  const QualityModel model = train(table, rows, o.k_prime);
  save_model(model, o.model);
  out.track(o.model);

  std::vector<double> fitted, target;
  for (auto r : rows) {
    const Eigen::VectorXd x = table.x.row(static_cast<Eigen::Index>(r)).transpose();
    fitted.push_back(model.predict(std::span<const double>(x.data(), x.size())));
    target.push_back(table.mos(static_cast<Eigen::Index>(r)));
  }
  const auto s = srocc(fitted, target);
  std::cout << "trained " << to_string(set) << " on " << rows.size() << " videos, K'="
            << model.pca.k_prime() << ", training SROCC "
            << (s ? std::to_string(*s) : std::string("undefined")) << '\n';
  return kExitOk;
}

int cmd_predict(const Options& o) {
  require(!o.model.empty(), Errc::invalid_argument, "--model is required");
  const QualityModel model = load_model(o.model);
  const MapsSource src(o);
  require(src.spec() == model.backbone, Errc::validation,
          "the model was trained on " + std::string(to_string(model.backbone.name)) +
              " features (k=" + std::to_string(model.backbone.k) + ")");
  const DatasetManifest m = read_manifest(o, o.features_dir.empty());
  const FeatureSet set = model.config.feature_set;
  const auto loader = src.loader(uses_frame_maps(set), uses_rfd_maps(set));
  std::vector<const ManifestEntry*> chosen;
  if (o.ids.empty()) {
    for (const auto& e : m.entries) chosen.push_back(&e);
  } else {
    for (const auto& id : o.ids) {
      const ManifestEntry* e = m.find(id);
      require(e != nullptr, Errc::validation, "unknown video id '" + id + "'");
      chosen.push_back(e);
    }
  }
  for (const auto* e : chosen) {
    const double score = predict(model, loader(*e));
    std::printf("%s\t%.6f\n", e->id.c_str(), score);
  }
  return kExitOk;
}

void write_reports(const Options& o, Outputs& out, std::span<const BenchmarkReport> reports,
                   const SplitPlan& plan) {
  const auto tsv = reports_tsv(reports);
  std::cout << tsv;
  if (!o.out.empty()) {
    out.write(o.out + ".tsv", tsv);
    out.write(o.out + ".json", reports_json(reports, plan));
  }
}

int cmd_benchmark(const Options& o, Outputs& out) {
  const MapsSource src(o);
  bool need_frames = o.features_dir.empty();
  std::vector<FeatureSet> sets;
  std::vector<FrMetric> fr;
  for (const auto& name : o.metrics) {
    if (name == "ours" || is_feature_set(name)) {
      const FeatureSet s = parse_feature_set(name == "ours" ? o.feature_set : name);
      if (std::find(sets.begin(), sets.end(), s) == sets.end()) sets.push_back(s);
    } else {
      fr.push_back(parse_fr_metric(name));
      need_frames = need_frames || !needs_features(fr.back());
    }
  }
  const DatasetManifest m = read_manifest(o, need_frames);
  const auto mos = manifest_mos(m);
  const auto ids = m.ids();
  const SplitPlan plan = make_splits(ids, o.seed, o.splits, o.train_fraction);
  const auto tables = sets.empty() ? std::map<FeatureSet, FeatureTable>{}
                                   : tables_for(m, src, sets, o.jobs);

  std::vector<BenchmarkReport> reports;
  for (const auto& name : o.metrics) {
    if (name == "ours" || is_feature_set(name)) {
      const FeatureSet s = parse_feature_set(name == "ours" ? o.feature_set : name);
      auto r = evaluate_trained(tables.at(s), plan, o.k_prime, o.jobs);
      r.name = name;
      reports.push_back(std::move(r));
      continue;
    }
    const FrMetric metric = parse_fr_metric(name);
    std::vector<double> scores(m.entries.size());
    parallel_for(m.entries.size(), o.jobs, [&](std::size_t i) {
      const auto& e = m.entries[i];
      if (needs_features(metric)) {
        const auto maps = src.loader(true, false)(e);
        const auto ref = src.reference_maps(e);
        scores[i] = fr_video_score(metric, maps.frames, ref, e.n_context).aggregate;
      } else {
        scores[i] = fr_video_score(metric, load_video(e)).aggregate;
      }
    });
    reports.push_back(evaluate_untrained(name, scores, mos, plan, o.jobs));
  }
  write_reports(o, out, reports, plan);
  return kExitOk;
}

int cmd_sweep(const Options& o, Outputs& out) {
  const MapsSource src(o);
  const DatasetManifest m = read_manifest(o, o.features_dir.empty());
  const FeatureSet set = parse_feature_set(o.feature_set);
  const std::array sets{set};
  const FeatureTable table = tables_for(m, src, sets, o.jobs).at(set);
  const SplitPlan plan = make_splits(m.ids(), o.seed, o.splits, o.train_fraction);
  std::string tsv;
  if (o.sweep_kind == "training-size") {
    const auto fractions = o.fractions.empty() ? default_training_fractions() : o.fractions;
    tsv = sweep_tsv("train_fraction", sweep_training_size(table, plan, fractions, o.jobs));
  } else {
    const auto values = o.k_values.empty() ? default_k_prime_values() : o.k_values;
    tsv = sweep_tsv("k_prime", sweep_k_prime(table, plan, values, o.jobs));
  }
  std::cout << tsv;
  if (!o.out.empty()) out.write(o.out + ".tsv", tsv);
  return kExitOk;
}

int cmd_scatter(const Options& o, Outputs& out) {
  const MapsSource src(o);
  const DatasetManifest m = read_manifest(o, o.features_dir.empty());
  const std::array sets{FeatureSet::mcs, FeatureSet::rfd, FeatureSet::ssa};
  const auto tables = tables_for(m, src, sets, o.jobs);
  const SplitPlan plan = make_splits(m.ids(), o.seed, o.splits, o.train_fraction);
  std::vector<int> trials;
  for (int t = 0; t < std::min(o.scatter_trials, plan.n_trials()); ++t) trials.push_back(t);
  const ErrorScatter sc = error_scatter(tables.at(FeatureSet::mcs), tables.at(FeatureSet::rfd),
                                        plan, trials, o.k_prime, o.threshold);
  std::ostringstream summary;
  summary << "dcor(ssa, rfd)\t"
          << feature_dependence(tables.at(FeatureSet::ssa), tables.at(FeatureSet::rfd)) << '\n'
          << "dcor(mcs, rfd)\t"
          << feature_dependence(tables.at(FeatureSet::mcs), tables.at(FeatureSet::rfd)) << '\n'
          << "threshold\t" << sc.threshold << '\n'
          << "both_low\t" << sc.both_low << '\n'
          << "mcs_low_rfd_high\t" << sc.only_a_low << '\n'
          << "rfd_low_mcs_high\t" << sc.only_b_low << '\n'
          << "both_high\t" << sc.both_high << '\n';
  std::cout << summary.str();
  if (!o.out.empty()) {
    out.write(o.out + ".summary.tsv", summary.str());
    out.write(o.out + ".points.tsv", scatter_tsv(sc));
  }
  return kExitOk;
}

int cmd_subjective(const Options& o, Outputs& out) {
  require(!o.scores.empty(), Errc::invalid_argument, "--scores is required");
  const SubjectScoreTable table = read_score_table(o.scores);
  const ZScores z = zscore(table);
  for (const auto& [subject, session] : z.degenerate)
    log::warn("subject " + subject + " session " + std::to_string(session) +
              " rated every video the same; dropped");
  const OutlierResult screening = reject_outliers(z);
  const MosTable mos = compute_mos(
      z, screening.inliers, o.rescale == "3sigma" ? Rescale::three_sigma : Rescale::global_range);
  const double consistency = split_half_consistency(z, screening.inliers, o.splits, o.seed);

  std::cout << "subjects " << screening.inliers.size() + screening.outliers.size()
            << ", rejected " << screening.outliers.size();
  for (const auto& s : screening.outliers) std::cout << ' ' << s;
  std::cout << "\nvideos " << mos.videos.size() << "\nsplit-half median PLCC " << consistency
            << '\n';
  if (!o.out.empty()) {
    write_mos_table(mos, o.out);
    out.track(o.out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quality assessment of predicted videos"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Write a synthetic planted-quality dataset");
  synth->add_option("--count", o.count, "Number of videos")->check(CLI::PositiveNumber);
  synth->add_option("--pan-step", o.pan_step, "Camera jitter in pixels")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--out", o.out, "Output directory")->required()->envname("PVQA_OUT");
  add_seed(synth, o);

  auto* features = app.add_subcommand("features", "Extract and cache backbone features");
  add_manifest(features, o);
  add_backbone(features, o);
  add_jobs(features, o);
  features->add_flag("--reference", o.reference, "Also cache reference-frame features");

  auto* train_cmd = app.add_subcommand("train", "Fit a quality model");
  add_manifest(train_cmd, o);
  add_backbone(train_cmd, o);
  add_feature_set(train_cmd, o);
  add_k_prime(train_cmd, o);
  add_jobs(train_cmd, o);
  train_cmd->add_option("--model", o.model, "Output model file")->required()->envname(
      "PVQA_MODEL");

  auto* predict_cmd = app.add_subcommand("predict", "Score videos with a trained model");
  add_manifest(predict_cmd, o);
  add_backbone(predict_cmd, o);
  predict_cmd->add_option("--model", o.model, "Model file")->required()->envname("PVQA_MODEL");
  predict_cmd->add_option("--id", o.ids, "Only these video ids");

  auto* bench = app.add_subcommand("benchmark", "Repeated train/test evaluation");
  add_manifest(bench, o);
  add_backbone(bench, o);
  add_feature_set(bench, o);
  add_k_prime(bench, o);
  add_splits(bench, o);
  add_seed(bench, o);
  add_jobs(bench, o);
  bench->add_option("--metric", o.metrics,
                    "Comma-separated: ours, a feature set, or mse, ssim, msssim, "
                    "gradient-difference, feature-mse, feature-cosine")
      ->delimiter(',');
  bench->add_option("--out", o.out, "Report prefix (writes .tsv and .json)")->envname("PVQA_OUT");

  auto* sweep = app.add_subcommand("sweep", "Training-size or K' ablation");
  add_manifest(sweep, o);
  add_backbone(sweep, o);
  add_feature_set(sweep, o);
  add_splits(sweep, o);
  add_seed(sweep, o);
  add_jobs(sweep, o);
  sweep->add_option("--kind", o.sweep_kind, "What to vary")
      ->check(CLI::IsMember({"training-size", "k-prime"}));
  sweep->add_option("--fractions", o.fractions, "Training fractions")->delimiter(',');
  sweep->add_option("--values", o.k_values, "K' values")->delimiter(',');
  sweep->add_option("--out", o.out, "Report prefix")->envname("PVQA_OUT");

  auto* scatter = app.add_subcommand("scatter", "MCS vs RFD error scatter and feature dependence");
  add_manifest(scatter, o);
  add_backbone(scatter, o);
  add_k_prime(scatter, o);
  add_splits(scatter, o);
  add_seed(scatter, o);
  add_jobs(scatter, o);
  scatter->add_option("--trials", o.scatter_trials, "Trials contributing test samples")
      ->check(CLI::PositiveNumber);
  scatter->add_option("--threshold", o.threshold, "Absolute-error threshold");
  scatter->add_option("--out", o.out, "Output prefix")->envname("PVQA_OUT");

  auto* subj = app.add_subcommand("subjective", "Process raw ratings into MOS");
  subj->add_option("--scores", o.scores, "Ratings table (CSV or TSV)")->required();
  subj->add_option("--rescale", o.rescale, "MOS rescaling")
      ->check(CLI::IsMember({"global", "3sigma"}));
  subj->add_option("--splits", o.splits, "Split-half consistency splits")
      ->check(CLI::PositiveNumber);
  subj->add_option("--out", o.out, "MOS table output (TSV)")->envname("PVQA_OUT");
  add_seed(subj, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Outputs out;
  try {
    int code = kExitOk;
    if (synth->parsed()) code = cmd_synth(o, out);
    else if (features->parsed()) code = cmd_features(o);
    else if (train_cmd->parsed()) code = cmd_train(o, out);
    else if (predict_cmd->parsed()) code = cmd_predict(o);
    else if (bench->parsed()) code = cmd_benchmark(o, out);
    else if (sweep->parsed()) code = cmd_sweep(o, out);
    else if (scatter->parsed()) code = cmd_scatter(o, out);
    else if (subj->parsed()) code = cmd_subjective(o, out);
    if (code != kExitOk) out.discard();
    return code;
  } catch (const Error& e) {
    out.discard();
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    out.discard();
    std::cerr << "error (io_failure): " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    out.discard();
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

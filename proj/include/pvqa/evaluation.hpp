#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvqa/quality_model.hpp"

namespace pvqa {

// Row indices into the id list, kept in permutation order so that prefixes of
// `train` form nested subsets.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct SplitPlan {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::vector<std::string> ids;
  std::vector<Split> trials;

  int n_trials() const { return static_cast<int>(trials.size()); }
};

// Trial t shuffles the ids with Rng(seed + t); the first ceil(fraction * n)
// go to training.
SplitPlan make_splits(std::span<const std::string> ids, std::uint64_t seed, int n_trials = 100,
                      double train_fraction = 0.8);

struct TrialResult {
  std::optional<double> srocc;
  std::optional<double> plcc;
  double rmse = 0.0;

  bool defined() const { return srocc.has_value() && plcc.has_value(); }
};

struct Summary {
  double median = 0.0;
  double stddev = 0.0;
};

// Medians and spreads use |SROCC| and |PLCC|. Trials with an undefined
// correlation are kept in `trials` but left out of every summary.
struct BenchmarkReport {
  std::string name;
  std::vector<TrialResult> trials;
  Summary srocc;
  Summary plcc;
  Summary rmse;
  int excluded = 0;

  static BenchmarkReport summarize(std::string name, std::vector<TrialResult> trials);
};

// Per trial: PCA and regression fitted on the training rows, scored on test.
// The table rows are matched to the plan by id.
BenchmarkReport evaluate_trained(const FeatureTable& table, const SplitPlan& plan, int k_prime,
                                 int jobs = 1);

// Per trial: logistic map fitted on the training portion; PLCC and RMSE of
// the mapped test scores, SROCC of the raw test scores.
BenchmarkReport evaluate_untrained(std::string name, std::span<const double> scores,
                                   std::span<const double> mos, const SplitPlan& plan,
                                   int jobs = 1);

struct SweepPoint {
  double value = 0.0;  // training fraction or K'
  BenchmarkReport report;
};

// Nested training subsets (the first ceil(f * n) ids of each trial's
// permutation) against that trial's fixed test set, with K' equal to the
// subset size.
std::vector<SweepPoint> sweep_training_size(const FeatureTable& table, const SplitPlan& plan,
                                            std::span<const double> fractions, int jobs = 1);
std::vector<double> default_training_fractions();

std::vector<SweepPoint> sweep_k_prime(const FeatureTable& table, const SplitPlan& plan,
                                      std::span<const int> values, int jobs = 1);
std::vector<int> default_k_prime_values();

// Absolute test errors of two single-feature models on the same trials.
struct ErrorPoint {
  int trial = 0;
  std::string id;
  double error_a = 0.0;
  double error_b = 0.0;
};

struct ErrorScatter {
  double threshold = 15.0;
  std::vector<ErrorPoint> points;
  // [a below][b below]: counts with the error at or below the threshold.
  int both_low = 0;
  int only_a_low = 0;
  int only_b_low = 0;
  int both_high = 0;
};

ErrorScatter error_scatter(const FeatureTable& a, const FeatureTable& b, const SplitPlan& plan,
                           std::span<const int> trials, int k_prime, double threshold = 15.0);

// Distance correlation between the feature rows of two tables over their
// common ids.
double feature_dependence(const FeatureTable& a, const FeatureTable& b);

// Reports as a tab-separated table (one row per report) and as JSON with the
// per-trial values.
std::string reports_tsv(std::span<const BenchmarkReport> reports);
std::string reports_json(std::span<const BenchmarkReport> reports, const SplitPlan& plan);
std::string sweep_tsv(std::string_view value_name, std::span<const SweepPoint> points);
std::string scatter_tsv(const ErrorScatter& scatter);

}  // namespace pvqa

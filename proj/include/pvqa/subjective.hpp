#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pvqa {

struct Rating {
  std::string subject;
  int session = 1;
  std::string video;
  double score = 0.0;
};

// Raw ratings on [0, 100], at most one per (subject, session, video).
class SubjectScoreTable {
 public:
  explicit SubjectScoreTable(std::vector<Rating> ratings);
  const std::vector<Rating>& ratings() const { return ratings_; }

 private:
  std::vector<Rating> ratings_;
};

// Delimited text with a header naming subject_id, session, video_id and score
// (comma- or tab-separated, any column order).
SubjectScoreTable read_score_table(const std::filesystem::path& path);

enum class StdDenominator { population, sample };

struct ZScores {
  std::vector<Rating> ratings;  // score holds the z-score
  // (subject, session) groups dropped because their ratings had zero spread.
  std::vector<std::pair<std::string, int>> degenerate;
};

// Standardises each (subject, session) group by its own mean and deviation.
ZScores zscore(const SubjectScoreTable& table,
               StdDenominator denominator = StdDenominator::population);

struct SubjectScreening {
  int p = 0;  // ratings at or above the upper threshold
  int q = 0;  // ratings at or below the lower threshold
  int n = 0;  // ratings considered
  bool rejected = false;
};

struct OutlierResult {
  std::vector<std::string> inliers;
  std::vector<std::string> outliers;
  std::map<std::string, SubjectScreening> screening;
};

// ITU-R BT.500-11 subject screening on z-scores.
OutlierResult reject_outliers(const ZScores& z);

enum class Rescale {
  global_range,  // min z -> 0, max z -> 100 over all inlier ratings
  three_sigma,   // (z + 3) * 100 / 6
};

struct MosEntry {
  std::string video;
  double mos = 0.0;
  int count = 0;
  double std_dev = 0.0;
};

struct MosTable {
  std::vector<MosEntry> videos;  // in order of first appearance
  std::vector<std::string> inliers;
  std::vector<std::string> outliers;
};

MosTable compute_mos(const ZScores& z, const std::vector<std::string>& inliers,
                     Rescale rescale = Rescale::global_range);

// Median PLCC between per-video MOS of two random halves of the inlier
// subjects over `n_splits` seeded splits (split t uses seed + t).
double split_half_consistency(const ZScores& z, const std::vector<std::string>& inliers,
                              int n_splits, std::uint64_t seed);

// video_id, mos, count, std
void write_mos_table(const MosTable& table, const std::filesystem::path& path);

}  // namespace pvqa

#include "pvqa/subjective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "pvqa/error.hpp"
#include "pvqa/rng.hpp"
#include "pvqa/stats.hpp"

namespace pvqa {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(0, 1);
    out.push_back(field);
  }
  return out;
}

// Ratings grouped by video, preserving first-appearance order of videos.
struct ByVideo {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const Rating*>> ratings;
};

ByVideo group_by_video(const std::vector<Rating>& ratings,
                       const std::set<std::string>* subjects = nullptr) {
  ByVideo g;
  for (const auto& r : ratings) {
    if (!g.ratings.contains(r.video)) g.order.push_back(r.video);
    auto& bucket = g.ratings[r.video];
    if (!subjects || subjects->contains(r.subject)) bucket.push_back(&r);
  }
  return g;
}

}  // namespace

SubjectScoreTable::SubjectScoreTable(std::vector<Rating> ratings) : ratings_(std::move(ratings)) {
  std::set<std::tuple<std::string, int, std::string>> seen;
  for (const auto& r : ratings_) {
    require(!r.subject.empty() && !r.video.empty(), Errc::validation,
            "rating with empty subject or video id");
    require(r.session >= 1, Errc::validation, "session numbers start at 1");
    require(std::isfinite(r.score) && r.score >= 0.0 && r.score <= 100.0, Errc::validation,
            "rating by " + r.subject + " for " + r.video + " outside [0,100]");
    require(seen.emplace(r.subject, r.session, r.video).second, Errc::validation,
            "duplicate rating (" + r.subject + ", session " + std::to_string(r.session) + ", " +
                r.video + ")");
  }
}

SubjectScoreTable read_score_table(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::io_failure, "cannot open " + path.string());
  std::string header;
  require(static_cast<bool>(std::getline(in, header)), Errc::parse_error,
          path.string() + ": empty score table");
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const auto columns = split_fields(header, delim);
  const auto column = [&](const std::string& name) {
    const auto it = std::find(columns.begin(), columns.end(), name);
    require(it != columns.end(), Errc::parse_error,
            path.string() + ": header lacks column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  };
  const std::size_t c_subject = column("subject_id");
  const std::size_t c_session = column("session");
  const std::size_t c_video = column("video_id");
  const std::size_t c_score = column("score");

  std::vector<Rating> ratings;
  std::string line;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line, delim);
    require(f.size() == columns.size(), Errc::parse_error,
            path.string() + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(columns.size()) + " fields");
    Rating r;
    r.subject = f[c_subject];
    r.video = f[c_video];
    try {
      r.session = std::stoi(f[c_session]);
      r.score = std::stod(f[c_score]);
    } catch (const std::exception&) {
      fail(Errc::parse_error, path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    ratings.push_back(std::move(r));
  }
  return SubjectScoreTable(std::move(ratings));
}

ZScores zscore(const SubjectScoreTable& table, StdDenominator denominator) {
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> groups;
  const auto& ratings = table.ratings();
  for (std::size_t i = 0; i < ratings.size(); ++i)
    groups[{ratings[i].subject, ratings[i].session}].push_back(i);

  ZScores out;
  std::vector<bool> keep(ratings.size(), false);
  std::vector<double> z(ratings.size(), 0.0);
  for (const auto& [key, members] : groups) {
    if (members.size() < 2) {
      out.degenerate.push_back(key);
      continue;
    }
    double m = 0.0;
    for (auto i : members) m += ratings[i].score;
    m /= static_cast<double>(members.size());
    double ss = 0.0;
    for (auto i : members) ss += (ratings[i].score - m) * (ratings[i].score - m);
    const double n = static_cast<double>(members.size());
    const double sd =
        std::sqrt(ss / (denominator == StdDenominator::population ? n : n - 1.0));
    if (!(sd > 0.0)) {
      out.degenerate.push_back(key);
      continue;
    }
    for (auto i : members) {
      keep[i] = true;
      z[i] = (ratings[i].score - m) / sd;
    }
  }
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    if (!keep[i]) continue;
    Rating r = ratings[i];
    r.score = z[i];
    out.ratings.push_back(std::move(r));
  }
  return out;
}

OutlierResult reject_outliers(const ZScores& z) {
  OutlierResult result;
  for (const auto& r : z.ratings) result.screening[r.subject].n += 1;
  require(result.screening.size() >= 2, Errc::insufficient_data,
          "subject screening needs at least 2 subjects");

  const ByVideo videos = group_by_video(z.ratings);
  for (const auto& video : videos.order) {
    const auto& rs = videos.ratings.at(video);
    if (rs.size() < 2) continue;
    const double n = static_cast<double>(rs.size());
    double m = 0.0;
    for (const auto* r : rs) m += r->score;
    m /= n;
    double m2 = 0.0, m4 = 0.0;
    for (const auto* r : rs) {
      const double d = r->score - m;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    const double s = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m4 /= n;
    if (s <= 1e-12 * (1.0 + std::abs(m))) continue;
    const double kurtosis = m4 / (m2 * m2);
    const double c = (kurtosis >= 2.0 && kurtosis <= 4.0) ? 2.0 : std::sqrt(20.0);
    for (const auto* r : rs) {
      auto& screen = result.screening[r->subject];
      if (r->score >= m + c * s) ++screen.p;
      if (r->score <= m - c * s) ++screen.q;
    }
  }

  for (auto& [subject, screen] : result.screening) {
    const int pq = screen.p + screen.q;
    screen.rejected = screen.n > 0 && pq > 0 &&
                      static_cast<double>(pq) / screen.n > 0.05 &&
                      std::abs(static_cast<double>(screen.p - screen.q) / pq) < 0.3;
    (screen.rejected ? result.outliers : result.inliers).push_back(subject);
  }
  return result;
}

MosTable compute_mos(const ZScores& z, const std::vector<std::string>& inliers, Rescale rescale) {
  const std::set<std::string> keep(inliers.begin(), inliers.end());
  MosTable table;
  table.inliers = inliers;
  std::set<std::string> all_subjects;
  for (const auto& r : z.ratings) all_subjects.insert(r.subject);
  for (const auto& s : all_subjects)
    if (!keep.contains(s)) table.outliers.push_back(s);

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& r : z.ratings) {
    if (!keep.contains(r.subject)) continue;
    lo = any ? std::min(lo, r.score) : r.score;
    hi = any ? std::max(hi, r.score) : r.score;
    any = true;
  }
  require(any, Errc::insufficient_data, "no inlier ratings");
  double scale = 100.0 / 6.0, offset = 3.0;
  if (rescale == Rescale::global_range) {
    require(hi > lo, Errc::degenerate, "all inlier z-scores are equal; cannot rescale");
    scale = 100.0 / (hi - lo);
    offset = -lo;
  }

  const ByVideo videos = group_by_video(z.ratings, &keep);
  for (const auto& video : videos.order) {
    const auto& rs = videos.ratings.at(video);
    require(!rs.empty(), Errc::insufficient_data, "video '" + video + "' has no inlier ratings");
    std::vector<double> scores;
    scores.reserve(rs.size());
    for (const auto* r : rs) scores.push_back((r->score + offset) * scale);
    table.videos.push_back({video, mean(scores), static_cast<int>(scores.size()),
                            sample_stddev(scores)});
  }
  return table;
}

double split_half_consistency(const ZScores& z, const std::vector<std::string>& inliers,
                              int n_splits, std::uint64_t seed) {
  require(inliers.size() >= 4, Errc::insufficient_data,
          "split-half consistency needs at least 4 inlier subjects");
  require(n_splits >= 1, Errc::invalid_argument, "n_splits must be >= 1");
  std::vector<std::string> subjects = inliers;
  std::sort(subjects.begin(), subjects.end());

  std::vector<double> correlations;
  for (int t = 0; t < n_splits; ++t) {
    std::vector<std::string> order = subjects;
    Rng rng(seed + static_cast<std::uint64_t>(t));
    rng.shuffle(order);
    const std::size_t half = order.size() / 2;
    const std::set<std::string> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    const std::set<std::string> second(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
    const ByVideo a = group_by_video(z.ratings, &first);
    const ByVideo b = group_by_video(z.ratings, &second);
    std::vector<double> mos_a, mos_b;
    for (const auto& video : a.order) {
      const auto& ra = a.ratings.at(video);
      const auto& rb = b.ratings.at(video);
      if (ra.empty() || rb.empty()) continue;
      double sa = 0.0, sb = 0.0;
      for (const auto* r : ra) sa += r->score;
      for (const auto* r : rb) sb += r->score;
      mos_a.push_back(sa / static_cast<double>(ra.size()));
      mos_b.push_back(sb / static_cast<double>(rb.size()));
    }
    if (mos_a.size() < 2) continue;
    if (const auto r = plcc(mos_a, mos_b)) correlations.push_back(*r);
  }
  require(!correlations.empty(), Errc::degenerate,
          "split-half consistency undefined: no split produced a defined correlation");
  return median(correlations);
}

void write_mos_table(const MosTable& table, const fs::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), Errc::io_failure, "cannot write " + path.string());
  out << "video_id,mos,count,std\n";
  out.precision(10);
  for (const auto& v : table.videos)
    out << v.video << ',' << v.mos << ',' << v.count << ',' << v.std_dev << '\n';
  require(static_cast<bool>(out), Errc::io_failure, "failed writing " + path.string());
}

}  // namespace pvqa

#include "pvqa/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "pvqa/error.hpp"
#include "pvqa/log.hpp"
#include "pvqa/parallel.hpp"
#include "pvqa/rng.hpp"
#include "pvqa/stats.hpp"

namespace pvqa {

namespace {

std::size_t train_count(std::size_t n, double fraction) {
  // The epsilon keeps 0.8 * 300 at 240 despite rounding in the product.
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

// Table row of every plan id.
std::vector<std::size_t> align_rows(const FeatureTable& table, const SplitPlan& plan) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t r = 0; r < table.size(); ++r) row_of.emplace(table.ids[r], r);
  std::vector<std::size_t> rows(plan.ids.size());
  for (std::size_t i = 0; i < plan.ids.size(); ++i) {
    const auto it = row_of.find(plan.ids[i]);
    require(it != row_of.end(), Errc::validation,
            "split id '" + plan.ids[i] + "' has no feature row");
    require(std::isfinite(table.mos(static_cast<Eigen::Index>(it->second))), Errc::validation,
            "video '" + plan.ids[i] + "' has no MOS");
    rows[i] = it->second;
  }
  return rows;
}

std::vector<std::size_t> to_rows(std::span<const std::size_t> idx,
                                 const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = rows[idx[i]];
  return out;
}

void check_disjoint(const Split& s, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (auto i : s.train) seen[i] = 1;
  for (auto i : s.test) {
    require(!seen[i], Errc::invalid_argument, "split has overlapping train and test ids");
    seen[i] = 1;
  }
}

TrialResult score_trial(std::span<const double> predicted, std::span<const double> target) {
  return {srocc(predicted, target), plcc(predicted, target), rmse(predicted, target)};
}

TrialResult trained_trial(const FeatureTable& table, std::span<const std::size_t> train_rows,
                          std::span<const std::size_t> test_rows, int k_prime) {
  const QualityModel model = train(table, train_rows, k_prime);
  std::vector<double> pred(test_rows.size()), target(test_rows.size());
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(test_rows[i]);
    const Eigen::VectorXd row = table.x.row(r).transpose();
    pred[i] = model.predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    target[i] = table.mos(r);
  }
  return score_trial(pred, target);
}

// Collapses the per-trial rank-clamping warnings into one line per distinct
// message, emitted when the digest goes out of scope.
class WarningDigest {
 public:
  WarningDigest() {
    sink_.emplace([this](const std::string& m) {
      std::lock_guard lock(mutex_);
      auto it = std::find_if(seen_.begin(), seen_.end(), [&](const auto& p) { return p.first == m; });
      if (it == seen_.end())
        seen_.emplace_back(m, 1);
      else
        ++it->second;
    });
  }
  WarningDigest(const WarningDigest&) = delete;
  WarningDigest& operator=(const WarningDigest&) = delete;

  void flush(std::string_view context, int trials) {
    std::lock_guard lock(mutex_);
    for (const auto& [m, count] : seen_)
      deferred_.push_back(std::string(context) + ": " + m + " (" + std::to_string(count) +
                          " of " + std::to_string(trials) + " trials)");
    seen_.clear();
  }

  ~WarningDigest() {
    sink_.reset();
    for (const auto& m : deferred_) log::warn(m);
  }

 private:
  std::mutex mutex_;
  std::vector<std::pair<std::string, int>> seen_;
  std::vector<std::string> deferred_;
  std::optional<log::ScopedSink> sink_;
};

BenchmarkReport trained_report(std::string name, const FeatureTable& table, const SplitPlan& plan,
                               const std::vector<std::size_t>& rows, double fraction, int k_prime,
                               int jobs) {
  std::vector<TrialResult> trials(plan.trials.size());
  WarningDigest digest;
  parallel_for(plan.trials.size(), jobs, [&](std::size_t t) {
    const Split& s = plan.trials[t];
    const auto n_train = fraction >= 1.0 ? s.train.size()
                                         : std::min(s.train.size(),
                                                    train_count(plan.ids.size(), fraction));
    const int k = k_prime > 0 ? k_prime : static_cast<int>(n_train);
    const auto train_rows = to_rows(std::span(s.train).first(n_train), rows);
    const auto test_rows = to_rows(s.test, rows);
    trials[t] = trained_trial(table, train_rows, test_rows, k);
  });
  digest.flush(name, plan.n_trials());
  return BenchmarkReport::summarize(std::move(name), std::move(trials));
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed << v;
  return os.str();
}

}  // namespace

SplitPlan make_splits(std::span<const std::string> ids, std::uint64_t seed, int n_trials,
                      double train_fraction) {
  require(ids.size() >= 5, Errc::insufficient_data, "splitting needs at least 5 ids");
  require(n_trials >= 1, Errc::invalid_argument, "need at least one trial");
  require(train_fraction > 0.0 && train_fraction < 1.0, Errc::invalid_argument,
          "train fraction must lie in (0, 1)");
  std::unordered_set<std::string_view> unique(ids.begin(), ids.end());
  require(unique.size() == ids.size(), Errc::validation, "split ids must be unique");

  SplitPlan plan;
  plan.seed = seed;
  plan.train_fraction = train_fraction;
  plan.ids.assign(ids.begin(), ids.end());
  const std::size_t n = ids.size();
  const std::size_t n_train = std::min(train_count(n, train_fraction), n - 1);
  for (int t = 0; t < n_trials; ++t) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed + static_cast<std::uint64_t>(t));
    rng.shuffle(perm);
    Split s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    check_disjoint(s, n);
    plan.trials.push_back(std::move(s));
  }
  return plan;
}

BenchmarkReport BenchmarkReport::summarize(std::string name, std::vector<TrialResult> trials) {
  BenchmarkReport r;
  r.name = std::move(name);
  std::vector<double> s, p, e;
  for (const auto& t : trials) {
    if (!t.defined()) {
      ++r.excluded;
      continue;
    }
    s.push_back(std::abs(*t.srocc));
    p.push_back(std::abs(*t.plcc));
    e.push_back(t.rmse);
  }
  if (!s.empty()) {
    r.srocc = {median(s), sample_stddev(s)};
    r.plcc = {median(p), sample_stddev(p)};
    r.rmse = {median(e), sample_stddev(e)};
  } else {
    const double nan = std::nan("");
    r.srocc = r.plcc = r.rmse = {nan, nan};
  }
  r.trials = std::move(trials);
  return r;
}

BenchmarkReport evaluate_trained(const FeatureTable& table, const SplitPlan& plan, int k_prime,
                                 int jobs) {
  require(k_prime >= 1, Errc::invalid_argument, "K' must be positive");
  const auto rows = align_rows(table, plan);
  return trained_report(std::string(to_string(table.config.feature_set)), table, plan, rows, 1.0,
                        k_prime, jobs);
}

BenchmarkReport evaluate_untrained(std::string name, std::span<const double> scores,
                                   std::span<const double> mos, const SplitPlan& plan,
                                   int jobs) {
  require(scores.size() == plan.ids.size() && mos.size() == plan.ids.size(),
          Errc::shape_mismatch, "scores and MOS must have one value per split id");
  for (std::size_t i = 0; i < scores.size(); ++i)
    require(std::isfinite(scores[i]) && std::isfinite(mos[i]), Errc::validation,
            "video '" + plan.ids[i] + "' has a non-finite score or MOS");

  std::vector<TrialResult> trials(plan.trials.size());
  parallel_for(plan.trials.size(), jobs, [&](std::size_t t) {
    const Split& s = plan.trials[t];
    std::vector<double> tr_s, tr_m, te_s, te_m;
    for (auto i : s.train) {
      tr_s.push_back(scores[i]);
      tr_m.push_back(mos[i]);
    }
    for (auto i : s.test) {
      te_s.push_back(scores[i]);
      te_m.push_back(mos[i]);
    }
    TrialResult r;
    r.srocc = srocc(te_s, te_m);
    const LogisticMap map = fit_logistic(tr_s, tr_m);
    const auto mapped = map(std::span<const double>(te_s));
    r.plcc = plcc(mapped, te_m);
    r.rmse = rmse(mapped, te_m);
    trials[t] = r;
  });
  return BenchmarkReport::summarize(std::move(name), std::move(trials));
}

std::vector<double> default_training_fractions() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
}

std::vector<int> default_k_prime_values() { return {40, 80, 120, 160, 200, 240}; }

std::vector<SweepPoint> sweep_training_size(const FeatureTable& table, const SplitPlan& plan,
                                            std::span<const double> fractions, int jobs) {
  const auto rows = align_rows(table, plan);
  std::vector<SweepPoint> out;
  for (double f : fractions) {
    require(f > 0.0 && f <= plan.train_fraction + 1e-12, Errc::invalid_argument,
            "sweep fractions must lie in (0, train fraction]");
    const std::string name = std::string(to_string(table.config.feature_set)) + "@" + fmt(f);
    out.push_back({f, trained_report(name, table, plan, rows, f, 0, jobs)});
  }
  return out;
}

std::vector<SweepPoint> sweep_k_prime(const FeatureTable& table, const SplitPlan& plan,
                                      std::span<const int> values, int jobs) {
  const auto rows = align_rows(table, plan);
  std::vector<SweepPoint> out;
  for (int k : values) {
    require(k >= 1, Errc::invalid_argument, "K' must be positive");
    const std::string name =
        std::string(to_string(table.config.feature_set)) + "@k" + std::to_string(k);
    out.push_back({static_cast<double>(k), trained_report(name, table, plan, rows, 1.0, k, jobs)});
  }
  return out;
}

ErrorScatter error_scatter(const FeatureTable& a, const FeatureTable& b, const SplitPlan& plan,
                           std::span<const int> trials, int k_prime, double threshold) {
  const auto rows_a = align_rows(a, plan);
  const auto rows_b = align_rows(b, plan);
  ErrorScatter out;
  out.threshold = threshold;
  WarningDigest digest;
  for (int t : trials) {
    require(t >= 0 && t < plan.n_trials(), Errc::invalid_argument, "scatter trial out of range");
    const Split& s = plan.trials[static_cast<std::size_t>(t)];
    const QualityModel ma = train(a, to_rows(s.train, rows_a), k_prime);
    const QualityModel mb = train(b, to_rows(s.train, rows_b), k_prime);
    for (auto i : s.test) {
      const auto ra = static_cast<Eigen::Index>(rows_a[i]);
      const auto rb = static_cast<Eigen::Index>(rows_b[i]);
      const Eigen::VectorXd xa = a.x.row(ra).transpose();
      const Eigen::VectorXd xb = b.x.row(rb).transpose();
      ErrorPoint p{t, plan.ids[i],
                   std::abs(ma.predict(std::span<const double>(xa.data(), xa.size())) - a.mos(ra)),
                   std::abs(mb.predict(std::span<const double>(xb.data(), xb.size())) - b.mos(rb))};
      const bool low_a = p.error_a <= threshold;
      const bool low_b = p.error_b <= threshold;
      if (low_a && low_b)
        ++out.both_low;
      else if (low_a)
        ++out.only_a_low;
      else if (low_b)
        ++out.only_b_low;
      else
        ++out.both_high;
      out.points.push_back(std::move(p));
    }
  }
  digest.flush("scatter", static_cast<int>(trials.size()));
  return out;
}

double feature_dependence(const FeatureTable& a, const FeatureTable& b) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (std::size_t r = 0; r < a.size(); ++r)
    if (const auto rb = b.index_of(a.ids[r]))
      pairs.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*rb));
  require(pairs.size() >= 2, Errc::insufficient_data,
          "feature tables share fewer than 2 videos");
  Eigen::MatrixXd xa(static_cast<Eigen::Index>(pairs.size()), a.x.cols());
  Eigen::MatrixXd xb(static_cast<Eigen::Index>(pairs.size()), b.x.cols());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    xa.row(static_cast<Eigen::Index>(i)) = a.x.row(pairs[i].first);
    xb.row(static_cast<Eigen::Index>(i)) = b.x.row(pairs[i].second);
  }
  return distance_correlation(xa, xb);
}

std::string reports_tsv(std::span<const BenchmarkReport> reports) {
  std::ostringstream os;
  os << "name\tsrocc\tsrocc_std\tplcc\tplcc_std\trmse\trmse_std\ttrials\texcluded\n";
  for (const auto& r : reports)
    os << r.name << '\t' << fmt(r.srocc.median) << '\t' << fmt(r.srocc.stddev) << '\t'
       << fmt(r.plcc.median) << '\t' << fmt(r.plcc.stddev) << '\t' << fmt(r.rmse.median) << '\t'
       << fmt(r.rmse.stddev) << '\t' << r.trials.size() << '\t' << r.excluded << '\n';
  return os.str();
}

std::string reports_json(std::span<const BenchmarkReport> reports, const SplitPlan& plan) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double>& v) -> json {
    return v ? json(*v) : json(nullptr);
  };
  const auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  json out;
  out["seed"] = plan.seed;
  out["n_trials"] = plan.n_trials();
  out["train_fraction"] = plan.train_fraction;
  out["reports"] = json::array();
  for (const auto& r : reports) {
    json j;
    j["name"] = r.name;
    j["excluded"] = r.excluded;
    for (const auto& [key, s] : {std::pair{"srocc", r.srocc}, std::pair{"plcc", r.plcc},
                                 std::pair{"rmse", r.rmse}})
      j[key] = {{"median", num(s.median)}, {"std", num(s.stddev)}};
    j["trials"] = json::array();
    for (const auto& t : r.trials)
      j["trials"].push_back({{"srocc", opt(t.srocc)}, {"plcc", opt(t.plcc)}, {"rmse", t.rmse}});
    out["reports"].push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

std::string sweep_tsv(std::string_view value_name, std::span<const SweepPoint> points) {
  std::ostringstream os;
  os << value_name << "\tsrocc\tsrocc_std\tplcc\tplcc_std\trmse\trmse_std\texcluded\n";
  for (const auto& p : points)
    os << p.value << '\t' << fmt(p.report.srocc.median) << '\t' << fmt(p.report.srocc.stddev)
       << '\t' << fmt(p.report.plcc.median) << '\t' << fmt(p.report.plcc.stddev) << '\t'
       << fmt(p.report.rmse.median) << '\t' << fmt(p.report.rmse.stddev) << '\t'
       << p.report.excluded << '\n';
  return os.str();
}

std::string scatter_tsv(const ErrorScatter& scatter) {
  std::ostringstream os;
  os << "trial\tid\terror_a\terror_b\n";
  for (const auto& p : scatter.points)
    os << p.trial << '\t' << p.id << '\t' << fmt(p.error_a) << '\t' << fmt(p.error_b) << '\n';
  return os.str();
}

}  // namespace pvqa

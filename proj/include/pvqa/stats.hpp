#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pvqa {

double mean(std::span<const double> x);
// Median of a non-empty sample (midpoint of the two central order statistics
// for even sizes).
double median(std::span<const double> x);
// Standard deviation with the n - 1 denominator; 0 for fewer than 2 values.
double sample_stddev(std::span<const double> x);

// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation. Empty when either input has zero variance.
std::optional<double> plcc(std::span<const double> x, std::span<const double> y);
// Spearman correlation: Pearson correlation of average ranks. Empty when either
// ranking is constant.
std::optional<double> srocc(std::span<const double> x, std::span<const double> y);
double rmse(std::span<const double> x, std::span<const double> y);

// Monotone map from objective scores to MOS:
//   q(s) = (b1 - b2) / (1 + exp(-(s - b3) / |b4|)) + b2,
// or an affine map when the logistic fit did not converge or fits worse than
// the least-squares line.
struct LogisticMap {
  std::array<double, 4> beta{};
  bool affine = false;
  double slope = 0.0;
  double intercept = 0.0;
  bool converged = false;
  int iterations = 0;
  double sse = 0.0;

  double operator()(double score) const;
  std::vector<double> operator()(std::span<const double> scores) const;
};

LogisticMap fit_logistic(std::span<const double> scores, std::span<const double> mos,
                         int max_iterations = 2000);

// Sample distance correlation (double-centred Euclidean distance matrices) of
// paired rows of x and y. 0 when either distance variance is 0.
double distance_correlation(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

enum class Tail { two, greater };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Welch's unequal-variance t-test. Tail::greater tests mean(a) > mean(b).
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b,
                         Tail tail = Tail::two);

}  // namespace pvqa

#include "pvqa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "pvqa/error.hpp"

namespace pvqa {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> y, std::size_t min_n,
                         const char* what) {
  require(x.size() == y.size(), Errc::shape_mismatch,
          std::string(what) + ": inputs differ in length");
  require(x.size() >= min_n, Errc::insufficient_data,
          std::string(what) + ": needs at least " + std::to_string(min_n) + " values");
}

void require_finite(std::span<const double> x, const char* what) {
  require(std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }),
          Errc::invalid_argument, std::string(what) + ": non-finite input");
}

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logistic_value(const std::array<double, 4>& b, double s) {
  return (b[0] - b[1]) * logistic((s - b[2]) / std::abs(b[3])) + b[1];
}

double logistic_sse(const std::array<double, 4>& b, std::span<const double> s,
                    std::span<const double> m) {
  double sse = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = logistic_value(b, s[i]) - m[i];
    sse += r * r;
  }
  return sse;
}

}  // namespace

double mean(std::span<const double> x) {
  require(!x.empty(), Errc::insufficient_data, "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::span<const double> x) {
  require(!x.empty(), Errc::insufficient_data, "median of an empty sample");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> plcc(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 2, "plcc");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> srocc(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 2, "srocc");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return plcc(rx, ry);
}

double rmse(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 1, "rmse");
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double LogisticMap::operator()(double score) const {
  return affine ? slope * score + intercept : logistic_value(beta, score);
}

std::vector<double> LogisticMap::operator()(std::span<const double> scores) const {
  std::vector<double> out(scores.size());
  std::transform(scores.begin(), scores.end(), out.begin(), [this](double s) { return (*this)(s); });
  return out;
}

LogisticMap fit_logistic(std::span<const double> scores, std::span<const double> mos,
                         int max_iterations) {
  require_same_length(scores, mos, 5, "fit_logistic");
  require_finite(scores, "fit_logistic");
  require_finite(mos, "fit_logistic");
  const std::size_t n = scores.size();

  // Least-squares line, the fallback and the bar the logistic has to clear.
  const double ms = mean(scores);
  const double mm = mean(mos);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (scores[i] - ms) * (mos[i] - mm);
    sxx += (scores[i] - ms) * (scores[i] - ms);
  }
  LogisticMap affine_map;
  affine_map.affine = true;
  affine_map.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  affine_map.intercept = mm - affine_map.slope * ms;
  affine_map.converged = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = affine_map(scores[i]) - mos[i];
    affine_map.sse += r * r;
  }
  const double score_sd = sample_stddev(scores);
  if (sxx == 0.0 || score_sd == 0.0) return affine_map;

  LogisticMap fit;
  fit.beta = {*std::max_element(mos.begin(), mos.end()), *std::min_element(mos.begin(), mos.end()),
              median(scores), score_sd / 4.0};
  // Start on the branch matching the direction of the relationship.
  if (sxy < 0.0) std::swap(fit.beta[0], fit.beta[1]);

  const double min_scale = score_sd * 1e-9;
  double sse = logistic_sse(fit.beta, scores, mos);
  double lambda = 1e-3;
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 4);
  Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
  bool converged = false;
  int it = 0;
  for (; it < max_iterations && !converged; ++it) {
    const auto& b = fit.beta;
    const double scale = std::abs(b[3]);
    const double sign = b[3] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (scores[i] - b[2]) / scale;
      const double g = logistic(u);
      const double dg = g * (1.0 - g);
      const auto r = static_cast<Eigen::Index>(i);
      jac(r, 0) = g;
      jac(r, 1) = 1.0 - g;
      jac(r, 2) = -(b[0] - b[1]) * dg / scale;
      jac(r, 3) = -(b[0] - b[1]) * dg * u * sign / scale;
      resid(r) = (b[0] - b[1]) * g + b[1] - mos[i];
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d jtr = jac.transpose() * resid;
    if (jtr.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + sse)) {
      converged = true;
      break;
    }
    bool improved = false;
    while (lambda < 1e16) {
      Eigen::Matrix4d damped = jtj;
      for (int d = 0; d < 4; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      const Eigen::Vector4d step = damped.ldlt().solve(-jtr);
      std::array<double, 4> trial = fit.beta;
      for (int d = 0; d < 4; ++d) trial[static_cast<std::size_t>(d)] += step(d);
      if (std::abs(trial[3]) < min_scale) trial[3] = trial[3] < 0.0 ? -min_scale : min_scale;
      const double trial_sse = logistic_sse(trial, scores, mos);
      if (std::isfinite(trial_sse) && trial_sse < sse) {
        const double decrease = sse - trial_sse;
        fit.beta = trial;
        sse = trial_sse;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (decrease <= 1e-15 * sse || sse == 0.0) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No downhill step at any damping: a stationary point.
    if (!improved) converged = true;
  }
  fit.converged = converged;
  fit.iterations = it;
  fit.sse = sse;
  if (!converged || !(sse <= affine_map.sse)) {
    affine_map.converged = converged;
    affine_map.iterations = it;
    return affine_map;
  }
  return fit;
}

double distance_correlation(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  require(x.rows() == y.rows(), Errc::shape_mismatch,
          "distance correlation needs the same number of samples in both inputs");
  require(x.rows() >= 4, Errc::insufficient_data, "distance correlation needs at least 4 samples");
  require(x.allFinite() && y.allFinite(), Errc::invalid_argument,
          "distance correlation: non-finite input");
  const Eigen::Index n = x.rows();

  const auto centred_distances = [n](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (m.row(i) - m.row(j)).norm();
    }
    const Eigen::VectorXd row_mean = d.rowwise().mean();
    const double grand = d.mean();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) += grand - row_mean(i) - row_mean(j);
    return d;
  };

  const Eigen::MatrixXd a = centred_distances(x);
  const Eigen::MatrixXd b = centred_distances(y);
  const double dcov2 = std::max(0.0, a.cwiseProduct(b).mean());
  const double dvar_x2 = a.cwiseProduct(a).mean();
  const double dvar_y2 = b.cwiseProduct(b).mean();
  if (dvar_x2 <= 0.0 || dvar_y2 <= 0.0) return 0.0;
  return std::min(1.0, std::sqrt(dcov2 / std::sqrt(dvar_x2 * dvar_y2)));
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b, Tail tail) {
  require(a.size() >= 2 && b.size() >= 2, Errc::insufficient_data,
          "t-test needs at least 2 values per group");
  require_finite(a, "t-test");
  require_finite(b, "t-test");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = std::pow(sample_stddev(a), 2) / na;
  const double vb = std::pow(sample_stddev(b), 2) / nb;
  require(va + vb > 0.0, Errc::degenerate, "t-test with zero variance in both groups");

  TTestResult r;
  r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  // P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2).
  const double x = r.df / (r.df + r.t * r.t);
  const double two_sided = boost::math::ibeta(r.df / 2.0, 0.5, x);
  if (tail == Tail::two) {
    r.p = two_sided;
  } else {
    r.p = r.t >= 0.0 ? 0.5 * two_sided : 1.0 - 0.5 * two_sided;
  }
  r.p = std::clamp(r.p, 0.0, 1.0);
  return r;
}

}  // namespace pvqa

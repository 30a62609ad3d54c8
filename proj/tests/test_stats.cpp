#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "pvqa/stats.hpp"
#include "test_util.hpp"

using namespace pvqa;
using namespace pvqa::test;

namespace {

double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Rank by counting: 1 + #smaller + (#equal - 1) / 2.
std::vector<double> counting_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    int less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = 1.0 + less + (equal - 1) / 2.0;
  }
  return r;
}

double naive_rmse(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s / static_cast<double>(x.size()));
}

// Student-t upper tail by composite Simpson integration of the density.
double t_upper_tail(double t, double df) {
  const double lognorm =
      std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  const auto pdf = [&](double x) {
    return std::exp(lognorm - (df + 1) / 2 * std::log1p(x * x / df));
  };
  const double a = std::abs(t);
  const int n = 200000;
  const double h = a / n;
  double s = pdf(0) + pdf(a);
  for (int i = 1; i < n; ++i) s += pdf(i * h) * (i % 2 ? 4 : 2);
  const double central = s * h / 3;
  return t >= 0 ? 0.5 - central : 0.5 + central;
}

// Double-centred distance matrices written out with explicit loops.
double naive_dcor(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const auto n = x.rows();
  auto centred = [n](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (m.row(i) - m.row(j)).norm();
    Eigen::MatrixXd c = d;
    const double grand = d.mean();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        c(i, j) = d(i, j) - d.row(i).mean() - d.col(j).mean() + grand;
    return c;
  };
  const Eigen::MatrixXd a = centred(x), b = centred(y);
  const double vxy = (a.array() * b.array()).mean();
  const double vx = (a.array() * a.array()).mean(), vy = (b.array() * b.array()).mean();
  if (vx <= 0 || vy <= 0) return 0.0;
  return std::sqrt(std::max(vxy, 0.0) / std::sqrt(vx * vy));
}

}  // namespace

TEST(Correlation, MatchBruteForceOracles) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 5 + rng.index(60);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Integer-valued half the time so ties occur.
      x[i] = trial % 2 ? std::round(rng.uniform(0, 8)) : rng.normal();
      y[i] = 0.5 * x[i] + rng.normal();
    }
    const auto p = plcc(x, y), s = srocc(x, y);
    ASSERT_TRUE(p && s);
    EXPECT_NEAR(*p, naive_pearson(x, y), 1e-9);
    EXPECT_NEAR(*s, naive_pearson(counting_ranks(x), counting_ranks(y)), 1e-9);
    EXPECT_NEAR(rmse(x, y), naive_rmse(x, y), 1e-9);
  }
}

TEST(Srocc, Examples) {
  const std::vector<double> x{1, 2, 2, 3}, y{1, 2, 3, 4};
  EXPECT_EQ(average_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
  EXPECT_NEAR(*srocc(x, y), 0.9487, 1e-4);
  const std::vector<double> up{1, 5, 6, 20}, down{9, 3, 2, -4};
  EXPECT_NEAR(*srocc(y, up), 1.0, 1e-15);
  EXPECT_NEAR(*srocc(y, down), -1.0, 1e-15);
  const std::vector<double> flat{2, 2, 2, 2};
  EXPECT_FALSE(srocc(flat, y).has_value());
}

TEST(Srocc, InvariantUnderIncreasingTransforms) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_vector(rng, 40), y = random_vector(rng, 40);
    std::vector<double> ex(x.size()), cubed(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      ex[i] = std::exp(x[i]);
      cubed[i] = y[i] * y[i] * y[i] + 3 * y[i];
    }
    EXPECT_NEAR(*srocc(ex, cubed), *srocc(x, y), 1e-12);
  }
}

TEST(Plcc, AffineExamplesAndInvariance) {
  Rng rng(3);
  const auto x = random_vector(rng, 30), y = random_vector(rng, 30);
  std::vector<double> aff(x.size()), neg(x.size()), ys(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    aff[i] = 2 * x[i] + 1;
    neg[i] = -x[i];
    ys[i] = 0.25 * y[i] - 7;
  }
  EXPECT_NEAR(*plcc(x, aff), 1.0, 1e-12);
  EXPECT_NEAR(*plcc(x, neg), -1.0, 1e-12);
  EXPECT_NEAR(*plcc(aff, ys), *plcc(x, y), 1e-12);
  EXPECT_NEAR(*plcc(neg, y), -*plcc(x, y), 1e-12);
  EXPECT_FALSE(plcc(x, std::vector<double>(30, 1.0)).has_value());
}

TEST(Rmse, Examples) {
  const std::vector<double> x{0, 0}, y{3, 4};
  EXPECT_EQ(rmse(x, x), 0.0);
  EXPECT_NEAR(rmse(x, y), std::sqrt(12.5), 1e-15);
}

TEST(Median, EvenAndOdd) {
  const std::vector<double> odd{5, 1, 3}, even{4, 1, 3, 2};
  EXPECT_EQ(median(odd), 3.0);
  EXPECT_EQ(median(even), 2.5);
  EXPECT_NEAR(sample_stddev(even), std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(FitLogistic, RecoversPlantedCurve) {
  Rng rng(4);
  const double b1 = 90, b2 = 10, b3 = 0.4, b4 = 0.12;
  std::vector<double> s(80), mos(80);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform(-0.2, 1.0);
    mos[i] = (b1 - b2) / (1 + std::exp(-(s[i] - b3) / b4)) + b2;
  }
  const LogisticMap f = fit_logistic(s, mos);
  EXPECT_FALSE(f.affine);
  EXPECT_LE(rmse(f(s), mos), 1e-6);
}

TEST(FitLogistic, NoWorseThanAffineAndMonotone) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(60), mos(60);
    const double slope = rng.uniform(-40, 40);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = rng.uniform(0, 1);
      mos[i] = 50 + slope * s[i] + (trial % 2 ? rng.normal(0, 5) : 0.0);
    }
    double sxy = 0, sxx = 0, ms = 0, mm = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      ms += s[i];
      mm += mos[i];
    }
    ms /= 60;
    mm /= 60;
    for (std::size_t i = 0; i < s.size(); ++i) {
      sxy += (s[i] - ms) * (mos[i] - mm);
      sxx += (s[i] - ms) * (s[i] - ms);
    }
    std::vector<double> line(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) line[i] = mm + sxy / sxx * (s[i] - ms);

    const LogisticMap f = fit_logistic(s, mos);
    EXPECT_LE(rmse(f(s), mos), rmse(line, mos) + 1e-9);

    std::vector<double> grid, mapped;
    for (int g = 0; g <= 200; ++g) grid.push_back(g / 200.0);
    mapped = f(grid);
    const bool up = std::is_sorted(mapped.begin(), mapped.end());
    const bool down = std::is_sorted(mapped.rbegin(), mapped.rend());
    EXPECT_TRUE(up || down);
  }
}

TEST(FitLogistic, ConstantMosGivesConstantMap) {
  const std::vector<double> s{0.1, 0.5, 0.2, 0.9, 0.3, 0.7}, mos(6, 42.0);
  const LogisticMap f = fit_logistic(s, mos);
  EXPECT_NEAR(rmse(f(s), mos), 0.0, 1e-12);
  EXPECT_NEAR(f(-100.0), 42.0, 1e-12);
  EXPECT_NEAR(f(100.0), 42.0, 1e-12);
}

TEST(DistanceCorrelation, SimilarityImageIsOne) {
  Rng rng(6);
  Eigen::MatrixXd x(50, 3), a(3, 3);
  for (auto& v : x.reshaped()) v = rng.normal();
  for (auto& v : a.reshaped()) v = rng.normal();
  // Pairwise distances are preserved up to scale only by rotations and
  // reflections, so use an orthogonal factor.
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  Eigen::MatrixXd y = 2.5 * x * q;
  y.rowwise() += Eigen::RowVector3d(1, -2, 5);
  EXPECT_NEAR(distance_correlation(x, y), 1.0, 1e-9);
  EXPECT_NEAR(distance_correlation(x, x), 1.0, 1e-12);
  // A general linear map distorts distances and falls short of 1.
  EXPECT_LT(distance_correlation(x, x * (a + 3 * Eigen::MatrixXd::Identity(3, 3))), 1.0 - 1e-6);
}

TEST(DistanceCorrelation, ConstantIsZero) {
  Rng rng(7);
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(20, 2, 3.0), y(20, 2);
  for (auto& v : y.reshaped()) v = rng.normal();
  EXPECT_EQ(distance_correlation(x, y), 0.0);
}

TEST(DistanceCorrelation, IndependentSamplesAreWeaklyDependent) {
  Rng rng(8);
  Eigen::MatrixXd x(500, 2), y(500, 2);
  for (auto& v : x.reshaped()) v = rng.normal();
  for (auto& v : y.reshaped()) v = rng.normal();
  EXPECT_LT(distance_correlation(x, y), 0.15);
}

TEST(DistanceCorrelation, MatchesLoopOracle) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd x(30, 3), y(30, 2);
    for (auto& v : x.reshaped()) v = rng.normal();
    for (Eigen::Index i = 0; i < 30; ++i) {
      y(i, 0) = x(i, 0) * x(i, 0) + rng.normal(0, 0.3);
      y(i, 1) = rng.normal();
    }
    EXPECT_NEAR(distance_correlation(x, y), naive_dcor(x, y), 1e-9);
  }
}

TEST(WelchTTest, IdenticalSamplesGivePOne) {
  const std::vector<double> a{1.0, 2.5, 3.0, 4.5, 2.0};
  const auto r = welch_t_test(a, a);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(WelchTTest, SeparatedNormalsAreSignificant) {
  Rng rng(10);
  std::vector<double> a(50), b(50);
  for (auto& v : a) v = rng.normal(0, 1);
  for (auto& v : b) v = rng.normal(5, 1);
  EXPECT_LT(welch_t_test(a, b).p, 1e-6);
}

TEST(WelchTTest, MatchesIntegratedTDensity) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> a(3 + rng.index(20)), b(3 + rng.index(20));
    const double shift = rng.uniform(-1.5, 1.5), spread = rng.uniform(0.5, 3.0);
    for (auto& v : a) v = rng.normal(0, 1);
    for (auto& v : b) v = rng.normal(shift, spread);

    const auto two = welch_t_test(a, b, Tail::two);
    const auto greater = welch_t_test(a, b, Tail::greater);

    const double va = sample_stddev(a) * sample_stddev(a) / a.size();
    const double vb = sample_stddev(b) * sample_stddev(b) / b.size();
    const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
    const double df = (va + vb) * (va + vb) /
                      (va * va / (a.size() - 1.0) + vb * vb / (b.size() - 1.0));
    EXPECT_NEAR(two.t, t, 1e-12);
    EXPECT_NEAR(two.df, df, 1e-9);
    EXPECT_NEAR(two.p, 2 * t_upper_tail(std::abs(t), df), 1e-6);
    EXPECT_NEAR(greater.p, t_upper_tail(t, df), 1e-6);
  }
}

TEST(WelchTTest, DegenerateVarianceRejected) {
  const std::vector<double> a{1, 1, 1}, b{2, 2, 2};
  EXPECT_ERRC(welch_t_test(a, b), Errc::degenerate);
}

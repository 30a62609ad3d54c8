#include <cmath>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "pvqa/pca.hpp"
#include "test_util.hpp"

using namespace pvqa;
using namespace pvqa::test;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (auto& v : m.reshaped()) v = rng.normal();
  return m;
}

Eigen::MatrixXd centred(const Eigen::MatrixXd& x) {
  return x.rowwise() - x.colwise().mean();
}

}  // namespace

TEST(PcaFit, AxisAlignedPoints) {
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, -1, 0;
  const PcaModel m = pca_fit(x, 1);
  ASSERT_EQ(m.k_prime(), 1);
  EXPECT_NEAR(m.basis(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(m.basis(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(m.mean.norm(), 0.0, 1e-15);
}

TEST(PcaFit, LineClampsToOneComponent) {
  Eigen::MatrixXd x(5, 2);
  x << 0, 0, 1, 1, 2, 2, 3, 3, -4, -4;
  WarningCapture warnings;
  const PcaModel m = pca_fit(x, 2);
  EXPECT_EQ(m.k_prime(), 1);
  EXPECT_EQ(m.requested_k, 2);
  EXPECT_TRUE(m.clamped());
  EXPECT_FALSE(warnings.messages.empty());
  EXPECT_NEAR(m.basis(0, 0), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(m.basis(1, 0), std::sqrt(0.5), 1e-12);
}

TEST(PcaFit, ClampsAtTrainingSizeAndMatchesSvd) {
  Rng rng(1);
  const Eigen::MatrixXd x = random_matrix(rng, 240, 3000);
  WarningCapture warnings;
  const PcaModel full = pca_fit(x, 240);
  EXPECT_EQ(full.k_prime(), 239);
  EXPECT_EQ(warnings.messages.size(), 1u);

  const Eigen::MatrixXd xc = centred(x);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (int kp : {20, 239}) {
    const PcaModel m = kp == 239 ? full : pca_fit(x, kp);
    const Eigen::MatrixXd recon = xc * m.basis * m.basis.transpose();
    const Eigen::MatrixXd oracle = svd.matrixU().leftCols(kp) *
                                   svd.singularValues().head(kp).asDiagonal() *
                                   svd.matrixV().leftCols(kp).transpose();
    EXPECT_LE((recon - oracle).norm(), 1e-5 * oracle.norm()) << "K'=" << kp;
    for (int j = 0; j < kp; ++j) {
      const double sv = svd.singularValues()(j);
      EXPECT_NEAR(m.explained_variance(j), sv * sv / 239.0, 1e-6 * sv * sv / 239.0);
    }
  }
}

TEST(PcaFit, BasisIsOrthonormalAndVarianceSorted) {
  Rng rng(2);
  for (auto [n, d] : {std::pair{30, 8}, std::pair{12, 100}, std::pair{50, 50}}) {
    const Eigen::MatrixXd x = random_matrix(rng, n, d);
    const PcaModel m = pca_fit(x, std::min(n - 1, d));
    const Eigen::MatrixXd gram = m.basis.transpose() * m.basis;
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(m.k_prime(), m.k_prime())).cwiseAbs().maxCoeff(),
              1e-6);
    for (int j = 1; j < m.k_prime(); ++j)
      EXPECT_GE(m.explained_variance(j - 1), m.explained_variance(j));
    EXPECT_GE(m.explained_variance.minCoeff(), 0.0);
    for (int j = 0; j < m.k_prime(); ++j) {
      Eigen::Index arg;
      m.basis.col(j).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(m.basis(arg, j), 0.0);
    }
  }
}

TEST(PcaTransform, ProjectedVarianceEqualsExplainedVariance) {
  Rng rng(3);
  const Eigen::MatrixXd x = random_matrix(rng, 40, 60);
  const PcaModel m = pca_fit(x, 25);
  const Eigen::MatrixXd z = pca_transform(m, x);
  const Eigen::RowVectorXd means = z.colwise().mean();
  EXPECT_LE(means.cwiseAbs().maxCoeff(), 1e-9);
  for (int j = 0; j < 25; ++j) {
    const double var = z.col(j).squaredNorm() / 39.0;
    EXPECT_NEAR(var, m.explained_variance(j), 1e-6 * m.explained_variance(j));
  }
}

TEST(PcaTransform, MeanRowAndBasisColumns) {
  Rng rng(4);
  const Eigen::MatrixXd x = random_matrix(rng, 20, 7);
  const PcaModel m = pca_fit(x, 5);
  const Eigen::VectorXd at_mean = pca_transform(m, Eigen::VectorXd(m.mean));
  EXPECT_LE(at_mean.norm(), 1e-12);
  for (int j = 0; j < 5; ++j) {
    const Eigen::VectorXd z = pca_transform(m, Eigen::VectorXd(m.mean + m.basis.col(j)));
    EXPECT_LE((z - Eigen::VectorXd::Unit(5, j)).norm(), 1e-9);
  }
  EXPECT_ERRC(pca_transform(m, Eigen::MatrixXd(2, 6)), Errc::shape_mismatch);
}

TEST(PcaFit, NeedsTwoSamples) {
  EXPECT_ERRC(pca_fit(Eigen::MatrixXd::Ones(1, 3), 1), Errc::degenerate);
}

TEST(Linreg, RecoversLine) {
  Eigen::MatrixXd z(5, 1);
  z << -2, 0, 1, 3.5, 7;
  const Eigen::VectorXd y = (3.0 * z.col(0)).array() + 2.0;
  const LinearModel m = linreg_fit(z, y);
  EXPECT_NEAR(m.weights(0), 3.0, 1e-9);
  EXPECT_NEAR(m.intercept, 2.0, 1e-9);
}

TEST(Linreg, ConstantTargetGivesZeroWeights) {
  Rng rng(5);
  const Eigen::MatrixXd z = random_matrix(rng, 10, 4);
  const LinearModel m = linreg_fit(z, Eigen::VectorXd::Constant(10, 7.5));
  EXPECT_LE(m.weights.norm(), 1e-12);
  EXPECT_NEAR(m.intercept, 7.5, 1e-12);
}

TEST(Linreg, InterpolatesConsistentSystem) {
  Rng rng(6);
  const Eigen::MatrixXd z = random_matrix(rng, 240, 239);
  const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(239, [&] { return rng.normal(); });
  const Eigen::VectorXd y = (z * w).array() + 50.0;
  const LinearModel m = linreg_fit(z, y);
  EXPECT_LE((m.predict(z) - y).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Linreg, UnderdeterminedIsMinimumNorm) {
  // Two samples, three features: infinitely many exact fits.
  Eigen::MatrixXd z(2, 3);
  z << 1, 0, 0, 0, 1, 1;
  Eigen::VectorXd y(2);
  y << 1, 3;
  const LinearModel m = linreg_fit(z, y);
  EXPECT_LE((m.predict(z) - y).norm(), 1e-12);
  // Centred rows differ by (1, -1, -1); the minimum-norm weights lie along it.
  EXPECT_NEAR(m.weights(1), m.weights(2), 1e-12);
  EXPECT_NEAR(m.weights(0), -m.weights(1), 1e-12);
}

TEST(PcaRegression, PlantedLinearModelGeneralises) {
  Rng rng(7);
  // Features live in a 10-dimensional subspace of R^200; MOS is linear in them.
  const Eigen::MatrixXd basis = random_matrix(rng, 10, 200);
  const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(10, [&] { return rng.normal(); });
  const Eigen::MatrixXd latent_train = random_matrix(rng, 80, 10);
  const Eigen::MatrixXd latent_test = random_matrix(rng, 20, 10);
  const Eigen::MatrixXd x_train = latent_train * basis, x_test = latent_test * basis;
  const Eigen::VectorXd y_train = (latent_train * w).array() + 40.0;
  const Eigen::VectorXd y_test = (latent_test * w).array() + 40.0;

  const PcaModel p = pca_fit(x_train, 40);
  EXPECT_EQ(p.k_prime(), 10);
  const LinearModel r = linreg_fit(pca_transform(p, x_train), y_train);
  const Eigen::VectorXd pred = r.predict(pca_transform(p, x_test));
  EXPECT_LE(std::sqrt((pred - y_test).squaredNorm() / 20.0), 1e-6);
}

#include "pvqa/pca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pvqa/error.hpp"
#include "pvqa/log.hpp"

namespace pvqa {

namespace {

// Flips each column so its largest-magnitude entry (first on ties) is positive.
void canonical_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < basis.rows(); ++r) {
      const double v = std::abs(basis(r, c));
      if (v > best) {
        best = v;
        arg = r;
      }
    }
    if (basis(arg, c) < 0.0) basis.col(c) *= -1.0;
  }
}

}  // namespace

PcaModel pca_fit(const Eigen::MatrixXd& x, int k_prime) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  require(n >= 2, Errc::degenerate, "PCA needs at least 2 samples");
  require(d >= 1, Errc::invalid_argument, "PCA needs at least 1 feature");
  require(k_prime >= 1, Errc::invalid_argument, "PCA needs k_prime >= 1");
  require(x.allFinite(), Errc::invalid_argument, "PCA input contains non-finite values");

  PcaModel model;
  model.requested_k = k_prime;
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - model.mean.transpose();

  // Eigenpairs of the smaller of X X^T and X^T X, in decreasing order.
  const bool gram = n <= d;
  const Eigen::MatrixXd product =
      gram ? Eigen::MatrixXd(centred * centred.transpose())
           : Eigen::MatrixXd(centred.transpose() * centred);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(product);
  require(eig.info() == Eigen::Success, Errc::degenerate, "PCA eigendecomposition failed");
  const Eigen::VectorXd values = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

  const double top = std::max(values(0), 0.0);
  const double tol = top * static_cast<double>(std::max(n, d)) *
                     std::numeric_limits<double>::epsilon() * 16.0;
  Eigen::Index rank = 0;
  while (rank < values.size() && values(rank) > tol) ++rank;
  rank = std::min<Eigen::Index>(rank, n - 1);

  const Eigen::Index k = std::min<Eigen::Index>(k_prime, rank);
  require(k >= 1, Errc::degenerate, "PCA input has zero variance");
  if (k < k_prime)
    log::warn("PCA: requested " + std::to_string(k_prime) + " components but the centred data has rank " +
              std::to_string(rank) + "; using " + std::to_string(k));

  if (gram) {
    // Right singular vectors: v_i = X^T u_i / sigma_i.
    model.basis = centred.transpose() * vectors.leftCols(k);
    for (Eigen::Index c = 0; c < k; ++c) model.basis.col(c) /= std::sqrt(values(c));
  } else {
    model.basis = vectors.leftCols(k);
  }
  canonical_signs(model.basis);
  model.explained_variance = values.head(k) / static_cast<double>(n - 1);
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x) {
  require(x.cols() == model.dim(), Errc::shape_mismatch,
          "PCA transform: input has " + std::to_string(x.cols()) + " features, model expects " +
              std::to_string(model.dim()));
  return (x.rowwise() - model.mean.transpose()) * model.basis;
}

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& row) {
  require(row.size() == model.dim(), Errc::shape_mismatch,
          "PCA transform: input has " + std::to_string(row.size()) + " features, model expects " +
              std::to_string(model.dim()));
  return model.basis.transpose() * (row - model.mean);
}

LinearModel linreg_fit(const Eigen::MatrixXd& z, const Eigen::VectorXd& y) {
  require(z.rows() == y.size(), Errc::shape_mismatch, "regression: rows of Z must match y");
  require(z.rows() >= 1, Errc::insufficient_data, "regression needs at least 1 sample");
  require(z.allFinite() && y.allFinite(), Errc::invalid_argument,
          "regression inputs contain non-finite values");
  const Eigen::RowVectorXd z_mean = z.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd zc = z.rowwise() - z_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  LinearModel model;
  if (zc.cols() == 0) {
    model.weights = Eigen::VectorXd();
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(zc);
    model.weights = cod.solve(yc);
  }
  model.intercept = y_mean - (model.weights.size() ? z_mean.dot(model.weights) : 0.0);
  return model;
}

}  // namespace pvqa

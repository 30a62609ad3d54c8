#pragma once

#include <Eigen/Dense>

namespace pvqa {

struct PcaModel {
  Eigen::VectorXd mean;                // length d
  Eigen::MatrixXd basis;               // d x k_prime, orthonormal columns
  Eigen::VectorXd explained_variance;  // length k_prime, nonincreasing
  int requested_k = 0;                 // what the caller asked for before clamping

  int k_prime() const { return static_cast<int>(basis.cols()); }
  int dim() const { return static_cast<int>(mean.size()); }
  bool clamped() const { return requested_k > k_prime(); }
};

// Principal components of the rows of x. Works on whichever of the n x n Gram
// matrix or the d x d covariance is smaller. The component count is clamped to
// the numerical rank of the centred data (at most n - 1) with a warning. Each
// basis column is signed so its largest-magnitude entry is positive.
PcaModel pca_fit(const Eigen::MatrixXd& x, int k_prime);

// (x - mean) * basis.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x);
Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& row);

struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;

  double predict(const Eigen::VectorXd& z) const { return weights.dot(z) + intercept; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& z) const {
    return (z * weights).array() + intercept;
  }
};

// Least squares with an unpenalised intercept: the weights are the
// minimum-norm solution on column-centred inputs, so a consistent system is
// interpolated and a constant target gives zero weights.
LinearModel linreg_fit(const Eigen::MatrixXd& z, const Eigen::VectorXd& y);

}  // namespace pvqa

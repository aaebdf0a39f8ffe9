#pragma once

#include <Eigen/Dense>

namespace icc {

// Symmetric positive definite precision matrix with its log-determinant
// cached at construction time.
struct Precision {
  Eigen::MatrixXd mat;
  double logdet = 0.0;

  int dim() const { return static_cast<int>(mat.rows()); }
};

// One market state: centroid mu and precision J. `label` is the 0-based
// state index within a fit.
struct MarketState {
  Eigen::VectorXd mu;
  Precision precision;
  int label = 0;
};

// (x - mu)^T J (x - mu); >= 0 for a PD precision
double mahalanobis_sq(const Eigen::VectorXd& x, const MarketState& state);

// 1/2 (log|J| - d^2 - p log(2 pi))
double log_likelihood(const Eigen::VectorXd& x, const MarketState& state);

}  // namespace icc

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "icc/panel.hpp"

namespace icc {

struct GmmModel {
  int K = 0;
  std::vector<double> weights;               // sum to 1
  std::vector<Eigen::VectorXd> means;        // ordered by descending mean entry
  std::vector<Eigen::MatrixXd> covariances;  // PD, diagonal floored
  Eigen::MatrixXd responsibilities;          // T x K, rows sum to 1
  std::vector<double> ll_trace;              // log-likelihood after each step
  int iterations = 0;
  bool converged = true;
  int reseeds = 0;

  // argmax responsibility per row, values in 1..K, ties to the lower index
  std::vector<int> hard_labels() const;
};

// Full-covariance mixture via EM: k-means++ style seeding from the seed,
// stops when the log-likelihood gain drops below 1e-6 or after 500 rounds.
// A component whose effective count vanishes triggers one re-seed, then an
// error.
GmmModel fit_gmm(const ReturnsPanel& panel, int K, std::uint64_t seed);

struct RidgePrecision {
  Eigen::MatrixXd mat;  // (S + lambda I)^{-1}
  double logdet = 0.0;  // log det of mat
  double lambda = 0.0;
  int cv_folds = 0;     // 0 when lambda was given directly
};

RidgePrecision ridge_precision(const Eigen::MatrixXd& obs, double lambda);

// Lambda maximizing the mean held-out Gaussian log-likelihood over contiguous
// folds; ties go to the larger lambda.
double cv_select_lambda(const Eigen::MatrixXd& obs, const std::vector<double>& grid,
                        int folds);

// 20 logarithmic points spanning [1e-4, 1e1]
std::vector<double> default_lambda_grid();

// share of strictly positive entries in row t
double fraction_positive(const ReturnsPanel& panel, int t);

}  // namespace icc

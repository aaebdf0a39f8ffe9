#pragma once

#include <Eigen/Dense>

namespace icc {

// log-determinant of a symmetric positive definite matrix via Cholesky;
// throws NumericError if the factorization fails
double logdet_spd(const Eigen::MatrixXd& m);

// Cholesky factor L with m = L L^T; throws NumericError if not PD
Eigen::MatrixXd cholesky_spd(const Eigen::MatrixXd& m);

bool is_spd(const Eigen::MatrixXd& m);

// sample covariance of the rows of obs about their own mean, 1/(m-1)
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& obs);

Eigen::VectorXd sample_mean(const Eigen::MatrixXd& obs);

}  // namespace icc

#include "icc/linalg.hpp"

#include <cmath>

#include "icc/errors.hpp"

namespace icc {

double logdet_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericError("Cholesky failed: matrix is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd cholesky_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericError("Cholesky failed: matrix is not positive definite");
  }
  return llt.matrixL();
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  if (!m.isApprox(m.transpose(), 1e-10)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& obs) {
  const auto m = obs.rows();
  if (m < 2) throw NumericError("need at least two observations for a covariance");
  const Eigen::MatrixXd centered = obs.rowwise() - obs.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(m - 1);
}

Eigen::VectorXd sample_mean(const Eigen::MatrixXd& obs) {
  return obs.colwise().mean().transpose();
}

}  // namespace icc

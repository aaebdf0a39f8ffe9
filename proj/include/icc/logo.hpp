#pragma once

#include <Eigen/Dense>
#include <string>

#include "icc/market_state.hpp"
#include "icc/tmfg.hpp"

namespace icc {

// Sparse precision over the TMFG support: sum of inverted clique covariances
// minus inverted separator covariances, each embedded at its indices.
// Covariances are taken about the cluster mean with 1/(m-1) normalization.
// Entries off the support are never written and stay exactly zero.
Precision logo_precision(const Eigen::MatrixXd& obs, const TmfgGraph& graph);

// same assembly from a full covariance matrix instead of raw observations
Precision logo_precision_from_cov(const Eigen::MatrixXd& cov, const TmfgGraph& graph);

// coordinate-format CSV (i, j, value) of the non-zero entries plus a JSON
// header with the log-determinant and support size
void write_precision(const Precision& p, const std::string& csv_path,
                     const std::string& json_path);

}  // namespace icc

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "icc/panel.hpp"

namespace icc {

// One regime of the generator: observations drawn from N(mean, cov).
struct RegimeSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct SyntheticSpec {
  int n = 20;
  int T = 2000;
  std::vector<RegimeSpec> regimes;
  double persistence = 100.0;  // expected segment length in days
  std::uint64_t seed = 0;
};

struct SyntheticPanel {
  ReturnsPanel panel;
  std::vector<int> true_labels;  // 0-based regime index per row
};

// Regime labels follow a persistent chain with stay probability
// 1 - 1/persistence; a switch moves to one of the other regimes uniformly.
// Bit-identical output for a fixed seed.
SyntheticPanel generate_synthetic(const SyntheticSpec& spec);

// covariance builders for regime specs
Eigen::MatrixXd equicorr_cov(int n, double sigma, double rho);
Eigen::MatrixXd ar1_cov(int n, double sigma, double rho);
Eigen::MatrixXd scale_to_logdet(const Eigen::MatrixXd& cov, double target_logdet);

// Default two-regime spec used by the CLI and test harness: regime 0 ("bull")
// has mean +mean_shift and equicorrelation rho_bull, regime 1 ("bear") has
// mean -mean_shift and AR(1) correlation rho_bear rescaled to the bull
// regime's determinant. Matching determinants keeps Mahalanobis assignment
// from collapsing onto the wider state.
SyntheticSpec two_regime_spec(int n, int T, double persistence, double mean_shift,
                              double sigma, double rho_bull, double rho_bear,
                              std::uint64_t seed);

}  // namespace icc

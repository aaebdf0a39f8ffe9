#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "icc/icc.hpp"
#include "icc/panel.hpp"
#include "icc/rng.hpp"

namespace test_helpers {

inline Eigen::MatrixXd gaussian_matrix(icc::Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

// random PD correlation matrix from a wide factor draw
inline Eigen::MatrixXd random_correlation(icc::Rng& rng, int n) {
  const Eigen::MatrixXd a = gaussian_matrix(rng, n, n + 5);
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(n + 5);
  Eigen::VectorXd d = s.diagonal().array().sqrt();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s(i, j) /= d(i) * d(j);
  }
  return s;
}

inline icc::ReturnsPanel panel_from_matrix(const Eigen::MatrixXd& obs) {
  icc::ReturnsPanel p;
  p.returns = obs;
  const int T = static_cast<int>(obs.rows());
  const int n = static_cast<int>(obs.cols());
  p.dates.reserve(T);
  for (int t = 0; t < T; ++t) {
    const int y = 2000 + t / 372, m = 1 + (t / 31) % 12, d = 1 + t % 31;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    p.dates.emplace_back(buf);
  }
  for (int j = 0; j < n; ++j) p.tickers.push_back("S" + std::to_string(j));
  return p;
}

// exhaustive minimum path cost, accumulated left to right in the same
// association order as the dynamic program: (running + gamma) + cost
inline double brute_force_path_cost(const Eigen::MatrixXd& costs, double gamma) {
  const int T = static_cast<int>(costs.rows());
  const int K = static_cast<int>(costs.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> path(T, 0);
  while (true) {
    double c = costs(0, path[0]);
    for (int t = 1; t < T; ++t) {
      if (path[t] != path[t - 1]) c = c + gamma;
      c = c + costs(t, path[t]);
    }
    if (c < best) best = c;
    int pos = T - 1;
    while (pos >= 0 && path[pos] == K - 1) path[pos--] = 0;
    if (pos < 0) break;
    ++path[pos];
  }
  return best;
}

}  // namespace test_helpers

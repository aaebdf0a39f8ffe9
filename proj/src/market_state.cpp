#include "icc/market_state.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace icc {

double mahalanobis_sq(const Eigen::VectorXd& x, const MarketState& state) {
  if (x.size() != state.mu.size() || x.size() != state.precision.mat.rows()) {
    throw std::invalid_argument("observation dimension " + std::to_string(x.size()) +
                                " does not match state dimension " +
                                std::to_string(state.mu.size()));
  }
  const Eigen::VectorXd diff = x - state.mu;
  return diff.dot(state.precision.mat * diff);
}

double log_likelihood(const Eigen::VectorXd& x, const MarketState& state) {
  const double d2 = mahalanobis_sq(x, state);
  const double p = static_cast<double>(x.size());
  return 0.5 * (state.precision.logdet - d2 - p * std::log(2.0 * std::numbers::pi));
}

}  // namespace icc

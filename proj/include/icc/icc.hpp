#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "icc/market_state.hpp"
#include "icc/panel.hpp"

namespace icc {

struct IccConfig {
  int K = 2;
  double gamma = 16.0;
  bool sparse = true;  // clique-factorized precision on the filtered graph; dense otherwise
  int max_iters = 100;
  std::uint64_t seed = 0;
  int min_cluster = 5;  // smallest usable cluster; below this the cluster is re-seeded
  int max_reseeds = 5;
  // Independent starts; the winner has the highest joint Gaussian
  // log-likelihood. The assignment cost itself cannot rank starts: summed
  // over refit clusters it is nearly partition-invariant.
  int restarts = 4;
};

struct Segmentation {
  std::vector<int> labels;  // state index in 1..K per row
  double total_cost = 0.0;  // sum of assigned distances plus gamma per switch
  int switches = 0;
};

struct IccFit {
  std::vector<MarketState> states;  // ordered by descending mean of mu; labels match
  Segmentation seg;
  std::vector<double> cost_trace;  // total cost after each iteration
  int iterations = 0;
  bool converged = true;
  int reseeds = 0;          // extra seedings forced by degenerate clusters
  double log_likelihood = 0.0;  // joint Gaussian log-likelihood of the winner
  std::vector<std::string> warnings;
};

// Minimum-cost label path for per-row state costs plus a fixed penalty per
// switch; no penalty on the first row. Ties prefer staying in the previous
// state, then the lower state index.
Segmentation viterbi_assign(const Eigen::MatrixXd& costs, double gamma);

// T x K matrix of squared Mahalanobis distances to each state.
Eigen::MatrixXd cost_matrix(const ReturnsPanel& panel, const std::vector<MarketState>& states);

// (S + 1e-6 * trace/n * I)^{-1}, the regularized full-matrix precision.
Precision dense_precision(const Eigen::MatrixXd& obs);

// Iterative segmentation: estimate per-cluster states, score all rows,
// re-assign by viterbi_assign, repeat to a label fixed point.
IccFit fit_icc(const ReturnsPanel& panel, const IccConfig& config);

// Same loop started from explicit labels (values in 1..K) instead of a random draw.
IccFit fit_icc(const ReturnsPanel& panel, const IccConfig& config,
               const std::vector<int>& initial_labels);

// Fits once per candidate gamma and returns the one whose mean segment length
// lands closest to target_segment_length, ties to the smaller gamma.
double grid_search_gamma(const ReturnsPanel& panel, const IccConfig& config,
                         const std::vector<double>& grid,
                         double target_segment_length = 25.0);

}  // namespace icc

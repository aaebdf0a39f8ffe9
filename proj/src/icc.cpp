#include "icc/icc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "icc/errors.hpp"
#include "icc/linalg.hpp"
#include "icc/logo.hpp"
#include "icc/rng.hpp"
#include "icc/tmfg.hpp"

namespace icc {

Segmentation viterbi_assign(const Eigen::MatrixXd& costs, double gamma) {
  const int T = static_cast<int>(costs.rows());
  const int K = static_cast<int>(costs.cols());
  if (T == 0 || K == 0) throw std::invalid_argument("empty cost matrix");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (!costs.allFinite()) throw std::invalid_argument("costs must be finite");

  Eigen::MatrixXd D(T, K);
  Eigen::MatrixXi back(T, K);
  D.row(0) = costs.row(0);
  back.row(0).setConstant(-1);
  for (int t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      // staying first, then switches in index order: strict < keeps the
      // preferred candidate on ties
      double best = D(t - 1, k);
      int arg = k;
      for (int j = 0; j < K; ++j) {
        if (j == k) continue;
        const double cand = D(t - 1, j) + gamma;
        if (cand < best) {
          best = cand;
          arg = j;
        }
      }
      D(t, k) = best + costs(t, k);
      back(t, k) = arg;
    }
  }

  int last = 0;
  for (int k = 1; k < K; ++k) {
    if (D(T - 1, k) < D(T - 1, last)) last = k;
  }

  Segmentation seg;
  seg.total_cost = D(T - 1, last);
  seg.labels.resize(T);
  for (int t = T - 1; t >= 0; --t) {
    seg.labels[t] = last + 1;
    if (t > 0) last = back(t, last);
  }
  for (int t = 1; t < T; ++t) {
    if (seg.labels[t] != seg.labels[t - 1]) ++seg.switches;
  }
  return seg;
}

Eigen::MatrixXd cost_matrix(const ReturnsPanel& panel, const std::vector<MarketState>& states) {
  const int T = panel.T();
  const int K = static_cast<int>(states.size());
  Eigen::MatrixXd costs(T, K);
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd x = panel.returns.row(t).transpose();
    for (int k = 0; k < K; ++k) costs(t, k) = mahalanobis_sq(x, states[k]);
  }
  return costs;
}

Precision dense_precision(const Eigen::MatrixXd& obs) {
  const Eigen::MatrixXd S = sample_covariance(obs);
  const int n = static_cast<int>(S.rows());
  Eigen::MatrixXd A = S;
  A.diagonal().array() += 1e-6 * S.trace() / static_cast<double>(n);
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NumericError("regularized covariance is not positive definite");
  }
  Precision p;
  p.mat = llt.solve(Eigen::MatrixXd::Identity(n, n));
  p.mat = ((p.mat + p.mat.transpose()) / 2.0).eval();
  double ld = 0.0;
  for (int i = 0; i < n; ++i) ld += std::log(llt.matrixL()(i, i));
  p.logdet = -2.0 * ld;  // log det of the inverse
  return p;
}

namespace {

MarketState fit_state(const Eigen::MatrixXd& obs, bool sparse) {
  MarketState s;
  s.mu = sample_mean(obs);
  if (sparse) {
    const SimilarityMatrix sim = prepare_similarity(obs, {});
    const TmfgGraph graph = build_tmfg(sim);
    s.precision = logo_precision(obs, graph);
  } else {
    s.precision = dense_precision(obs);
  }
  return s;
}

Eigen::MatrixXd cluster_rows(const ReturnsPanel& panel, const std::vector<int>& labels,
                             int label, int count) {
  Eigen::MatrixXd out(count, panel.n());
  int r = 0;
  for (int t = 0; t < panel.T(); ++t) {
    if (labels[t] == label) out.row(r++) = panel.returns.row(t);
  }
  return out;
}

std::vector<int> count_labels(const std::vector<int>& labels, int K) {
  std::vector<int> counts(K, 0);
  for (int v : labels) ++counts[v - 1];
  return counts;
}

// Moves the T/K rows farthest from their currently assigned state into the
// deficient cluster.
void repair_cluster(std::vector<int>& labels, int deficient_label,
                    const Eigen::MatrixXd& costs, std::vector<char>& taken) {
  const int T = static_cast<int>(labels.size());
  const int K = static_cast<int>(costs.cols());
  std::vector<int> order;
  order.reserve(T);
  for (int t = 0; t < T; ++t) {
    if (!taken[t] && labels[t] != deficient_label) order.push_back(t);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return costs(a, labels[a] - 1) > costs(b, labels[b] - 1);
  });
  const int want = T / K;
  const int grab = std::min<int>(want, static_cast<int>(order.size()));
  for (int i = 0; i < grab; ++i) {
    labels[order[i]] = deficient_label;
    taken[order[i]] = 1;
  }
}

struct Attempt {
  IccFit fit;
  bool ok = false;
  std::string error;
};

Attempt run_attempt(const ReturnsPanel& panel, const IccConfig& config,
                    std::vector<int> labels) {
  const int T = panel.T();
  const int K = config.K;
  Attempt out;
  IccFit& fit = out.fit;

  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<MarketState> best_states;
  Segmentation best_seg;

  std::optional<Eigen::MatrixXd> prev_costs;  // distances under the previous states
  int iter = 0;
  bool converged = false;
  try {
    for (iter = 1; iter <= config.max_iters; ++iter) {
      std::vector<int> counts = count_labels(labels, K);
      bool deficient = false;
      for (int c : counts) deficient = deficient || c < config.min_cluster;
      if (deficient) {
        if (!prev_costs) {
          out.error = "initial assignment left a cluster below minimum size";
          return out;
        }
        std::vector<char> taken(T, 0);
        for (int k = 0; k < K; ++k) {
          if (counts[k] < config.min_cluster) {
            repair_cluster(labels, k + 1, *prev_costs, taken);
          }
        }
        counts = count_labels(labels, K);
        for (int c : counts) {
          if (c < config.min_cluster) {
            out.error = "cluster repair could not reach minimum size";
            return out;
          }
        }
        fit.warnings.push_back("re-seeded undersized cluster at iteration " +
                               std::to_string(iter));
      }

      std::vector<MarketState> states;
      states.reserve(K);
      for (int k = 0; k < K; ++k) {
        states.push_back(fit_state(cluster_rows(panel, labels, k + 1, counts[k]),
                                   config.sparse));
      }

      const Eigen::MatrixXd costs = cost_matrix(panel, states);
      Segmentation seg = viterbi_assign(costs, config.gamma);
      fit.cost_trace.push_back(seg.total_cost);
      if (fit.cost_trace.size() >= 2) {
        const double prev = fit.cost_trace[fit.cost_trace.size() - 2];
        if (seg.total_cost > prev + 1e-9) {
          fit.warnings.push_back("total cost increased at iteration " +
                                 std::to_string(iter));
        }
      }
      // only a path that keeps every cluster usable can be kept as a result;
      // an all-one-state path always has a lower penalized cost, so tracking
      // it would drown out every genuine segmentation
      const std::vector<int> seg_counts = count_labels(seg.labels, K);
      const bool seg_valid =
          *std::min_element(seg_counts.begin(), seg_counts.end()) >= config.min_cluster;
      if (seg_valid && seg.total_cost < best_cost) {
        best_cost = seg.total_cost;
        best_states = states;
        best_seg = seg;
      }

      if (seg.labels == labels) {
        best_states = std::move(states);
        best_seg = std::move(seg);
        converged = true;
        break;
      }
      labels = seg.labels;
      prev_costs = costs;
    }
  } catch (const NumericError& e) {
    out.error = e.what();
    return out;
  } catch (const DataError& e) {
    out.error = e.what();
    return out;
  }

  fit.iterations = std::min(iter, config.max_iters);
  fit.converged = converged;
  if (!converged) fit.warnings.push_back("no label fixed point within iteration cap");
  if (best_states.empty()) {
    out.error = "every iterate collapsed below the minimum cluster size";
    return out;
  }
  fit.states = std::move(best_states);
  fit.seg = std::move(best_seg);
  out.ok = true;
  return out;
}

// Orders states by descending mean of mu (state 1 = highest) and relabels.
void canonicalize(IccFit& fit) {
  const int K = static_cast<int>(fit.states.size());
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return fit.states[a].mu.mean() > fit.states[b].mu.mean();
  });
  std::vector<int> new_label(K);  // old index -> new 1-based label
  std::vector<MarketState> states;
  states.reserve(K);
  for (int pos = 0; pos < K; ++pos) {
    new_label[order[pos]] = pos + 1;
    states.push_back(std::move(fit.states[order[pos]]));
    states.back().label = pos + 1;
  }
  fit.states = std::move(states);
  for (int& v : fit.seg.labels) v = new_label[v - 1];
}

void validate_config(const ReturnsPanel& panel, const IccConfig& config) {
  if (config.K < 1) throw std::invalid_argument("K must be >= 1");
  if (!(config.gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (config.min_cluster < 2) throw std::invalid_argument("min_cluster must be >= 2");
  if (panel.T() < config.K * config.min_cluster) {
    throw std::invalid_argument("need at least K * min_cluster observations");
  }
  if (config.sparse && panel.n() < 4) {
    throw std::invalid_argument("sparse precision needs at least 4 series");
  }
}

}  // namespace

namespace {

std::vector<int> random_block_labels(const ReturnsPanel& panel, const IccConfig& config,
                                     std::uint64_t stream_index) {
  const int T = panel.T();
  Rng rng(derive_seed(config.seed, "init", stream_index));
  // Random assignment in persistent blocks. Independent per-row draws make
  // the K initial clusters statistically identical, and the re-assignment
  // step then collapses onto a single state; blocks give the clusters
  // macroscopically different compositions to amplify.
  const int block = std::max(10, T / (4 * config.K));
  std::vector<int> labels(T);
  int cur = 1 + static_cast<int>(rng.uniform_int(0, config.K - 1));
  for (int t = 0; t < T; ++t) {
    if (t > 0 && config.K > 1 && rng.uniform() < 1.0 / block) {
      int hop = 1 + static_cast<int>(rng.uniform_int(0, config.K - 2));
      cur = (cur - 1 + hop) % config.K + 1;
    }
    labels[t] = cur;
  }
  return labels;
}

double joint_log_likelihood(const ReturnsPanel& panel, const IccFit& fit) {
  double ll = 0.0;
  for (int t = 0; t < panel.T(); ++t) {
    const Eigen::VectorXd x = panel.returns.row(t).transpose();
    ll += log_likelihood(x, fit.states[fit.seg.labels[t] - 1]);
  }
  return ll;
}

}  // namespace

IccFit fit_icc(const ReturnsPanel& panel, const IccConfig& config) {
  validate_config(panel, config);
  if (config.restarts < 1) throw std::invalid_argument("restarts must be >= 1");

  bool have_winner = false;
  IccFit winner;
  std::string last_error;
  for (int restart = 0; restart < config.restarts; ++restart) {
    // each start gets its own run of re-seed attempts
    for (int attempt = 0; attempt <= config.max_reseeds; ++attempt) {
      const std::uint64_t stream =
          static_cast<std::uint64_t>(restart) * (config.max_reseeds + 1) + attempt;
      Attempt a = run_attempt(panel, config,
                              random_block_labels(panel, config, stream));
      if (!a.ok) {
        last_error = a.error;
        continue;
      }
      a.fit.reseeds = attempt;
      if (attempt > 0) {
        a.fit.warnings.push_back("recovered after " + std::to_string(attempt) +
                                 " re-seed(s)");
      }
      a.fit.log_likelihood = joint_log_likelihood(panel, a.fit);
      if (!have_winner || a.fit.log_likelihood > winner.log_likelihood) {
        winner = std::move(a.fit);
        have_winner = true;
      }
      break;
    }
  }
  if (!have_winner) {
    throw NumericError("segmentation failed after " + std::to_string(config.max_reseeds) +
                       " re-seeds: " + last_error);
  }
  canonicalize(winner);
  return winner;
}

IccFit fit_icc(const ReturnsPanel& panel, const IccConfig& config,
               const std::vector<int>& initial_labels) {
  validate_config(panel, config);
  if (static_cast<int>(initial_labels.size()) != panel.T()) {
    throw std::invalid_argument("initial labels length must match panel");
  }
  for (int v : initial_labels) {
    if (v < 1 || v > config.K) throw std::invalid_argument("initial labels must lie in 1..K");
  }
  Attempt a = run_attempt(panel, config, initial_labels);
  if (!a.ok) throw NumericError("segmentation from given labels failed: " + a.error);
  a.fit.log_likelihood = joint_log_likelihood(panel, a.fit);
  canonicalize(a.fit);
  return a.fit;
}

double grid_search_gamma(const ReturnsPanel& panel, const IccConfig& config,
                         const std::vector<double>& grid,
                         double target_segment_length) {
  if (grid.empty()) throw std::invalid_argument("gamma grid is empty");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double best_gamma = 0.0;
  double best_gap = std::numeric_limits<double>::infinity();
  std::string last_error;
  for (double g : sorted) {
    IccConfig c = config;
    c.gamma = g;
    double mean_len;
    try {
      const IccFit fit = fit_icc(panel, c);
      mean_len = static_cast<double>(panel.T()) / static_cast<double>(fit.seg.switches + 1);
    } catch (const NumericError& e) {
      last_error = e.what();
      continue;
    }
    const double gap = std::abs(mean_len - target_segment_length);
    if (gap < best_gap) {  // strict: ties keep the smaller gamma
      best_gap = gap;
      best_gamma = g;
    }
  }
  if (!std::isfinite(best_gap)) {
    throw NumericError("every gamma in the grid failed to fit: " + last_error);
  }
  return best_gamma;
}

}  // namespace icc

#include "icc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "icc/errors.hpp"
#include "icc/linalg.hpp"
#include "icc/rng.hpp"

namespace icc {

std::vector<int> GmmModel::hard_labels() const {
  std::vector<int> labels(responsibilities.rows());
  for (int t = 0; t < responsibilities.rows(); ++t) {
    int best = 0;
    for (int k = 1; k < K; ++k) {
      if (responsibilities(t, k) > responsibilities(t, best)) best = k;
    }
    labels[t] = best + 1;
  }
  return labels;
}

namespace {

struct Component {
  double weight;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  // cached factorization of cov
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet_cov;
};

void floor_diagonal(Eigen::MatrixXd& cov) {
  const double n = static_cast<double>(cov.rows());
  cov.diagonal().array() += 1e-8 * cov.trace() / n;
}

void refactor(Component& c) {
  c.llt.compute(c.cov);
  if (c.llt.info() != Eigen::Success) {
    throw NumericError("mixture component covariance lost positive definiteness");
  }
  double ld = 0.0;
  for (int i = 0; i < c.cov.rows(); ++i) ld += std::log(c.llt.matrixL()(i, i));
  c.logdet_cov = 2.0 * ld;
}

double log_pdf(const Component& c, const Eigen::VectorXd& x) {
  const Eigen::VectorXd d = x - c.mean;
  const double quad = d.dot(c.llt.solve(d));
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + c.logdet_cov + quad);
}

std::vector<Eigen::VectorXd> kmeanspp_centers(const Eigen::MatrixXd& X, int K, Rng& rng) {
  const int T = static_cast<int>(X.rows());
  std::vector<Eigen::VectorXd> centers;
  centers.push_back(X.row(static_cast<int>(rng.uniform_int(0, T - 1))).transpose());
  Eigen::VectorXd d2 = (X.rowwise() - centers[0].transpose()).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < K) {
    const double total = d2.sum();
    int pick;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = T - 1;
      for (int t = 0; t < T; ++t) {
        acc += d2[t];
        if (acc >= target) {
          pick = t;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.uniform_int(0, T - 1));
    }
    centers.push_back(X.row(pick).transpose());
    d2 = d2.cwiseMin(
        (X.rowwise() - centers.back().transpose()).rowwise().squaredNorm());
  }
  return centers;
}

GmmModel run_em(const Eigen::MatrixXd& X, int K, std::uint64_t seed, int attempt) {
  const int T = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());

  Rng rng(derive_seed(seed, "gmm-init", static_cast<std::uint64_t>(attempt)));
  const std::vector<Eigen::VectorXd> centers = kmeanspp_centers(X, K, rng);

  // hard assignment to the nearest center gives the starting parameters
  std::vector<std::vector<int>> members(K);
  for (int t = 0; t < T; ++t) {
    int best = 0;
    double best_d = (X.row(t).transpose() - centers[0]).squaredNorm();
    for (int k = 1; k < K; ++k) {
      const double d = (X.row(t).transpose() - centers[k]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    members[best].push_back(t);
  }

  std::vector<Component> comps(K);
  for (int k = 0; k < K; ++k) {
    Component& c = comps[k];
    c.weight = std::max<double>(members[k].size(), 1.0) / static_cast<double>(T);
    c.mean = Eigen::VectorXd::Zero(n);
    c.cov = Eigen::MatrixXd::Zero(n, n);
    if (members[k].empty()) {
      // fall back to the global moments; EM can still recover the component
      c.mean = sample_mean(X);
      c.cov = sample_covariance(X);
    } else {
      for (int t : members[k]) c.mean += X.row(t).transpose();
      c.mean /= static_cast<double>(members[k].size());
      for (int t : members[k]) {
        const Eigen::VectorXd d = X.row(t).transpose() - c.mean;
        c.cov += d * d.transpose();
      }
      c.cov /= std::max<double>(members[k].size(), 1.0);
    }
    floor_diagonal(c.cov);
    refactor(c);
  }
  double wsum = 0.0;
  for (const auto& c : comps) wsum += c.weight;
  for (auto& c : comps) c.weight /= wsum;

  GmmModel model;
  model.K = K;
  model.responsibilities.resize(T, K);
  Eigen::MatrixXd logr(T, K);

  bool converged = false;
  int iter = 0;
  for (iter = 1; iter <= 500; ++iter) {
    for (int t = 0; t < T; ++t) {
      const Eigen::VectorXd x = X.row(t).transpose();
      for (int k = 0; k < K; ++k) {
        logr(t, k) = std::log(comps[k].weight) + log_pdf(comps[k], x);
      }
    }
    double ll = 0.0;
    for (int t = 0; t < T; ++t) {
      const double mx = logr.row(t).maxCoeff();
      const double lse = mx + std::log((logr.row(t).array() - mx).exp().sum());
      ll += lse;
      model.responsibilities.row(t) = (logr.row(t).array() - lse).exp();
    }
    model.ll_trace.push_back(ll);
    if (model.ll_trace.size() >= 2 &&
        ll - model.ll_trace[model.ll_trace.size() - 2] < 1e-6) {
      converged = true;
      break;
    }

    for (int k = 0; k < K; ++k) {
      const double Nk = model.responsibilities.col(k).sum();
      if (Nk < 1e-6) {
        throw NumericError("mixture component " + std::to_string(k + 1) +
                           " collapsed to vanishing weight");
      }
      Component& c = comps[k];
      c.weight = Nk / static_cast<double>(T);
      c.mean = (model.responsibilities.col(k).transpose() * X).transpose() / Nk;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
      for (int t = 0; t < T; ++t) {
        const Eigen::VectorXd d = X.row(t).transpose() - c.mean;
        cov += model.responsibilities(t, k) * (d * d.transpose());
      }
      c.cov = cov / Nk;
      floor_diagonal(c.cov);
      refactor(c);
    }
  }

  model.iterations = std::min(iter, 500);
  model.converged = converged;
  model.reseeds = attempt;

  // order components by descending mean level so labels are comparable
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return comps[a].mean.mean() > comps[b].mean.mean();
  });
  Eigen::MatrixXd resp(T, K);
  for (int pos = 0; pos < K; ++pos) {
    const Component& c = comps[order[pos]];
    model.weights.push_back(c.weight);
    model.means.push_back(c.mean);
    model.covariances.push_back(c.cov);
    resp.col(pos) = model.responsibilities.col(order[pos]);
  }
  model.responsibilities = std::move(resp);
  return model;
}

}  // namespace

GmmModel fit_gmm(const ReturnsPanel& panel, int K, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (panel.T() < K) throw std::invalid_argument("need at least K observations");
  try {
    return run_em(panel.returns, K, seed, 0);
  } catch (const NumericError&) {
    // one fresh seeding before giving up
  }
  try {
    return run_em(panel.returns, K, seed, 1);
  } catch (const NumericError& e) {
    throw NumericError(std::string("mixture fit failed after re-seeding: ") + e.what());
  }
}

RidgePrecision ridge_precision(const Eigen::MatrixXd& obs, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  Eigen::MatrixXd A = sample_covariance(obs);
  A.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NumericError("covariance is singular; use lambda > 0");
  }
  const int n = static_cast<int>(A.rows());
  RidgePrecision r;
  r.mat = llt.solve(Eigen::MatrixXd::Identity(n, n));
  r.mat = ((r.mat + r.mat.transpose()) / 2.0).eval();
  double ld = 0.0;
  for (int i = 0; i < n; ++i) ld += std::log(llt.matrixL()(i, i));
  r.logdet = -2.0 * ld;
  r.lambda = lambda;
  return r;
}

double cv_select_lambda(const Eigen::MatrixXd& obs, const std::vector<double>& grid,
                        int folds) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  const int m = static_cast<int>(obs.rows());
  const int n = static_cast<int>(obs.cols());
  if (m < 2 * folds) throw std::invalid_argument("too few rows for the fold count");

  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());

  double best_lambda = sorted.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (double lambda : sorted) {
    double score_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      const int lo = f * m / folds;
      const int hi = (f + 1) * m / folds;
      Eigen::MatrixXd train(m - (hi - lo), n);
      train.topRows(lo) = obs.topRows(lo);
      train.bottomRows(m - hi) = obs.bottomRows(m - hi);
      const Eigen::VectorXd mu = sample_mean(train);
      const RidgePrecision p = ridge_precision(train, lambda);
      double fold_ll = 0.0;
      for (int t = lo; t < hi; ++t) {
        const Eigen::VectorXd d = obs.row(t).transpose() - mu;
        fold_ll += 0.5 * (p.logdet - d.dot(p.mat * d) -
                          n * std::log(2.0 * std::numbers::pi));
      }
      score_sum += fold_ll / static_cast<double>(hi - lo);
    }
    const double score = score_sum / static_cast<double>(folds);
    if (score >= best_score) {  // ties keep the larger lambda
      best_score = score;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(20);
  for (int i = 0; i < 20; ++i) {
    grid[i] = std::pow(10.0, -4.0 + 5.0 * static_cast<double>(i) / 19.0);
  }
  return grid;
}

double fraction_positive(const ReturnsPanel& panel, int t) {
  if (t < 0 || t >= panel.T()) throw std::invalid_argument("row index out of range");
  int count = 0;
  for (int j = 0; j < panel.n(); ++j) {
    if (panel.returns(t, j) > 0.0) ++count;  // zeros count as non-positive
  }
  return static_cast<double>(count) / static_cast<double>(panel.n());
}

}  // namespace icc

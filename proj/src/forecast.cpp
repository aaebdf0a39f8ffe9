#include "icc/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "icc/baselines.hpp"
#include "icc/errors.hpp"

namespace icc {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

LlrSeries rolling_llr(const ReturnsPanel& panel, const MarketState& state1,
                      const MarketState& state2, int delta) {
  const int T = panel.T();
  if (delta < 1) throw std::invalid_argument("delta must be >= 1");
  if (delta > T) throw std::invalid_argument("delta exceeds the panel length");

  std::vector<double> diff(T);
  for (int s = 0; s < T; ++s) {
    const Eigen::VectorXd x = panel.returns.row(s).transpose();
    diff[s] = log_likelihood(x, state1) - log_likelihood(x, state2);
  }

  LlrSeries out;
  out.delta = delta;
  out.first_defined = delta - 1;
  out.values.reserve(T - delta + 1);
  out.dates.reserve(T - delta + 1);
  for (int t = delta - 1; t < T; ++t) {
    double sum = 0.0;
    for (int s = t - delta + 1; s <= t; ++s) sum += diff[s];
    out.values.push_back(sum);
    out.dates.push_back(panel.dates[t]);
  }
  return out;
}

namespace {

double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double penalized_ll(const std::vector<double>& x, const std::vector<char>& z,
                    double b0, double b1, double lambda) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = b0 + b1 * x[i];
    ll += (z[i] ? t : 0.0) - softplus(t);
  }
  return ll - 0.5 * lambda * (b0 * b0 + b1 * b1);
}

// Newton ascent on the (optionally penalized) log-likelihood. Returns true
// when the gradient criterion was met.
bool newton(const std::vector<double>& x, const std::vector<char>& z, double lambda,
            int max_iters, LogisticFit& fit) {
  const std::size_t N = x.size();
  double b0 = 0.0, b1 = 0.0;
  for (int iter = 1; iter <= max_iters; ++iter) {
    double g0 = -lambda * b0, g1 = -lambda * b1;
    double h00 = lambda, h01 = 0.0, h11 = lambda;
    for (std::size_t i = 0; i < N; ++i) {
      const double p = sigmoid(b0 + b1 * x[i]);
      const double r = (z[i] ? 1.0 : 0.0) - p;
      const double w = p * (1.0 - p);
      g0 += r;
      g1 += r * x[i];
      h00 += w;
      h01 += w * x[i];
      h11 += w * x[i] * x[i];
    }
    fit.iterations = iter;
    fit.grad_inf_norm = std::max(std::abs(g0), std::abs(g1));
    fit.beta0 = b0;
    fit.beta1 = b1;
    if (fit.grad_inf_norm < 1e-8) return true;

    const double det = h00 * h11 - h01 * h01;
    if (!(std::abs(det) > 1e-300)) return false;
    double d0 = (h11 * g0 - h01 * g1) / det;
    double d1 = (h00 * g1 - h01 * g0) / det;

    const double before = penalized_ll(x, z, b0, b1, lambda);
    // near the optimum the improvement falls below the log-likelihood's own
    // rounding noise, so a plain >= would reject the full Newton step
    const double slack = 1e-10 * (1.0 + std::abs(before));
    double step = 1.0;
    for (int half = 0; half < 40; ++half) {
      if (penalized_ll(x, z, b0 + step * d0, b1 + step * d1, lambda) >= before - slack) break;
      step /= 2.0;
    }
    b0 += step * d0;
    b1 += step * d1;
  }
  return false;
}

}  // namespace

LogisticFit fit_logistic(const std::vector<double>& x, const std::vector<int>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("feature/label lengths differ");
  if (x.empty()) throw std::invalid_argument("empty training data");
  std::vector<char> z(x.size());
  int ones = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1 && y[i] != 2) throw std::invalid_argument("labels must lie in {1,2}");
    z[i] = y[i] == 1;
    ones += z[i];
  }
  if (ones == 0 || ones == static_cast<int>(y.size())) {
    throw DataError("both classes must be present to fit the regression");
  }

  // with a single feature the classes are linearly separable exactly when
  // their value ranges do not overlap; in that case the unpenalized optimum
  // runs away to infinity and the quadratic penalty pins it down
  double min1 = std::numeric_limits<double>::infinity(), max1 = -min1;
  double min2 = min1, max2 = -min1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (z[i]) {
      min1 = std::min(min1, x[i]);
      max1 = std::max(max1, x[i]);
    } else {
      min2 = std::min(min2, x[i]);
      max2 = std::max(max2, x[i]);
    }
  }
  const bool separable = max1 < min2 || max2 < min1;

  LogisticFit fit;
  fit.regularized = separable;
  if (newton(x, z, separable ? 1e-6 : 0.0, separable ? 500 : 100, fit)) return fit;
  if (!separable) {
    fit = LogisticFit{};
    fit.regularized = true;
    if (newton(x, z, 1e-6, 500, fit)) return fit;
  }
  throw NumericError("logistic fit did not converge");
}

double calibrate_threshold(const LogisticFit& fit, const std::vector<double>& x,
                           const std::vector<int>& y, int folds) {
  if (x.size() != y.size()) throw std::invalid_argument("feature/label lengths differ");
  if (x.empty()) throw std::invalid_argument("empty validation data");
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  const int m = static_cast<int>(x.size());

  std::vector<double> prob(m);
  for (int i = 0; i < m; ++i) prob[i] = sigmoid(fit.beta0 + fit.beta1 * x[i]);

  double best_th = 0.5;
  double best_score = -1.0;
  for (int step = 0; step <= 40; ++step) {
    const double th = (30 + step) / 100.0;
    double score_sum = 0.0;
    int score_count = 0;
    for (int f = 0; f < folds; ++f) {
      const int lo = f * m / folds;
      const int hi = (f + 1) * m / folds;
      int tp = 0, fn = 0, tn = 0, fp = 0;
      for (int i = lo; i < hi; ++i) {
        const bool pred1 = prob[i] > th;
        if (y[i] == 1) {
          pred1 ? ++tp : ++fn;
        } else {
          pred1 ? ++fp : ++tn;
        }
      }
      const int pos = tp + fn, neg = tn + fp;
      if (pos == 0 && neg == 0) continue;
      double bacc;
      if (pos == 0) {
        bacc = static_cast<double>(tn) / neg;
      } else if (neg == 0) {
        bacc = static_cast<double>(tp) / pos;
      } else {
        bacc = 0.5 * (static_cast<double>(tp) / pos + static_cast<double>(tn) / neg);
      }
      score_sum += bacc;
      ++score_count;
    }
    const double score = score_count > 0 ? score_sum / score_count : 0.0;
    // ties prefer the threshold nearest 0.5 (the lower one when equidistant)
    if (score > best_score + 1e-12 ||
        (score > best_score - 1e-12 &&
         std::abs(th - 0.5) < std::abs(best_th - 0.5) - 1e-12)) {
      best_score = score;
      best_th = th;
    }
  }
  return best_th;
}

Prediction predict_state(const ForecastModel& model, double r) {
  Prediction p;
  p.probability = sigmoid(model.beta0 + model.beta1 * r);
  p.label = p.probability > model.threshold ? 1 : 2;
  return p;
}

ForecastExperiment run_forecast_experiment(const ReturnsPanel& panel,
                                           const ForecastExperimentConfig& config) {
  if (!(config.train_frac > 0.0 && config.train_frac < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0,1)");
  }
  if (config.delta < 1) throw std::invalid_argument("delta must be >= 1");
  if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");

  const int T = panel.T();
  const int T_train = static_cast<int>(config.train_frac * T);
  const int t_min = config.delta - 1;  // same pair range for both feature kinds
  const int t_max = T - 1 - config.horizon;
  const int t_split = T_train - config.horizon;  // first t whose target is out of train
  if (t_min >= t_split) throw std::invalid_argument("train window too short for delta");
  if (t_split > t_max) throw std::invalid_argument("split leaves no test pairs");

  IccConfig icc_config = config.icc;
  icc_config.K = 2;

  ForecastExperiment ex;
  const ReturnsPanel train_panel = panel.slice_rows(0, T_train);
  const IccFit train_fit = fit_icc(train_panel, icc_config);
  const IccFit whole_fit = fit_icc(panel, icc_config);
  ex.train_labels = train_fit.seg.labels;
  ex.whole_labels = whole_fit.seg.labels;
  ex.train_rows = T_train;

  // feature[t] for every panel row t >= t_min
  std::vector<double> feature_at(T, 0.0);
  if (config.fraction_positive_feature) {
    for (int t = t_min; t < T; ++t) feature_at[t] = fraction_positive(panel, t);
  } else {
    ex.llr = rolling_llr(panel, train_fit.states[0], train_fit.states[1], config.delta);
    for (int t = t_min; t < T; ++t) feature_at[t] = ex.llr.values[t - t_min];
  }

  std::vector<double> train_x;
  std::vector<int> train_y;
  for (int t = t_min; t < t_split; ++t) {
    train_x.push_back(feature_at[t]);
    train_y.push_back(train_fit.seg.labels[t + config.horizon]);
  }

  ex.fit = fit_logistic(train_x, train_y);
  const double threshold = calibrate_threshold(ex.fit, train_x, train_y, config.folds);

  ex.model.beta0 = ex.fit.beta0;
  ex.model.beta1 = ex.fit.beta1;
  ex.model.threshold = threshold;
  ex.model.delta = config.delta;
  ex.model.horizon = config.horizon;
  ex.model.states = train_fit.states;

  for (int t = t_split; t <= t_max; ++t) {
    const Prediction p = predict_state(ex.model, feature_at[t]);
    ex.dates.push_back(panel.dates[t + config.horizon]);
    ex.feature.push_back(feature_at[t]);
    ex.probability.push_back(p.probability);
    ex.predicted.push_back(p.label);
    ex.actual.push_back(whole_fit.seg.labels[t + config.horizon]);
  }
  ex.report = classification_metrics(ex.predicted, ex.actual);
  return ex;
}

}  // namespace icc

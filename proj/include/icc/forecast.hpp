#pragma once

#include <string>
#include <vector>

#include "icc/icc.hpp"
#include "icc/market_state.hpp"
#include "icc/metrics.hpp"
#include "icc/panel.hpp"

namespace icc {

// Rolling window sum of per-observation log-likelihood differences between
// two states. Entry i covers panel row first_defined + i, whose window is the
// delta rows ending there.
struct LlrSeries {
  int delta = 0;
  int first_defined = 0;             // 0-based panel row of the first value
  std::vector<double> values;        // size T - delta + 1
  std::vector<std::string> dates;    // dates of the defined rows
};

LlrSeries rolling_llr(const ReturnsPanel& panel, const MarketState& state1,
                      const MarketState& state2, int delta);

struct LogisticFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  int iterations = 0;
  double grad_inf_norm = 0.0;
  bool regularized = false;  // quadratic penalty engaged (separable data)
};

// Maximum-likelihood fit of P(y = 1 | x) = sigmoid(beta0 + beta1 x) by Newton
// steps; y entries in {1,2} with 1 the positive class. Falls back to a 1e-6
// quadratic penalty when the classes are separable.
LogisticFit fit_logistic(const std::vector<double>& x, const std::vector<int>& y);

double sigmoid(double z);

// Probability cut-off from a 0.01-step grid in [0.3, 0.7] maximizing mean
// balanced accuracy over contiguous validation folds; ties prefer the value
// nearest 0.5.
double calibrate_threshold(const LogisticFit& fit, const std::vector<double>& x,
                           const std::vector<int>& y, int folds);

struct ForecastModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double threshold = 0.5;
  int delta = 24;
  int horizon = 1;
  std::vector<MarketState> states;  // the two reference states, bull first
};

struct Prediction {
  double probability = 0.0;
  int label = 2;  // 1 iff probability > threshold
};

Prediction predict_state(const ForecastModel& model, double r);

struct ForecastExperimentConfig {
  IccConfig icc;           // segmentation settings (K forced to 2)
  double train_frac = 0.65;
  int delta = 24;
  int horizon = 1;
  int folds = 5;
  bool fraction_positive_feature = false;  // regress on the positive-share instead
};

struct ForecastExperiment {
  ForecastModel model;
  LogisticFit fit;
  int train_rows = 0;
  // test-set pairs, aligned: feature at row t predicts the label at t + horizon
  std::vector<std::string> dates;  // date of the predicted row t + horizon
  std::vector<double> feature;
  std::vector<double> probability;
  std::vector<int> predicted;
  std::vector<int> actual;  // whole-period segmentation labels
  ForecastReport report;
  LlrSeries llr;  // full-panel series under the train states
  std::vector<int> train_labels;
  std::vector<int> whole_labels;
};

// Train/test protocol: segment the first train_frac of the panel, build the
// feature series under the train states, fit and calibrate the logistic model
// on train pairs, score test pairs against the whole-period segmentation.
ForecastExperiment run_forecast_experiment(const ReturnsPanel& panel,
                                           const ForecastExperimentConfig& config);

}  // namespace icc

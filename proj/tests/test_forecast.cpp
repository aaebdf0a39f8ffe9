#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "icc/errors.hpp"
#include "icc/forecast.hpp"
#include "icc/market_state.hpp"
#include "icc/rng.hpp"
#include "icc/synthetic.hpp"

using namespace icc;

namespace {

MarketState diagonal_state(const Eigen::VectorXd& mu, const Eigen::VectorXd& prec) {
  MarketState s;
  s.mu = mu;
  s.precision.mat = prec.asDiagonal();
  s.precision.logdet = prec.array().log().sum();
  return s;
}

}  // namespace

TEST_CASE("identical states give an identically zero series") {
  Rng rng(1);
  const auto panel =
      test_helpers::panel_from_matrix(test_helpers::gaussian_matrix(rng, 30, 3));
  const auto s = diagonal_state(Eigen::Vector3d(0.1, 0.0, -0.1),
                                Eigen::Vector3d(1.0, 2.0, 0.5));
  const auto series = rolling_llr(panel, s, s, 5);
  REQUIRE(series.values.size() == 26);
  CHECK(series.first_defined == 4);
  for (double v : series.values) CHECK(v == 0.0);
}

TEST_CASE("window of one is the raw likelihood difference") {
  Rng rng(2);
  const auto panel =
      test_helpers::panel_from_matrix(test_helpers::gaussian_matrix(rng, 20, 2));
  const auto s1 = diagonal_state(Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(1.0, 1.0));
  const auto s2 = diagonal_state(Eigen::Vector2d(-0.1, -0.1), Eigen::Vector2d(2.0, 1.5));
  const auto series = rolling_llr(panel, s1, s2, 1);
  REQUIRE(series.values.size() == 20);
  CHECK(series.first_defined == 0);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x = panel.returns.row(t).transpose();
    CHECK(series.values[t] ==
          doctest::Approx(log_likelihood(x, s1) - log_likelihood(x, s2))
              .epsilon(1e-14));
  }
}

TEST_CASE("three-day window matches term-by-term hand summation") {
  Eigen::MatrixXd obs(5, 2);
  obs << 0.1, -0.2, 0.0, 0.3, -0.1, 0.1, 0.2, -0.3, 0.05, 0.15;
  const auto panel = test_helpers::panel_from_matrix(obs);
  const auto s1 = diagonal_state(Eigen::Vector2d(0.05, 0.0), Eigen::Vector2d(4.0, 2.0));
  const auto s2 = diagonal_state(Eigen::Vector2d(-0.05, 0.0), Eigen::Vector2d(1.0, 3.0));
  const auto series = rolling_llr(panel, s1, s2, 3);
  REQUIRE(series.values.size() == 3);
  CHECK(series.dates[0] == panel.dates[2]);
  for (int t = 2; t < 5; ++t) {
    double hand = 0.0;
    for (int s = t - 2; s <= t; ++s) {
      const Eigen::VectorXd x = obs.row(s).transpose();
      hand += log_likelihood(x, s1) - log_likelihood(x, s2);
    }
    CHECK(series.values[t - 2] == doctest::Approx(hand).epsilon(1e-12));
  }
}

TEST_CASE("consecutive values telescope") {
  Rng rng(3);
  const auto panel =
      test_helpers::panel_from_matrix(test_helpers::gaussian_matrix(rng, 60, 4));
  const auto s1 = diagonal_state(Eigen::Vector4d(0.1, 0.0, -0.1, 0.2),
                                 Eigen::Vector4d(1.0, 2.0, 0.5, 1.5));
  const auto s2 = diagonal_state(Eigen::Vector4d(-0.1, 0.1, 0.0, -0.2),
                                 Eigen::Vector4d(2.0, 1.0, 1.5, 0.5));
  const int delta = 7;
  const auto series = rolling_llr(panel, s1, s2, delta);
  for (std::size_t i = 1; i < series.values.size(); ++i) {
    const int t = series.first_defined + static_cast<int>(i);
    const Eigen::VectorXd enter = panel.returns.row(t).transpose();
    const Eigen::VectorXd leave = panel.returns.row(t - delta).transpose();
    const double expect = (log_likelihood(enter, s1) - log_likelihood(enter, s2)) -
                          (log_likelihood(leave, s1) - log_likelihood(leave, s2));
    CHECK(series.values[i] - series.values[i - 1] ==
          doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("window bounds are validated") {
  Rng rng(4);
  const auto panel =
      test_helpers::panel_from_matrix(test_helpers::gaussian_matrix(rng, 10, 2));
  const auto s = diagonal_state(Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 1.0));
  CHECK_THROWS_AS(rolling_llr(panel, s, s, 0), std::invalid_argument);
  CHECK_THROWS_AS(rolling_llr(panel, s, s, 11), std::invalid_argument);
  CHECK(rolling_llr(panel, s, s, 10).values.size() == 1);
}

TEST_CASE("symmetric data fits a zero intercept") {
  std::vector<double> x;
  std::vector<int> y;
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const double v = 0.1 + 2.0 * rng.uniform();
    x.push_back(v);
    y.push_back(1);
    x.push_back(-v);
    y.push_back(2);
    // mislabeled pairs keep the data non-separable, still symmetric
    if (i % 10 == 0) {
      x.push_back(v);
      y.push_back(2);
      x.push_back(-v);
      y.push_back(1);
    }
  }
  const auto fit = fit_logistic(x, y);
  CHECK(std::abs(fit.beta0) < 1e-6);
  CHECK(fit.beta1 > 0.0);
  CHECK(fit.grad_inf_norm < 1e-8);
}

TEST_CASE("simulated logistic data recovers the coefficients") {
  const double b0 = -0.5, b1 = 2.0;
  Rng rng(6);
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 50000; ++i) {
    const double v = rng.normal();
    const double p = sigmoid(b0 + b1 * v);
    x.push_back(v);
    y.push_back(rng.uniform() < p ? 1 : 2);
  }
  const auto fit = fit_logistic(x, y);
  CHECK(std::abs(fit.beta0 - b0) < 0.05);
  CHECK(std::abs(fit.beta1 - b1) < 0.05);
  CHECK(fit.grad_inf_norm < 1e-8);
  CHECK_FALSE(fit.regularized);
}

TEST_CASE("the fitted point is a concave optimum") {
  Rng rng(7);
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.normal();
    x.push_back(v);
    y.push_back(rng.uniform() < sigmoid(0.3 - 1.2 * v) ? 1 : 2);
  }
  const auto fit = fit_logistic(x, y);

  // negated Hessian of the log-likelihood must be positive semidefinite
  double h00 = 0.0, h01 = 0.0, h11 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = sigmoid(fit.beta0 + fit.beta1 * x[i]);
    const double w = p * (1.0 - p);
    h00 += w;
    h01 += w * x[i];
    h11 += w * x[i] * x[i];
  }
  CHECK(h00 >= 0.0);
  CHECK(h00 * h11 - h01 * h01 >= -1e-9);
}

TEST_CASE("sigmoid midpoint and degenerate slopes") {
  CHECK(sigmoid(0.0) == 0.5);
  ForecastModel model;
  model.beta0 = 0.0;
  model.beta1 = 1.0;
  model.threshold = 0.54;
  const auto p = predict_state(model, 0.0);
  CHECK(p.probability == 0.5);
  CHECK(p.label == 2);  // 0.5 is not above the cut

  ForecastModel flat;
  flat.beta0 = 0.7;
  flat.beta1 = 0.0;
  flat.threshold = 0.5;
  CHECK(predict_state(flat, -100.0).probability ==
        doctest::Approx(predict_state(flat, 100.0).probability));
}

TEST_CASE("a worked probability above the cut predicts the positive state") {
  ForecastModel model;
  model.beta0 = std::log(0.77 / 0.23);
  model.beta1 = 0.0;
  model.threshold = 0.54;
  const auto p = predict_state(model, 0.0);
  CHECK(p.probability == doctest::Approx(0.77).epsilon(1e-12));
  CHECK(p.label == 1);
}

TEST_CASE("prediction is monotone in the feature for a positive slope") {
  ForecastModel model;
  model.beta0 = -0.2;
  model.beta1 = 1.7;
  model.threshold = 0.5;
  double prev = -1.0;
  for (double r = -3.0; r <= 3.0; r += 0.25) {
    const double p = predict_state(model, r).probability;
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("one-class input is refused") {
  CHECK_THROWS_AS(fit_logistic({0.1, 0.2, 0.3}, {1, 1, 1}), DataError);
  CHECK_THROWS_AS(fit_logistic({0.1, 0.2, 0.3}, {2, 2, 2}), DataError);
  CHECK_THROWS_AS(fit_logistic({0.1}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(fit_logistic({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(fit_logistic({0.1, 0.2}, {1, 3}), std::invalid_argument);
}

TEST_CASE("separable classes engage the penalty and still converge") {
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(1.0 + 0.01 * i);
    y.push_back(1);
    x.push_back(-1.0 - 0.01 * i);
    y.push_back(2);
  }
  const auto fit = fit_logistic(x, y);
  CHECK(fit.regularized);
  CHECK(fit.beta1 > 0.0);
  CHECK(fit.grad_inf_norm < 1e-8);
}

TEST_CASE("threshold ties resolve to the value nearest one half") {
  // perfectly separated probabilities: every threshold in the grid scores 1.0
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i % 2 == 0 ? 50.0 : -50.0);
    y.push_back(i % 2 == 0 ? 1 : 2);
  }
  LogisticFit fit;
  fit.beta0 = 0.0;
  fit.beta1 = 1.0;
  CHECK(calibrate_threshold(fit, x, y, 4) == 0.5);
}

TEST_CASE("calibrated threshold tracks the Bayes cut on logistic data") {
  Rng rng(8);
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 20000; ++i) {
    const double v = rng.normal();
    x.push_back(v);
    y.push_back(rng.uniform() < sigmoid(0.4 * v) ? 1 : 2);
  }
  const auto fit = fit_logistic(x, y);
  const double th = calibrate_threshold(fit, x, y, 5);
  CHECK(th >= 0.4);
  CHECK(th <= 0.6);  // Bayes cut for symmetric classes sits at one half
}

TEST_CASE("threshold grid bounds and fold checks hold") {
  std::vector<double> x = {0.1, -0.2, 0.3, -0.4, 0.5, -0.6};
  std::vector<int> y = {1, 2, 1, 2, 1, 2};
  LogisticFit fit;
  fit.beta1 = 1.0;
  const double th = calibrate_threshold(fit, x, y, 2);
  CHECK(th >= 0.30);
  CHECK(th <= 0.70);
  CHECK_THROWS_AS(calibrate_threshold(fit, x, y, 1), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_threshold(fit, {}, {}, 2), std::invalid_argument);
}

TEST_CASE("the end-to-end experiment predicts a persistent synthetic market") {
  const auto spec = two_regime_spec(20, 1200, 80.0, 0.005, 0.05, 0.15, 0.65, 3);
  const auto panel = generate_synthetic(spec).panel;

  ForecastExperimentConfig config;
  config.icc.seed = 3;
  config.icc.K = 5;  // forced back to the two-state model
  const auto ex = run_forecast_experiment(panel, config);

  REQUIRE(ex.model.states.size() == 2);
  CHECK(ex.train_rows == static_cast<int>(0.65 * 1200));
  CHECK(ex.predicted.size() == ex.actual.size());
  CHECK(ex.predicted.size() == ex.probability.size());
  CHECK(ex.predicted.size() == ex.dates.size());
  const int t_split = ex.train_rows - config.horizon;
  CHECK(static_cast<int>(ex.predicted.size()) == 1200 - 1 - t_split);
  CHECK(ex.dates.front() == panel.dates[t_split + 1]);
  CHECK(ex.report.acc > 0.5);
  CHECK(ex.report.tp + ex.report.fn + ex.report.tn + ex.report.fp ==
        static_cast<int>(ex.predicted.size()));
  for (std::size_t i = 0; i < ex.predicted.size(); ++i) {
    CHECK((ex.predicted[i] == 1 || ex.predicted[i] == 2));
    const bool above = ex.probability[i] > ex.model.threshold;
    CHECK(ex.predicted[i] == (above ? 1 : 2));
  }

  // the fraction-positive variant runs the same protocol on the same panel
  auto alt = config;
  alt.fraction_positive_feature = true;
  const auto fp = run_forecast_experiment(panel, alt);
  CHECK(fp.predicted.size() == ex.predicted.size());
  for (double f : fp.feature) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}

TEST_CASE("experiment validation rejects impossible windows") {
  const auto spec = two_regime_spec(10, 300, 40.0, 0.02, 0.05, 0.3, 0.7, 4);
  const auto panel = generate_synthetic(spec).panel;
  ForecastExperimentConfig config;

  config.train_frac = 0.0;
  CHECK_THROWS_AS(run_forecast_experiment(panel, config), std::invalid_argument);
  config.train_frac = 1.0;
  CHECK_THROWS_AS(run_forecast_experiment(panel, config), std::invalid_argument);
  config.train_frac = 0.65;
  config.delta = 0;
  CHECK_THROWS_AS(run_forecast_experiment(panel, config), std::invalid_argument);
  config.delta = 24;
  config.horizon = 0;
  CHECK_THROWS_AS(run_forecast_experiment(panel, config), std::invalid_argument);
  config.horizon = 1;
  config.delta = 250;  // larger than the train window
  CHECK_THROWS_AS(run_forecast_experiment(panel, config), std::invalid_argument);
}

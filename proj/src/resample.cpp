#include "icc/resample.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "icc/baselines.hpp"
#include "icc/errors.hpp"
#include "icc/rng.hpp"

namespace icc {

bool apply_model_variant(const std::string& model, IccConfig& config) {
  if (model == "gmm") return true;
  if (model == "icc-sparse") {
    config.sparse = true;
  } else if (model == "icc-full") {
    config.sparse = false;
  } else if (model == "icc-sparse-g0") {
    config.sparse = true;
    config.gamma = 0.0;
  } else if (model == "icc-full-g0") {
    config.sparse = false;
    config.gamma = 0.0;
  } else {
    throw std::invalid_argument("unknown model variant '" + model + "'");
  }
  return false;
}

namespace {

ResampleRunStats run_one(const ReturnsPanel& panel, const ResampleConfig& config,
                         bool gmm, int index) {
  const int m = config.basket > 0 ? config.basket : panel.n();
  const ReturnsPanel basket =
      resample_basket(panel, m, derive_seed(config.seed, "resample",
                                            static_cast<std::uint64_t>(index)));

  IccConfig icc_config = config.icc;
  icc_config.seed = derive_seed(config.seed, "fit", static_cast<std::uint64_t>(index));

  if (config.forecast) {
    ForecastExperimentConfig fc = config.fc;
    fc.icc = icc_config;
    const ForecastExperiment ex = run_forecast_experiment(basket, fc);
    ResampleRunStats stats =
        summarize_run(index, basket, ex.whole_labels, 2, config.periods_per_year);
    stats.forecast = ex.report;
    return stats;
  }

  std::vector<int> labels;
  if (gmm) {
    labels = fit_gmm(basket, icc_config.K, icc_config.seed).hard_labels();
  } else {
    labels = fit_icc(basket, icc_config).seg.labels;
  }
  return summarize_run(index, basket, labels, icc_config.K, config.periods_per_year);
}

}  // namespace

ResampleResult run_resample(const ReturnsPanel& panel, const ResampleConfig& config) {
  if (config.resamples < 1) throw std::invalid_argument("need at least one resample");
  if (config.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (config.basket > panel.n()) {
    throw std::invalid_argument("basket size exceeds the number of stocks");
  }
  IccConfig probe = config.icc;
  const bool gmm = apply_model_variant(config.model, probe);
  if (gmm && config.forecast) {
    throw std::invalid_argument("the forecast experiment needs a state-based variant");
  }
  ResampleConfig resolved = config;
  resolved.icc = probe;

  const int R = config.resamples;
  std::vector<ResampleRunStats> runs(R);
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::string first_error;
  bool config_error = false;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= R) return;
      try {
        runs[i] = run_one(panel, resolved, gmm, i);
      } catch (const std::invalid_argument& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) {
          first_error = e.what();
          config_error = true;
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };

  const int workers = std::min(config.jobs, R);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (!first_error.empty()) {
    if (config_error) throw std::invalid_argument(first_error);
    throw NumericError("resample run failed: " + first_error);
  }

  ResampleResult result;
  result.runs = std::move(runs);
  result.aggregate = aggregate_report_json(result.runs);
  return result;
}

}  // namespace icc

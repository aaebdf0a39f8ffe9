#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "icc/forecast.hpp"
#include "icc/icc.hpp"
#include "icc/panel.hpp"
#include "icc/report.hpp"

namespace icc {

// Applies a variant selector (icc-sparse, icc-full, icc-sparse-g0,
// icc-full-g0, gmm) onto the segmentation settings. Returns true for gmm.
bool apply_model_variant(const std::string& model, IccConfig& config);

struct ResampleConfig {
  int resamples = 100;
  int basket = 0;  // stocks drawn per run; 0 means every column
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string model = "icc-sparse";
  IccConfig icc;
  bool forecast = false;           // run the prediction experiment per basket
  ForecastExperimentConfig fc;     // settings for that experiment
  int periods_per_year = 252;
};

struct ResampleResult {
  std::vector<ResampleRunStats> runs;  // ascending run index
  nlohmann::json aggregate;
};

// Repeats the chosen experiment over independently drawn stock baskets on a
// worker pool. Every run is keyed by its index, so the outcome does not
// depend on the job count or completion order.
ResampleResult run_resample(const ReturnsPanel& panel, const ResampleConfig& config);

}  // namespace icc

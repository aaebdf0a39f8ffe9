#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "icc/forecast.hpp"
#include "icc/metrics.hpp"
#include "icc/panel.hpp"

namespace icc {

struct ClusterReport {
  int K = 0;
  std::vector<int> sizes;                     // per cluster, sums to T
  std::vector<Eigen::VectorXd> stock_mean;    // per cluster, length n
  std::vector<Eigen::VectorXd> stock_std;     // sample standard deviation
  std::vector<Eigen::VectorXd> stock_sharpe;  // NaN where undefined
  SegmentStats stats;
};

ClusterReport build_cluster_report(const ReturnsPanel& panel,
                                   const std::vector<int>& labels, int K,
                                   int periods_per_year = 252);

// mean over stocks with a defined ratio; NaN when none
double cluster_mean_sharpe(const ClusterReport& report, int cluster);

// date,state_label rows
void write_segmentation_csv(const ReturnsPanel& panel, const std::vector<int>& labels,
                            const std::string& path);
// date,cumulative_mean_return,state_label rows
void write_cumulative_csv(const ReturnsPanel& panel, const std::vector<int>& labels,
                          const std::string& path);
// ticker,cluster,mean,std,sharpe rows (sharpe blank where undefined)
void write_sharpe_csv(const ReturnsPanel& panel, const ClusterReport& report,
                      const std::string& path);
// date,llr rows
void write_llr_csv(const LlrSeries& series, const std::string& path);
// date,feature,probability,predicted_state,actual_state rows
void write_predictions_csv(const ForecastExperiment& ex, const std::string& path);

nlohmann::json cluster_report_json(const ClusterReport& report);
nlohmann::json forecast_report_json(const ForecastReport& report);

// One resampled run boiled down to the table-row scalars.
struct ClusterSummary {
  int size = 0;
  double mean_sharpe = 0.0;  // NaN when undefined
  int positive_sharpe = 0;   // stocks with ratio > 0
  int negative_sharpe = 0;
};

struct ResampleRunStats {
  int index = 0;
  std::vector<ClusterSummary> clusters;
  int switches = 0;
  double mean_segment_length = 0.0;
  double median_segment_length = 0.0;
  std::optional<ForecastReport> forecast;
};

ResampleRunStats summarize_run(int index, const ReturnsPanel& basket,
                               const std::vector<int>& labels, int K,
                               int periods_per_year = 252);

// Median plus 5th/95th percentiles of every defined metric across runs.
nlohmann::json aggregate_report_json(const std::vector<ResampleRunStats>& runs);

void write_json(const nlohmann::json& doc, const std::string& path);

}  // namespace icc

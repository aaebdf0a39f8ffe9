#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "icc/errors.hpp"
#include "icc/metrics.hpp"
#include "icc/report.hpp"

using namespace icc;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "icc_report_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

ReturnsPanel toy_panel() {
  Eigen::MatrixXd r(6, 2);
  r << 0.01, 0.02,
       0.03, -0.01,
       0.02, 0.00,
       -0.01, 0.05,
       0.00, 0.01,
       0.02, 0.03;
  return test_helpers::panel_from_matrix(r);
}

const std::vector<int> kToyLabels = {1, 1, 2, 2, 2, 1};

nlohmann::json find_metric_row(const nlohmann::json& doc, const std::string& name) {
  for (const auto& row : doc.at("metrics")) {
    if (row.at("metric") == name) return row;
  }
  return nlohmann::json();
}

}  // namespace

TEST_CASE("cluster summaries reproduce hand-computed statistics") {
  const auto panel = toy_panel();
  const auto rep = build_cluster_report(panel, kToyLabels, 2);

  CHECK(rep.K == 2);
  CHECK(rep.sizes == std::vector<int>{3, 3});
  // cluster 1 holds rows 0, 1, 5
  CHECK(rep.stock_mean[0][0] == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(rep.stock_mean[0][1] == doctest::Approx(0.04 / 3.0).epsilon(1e-12));
  CHECK(rep.stock_std[0][0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(rep.stock_sharpe[0][0] ==
        doctest::Approx(2.0 * std::sqrt(252.0)).epsilon(1e-12));
  // cluster 2 holds rows 2, 3, 4
  CHECK(rep.stock_mean[1][0] == doctest::Approx(0.01 / 3.0).epsilon(1e-12));
  CHECK(rep.stats.switches == 2);
  CHECK(rep.stats.lengths == std::vector<int>{2, 3, 1});
}

TEST_CASE("small clusters lose the undefined statistics") {
  const auto panel = toy_panel();
  const auto rep = build_cluster_report(panel, {1, 2, 2, 2, 2, 2}, 3);
  // singleton cluster: mean defined, spread undefined
  CHECK(rep.stock_mean[0][0] == doctest::Approx(0.01));
  CHECK(std::isnan(rep.stock_std[0][0]));
  CHECK(std::isnan(rep.stock_sharpe[0][0]));
  // empty cluster: everything undefined
  CHECK(rep.sizes[2] == 0);
  CHECK(std::isnan(rep.stock_mean[2][0]));
  CHECK(std::isnan(cluster_mean_sharpe(rep, 2)));
}

TEST_CASE("invalid labels are rejected") {
  const auto panel = toy_panel();
  CHECK_THROWS_AS(build_cluster_report(panel, {1, 2, 3, 1, 1, 1}, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_cluster_report(panel, {1, 2}, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_cluster_report(panel, kToyLabels, 0), std::invalid_argument);
}

TEST_CASE("mean ratio skips stocks without a defined ratio") {
  // cluster 1 rows make stock 0 constant (ratio undefined) while stock 1 varies
  Eigen::MatrixXd r(4, 2);
  r << 0.01, 0.02,
       0.01, 0.06,
       0.03, 0.01,
       0.05, 0.02;
  const auto panel = test_helpers::panel_from_matrix(r);
  const auto rep = build_cluster_report(panel, {1, 1, 2, 2}, 2);
  CHECK(std::isnan(rep.stock_sharpe[0][0]));
  const double s1 = rep.stock_sharpe[0][1];
  CHECK_FALSE(std::isnan(s1));
  CHECK(cluster_mean_sharpe(rep, 0) == doctest::Approx(s1));
}

TEST_CASE("csv writers emit the documented headers and rows") {
  const auto panel = toy_panel();
  const auto rep = build_cluster_report(panel, kToyLabels, 2);
  const auto dir = scratch_dir();

  write_segmentation_csv(panel, kToyLabels, (dir / "seg.csv").string());
  auto seg = read_lines(dir / "seg.csv");
  REQUIRE(seg.size() == 7);
  CHECK(seg[0] == "date,state_label");
  CHECK(seg[1] == panel.dates[0] + ",1");
  CHECK(seg[3] == panel.dates[2] + ",2");

  write_cumulative_csv(panel, kToyLabels, (dir / "cum.csv").string());
  auto cum = read_lines(dir / "cum.csv");
  REQUIRE(cum.size() == 7);
  CHECK(cum[0] == "date,cumulative_mean_return,state_label");
  {
    std::stringstream ss(cum[1]);
    std::string date, acc, label;
    std::getline(ss, date, ',');
    std::getline(ss, acc, ',');
    std::getline(ss, label, ',');
    CHECK(std::stod(acc) == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(label == "1");
  }

  write_sharpe_csv(panel, rep, (dir / "sharpe.csv").string());
  auto sh = read_lines(dir / "sharpe.csv");
  REQUIRE(sh.size() == 1 + 2 * 2);  // header + K * n
  CHECK(sh[0] == "ticker,cluster,mean,std,sharpe");
  CHECK(sh[1].rfind("S0,1,", 0) == 0);
  CHECK(sh[3].rfind("S0,2,", 0) == 0);

  LlrSeries series;
  series.delta = 2;
  series.first_defined = 1;
  series.values = {0.5, -1.25};
  series.dates = {panel.dates[1], panel.dates[2]};
  write_llr_csv(series, (dir / "llr.csv").string());
  auto llr = read_lines(dir / "llr.csv");
  REQUIRE(llr.size() == 3);
  CHECK(llr[0] == "date,llr");
  CHECK(llr[2] == panel.dates[2] + ",-1.25");

  ForecastExperiment ex;
  ex.dates = {panel.dates[4], panel.dates[5]};
  ex.feature = {1.5, -2.0};
  ex.probability = {0.75, 0.25};
  ex.predicted = {1, 2};
  ex.actual = {1, 1};
  write_predictions_csv(ex, (dir / "pred.csv").string());
  auto pred = read_lines(dir / "pred.csv");
  REQUIRE(pred.size() == 3);
  CHECK(pred[0] == "date,feature,probability,predicted_state,actual_state");
  CHECK(pred[1] == panel.dates[4] + ",1.5,0.75,1,1");

  CHECK_THROWS_AS(
      write_segmentation_csv(panel, kToyLabels, (dir / "no_such_dir" / "x.csv").string()),
      DataError);
}

TEST_CASE("cluster json carries sizes and null undefined ratios") {
  const auto panel = toy_panel();
  const auto rep = build_cluster_report(panel, {1, 2, 2, 2, 2, 2}, 3);
  const auto doc = cluster_report_json(rep);
  CHECK(doc.at("K") == 3);
  CHECK(doc.at("cluster_sizes") == std::vector<int>{1, 5, 0});
  CHECK(doc.at("switches") == 1);
  REQUIRE(doc.at("cluster_mean_sharpe").size() == 3);
  CHECK(doc.at("cluster_mean_sharpe")[0].is_null());  // singleton
  CHECK(doc.at("cluster_mean_sharpe")[1].is_number());
  CHECK(doc.at("cluster_mean_sharpe")[2].is_null());  // empty
}

TEST_CASE("forecast json writes null for absent rates") {
  ForecastReport r;
  r.tp = 3;
  r.fn = 1;
  r.acc = 0.75;
  r.tpr = 0.75;
  const auto doc = forecast_report_json(r);
  CHECK(doc.at("tp") == 3);
  CHECK(doc.at("acc") == doctest::Approx(0.75));
  CHECK(doc.at("tpr") == doctest::Approx(0.75));
  CHECK(doc.at("tnr").is_null());
  CHECK(doc.at("tnr_p_value").is_null());
}

TEST_CASE("run summaries count ratio signs per cluster") {
  const auto panel = toy_panel();
  const auto stats = summarize_run(4, panel, kToyLabels, 2);
  CHECK(stats.index == 4);
  REQUIRE(stats.clusters.size() == 2);
  CHECK(stats.clusters[0].size == 3);
  // both stocks rise on average inside cluster 1
  CHECK(stats.clusters[0].positive_sharpe == 2);
  CHECK(stats.clusters[0].negative_sharpe == 0);
  CHECK(stats.switches == 2);
  CHECK(stats.median_segment_length == 2.0);
}

TEST_CASE("aggregates match an independent percentile computation") {
  std::vector<ResampleRunStats> runs;
  for (int i = 0; i < 5; ++i) {
    ResampleRunStats r;
    r.index = i;
    ClusterSummary cs;
    cs.size = 10 + i;
    cs.mean_sharpe = (i == 2) ? std::nan("") : 0.1 * i;
    cs.positive_sharpe = i;
    cs.negative_sharpe = 5 - i;
    r.clusters.push_back(cs);
    r.switches = 3 + i;
    r.mean_segment_length = 2.0 + i;
    r.median_segment_length = 1.5;
    runs.push_back(r);
  }
  const auto doc = aggregate_report_json(runs);
  CHECK(doc.at("schema_version") == 1);
  CHECK(doc.at("runs") == 5);

  const auto sw = find_metric_row(doc, "switches");
  REQUIRE_FALSE(sw.is_null());
  CHECK(sw.at("count") == 5);
  CHECK(sw.at("median") == doctest::Approx(percentile({3, 4, 5, 6, 7}, 50.0)));
  CHECK(sw.at("p5") == doctest::Approx(percentile({3, 4, 5, 6, 7}, 5.0)));
  CHECK(sw.at("p95") == doctest::Approx(percentile({3, 4, 5, 6, 7}, 95.0)));

  // the undefined ratio in run 2 is skipped, not treated as zero
  const auto ms = find_metric_row(doc, "cluster1_mean_sharpe");
  REQUIRE_FALSE(ms.is_null());
  CHECK(ms.at("count") == 4);
  CHECK(ms.at("median") == doctest::Approx(percentile({0.0, 0.1, 0.3, 0.4}, 50.0)));

  // no forecast rows without forecast results
  CHECK(find_metric_row(doc, "acc").is_null());

  ForecastReport fr;
  fr.acc = 0.8;
  runs[0].forecast = fr;
  fr.acc = 0.6;
  runs[3].forecast = fr;
  const auto doc2 = aggregate_report_json(runs);
  const auto acc = find_metric_row(doc2, "acc");
  REQUIRE_FALSE(acc.is_null());
  CHECK(acc.at("count") == 2);
  CHECK(acc.at("median") == doctest::Approx(0.7));
}

TEST_CASE("an empty run list aggregates to an empty table") {
  const auto doc = aggregate_report_json({});
  CHECK(doc.at("runs") == 0);
  CHECK(doc.at("metrics").empty());
}

TEST_CASE("json files end with a newline and parse back") {
  const auto dir = scratch_dir();
  nlohmann::json doc;
  doc["alpha"] = 1;
  doc["beta"] = {1, 2, 3};
  const auto path = dir / "doc.json";
  write_json(doc, path.string());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  REQUIRE_FALSE(content.empty());
  CHECK(content.back() == '\n');
  CHECK(nlohmann::json::parse(content) == doc);
}

#include "icc/report.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

#include "icc/errors.hpp"

namespace icc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

}  // namespace

ClusterReport build_cluster_report(const ReturnsPanel& panel,
                                   const std::vector<int>& labels, int K,
                                   int periods_per_year) {
  if (static_cast<int>(labels.size()) != panel.T()) {
    throw std::invalid_argument("labels length must match panel");
  }
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  const int n = panel.n();

  ClusterReport rep;
  rep.K = K;
  rep.sizes.assign(K, 0);
  for (int v : labels) {
    if (v < 1 || v > K) throw std::invalid_argument("labels must lie in 1..K");
    ++rep.sizes[v - 1];
  }
  const double ann = std::sqrt(static_cast<double>(periods_per_year));
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd mean = Eigen::VectorXd::Constant(n, kNan);
    Eigen::VectorXd sd = Eigen::VectorXd::Constant(n, kNan);
    Eigen::VectorXd sharpe = Eigen::VectorXd::Constant(n, kNan);
    const int m = rep.sizes[k];
    if (m >= 1) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
      for (int t = 0; t < panel.T(); ++t) {
        if (labels[t] == k + 1) sum += panel.returns.row(t).transpose();
      }
      mean = sum / static_cast<double>(m);
      if (m >= 2) {
        Eigen::VectorXd ss = Eigen::VectorXd::Zero(n);
        for (int t = 0; t < panel.T(); ++t) {
          if (labels[t] == k + 1) {
            const Eigen::VectorXd d = panel.returns.row(t).transpose() - mean;
            ss += d.cwiseProduct(d);
          }
        }
        sd = (ss / static_cast<double>(m - 1)).cwiseSqrt();
        for (int j = 0; j < n; ++j) {
          if (sd[j] > 0.0) sharpe[j] = mean[j] / sd[j] * ann;
        }
      }
    }
    rep.stock_mean.push_back(std::move(mean));
    rep.stock_std.push_back(std::move(sd));
    rep.stock_sharpe.push_back(std::move(sharpe));
  }
  rep.stats = temporal_stats(labels);
  return rep;
}

double cluster_mean_sharpe(const ClusterReport& report, int cluster) {
  const Eigen::VectorXd& s = report.stock_sharpe.at(cluster);
  double sum = 0.0;
  int count = 0;
  for (int j = 0; j < s.size(); ++j) {
    if (!std::isnan(s[j])) {
      sum += s[j];
      ++count;
    }
  }
  return count > 0 ? sum / count : kNan;
}

void write_segmentation_csv(const ReturnsPanel& panel, const std::vector<int>& labels,
                            const std::string& path) {
  auto out = open_out(path);
  out << "date,state_label\n";
  for (int t = 0; t < panel.T(); ++t) {
    out << panel.dates[t] << ',' << labels[t] << '\n';
  }
}

void write_cumulative_csv(const ReturnsPanel& panel, const std::vector<int>& labels,
                          const std::string& path) {
  auto out = open_out(path);
  out << "date,cumulative_mean_return,state_label\n";
  double acc = 0.0;
  for (int t = 0; t < panel.T(); ++t) {
    acc += panel.returns.row(t).mean();
    out << panel.dates[t] << ',' << format_double(acc) << ',' << labels[t] << '\n';
  }
}

void write_sharpe_csv(const ReturnsPanel& panel, const ClusterReport& report,
                      const std::string& path) {
  auto out = open_out(path);
  out << "ticker,cluster,mean,std,sharpe\n";
  for (int k = 0; k < report.K; ++k) {
    for (int j = 0; j < panel.n(); ++j) {
      out << panel.tickers[j] << ',' << (k + 1) << ',';
      const double m = report.stock_mean[k][j];
      const double s = report.stock_std[k][j];
      const double sh = report.stock_sharpe[k][j];
      if (!std::isnan(m)) out << format_double(m);
      out << ',';
      if (!std::isnan(s)) out << format_double(s);
      out << ',';
      if (!std::isnan(sh)) out << format_double(sh);
      out << '\n';
    }
  }
}

void write_llr_csv(const LlrSeries& series, const std::string& path) {
  auto out = open_out(path);
  out << "date,llr\n";
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    out << series.dates[i] << ',' << format_double(series.values[i]) << '\n';
  }
}

void write_predictions_csv(const ForecastExperiment& ex, const std::string& path) {
  auto out = open_out(path);
  out << "date,feature,probability,predicted_state,actual_state\n";
  for (std::size_t i = 0; i < ex.dates.size(); ++i) {
    out << ex.dates[i] << ',' << format_double(ex.feature[i]) << ','
        << format_double(ex.probability[i]) << ',' << ex.predicted[i] << ','
        << ex.actual[i] << '\n';
  }
}

nlohmann::json cluster_report_json(const ClusterReport& report) {
  nlohmann::json doc;
  doc["K"] = report.K;
  doc["cluster_sizes"] = report.sizes;
  doc["switches"] = report.stats.switches;
  doc["segment_length_mean"] = report.stats.mean_length;
  doc["segment_length_median"] = report.stats.median;
  doc["segment_length_p5"] = report.stats.p5;
  doc["segment_length_p95"] = report.stats.p95;
  nlohmann::json sharpe = nlohmann::json::array();
  for (int k = 0; k < report.K; ++k) {
    const double v = cluster_mean_sharpe(report, k);
    sharpe.push_back(std::isnan(v) ? nlohmann::json() : nlohmann::json(v));
  }
  doc["cluster_mean_sharpe"] = std::move(sharpe);
  return doc;
}

nlohmann::json forecast_report_json(const ForecastReport& report) {
  nlohmann::json doc;
  doc["tp"] = report.tp;
  doc["fn"] = report.fn;
  doc["tn"] = report.tn;
  doc["fp"] = report.fp;
  doc["acc"] = report.acc;
  doc["tpr"] = report.tpr ? nlohmann::json(*report.tpr) : nlohmann::json();
  doc["tnr"] = report.tnr ? nlohmann::json(*report.tnr) : nlohmann::json();
  doc["tnr_p_value"] =
      report.tnr_p_value ? nlohmann::json(*report.tnr_p_value) : nlohmann::json();
  return doc;
}

ResampleRunStats summarize_run(int index, const ReturnsPanel& basket,
                               const std::vector<int>& labels, int K,
                               int periods_per_year) {
  const ClusterReport rep = build_cluster_report(basket, labels, K, periods_per_year);
  ResampleRunStats stats;
  stats.index = index;
  for (int k = 0; k < K; ++k) {
    ClusterSummary cs;
    cs.size = rep.sizes[k];
    cs.mean_sharpe = cluster_mean_sharpe(rep, k);
    for (int j = 0; j < basket.n(); ++j) {
      const double v = rep.stock_sharpe[k][j];
      if (std::isnan(v)) continue;
      if (v > 0.0) ++cs.positive_sharpe;
      if (v < 0.0) ++cs.negative_sharpe;
    }
    stats.clusters.push_back(cs);
  }
  stats.switches = rep.stats.switches;
  stats.mean_segment_length = rep.stats.mean_length;
  stats.median_segment_length = rep.stats.median;
  return stats;
}

nlohmann::json aggregate_report_json(const std::vector<ResampleRunStats>& runs) {
  using Getter = std::function<std::optional<double>(const ResampleRunStats&)>;
  std::vector<std::pair<std::string, Getter>> metrics;

  std::size_t max_clusters = 0;
  bool any_forecast = false;
  for (const auto& r : runs) {
    max_clusters = std::max(max_clusters, r.clusters.size());
    any_forecast = any_forecast || r.forecast.has_value();
  }

  if (max_clusters > 0) {
    metrics.emplace_back("switches", [](const ResampleRunStats& r) {
      return std::optional<double>(r.switches);
    });
    metrics.emplace_back("segment_length_mean", [](const ResampleRunStats& r) {
      return std::optional<double>(r.mean_segment_length);
    });
    metrics.emplace_back("segment_length_median", [](const ResampleRunStats& r) {
      return std::optional<double>(r.median_segment_length);
    });
    for (std::size_t k = 0; k < max_clusters; ++k) {
      const std::string tag = "cluster" + std::to_string(k + 1);
      metrics.emplace_back(tag + "_size", [k](const ResampleRunStats& r) {
        return k < r.clusters.size()
                   ? std::optional<double>(r.clusters[k].size)
                   : std::nullopt;
      });
      metrics.emplace_back(tag + "_mean_sharpe", [k](const ResampleRunStats& r) {
        if (k >= r.clusters.size() || std::isnan(r.clusters[k].mean_sharpe)) {
          return std::optional<double>();
        }
        return std::optional<double>(r.clusters[k].mean_sharpe);
      });
      metrics.emplace_back(tag + "_positive_sharpe_stocks",
                           [k](const ResampleRunStats& r) {
                             return k < r.clusters.size()
                                        ? std::optional<double>(
                                              r.clusters[k].positive_sharpe)
                                        : std::nullopt;
                           });
      metrics.emplace_back(tag + "_negative_sharpe_stocks",
                           [k](const ResampleRunStats& r) {
                             return k < r.clusters.size()
                                        ? std::optional<double>(
                                              r.clusters[k].negative_sharpe)
                                        : std::nullopt;
                           });
    }
  }
  if (any_forecast) {
    metrics.emplace_back("acc", [](const ResampleRunStats& r) {
      return r.forecast ? std::optional<double>(r.forecast->acc) : std::nullopt;
    });
    metrics.emplace_back("tpr", [](const ResampleRunStats& r) {
      return r.forecast && r.forecast->tpr ? std::optional<double>(*r.forecast->tpr)
                                           : std::nullopt;
    });
    metrics.emplace_back("tnr", [](const ResampleRunStats& r) {
      return r.forecast && r.forecast->tnr ? std::optional<double>(*r.forecast->tnr)
                                           : std::nullopt;
    });
    metrics.emplace_back("tnr_p_value", [](const ResampleRunStats& r) {
      return r.forecast && r.forecast->tnr_p_value
                 ? std::optional<double>(*r.forecast->tnr_p_value)
                 : std::nullopt;
    });
  }

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [name, get] : metrics) {
    std::vector<double> values;
    for (const auto& r : runs) {
      if (auto v = get(r)) values.push_back(*v);
    }
    if (values.empty()) continue;
    nlohmann::json row;
    row["metric"] = name;
    row["count"] = values.size();
    row["median"] = percentile(values, 50.0);
    row["p5"] = percentile(values, 5.0);
    row["p95"] = percentile(values, 95.0);
    rows.push_back(std::move(row));
  }

  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["runs"] = runs.size();
  doc["metrics"] = std::move(rows);
  return doc;
}

void write_json(const nlohmann::json& doc, const std::string& path) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace icc

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace icc {

// T x n panel of daily closing prices. Row order follows `dates`, column
// order follows `tickers`. All cells strictly positive, dates strictly
// increasing, no missing cells.
struct PricePanel {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;

  int T() const { return static_cast<int>(prices.rows()); }
  int n() const { return static_cast<int>(prices.cols()); }
  void validate() const;
};

// T x n panel of daily log-returns. Row t is the multivariate observation X_t.
struct ReturnsPanel {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd returns;

  int T() const { return static_cast<int>(returns.rows()); }
  int n() const { return static_cast<int>(returns.cols()); }
  void validate() const;

  // panel restricted to rows [begin, end)
  ReturnsPanel slice_rows(int begin, int end) const;
};

// r[t][i] = ln(p[t+1][i]) - ln(p[t][i]); the result has T-1 rows
ReturnsPanel log_returns(const PricePanel& panel);

// m tickers drawn uniformly without replacement; deterministic per seed
ReturnsPanel resample_basket(const ReturnsPanel& panel, int m, std::uint64_t seed);

// CSV shape for both prices and returns: first column `date` (ISO-8601),
// one column per ticker. Tickers with any gap (empty or non-numeric cell)
// are dropped before alignment and reported in `dropped_tickers`.
struct PriceCsvResult {
  PricePanel panel;
  std::vector<std::string> dropped_tickers;
};
struct ReturnsCsvResult {
  ReturnsPanel panel;
  std::vector<std::string> dropped_tickers;
};

PriceCsvResult read_price_csv(const std::string& path);
ReturnsCsvResult read_returns_csv(const std::string& path);
void write_returns_csv(const ReturnsPanel& panel, const std::string& path);

// shortest decimal form that round-trips the exact double
std::string format_double(double v);

}  // namespace icc

#include "icc/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "icc/dates.hpp"
#include "icc/errors.hpp"
#include "icc/rng.hpp"

namespace icc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_cell(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  return ec == std::errc() && ptr == last && std::isfinite(v);
}

void check_dates_increasing(const std::vector<std::string>& dates) {
  long prev = 0;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const long cur = parse_iso_date(dates[i]);
    if (i > 0 && cur <= prev) {
      throw DataError("dates not strictly increasing at row " + std::to_string(i) +
                      " ('" + dates[i] + "')");
    }
    prev = cur;
  }
}

// Shared CSV reader. Cells that fail to parse mark the ticker as gapped; the
// column is dropped entirely.
struct RawCsv {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd values;
  std::vector<std::string> dropped;
};

RawCsv read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: '" + path + "'");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "date") {
    throw DataError("first CSV column must be 'date' in '" + path + "'");
  }
  const int ncols = static_cast<int>(header.size()) - 1;
  if (ncols < 1) throw DataError("no ticker columns in '" + path + "'");

  std::vector<std::string> dates;
  std::vector<std::vector<double>> cols(ncols);
  std::vector<char> gapped(ncols, 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != ncols + 1) {
      throw DataError("row " + std::to_string(dates.size() + 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(ncols + 1) + " in '" + path + "'");
    }
    dates.push_back(cells[0]);
    for (int j = 0; j < ncols; ++j) {
      double v = 0.0;
      if (parse_cell(cells[j + 1], v)) {
        cols[j].push_back(v);
      } else {
        gapped[j] = 1;
        cols[j].push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }
  if (dates.empty()) throw DataError("no data rows in '" + path + "'");
  check_dates_increasing(dates);

  RawCsv out;
  out.dates = std::move(dates);
  std::vector<int> keep;
  for (int j = 0; j < ncols; ++j) {
    if (gapped[j]) {
      out.dropped.push_back(header[j + 1]);
    } else {
      keep.push_back(j);
    }
  }
  if (keep.empty()) throw DataError("every ticker has gaps in '" + path + "'");
  out.values.resize(static_cast<int>(out.dates.size()), static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.tickers.push_back(header[keep[k] + 1]);
    for (std::size_t t = 0; t < out.dates.size(); ++t) {
      out.values(static_cast<int>(t), static_cast<int>(k)) = cols[keep[k]][t];
    }
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void PricePanel::validate() const {
  if (static_cast<int>(dates.size()) != T()) {
    throw DataError("price panel has " + std::to_string(dates.size()) + " dates for " +
                    std::to_string(T()) + " rows");
  }
  if (static_cast<int>(tickers.size()) != n()) {
    throw DataError("price panel has " + std::to_string(tickers.size()) +
                    " tickers for " + std::to_string(n()) + " columns");
  }
  check_dates_increasing(dates);
  for (int t = 0; t < T(); ++t) {
    for (int i = 0; i < n(); ++i) {
      const double p = prices(t, i);
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw DataError("non-positive price at (" + dates[t] + ", " + tickers[i] +
                        "): " + format_double(p));
      }
    }
  }
}

void ReturnsPanel::validate() const {
  if (static_cast<int>(dates.size()) != T()) {
    throw DataError("returns panel has " + std::to_string(dates.size()) +
                    " dates for " + std::to_string(T()) + " rows");
  }
  if (static_cast<int>(tickers.size()) != n()) {
    throw DataError("returns panel has " + std::to_string(tickers.size()) +
                    " tickers for " + std::to_string(n()) + " columns");
  }
  check_dates_increasing(dates);
  if (!returns.allFinite()) throw DataError("returns panel contains non-finite cells");
}

ReturnsPanel ReturnsPanel::slice_rows(int begin, int end) const {
  if (begin < 0 || end > T() || begin >= end) {
    throw std::invalid_argument("bad row slice [" + std::to_string(begin) + ", " +
                                std::to_string(end) + ") for T=" + std::to_string(T()));
  }
  ReturnsPanel out;
  out.tickers = tickers;
  out.dates.assign(dates.begin() + begin, dates.begin() + end);
  out.returns = returns.middleRows(begin, end - begin);
  return out;
}

ReturnsPanel log_returns(const PricePanel& panel) {
  panel.validate();
  if (panel.T() < 2) throw DataError("need at least two price rows for returns");
  ReturnsPanel out;
  out.tickers = panel.tickers;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.returns.resize(panel.T() - 1, panel.n());
  for (int t = 0; t + 1 < panel.T(); ++t) {
    for (int i = 0; i < panel.n(); ++i) {
      out.returns(t, i) = std::log(panel.prices(t + 1, i)) - std::log(panel.prices(t, i));
    }
  }
  return out;
}

ReturnsPanel resample_basket(const ReturnsPanel& panel, int m, std::uint64_t seed) {
  if (m < 1 || m > panel.n()) {
    throw std::invalid_argument("basket size " + std::to_string(m) +
                                " out of range for " + std::to_string(panel.n()) +
                                " tickers");
  }
  // partial Fisher-Yates: first m entries are the sample, in draw order
  std::vector<int> idx(static_cast<std::size_t>(panel.n()));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int k = 0; k < m; ++k) {
    const int j = static_cast<int>(
        rng.uniform_int(static_cast<std::uint64_t>(k),
                        static_cast<std::uint64_t>(panel.n() - 1)));
    std::swap(idx[k], idx[j]);
  }
  ReturnsPanel out;
  out.dates = panel.dates;
  out.returns.resize(panel.T(), m);
  for (int k = 0; k < m; ++k) {
    out.tickers.push_back(panel.tickers[idx[k]]);
    out.returns.col(k) = panel.returns.col(idx[k]);
  }
  return out;
}

PriceCsvResult read_price_csv(const std::string& path) {
  RawCsv raw = read_panel_csv(path);
  PriceCsvResult out;
  out.panel.dates = std::move(raw.dates);
  out.panel.tickers = std::move(raw.tickers);
  out.panel.prices = std::move(raw.values);
  out.dropped_tickers = std::move(raw.dropped);
  out.panel.validate();
  return out;
}

ReturnsCsvResult read_returns_csv(const std::string& path) {
  RawCsv raw = read_panel_csv(path);
  ReturnsCsvResult out;
  out.panel.dates = std::move(raw.dates);
  out.panel.tickers = std::move(raw.tickers);
  out.panel.returns = std::move(raw.values);
  out.dropped_tickers = std::move(raw.dropped);
  out.panel.validate();
  return out;
}

void write_returns_csv(const ReturnsPanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "date";
  for (const auto& t : panel.tickers) out << ',' << t;
  out << '\n';
  for (int t = 0; t < panel.T(); ++t) {
    out << panel.dates[t];
    for (int i = 0; i < panel.n(); ++i) out << ',' << format_double(panel.returns(t, i));
    out << '\n';
  }
}

}  // namespace icc

#include "icc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "icc/errors.hpp"

namespace icc {

double sharpe_ratio(const std::vector<double>& returns, int periods_per_year) {
  if (returns.size() < 2) throw std::invalid_argument("need at least 2 returns");
  if (periods_per_year < 1) throw std::invalid_argument("periods_per_year must be >= 1");
  const double m = static_cast<double>(returns.size());
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= m;
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / (m - 1.0));
  if (sd == 0.0) throw NumericError("zero return variance; ratio undefined");
  return mean / sd * std::sqrt(static_cast<double>(periods_per_year));
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("p must lie in [0,100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

SegmentStats temporal_stats(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("empty label sequence");
  SegmentStats s;
  int run = 1;
  for (std::size_t t = 1; t < labels.size(); ++t) {
    if (labels[t] != labels[t - 1]) {
      ++s.switches;
      s.lengths.push_back(run);
      run = 1;
    } else {
      ++run;
    }
  }
  s.lengths.push_back(run);
  std::vector<double> lens(s.lengths.begin(), s.lengths.end());
  s.mean_length = std::accumulate(lens.begin(), lens.end(), 0.0) /
                  static_cast<double>(lens.size());
  s.median = percentile(lens, 50.0);
  s.p5 = percentile(lens, 5.0);
  s.p95 = percentile(lens, 95.0);
  return s;
}

SegmentStats temporal_stats(const Segmentation& seg) { return temporal_stats(seg.labels); }

ForecastReport classification_metrics(const std::vector<int>& predicted,
                                      const std::vector<int>& actual) {
  if (predicted.size() != actual.size()) {
    throw std::invalid_argument("prediction and truth lengths differ");
  }
  if (predicted.empty()) throw std::invalid_argument("empty label sequences");
  ForecastReport r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if ((predicted[i] != 1 && predicted[i] != 2) || (actual[i] != 1 && actual[i] != 2)) {
      throw std::invalid_argument("labels must lie in {1,2}");
    }
    if (actual[i] == 1) {
      predicted[i] == 1 ? ++r.tp : ++r.fn;
    } else {
      predicted[i] == 2 ? ++r.tn : ++r.fp;
    }
  }
  const int total = static_cast<int>(predicted.size());
  const int pos = r.tp + r.fn;
  const int neg = r.tn + r.fp;
  if (pos > 0) r.tpr = static_cast<double>(r.tp) / static_cast<double>(pos);
  if (neg > 0) r.tnr = static_cast<double>(r.tn) / static_cast<double>(neg);
  r.acc = static_cast<double>(r.tp + r.tn) / static_cast<double>(total);
  if (neg > 0) {
    r.tnr_p_value = hypergeom_tail(total, neg, r.tn + r.fn, r.tn);
  }
  return r;
}

namespace {

double log_choose(int a, int b) {
  if (b < 0 || b > a) return -std::numeric_limits<double>::infinity();
  return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
}

}  // namespace

double hypergeom_tail(int population, int successes, int draws, int observed) {
  if (population < 0 || successes < 0 || draws < 0 || successes > population ||
      draws > population) {
    throw std::invalid_argument("invalid hypergeometric parameters");
  }
  const int hi = std::min(draws, successes);
  double p = 0.0;
  const double denom = log_choose(population, draws);
  for (int j = std::max(observed, 0); j <= hi; ++j) {
    const double lp = log_choose(successes, j) +
                      log_choose(population - successes, draws - j) - denom;
    if (std::isfinite(lp)) p += std::exp(lp);
  }
  return std::clamp(p, 0.0, 1.0);
}

double label_accuracy(const std::vector<int>& a, const std::vector<int>& b, int K) {
  if (a.size() != b.size()) throw std::invalid_argument("label sequences differ in length");
  if (a.empty()) throw std::invalid_argument("empty label sequences");
  if (K < 1 || K > 8) throw std::invalid_argument("K must lie in 1..8");
  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 1);
  double best = 0.0;
  do {
    int match = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      if (a[t] < 1 || a[t] > K || b[t] < 1 || b[t] > K) {
        throw std::invalid_argument("labels must lie in 1..K");
      }
      if (perm[a[t] - 1] == b[t]) ++match;
    }
    best = std::max(best, static_cast<double>(match) / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace icc

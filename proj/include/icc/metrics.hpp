#pragma once

#include <optional>
#include <vector>

#include "icc/icc.hpp"

namespace icc {

// (mean / sample standard deviation) * sqrt(periods_per_year), zero risk-free rate
double sharpe_ratio(const std::vector<double>& returns, int periods_per_year);

// p in [0,100]; linear interpolation between order statistics
double percentile(std::vector<double> values, double p);

struct SegmentStats {
  int switches = 0;
  std::vector<int> lengths;  // run lengths in sequence order
  double mean_length = 0.0;
  double median = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
};

SegmentStats temporal_stats(const std::vector<int>& labels);
SegmentStats temporal_stats(const Segmentation& seg);

struct ForecastReport {
  int tp = 0, fn = 0, tn = 0, fp = 0;
  std::optional<double> tpr;  // absent when no actual positives
  std::optional<double> tnr;  // absent when no actual negatives
  double acc = 0.0;
  // chance of at least the observed true negatives under random assignment
  // with the same marginals
  std::optional<double> tnr_p_value;
};

// labels in {1,2}: 1 = positive (bull), 2 = negative (bear)
ForecastReport classification_metrics(const std::vector<int>& predicted,
                                      const std::vector<int>& actual);

// P[X >= observed] for X hypergeometric: `draws` draws without replacement
// from a population with `successes` marked items
double hypergeom_tail(int population, int successes, int draws, int observed);

// agreement fraction maximized over permutations of the label alphabet 1..K
double label_accuracy(const std::vector<int>& a, const std::vector<int>& b, int K);

}  // namespace icc

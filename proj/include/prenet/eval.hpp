#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace prenet {

struct MetricsReport {
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  std::size_t n_test = 0;
  std::size_t n_anomalies = 0;
  std::uint64_t seed = 0;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<double> runs;
};

struct AggregateReport {
  MetricSummary auc_roc;
  MetricSummary auc_pr;
  std::size_t run_count = 0;
  std::vector<MetricsReport> runs;
};

/// Mann-Whitney statistic with midranks: P(s_a > s_n) + P(s_a = s_n) / 2.
/// Throws MetricError unless both classes are present.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

/// Non-interpolated average precision with tied scores sharing one threshold.
/// Throws MetricError without anomalies.
double auc_pr(std::span<const double> scores, std::span<const int> labels);

MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels,
                       std::uint64_t seed = 0);

/// Mean and population std per metric. Throws ArgumentError on an empty list.
AggregateReport aggregate_runs(const std::vector<MetricsReport>& reports);

}  // namespace prenet

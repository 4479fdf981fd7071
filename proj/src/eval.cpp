#include "prenet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "prenet/errors.hpp"

namespace prenet {
namespace {

std::size_t count_positive(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw ArgumentError("scores and labels differ in length");
  std::size_t p = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ArgumentError("labels must be 0/1");
    p += l == 1;
  }
  return p;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return order;
}

MetricSummary summarize(std::vector<double> values) {
  MetricSummary s;
  if (std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>()) == values.end()) {
    s.mean = values.front();
    s.runs = std::move(values);
    return s;
  }
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  s.runs = std::move(values);
  return s;
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t pos = count_positive(scores, labels);
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw MetricError("AUC-ROC needs both anomalies and normals");
  for (double s : scores)
    if (std::isnan(s)) throw ArgumentError("NaN score");

  const auto order = order_by_score(scores, false);
  // Midranks are half-integers, so the rank sum is exact in double precision.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum += midrank;
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double auc_pr(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t pos = count_positive(scores, labels);
  if (pos == 0) throw MetricError("AUC-PR needs at least one anomaly");
  for (double s : scores)
    if (std::isnan(s)) throw ArgumentError("NaN score");

  const auto order = order_by_score(scores, true);
  const double p = static_cast<double>(pos);
  std::size_t tp = 0;
  double ap = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t gained = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      gained += labels[order[j]] == 1;
      ++j;
    }
    tp += gained;
    if (gained > 0)
      ap += static_cast<double>(gained) / p * (static_cast<double>(tp) / static_cast<double>(j));
    i = j;
  }
  return ap;
}

MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels,
                       std::uint64_t seed) {
  MetricsReport r;
  r.auc_roc = auc_roc(scores, labels);
  r.auc_pr = auc_pr(scores, labels);
  r.n_test = labels.size();
  r.n_anomalies = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  r.seed = seed;
  return r;
}

AggregateReport aggregate_runs(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw ArgumentError("cannot aggregate zero runs");
  std::vector<double> roc, pr;
  for (const auto& r : reports) {
    roc.push_back(r.auc_roc);
    pr.push_back(r.auc_pr);
  }
  AggregateReport agg;
  agg.auc_roc = summarize(std::move(roc));
  agg.auc_pr = summarize(std::move(pr));
  agg.run_count = reports.size();
  agg.runs = reports;
  return agg;
}

}  // namespace prenet

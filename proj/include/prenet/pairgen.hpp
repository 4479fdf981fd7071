#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prenet/dataset.hpp"
#include "prenet/ndcore.hpp"
#include "prenet/rng.hpp"

namespace prenet {

/// Ordinal targets for anomaly-anomaly, anomaly-unlabeled and
/// unlabeled-unlabeled pairs. Requires c1 > c2 > c3 >= 0.
struct OrdinalLabels {
  double c1 = 8.0;
  double c2 = 4.0;
  double c3 = 0.0;

  /// Throws ConfigError unless c1 > c2 > c3 >= 0 and all finite.
  void validate() const;
  /// Parses "c1,c2,c3".
  static OrdinalLabels parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const OrdinalLabels&, const OrdinalLabels&) = default;
};

/// Target value per pair class. Unlike OrdinalLabels these may coincide
/// (binary ordinal regression merges AA and AU).
struct PairTargets {
  double aa = 8.0;
  double au = 4.0;
  double uu = 0.0;

  static PairTargets from(const OrdinalLabels& l) { return {l.c1, l.c2, l.c3}; }
};

/// Row provenance. AA/AU/UU for pair batches, A/U for single-instance batches.
enum class RowClass : std::uint8_t { AA, AU, UU, A, U };

/// A mini-batch. For single-instance batches `right` has zero columns.
struct PairBatch {
  Matrix left;
  Matrix right;
  std::vector<double> targets;
  std::vector<RowClass> classes;
  /// Store indices of each side, kept for analysis (-1 when absent).
  std::vector<std::size_t> left_index;
  std::vector<std::size_t> right_index;

  std::size_t size() const { return targets.size(); }
  std::size_t count(RowClass c) const;
};

/// b/4 AA rows, b/4 AU rows (left from A, right from U), b/2 UU rows, in that
/// order. Draws are uniform with replacement within each pool.
/// Throws ArgumentError unless b >= 4 and b % 4 == 0; DomainError on an empty pool.
PairBatch sample_pair_batch(const TrainingPools& pools, std::size_t batch_size,
                            const PairTargets& targets, Rng& rng);

/// b/2 rows from A with target `anomaly_target`, b/2 from U with `unlabeled_target`.
/// Throws ArgumentError unless b >= 2 and even.
PairBatch sample_instance_batch(const TrainingPools& pools, std::size_t batch_size,
                                double anomaly_target, double unlabeled_target, Rng& rng);

// Closed-form quantities for pair sampling under contamination eps.

/// Exact K^3 N^3 as a decimal string.
std::string training_pair_space_size(std::uint64_t k, std::uint64_t n);

struct RelationProportions {
  double anomaly_anomaly;
  double anomaly_normal;
  double normal_normal;
};

/// Expected share of truly anomaly-anomaly, anomaly-normal and normal-normal
/// pairs in a stratified batch. Throws DomainError unless 0 <= eps < 1.
RelationProportions expected_true_relation_proportions(double eps);

/// 2 eps - eps^2.
double mislabel_fraction(double eps);

struct ExpectedScores {
  double anomaly_mean;
  double normal_mean;
};

/// Mean ensemble score of a true anomaly, (c1 + c2) / 2, and of a true normal,
/// (c2 + c3 - 2 eps c1) / 2, for a perfectly fitted scorer.
ExpectedScores expected_scores(const OrdinalLabels& labels, double eps);

}  // namespace prenet

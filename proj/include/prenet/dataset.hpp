#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "prenet/ndcore.hpp"
#include "prenet/rng.hpp"

namespace prenet {

/// Feature matrix with binary labels (1 = anomaly, 0 = normal).
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  /// Optional per-row anomaly type (empty when the source has no type column).
  std::vector<std::string> anomaly_types;

  std::size_t size() const { return features.rows(); }
  bool labeled() const { return labels.size() == features.rows(); }
  std::size_t dim() const { return features.cols(); }
  std::size_t count_anomalies() const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;
  /// Throws SchemaError when labels are not binary or shapes disagree.
  void validate() const;
};

struct CsvOptions {
  /// Column name; a purely numeric string is treated as a zero-based index.
  std::string label_column = "label";
  /// When set, rows whose label equals this string are anomalies and every
  /// other value is normal. Otherwise labels must be 0/1.
  std::optional<std::string> anomaly_value;
  /// Optional anomaly-type column, excluded from features.
  std::optional<std::string> type_column;
  /// When false, a missing label column yields an unlabeled dataset (empty
  /// labels) instead of a SchemaError.
  bool require_label = true;
};

/// Comma-delimited file with a header row. Row order is preserved.
LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void save_csv(const std::filesystem::path& path, const LabeledDataset& ds);

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Per-class shuffled split; each class contributes round(fraction * n_class)
/// rows to train, clamped so both sides keep at least one row of each class.
TrainTestSplit stratified_split(const LabeledDataset& ds, double train_fraction, Rng& rng);

/// What training is allowed to see: a feature store plus index pools into it.
/// Carries no test data.
struct TrainingPools {
  Matrix store;
  std::vector<std::size_t> anomalies;   // set A
  std::vector<std::size_t> unlabeled;   // set U

  std::size_t dim() const { return store.cols(); }
};

struct WeakSupervisionSplit {
  TrainingPools pools;
  /// Ground-truth labels of the store rows; evaluation diagnostics only.
  std::vector<int> store_labels;
  /// Row of the training dataset behind each store row.
  std::vector<std::size_t> store_rows;
  Matrix test_features;
  std::vector<int> test_labels;
  double contamination_rate = 0.0;
  std::uint64_t seed = 0;

  /// Number of true anomalies hidden in U.
  std::size_t injected_count() const;
};

struct WeakSupervisionOptions {
  std::size_t n_labeled = 60;
  double contamination_rate = 0.02;
  /// Restricts A and the injected anomalies to these types (unknown-anomaly
  /// protocol). Requires the dataset to carry anomaly types.
  std::optional<std::set<std::string>> known_types;
};

/// Number of anomalies m with m / (n_normal + m) = eps, rounded.
std::size_t injected_anomaly_count(std::size_t n_normal, double eps);

/// A = n_labeled training anomalies, U = every training normal plus
/// injected_anomaly_count() further anomalies; leftover anomalies are dropped.
/// The store holds A rows first, then U rows.
WeakSupervisionSplit build_weak_supervision(const LabeledDataset& train, const LabeledDataset& test,
                                            const WeakSupervisionOptions& options, Rng& rng,
                                            std::uint64_t seed = 0);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std; 0 marks a centered-only feature

  static constexpr double kMinStd = 1e-12;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  void apply_inplace(Matrix& x) const;
  bool identity() const { return mean.empty(); }
};

/// Fits on `train` and applies the same map to `train` and every matrix in `others`.
Standardizer standardize(Matrix& train, std::initializer_list<Matrix*> others = {});

}  // namespace prenet

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "prenet/dataset.hpp"
#include "prenet/engine.hpp"
#include "prenet/eval.hpp"

namespace prenet {

/// Two isotropic unit-variance Gaussians: normals at the origin, anomalies at
/// (separation, 0, ..., 0).
struct SyntheticSpec {
  std::size_t n_normal = 1000;
  std::size_t n_anomaly = 50;
  std::size_t dim = 2;
  double separation = 6.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Normals first, then anomalies.
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

struct CsvSource {
  std::filesystem::path path;
  CsvOptions options;
};

struct ExperimentSpec {
  std::variant<SyntheticSpec, CsvSource> source;
  std::string dataset_name = "synthetic";
  std::size_t n_labeled = 60;
  double contamination = 0.02;
  double train_fraction = 0.8;
  bool standardize = true;
  std::optional<std::set<std::string>> known_types;
  std::size_t n_runs = 10;
  std::uint64_t base_seed = 0;
  /// Run i uses seed base_seed + i; train.seed is overwritten per run.
  TrainConfig train;
  std::size_t jobs = 1;

  Variant variant() const { return train.model.variant; }
};

/// One run's metrics together with what produced them.
struct RunOutcome {
  MetricsReport metrics;
  TrainReport train;
  double mean_anomaly_score = 0.0;
  double mean_normal_score = 0.0;
  std::vector<std::size_t> test_indices;      // rows of the source dataset
  std::vector<std::size_t> labeled_indices;   // rows of the source dataset in A
};

struct ExperimentResult {
  Variant variant = Variant::PRENET;
  double contamination = 0.0;
  std::vector<std::uint64_t> seeds;
  AggregateReport aggregate;
  std::vector<RunOutcome> runs;
};

/// Per run: stratified split, weak supervision, standardization, training,
/// test scoring, metrics. A failing run is rethrown with its index attached.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// One run in isolation; run_experiment(spec).runs[i] == run_single(spec, dataset, base_seed + i).
RunOutcome run_single(const ExperimentSpec& spec, const LabeledDataset& data, std::uint64_t seed);

/// Every variant under identical per-run seeds (hence identical splits).
std::vector<ExperimentResult> run_ablation_suite(const ExperimentSpec& spec);

/// One experiment per rate with shared seeds.
std::vector<ExperimentResult> run_contamination_sweep(const ExperimentSpec& spec,
                                                      const std::vector<double>& rates);

LabeledDataset load_source(const ExperimentSpec& spec);

/// Stable report document:
///   {variant, dataset, seeds[], auc_roc:{mean,std,runs[]}, auc_pr:{...}, config:{...}}
std::string report_to_json(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace prenet

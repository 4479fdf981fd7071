#include "prenet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "prenet/errors.hpp"

namespace prenet {
namespace {

// Per-run PRNG streams; every stage draws from its own stream so changing one
// stage's draw count leaves the others untouched.
constexpr std::uint64_t kSplitStream = 101;
constexpr std::uint64_t kSupervisionStream = 102;
constexpr std::uint64_t kScoringStream = 103;

ModelConfig model_for(const ExperimentSpec& spec, Variant variant, std::size_t dim) {
  ModelConfig m = ModelConfig::defaults(variant, dim);
  m.labels = spec.train.model.labels;
  m.l2_lambda = spec.train.l2_lambda;
  return m;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_normal < 1 || n_anomaly < 1 || dim < 1)
    throw ArgumentError("synthetic counts and dimension must be at least 1");
  if (!(separation >= 0.0 && std::isfinite(separation)))
    throw ArgumentError("separation must be a finite value >= 0");
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  LabeledDataset ds;
  const std::size_t n = spec.n_normal + spec.n_anomaly;
  ds.features = Matrix(n, spec.dim);
  ds.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const bool anomaly = r >= spec.n_normal;
    for (std::size_t c = 0; c < spec.dim; ++c) ds.features(r, c) = rng.normal();
    if (anomaly) ds.features(r, 0) += spec.separation;
    ds.labels[r] = anomaly ? 1 : 0;
  }
  for (std::size_t c = 0; c < spec.dim; ++c) ds.feature_names.push_back("x" + std::to_string(c + 1));
  return ds;
}

LabeledDataset load_source(const ExperimentSpec& spec) {
  if (const auto* synth = std::get_if<SyntheticSpec>(&spec.source)) return generate_synthetic(*synth);
  const auto& csv = std::get<CsvSource>(spec.source);
  return load_csv(csv.path, csv.options);
}

RunOutcome run_single(const ExperimentSpec& spec, const LabeledDataset& data, std::uint64_t seed) {
  Rng split_rng = Rng::derive(seed, kSplitStream);
  const auto tt = stratified_split(data, spec.train_fraction, split_rng);

  WeakSupervisionOptions ws_opts;
  ws_opts.n_labeled = spec.n_labeled;
  ws_opts.contamination_rate = spec.contamination;
  ws_opts.known_types = spec.known_types;
  Rng ws_rng = Rng::derive(seed, kSupervisionStream);
  auto ws = build_weak_supervision(tt.train, tt.test, ws_opts, ws_rng, seed);
  if (spec.standardize) standardize(ws.pools.store, {&ws.test_features});

  TrainConfig cfg = spec.train;
  cfg.seed = seed;
  cfg.model.input_dim = data.dim();
  auto trained = train(ws.pools, cfg);

  Rng score_rng = Rng::derive(seed, kScoringStream);
  const auto scores =
      score_dataset(trained.model, ws.test_features, ws.pools, cfg.ensemble_size, score_rng);

  // Test labels are read only from here on.
  RunOutcome out;
  out.metrics = evaluate(scores, ws.test_labels, seed);
  out.train = std::move(trained.report);
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    sum[ws.test_labels[i]] += scores[i];
    ++count[ws.test_labels[i]];
  }
  out.mean_anomaly_score = sum[1] / static_cast<double>(count[1]);
  out.mean_normal_score = sum[0] / static_cast<double>(count[0]);
  out.test_indices = tt.test_indices;
  for (auto a : ws.pools.anomalies) out.labeled_indices.push_back(tt.train_indices[ws.store_rows[a]]);
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.n_runs == 0) throw ArgumentError("an experiment needs at least one run");
  const LabeledDataset data = load_source(spec);

  ExperimentResult result;
  result.variant = spec.variant();
  result.contamination = spec.contamination;
  result.runs.resize(spec.n_runs);
  for (std::size_t i = 0; i < spec.n_runs; ++i) result.seeds.push_back(spec.base_seed + i);

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failed_run = 0;
  auto worker = [&] {
    for (std::size_t i = next++; i < spec.n_runs; i = next++) {
      try {
        result.runs[i] = run_single(spec, data, result.seeds[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure || i < failed_run) {
          failure = std::current_exception();
          failed_run = i;
        }
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(spec.jobs, 1, spec.n_runs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  if (failure) {
    const std::string where = "run " + std::to_string(failed_run) + " (seed " +
                              std::to_string(result.seeds[failed_run]) + "): ";
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Numeric, where + e.what());
    }
  }

  std::vector<MetricsReport> metrics;
  for (const auto& r : result.runs) metrics.push_back(r.metrics);
  result.aggregate = aggregate_runs(metrics);
  return result;
}

std::vector<ExperimentResult> run_ablation_suite(const ExperimentSpec& spec) {
  const std::size_t dim = load_source(spec).dim();
  std::vector<ExperimentResult> out;
  for (auto v : kAllVariants) {
    ExperimentSpec s = spec;
    s.train.model = model_for(spec, v, dim);
    out.push_back(run_experiment(s));
  }
  return out;
}

std::vector<ExperimentResult> run_contamination_sweep(const ExperimentSpec& spec,
                                                      const std::vector<double>& rates) {
  std::vector<ExperimentResult> out;
  for (double rate : rates) {
    ExperimentSpec s = spec;
    s.contamination = rate;
    out.push_back(run_experiment(s));
  }
  return out;
}

std::string report_to_json(const ExperimentSpec& spec, const ExperimentResult& result) {
  using nlohmann::json;
  auto summary = [](const MetricSummary& m) {
    return json{{"mean", m.mean}, {"std", m.std}, {"runs", m.runs}};
  };
  json runs = json::array();
  for (const auto& r : result.runs)
    runs.push_back({{"seed", r.metrics.seed},
                    {"n_test", r.metrics.n_test},
                    {"n_anomalies", r.metrics.n_anomalies},
                    {"auc_roc", r.metrics.auc_roc},
                    {"auc_pr", r.metrics.auc_pr},
                    {"mean_anomaly_score", r.mean_anomaly_score},
                    {"mean_normal_score", r.mean_normal_score}});
  const auto& t = spec.train;
  const auto& l = t.model.labels;
  std::vector<std::size_t> hidden = ModelConfig::defaults(result.variant, 1).hidden_dims;
  if (result.variant == t.model.variant) hidden = t.model.hidden_dims;
  json doc = {
      {"variant", to_string(result.variant)},
      {"dataset", spec.dataset_name},
      {"seeds", result.seeds},
      {"auc_roc", summary(result.aggregate.auc_roc)},
      {"auc_pr", summary(result.aggregate.auc_pr)},
      {"runs", runs},
      {"config",
       {{"n_labeled", spec.n_labeled},
        {"contamination", result.contamination},
        {"train_fraction", spec.train_fraction},
        {"standardize", spec.standardize},
        {"n_runs", spec.n_runs},
        {"base_seed", spec.base_seed},
        {"epochs", t.n_epochs},
        {"batches_per_epoch", t.n_batches_per_epoch},
        {"batch_size", t.batch_size},
        {"learning_rate", t.learning_rate},
        {"l2_lambda", t.l2_lambda},
        {"ensemble_size", t.ensemble_size},
        {"hidden_dims", hidden},
        {"labels", {l.c1, l.c2, l.c3}}}},
  };
  return doc.dump(2);
}

}  // namespace prenet

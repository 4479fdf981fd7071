// End-to-end acceptance checks. Prints one PASS / FAIL / SKIP line per
// criterion and exits nonzero if any criterion fails.
//
// The thyroid check looks for $PRENET_THYROID_CSV, then data/thyroid.csv in
// the source tree; the label column defaults to "label" and can be changed
// with $PRENET_THYROID_LABEL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "prenet/checkpoint.hpp"
#include "prenet/engine.hpp"
#include "prenet/errors.hpp"
#include "prenet/eval.hpp"
#include "prenet/harness.hpp"
#include "prenet/pairgen.hpp"

#ifndef PRENET_SOURCE_DIR
#define PRENET_SOURCE_DIR "."
#endif

using namespace prenet;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t worker_count() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

// Two-Gaussian fixture with the paper's training defaults.
ExperimentSpec synthetic_spec(std::size_t n_anomaly, std::size_t n_runs) {
  ExperimentSpec spec;
  spec.source = SyntheticSpec{2000, n_anomaly, 10, 4.0, 2024};
  spec.dataset_name = "synthetic";
  spec.n_labeled = 30;
  spec.contamination = 0.02;
  spec.n_runs = n_runs;
  spec.base_seed = 1;
  spec.train.model = ModelConfig::defaults(Variant::PRENET, 10);
  spec.jobs = worker_count();
  return spec;
}

TrainingPools random_pools(std::size_t k, std::size_t n, std::size_t d, Rng& rng) {
  TrainingPools p;
  p.store = Matrix(k + n, d);
  for (auto& v : p.store.data()) v = rng.normal();
  for (std::size_t i = 0; i < k; ++i) {
    p.store(i, 0) += 3.0;
    p.anomalies.push_back(i);
  }
  for (std::size_t i = k; i < k + n; ++i) p.unlabeled.push_back(i);
  return p;
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240601);
  double worst = 0.0;
  std::size_t draws = 0, checked = 0;
  for (int round = 0; round < 5; ++round) {
    for (auto v : kAllVariants) {
      const std::size_t d = 3 + rng.below(4);
      const auto pools = random_pools(4 + rng.below(5), 20 + rng.below(20), d, rng);
      auto m = build_variant(ModelConfig::defaults(v, d), rng);
      for (auto& l : m.params.hidden)
        for (auto& b : l.bias) b = rng.uniform(-0.3, 0.3);
      m.params.output_bias = rng.uniform(-1.0, 1.0);
      const std::size_t b = 8 * (1 + rng.below(3));
      PairBatch batch;
      if (m.config.two_stream()) {
        batch = sample_pair_batch(pools, b, m.config.pair_targets(), rng);
      } else {
        const auto [ya, yu] = m.config.instance_targets();
        batch = sample_instance_batch(pools, b, ya, yu, rng);
      }
      const auto res = prenet::testing::check_gradients(m.params, batch, 0.01, 1e-5);
      worst = std::max(worst, res.max_rel_error);
      checked += res.checked;
      ++draws;
    }
  }
  const double secs = seconds_since(t0);
  return pass_if(draws >= 20 && worst < 1e-4 && checked > 0 && secs < 10.0,
                 fmt("%zu draws, %zu coordinates, max rel error %.2e, %.2fs", draws, checked, worst, secs));
}

Outcome batch_composition() {
  Rng rng(7);
  const auto pools = random_pools(60, 1000, 5, rng);
  const PairTargets targets{8.0, 4.0, 0.0};
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto batch = sample_pair_batch(pools, 512, targets, rng);
    bool ok = batch.size() == 512 && batch.count(RowClass::AA) == 128 &&
              batch.count(RowClass::AU) == 128 && batch.count(RowClass::UU) == 256;
    for (std::size_t r = 0; r < batch.size() && ok; ++r) {
      const double want = batch.classes[r] == RowClass::AA   ? 8.0
                          : batch.classes[r] == RowClass::AU ? 4.0
                                                             : 0.0;
      ok = batch.targets[r] == want;
    }
    bad += !ok;
  }
  return pass_if(bad == 0, fmt("1000 batches of 512, %zu off-spec", bad));
}

Outcome theory_vs_monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = 0.05;
  const auto data = generate_synthetic(SyntheticSpec{2000, 200, 10, 4.0, 11});
  Rng split_rng(12);
  const auto split = stratified_split(data, 0.8, split_rng);
  WeakSupervisionOptions opts;
  opts.n_labeled = 60;
  opts.contamination_rate = eps;
  Rng ws_rng(13);
  const auto ws = build_weak_supervision(split.train, split.test, opts, ws_rng, 13);

  Rng rng(14);
  std::size_t total = 0, aa = 0, an = 0, nn = 0, uu = 0, uu_wrong = 0;
  while (total < 100000) {
    const auto batch = sample_pair_batch(ws.pools, 512, PairTargets{}, rng);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const int anomalies = ws.store_labels[batch.left_index[r]] + ws.store_labels[batch.right_index[r]];
      (anomalies == 2 ? aa : anomalies == 1 ? an : nn)++;
      if (batch.classes[r] == RowClass::UU) {
        ++uu;
        uu_wrong += anomalies != 0;
      }
      ++total;
    }
  }
  const auto expect = expected_true_relation_proportions(eps);
  const double n = static_cast<double>(total);
  const double e_aa = aa / n - expect.anomaly_anomaly;
  const double e_an = an / n - expect.anomaly_normal;
  const double e_nn = nn / n - expect.normal_normal;
  const double mis = static_cast<double>(uu_wrong) / static_cast<double>(uu);
  const double e_mis = mis - mislabel_fraction(eps);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(e_aa) <= 0.01 && std::abs(e_an) <= 0.01 && std::abs(e_nn) <= 0.01 &&
                  std::abs(e_mis) <= 0.01 && secs < 10.0;
  return pass_if(ok, fmt("%zu pairs: (%.4f, %.4f, %.4f) vs (%.5f, %.3f, %.5f), mislabel %.4f vs %.4f, %.2fs",
                         total, aa / n, an / n, nn / n, expect.anomaly_anomaly, expect.anomaly_normal,
                         expect.normal_normal, mis, mislabel_fraction(eps), secs));
}

Outcome metric_oracles() {
  Rng rng(99);
  std::size_t mismatches = 0, with_ties = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 2 + rng.below(19);
    const std::size_t levels = 1 + rng.below(8);
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t j = 0; j < n; ++j) {
      s.push_back(static_cast<double>(rng.below(levels)) * 0.25);
      y.push_back(rng.below(3) == 0 ? 1 : 0);
    }
    y[0] = 1;
    y[1] = 0;
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    with_ties += std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    if (auc_roc(s, y) != oracle::brute_force_auc_roc(s, y)) ++mismatches;
    if (auc_pr(s, y) != oracle::exhaustive_threshold_ap(s, y)) ++mismatches;
  }
  return pass_if(mismatches == 0,
                 fmt("500 instances (%zu with ties), %zu mismatches", with_ties, mismatches));
}

Outcome synthetic_end_to_end() {
  const auto spec = synthetic_spec(100, 5);
  const auto data = load_source(spec);
  std::vector<MetricsReport> reports;
  double gap = 0.0, slowest = 0.0;
  for (std::size_t i = 0; i < spec.n_runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = run_single(spec, data, spec.base_seed + i);
    slowest = std::max(slowest, seconds_since(t0));
    reports.push_back(run.metrics);
    gap += (run.mean_anomaly_score - run.mean_normal_score) / static_cast<double>(spec.n_runs);
  }
  const auto agg = aggregate_runs(reports);
  const bool ok = agg.auc_roc.mean >= 0.95 && agg.auc_pr.mean >= 0.80 && gap >= 2.0 && slowest < 60.0;
  return pass_if(ok, fmt("5 seeds: AUC-ROC %.4f, AUC-PR %.4f, score gap %.3f, slowest run %.2fs",
                         agg.auc_roc.mean, agg.auc_pr.mean, gap, slowest));
}

std::filesystem::path thyroid_path() {
  if (const char* env = std::getenv("PRENET_THYROID_CSV")) return env;
  return std::filesystem::path(PRENET_SOURCE_DIR) / "data" / "thyroid.csv";
}

Outcome thyroid_reproduction() {
  const auto path = thyroid_path();
  if (!std::filesystem::exists(path))
    return {Status::Skip, "dataset not found at " + path.string() + " (set PRENET_THYROID_CSV)"};
  const auto t0 = std::chrono::steady_clock::now();
  CsvOptions csv;
  if (const char* label = std::getenv("PRENET_THYROID_LABEL")) csv.label_column = label;
  ExperimentSpec spec;
  spec.source = CsvSource{path, csv};
  spec.dataset_name = "thyroid";
  spec.n_runs = 10;
  spec.base_seed = 1;
  spec.jobs = worker_count();
  const auto dim = load_source(spec).dim();
  spec.train.model = ModelConfig::defaults(Variant::PRENET, dim);
  const auto r = run_experiment(spec);
  const double secs = seconds_since(t0);
  const double pr = r.aggregate.auc_pr.mean, roc = r.aggregate.auc_roc.mean;
  const bool ok = std::abs(pr - 0.298) <= 0.07 && std::abs(roc - 0.781) <= 0.05 && secs < 300.0;
  return pass_if(ok, fmt("10 runs: AUC-PR %.4f (target 0.298 +- 0.07), AUC-ROC %.4f (target 0.781 +- 0.05), %.1fs",
                         pr, roc, secs));
}

Outcome contamination_robustness() {
  // 200 anomalies: 160 training anomalies cover 30 labeled plus the 84 needed at 5%.
  const auto spec = synthetic_spec(200, 5);
  const auto rs = run_contamination_sweep(spec, {0.0, 0.05});
  const double clean = rs[0].aggregate.auc_pr.mean, dirty = rs[1].aggregate.auc_pr.mean;
  const double rel = std::abs(dirty - clean) / clean;
  return pass_if(rel <= 0.20, fmt("AUC-PR %.4f at 0%%, %.4f at 5%% (relative change %.1f%%)", clean, dirty,
                                  100.0 * rel));
}

Outcome ablation_sanity() {
  const auto spec = synthetic_spec(100, 5);
  const auto rs = run_ablation_suite(spec);
  const std::size_t per = spec.train.n_batches_per_epoch, last = spec.train.n_epochs - 1;
  std::string summary;
  bool ok = rs.size() == std::size(kAllVariants);
  for (const auto& r : rs) {
    double worst_roc = 1.0;
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
      const auto& run = r.runs[i];
      ok = ok && run.train.epoch_mean(last, per) < run.train.epoch_mean(0, per);
      ok = ok && run.test_indices == rs[0].runs[i].test_indices &&
           run.labeled_indices == rs[0].runs[i].labeled_indices;
      worst_roc = std::min(worst_roc, run.metrics.auc_roc);
    }
    ok = ok && worst_roc > 0.5;
    summary += fmt("%s%s min AUC-ROC %.3f", summary.empty() ? "" : ", ", to_string(r.variant).c_str(), worst_roc);
  }
  return pass_if(ok, summary);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Outcome determinism() {
  auto spec = synthetic_spec(100, 3);
  spec.jobs = 1;
  const auto a = run_experiment(spec);
  spec.jobs = worker_count();
  const auto b = run_experiment(spec);
  bool ok = report_to_json(spec, a) == report_to_json(spec, b);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    ok = ok && same_bits(a.runs[i].metrics.auc_roc, b.runs[i].metrics.auc_roc) &&
         same_bits(a.runs[i].metrics.auc_pr, b.runs[i].metrics.auc_pr);
  }

  // Checkpoints: identical training twice, then a save/load round trip.
  const auto data = load_source(spec);
  Rng split_rng(5);
  const auto split = stratified_split(data, 0.8, split_rng);
  WeakSupervisionOptions opts;
  opts.n_labeled = 30;
  auto make = [&] {
    Rng rng(6);
    auto ws = build_weak_supervision(split.train, split.test, opts, rng, 6);
    const auto st = standardize(ws.pools.store, {&ws.test_features});
    TrainConfig cfg;
    cfg.seed = 6;
    cfg.n_epochs = 5;
    cfg.model = ModelConfig::defaults(Variant::PRENET, data.dim());
    auto result = train(ws.pools, cfg);
    Rng score_rng(7);
    auto scores = score_dataset(result.model, ws.test_features, ws.pools, 30, score_rng, 1);
    return std::make_tuple(checkpoint_to_json({result.model, st, ws.pools}), std::move(scores), ws);
  };
  const auto [ckpt1, scores1, ws] = make();
  const auto [ckpt2, scores2, ws2] = make();
  ok = ok && ckpt1 == ckpt2 && scores1 == scores2;

  const auto dir = std::filesystem::temp_directory_path() / "prenet_acceptance";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "model.json", checkpoint_from_json(ckpt1));
  const auto reloaded = load_checkpoint(dir / "model.json");
  ok = ok && checkpoint_to_json(reloaded) == ckpt1;
  Rng score_rng(7);
  ok = ok && score_dataset(reloaded.model, ws.test_features, reloaded.pools, 30, score_rng, 4) == scores1;
  std::filesystem::remove_all(dir);

  return pass_if(ok, "experiment reports (1 vs many jobs), checkpoints and reloaded scores compared bitwise");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"batch composition", batch_composition},
      {"theory vs Monte Carlo", theory_vs_monte_carlo},
      {"metric oracles", metric_oracles},
      {"synthetic end-to-end", synthetic_end_to_end},
      {"thyroid reproduction", thyroid_reproduction},
      {"contamination robustness", contamination_robustness},
      {"ablation sanity", ablation_sanity},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = out.status == Status::Pass ? "PASS" : out.status == Status::Fail ? "FAIL" : "SKIP";
    failures += out.status == Status::Fail;
    std::printf("[%s] %zu. %s: %s\n", tag, i + 1, criteria[i].first, out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

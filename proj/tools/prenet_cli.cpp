// prenet: command-line driver for training, scoring and the evaluation protocol.
//
// Exit codes: 0 success, 2 usage/configuration error, 3 data or capacity
// error, 4 numeric failure, 1 anything unexpected.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prenet/checkpoint.hpp"
#include "prenet/engine.hpp"
#include "prenet/errors.hpp"
#include "prenet/eval.hpp"
#include "prenet/harness.hpp"
#include "prenet/pairgen.hpp"

namespace {

using namespace prenet;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

struct DataFlags {
  std::string path;
  std::string label_column = "label";
  std::string anomaly_value;
  std::string type_column;

  void bind(CLI::App* app, bool required) {
    auto* opt = app->add_option("--data", path, "Input CSV with a header row");
    if (required) opt->required();
    app->add_option("--label-column", label_column, "Label column name or zero-based index")
        ->capture_default_str();
    app->add_option("--anomaly-value", anomaly_value,
                    "Label value marking anomalies (default: labels must be 0/1)");
    app->add_option("--type-column", type_column, "Optional anomaly-type column");
  }

  CsvOptions options() const {
    CsvOptions o;
    o.label_column = label_column;
    if (!anomaly_value.empty()) o.anomaly_value = anomaly_value;
    if (!type_column.empty()) o.type_column = type_column;
    return o;
  }
};

// Training flags shared by train / experiment / ablate / sweep. Defaults are
// the published protocol.
struct TrainFlags {
  std::string variant = "PRENET";
  std::size_t epochs = 50;
  std::size_t batches = 20;
  std::size_t batch_size = 512;
  double learning_rate = 0.001;
  double l2_lambda = 0.01;
  std::size_t ensemble = 30;
  std::string labels = "8,4,0";
  std::size_t n_labeled = 60;
  double contamination = 0.02;
  bool no_standardize = false;
  std::uint64_t seed = 0;

  void bind(CLI::App* app, bool with_variant = true) {
    if (with_variant)
      app->add_option("--variant", variant, "PRENET, BOR, OSNET, LDM or A2H")->capture_default_str();
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app->add_option("--batches", batches, "Batches per epoch")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Pairs per batch (multiple of 4)")
        ->capture_default_str();
    app->add_option("--lr", learning_rate, "RMSprop learning rate")->capture_default_str();
    app->add_option("--lambda", l2_lambda, "L2 weight penalty")->capture_default_str();
    app->add_option("--ensemble", ensemble, "Partners per pool when scoring (E)")
        ->capture_default_str();
    app->add_option("--labels", labels, "Ordinal targets c1,c2,c3")->capture_default_str();
    app->add_option("--n-labeled", n_labeled, "Labeled anomalies |A|")->capture_default_str();
    app->add_option("--contamination", contamination, "Anomaly share of the unlabeled set")
        ->capture_default_str();
    app->add_flag("--no-standardize", no_standardize, "Skip z-scoring with training statistics");
    app->add_option("--seed", seed, "Base seed")->capture_default_str();
  }

  TrainConfig train_config(std::size_t dim) const {
    TrainConfig cfg;
    cfg.n_epochs = epochs;
    cfg.n_batches_per_epoch = batches;
    cfg.batch_size = batch_size;
    cfg.learning_rate = learning_rate;
    cfg.l2_lambda = l2_lambda;
    cfg.ensemble_size = ensemble;
    cfg.seed = seed;
    cfg.model = ModelConfig::defaults(parse_variant(variant), dim);
    cfg.model.labels = OrdinalLabels::parse(labels);
    cfg.model.l2_lambda = l2_lambda;
    return cfg;
  }
};

struct ExperimentFlags {
  DataFlags data;
  TrainFlags train;
  std::size_t runs = 10;
  double train_fraction = 0.8;
  std::string known_types;
  std::string dataset_name;
  std::size_t jobs = 1;
  std::string output = "-";
  std::string config_file;  // consumed by expand_config before parsing
  // Synthetic source, used when --data is absent.
  SyntheticSpec synth{2000, 300, 10, 4.0, 0};

  void bind(CLI::App* app) {
    app->add_option("--config", config_file,
                    "key = value file of flag defaults; explicit flags take precedence");
    data.bind(app, false);
    train.bind(app);
    app->add_option("--runs", runs, "Independent runs; run i uses seed + i")->capture_default_str();
    app->add_option("--train-fraction", train_fraction, "Stratified training share")
        ->capture_default_str();
    app->add_option("--known-types", known_types,
                    "Comma-separated anomaly types allowed in A (needs --type-column)");
    app->add_option("--dataset-name", dataset_name, "Name recorded in the report");
    app->add_option("--jobs", jobs, "Runs executed in parallel")->capture_default_str();
    app->add_option("--synth-n-normal", synth.n_normal, "Synthetic normals (without --data)")
        ->capture_default_str();
    app->add_option("--synth-n-anomaly", synth.n_anomaly, "Synthetic anomalies (without --data)")
        ->capture_default_str();
    app->add_option("--synth-dim", synth.dim, "Synthetic dimension (without --data)")
        ->capture_default_str();
    app->add_option("--synth-separation", synth.separation, "Synthetic mean separation")
        ->capture_default_str();
    app->add_option("--synth-seed", synth.seed, "Synthetic generator seed")->capture_default_str();
    app->add_option("-o,--output", output, "Report JSON path ('-' for stdout)")
        ->capture_default_str();
  }

  ExperimentSpec spec() const {
    ExperimentSpec s;
    if (data.path.empty()) {
      s.source = synth;
      s.dataset_name = dataset_name.empty() ? "synthetic" : dataset_name;
    } else {
      s.source = CsvSource{data.path, data.options()};
      s.dataset_name =
          dataset_name.empty() ? std::filesystem::path(data.path).stem().string() : dataset_name;
    }
    s.n_labeled = train.n_labeled;
    s.contamination = train.contamination;
    s.train_fraction = train_fraction;
    s.standardize = !train.no_standardize;
    if (!known_types.empty()) {
      std::set<std::string> types;
      std::stringstream ss(known_types);
      for (std::string t; std::getline(ss, t, ',');) types.insert(t);
      s.known_types = types;
    }
    s.n_runs = runs;
    s.base_seed = train.seed;
    s.jobs = jobs;
    // Input width is filled in per run from the loaded data.
    s.train = train.train_config(1);
    return s;
  }
};

void print_summary(const ExperimentResult& r, const std::string& dataset) {
  std::printf("%-7s %-16s eps=%.3f runs=%zu  AUC-ROC %.4f +- %.4f  AUC-PR %.4f +- %.4f\n",
              to_string(r.variant).c_str(), dataset.c_str(), r.contamination, r.aggregate.run_count,
              r.aggregate.auc_roc.mean, r.aggregate.auc_roc.std, r.aggregate.auc_pr.mean,
              r.aggregate.auc_pr.std);
}

std::string experiments_json(const ExperimentSpec& spec, const std::vector<ExperimentResult>& rs) {
  json arr = json::array();
  for (const auto& r : rs) arr.push_back(json::parse(report_to_json(spec, r)));
  return json{{"experiments", arr}}.dump(2);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Splices `--config FILE` entries into the argument list as `--key=value`
// tokens right after the subcommand, skipping keys given explicitly. CLI11
// only reads config files for the top-level app, not for subcommands.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  if (!std::filesystem::exists(path)) throw IoError("cannot open config '" + path + "'");

  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name.empty() || item.name == "config" || item.name == "++" || item.name == "--") continue;
    const std::string flag = "--" + item.name;
    if (has_flag(args, flag)) continue;
    std::string value;
    for (const auto& in : item.inputs) value += (value.empty() ? "" : ",") + in;
    injected.push_back(flag + "=" + value);
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"PReNet weakly-supervised anomaly detection"};
  app.require_subcommand(1);

  // synth
  SyntheticSpec synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a two-Gaussian dataset CSV");
  synth_cmd->add_option("--n-normal", synth.n_normal, "Normal instances")->capture_default_str();
  synth_cmd->add_option("--n-anomaly", synth.n_anomaly, "Anomalies")->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim, "Feature dimension")->capture_default_str();
  synth_cmd->add_option("--separation", synth.separation, "Distance between class means")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("-o,--output", synth_out, "Output CSV")->required();

  // train
  DataFlags train_data;
  TrainFlags train_flags;
  std::string ckpt_out, train_report_out;
  auto* train_cmd = app.add_subcommand(
      "train", "Train on a CSV treated as the training partition; write a checkpoint");
  train_data.bind(train_cmd, true);
  train_flags.bind(train_cmd);
  train_cmd->add_option("-o,--output", ckpt_out, "Checkpoint JSON")->required();
  train_cmd->add_option("--report", train_report_out,
                        "Training report JSON (default: <output>.report.json)");

  // score
  DataFlags score_data;
  std::string score_model, score_out = "-";
  std::size_t score_ensemble = 30, score_jobs = 1;
  std::uint64_t score_seed = 0;
  auto* score_cmd = app.add_subcommand("score", "Ensemble-score every row of a CSV");
  score_data.bind(score_cmd, true);
  score_cmd->add_option("--model", score_model, "Checkpoint from 'train'")->required();
  score_cmd->add_option("--ensemble", score_ensemble, "Partners per pool (E)")->capture_default_str();
  score_cmd->add_option("--seed", score_seed, "Partner sampling seed")->capture_default_str();
  score_cmd->add_option("--jobs", score_jobs, "Scoring threads")->capture_default_str();
  score_cmd->add_option("-o,--output", score_out, "Scores CSV ('-' for stdout)")
      ->capture_default_str();

  // eval
  std::string eval_scores, eval_out = "-";
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "AUC-ROC and AUC-PR of a scores CSV with labels");
  eval_cmd->add_option("--scores", eval_scores, "CSV with row_index,score,true_label")->required();
  eval_cmd->add_option("--seed", eval_seed, "Seed recorded in the report")->capture_default_str();
  eval_cmd->add_option("-o,--output", eval_out, "Metrics JSON ('-' for stdout)")
      ->capture_default_str();

  // experiment / ablate / sweep
  ExperimentFlags exp_flags, abl_flags, sweep_flags;
  auto* exp_cmd = app.add_subcommand("experiment", "Repeated split/train/score/evaluate runs");
  exp_flags.bind(exp_cmd);
  auto* abl_cmd = app.add_subcommand("ablate", "Run every variant under shared splits");
  abl_flags.bind(abl_cmd);
  auto* sweep_cmd = app.add_subcommand("sweep", "One experiment per contamination rate");
  sweep_flags.bind(sweep_cmd);
  std::vector<double> rates{0.0, 0.02, 0.05, 0.1};
  sweep_cmd->add_option("--rates", rates, "Contamination rates")->delimiter(',')->capture_default_str();

  // theory
  double eps = 0.02;
  std::string theory_labels = "8,4,0";
  auto* theory_cmd = app.add_subcommand("theory", "Closed-form expectations under contamination");
  theory_cmd->add_option("--eps", eps, "Contamination of the unlabeled set, in [0, 1)")
      ->capture_default_str();
  theory_cmd->add_option("--labels", theory_labels, "Ordinal targets c1,c2,c3")
      ->capture_default_str();

  try {
    auto args = expand_config(std::vector<std::string>(argv, argv + argc));
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*synth_cmd) {
    const auto ds = generate_synthetic(synth);
    save_csv(synth_out, ds);
    std::printf("wrote %zu rows (%zu anomalies, dim %zu) to %s\n", ds.size(), ds.count_anomalies(),
                ds.dim(), synth_out.c_str());
    return 0;
  }

  if (*train_cmd) {
    const auto ds = load_csv(train_data.path, train_data.options());
    WeakSupervisionOptions ws;
    ws.n_labeled = train_flags.n_labeled;
    ws.contamination_rate = train_flags.contamination;
    Rng rng = Rng::derive(train_flags.seed, 102);
    auto split = build_weak_supervision(ds, LabeledDataset{}, ws, rng, train_flags.seed);
    Standardizer st;
    if (!train_flags.no_standardize) st = standardize(split.pools.store);
    const auto cfg = train_flags.train_config(ds.dim());
    auto result = train(split.pools, cfg);

    save_checkpoint(ckpt_out, Checkpoint{result.model, st, split.pools});
    const auto& rep = result.report;
    const std::size_t epochs = cfg.n_epochs, per = cfg.n_batches_per_epoch;
    json report = {{"variant", to_string(cfg.model.variant)},
                   {"seed", rep.seed},
                   {"wall_seconds", rep.wall_seconds},
                   {"n_epochs", epochs},
                   {"n_batches_per_epoch", per},
                   {"first_epoch_mean", rep.epoch_mean(0, per)},
                   {"final_epoch_mean", rep.epoch_mean(epochs - 1, per)},
                   {"objective_trace", rep.objective_trace}};
    write_text(train_report_out.empty() ? ckpt_out + ".report.json" : train_report_out,
               report.dump(2));
    std::printf("trained %s on |A|=%zu |U|=%zu: objective %.4f -> %.4f (%.2fs)\n",
                to_string(cfg.model.variant).c_str(), split.pools.anomalies.size(),
                split.pools.unlabeled.size(), rep.epoch_mean(0, per),
                rep.epoch_mean(epochs - 1, per), rep.wall_seconds);
    return 0;
  }

  if (*score_cmd) {
    const auto ckpt = load_checkpoint(score_model);
    auto opts = score_data.options();
    opts.require_label = false;
    auto ds = load_csv(score_data.path, opts);
    ckpt.standardizer.apply_inplace(ds.features);
    Rng rng(score_seed);
    const auto scores =
        score_dataset(ckpt.model, ds.features, ckpt.pools, score_ensemble, rng, score_jobs);
    std::ostringstream out;
    out << (ds.labeled() ? "row_index,score,true_label" : "row_index,score");
    for (std::size_t r = 0; r < scores.size(); ++r) {
      out << '\n' << r << ',' << fmt_double(scores[r]);
      if (ds.labeled()) out << ',' << ds.labels[r];
    }
    write_text(score_out, out.str());
    return 0;
  }

  if (*eval_cmd) {
    CsvOptions opts;
    opts.label_column = "true_label";
    const auto ds = load_csv(eval_scores, opts);
    const auto& names = ds.feature_names;
    const auto it = std::find(names.begin(), names.end(), "score");
    if (it == names.end()) throw SchemaError("scores file has no 'score' column");
    const auto col = static_cast<std::size_t>(it - names.begin());
    std::vector<double> scores;
    for (std::size_t r = 0; r < ds.size(); ++r) scores.push_back(ds.features(r, col));
    const auto m = evaluate(scores, ds.labels, eval_seed);
    json doc = {{"auc_roc", m.auc_roc},
                {"auc_pr", m.auc_pr},
                {"n_test", m.n_test},
                {"n_anomalies", m.n_anomalies},
                {"seed", m.seed}};
    write_text(eval_out, doc.dump(2));
    if (eval_out != "-")
      std::printf("AUC-ROC %.4f  AUC-PR %.4f  (%zu rows, %zu anomalies)\n", m.auc_roc, m.auc_pr,
                  m.n_test, m.n_anomalies);
    return 0;
  }

  if (*exp_cmd) {
    const auto spec = exp_flags.spec();
    const auto r = run_experiment(spec);
    write_text(exp_flags.output, report_to_json(spec, r));
    if (exp_flags.output != "-") print_summary(r, spec.dataset_name);
    return 0;
  }

  if (*abl_cmd) {
    const auto spec = abl_flags.spec();
    const auto rs = run_ablation_suite(spec);
    write_text(abl_flags.output, experiments_json(spec, rs));
    if (abl_flags.output != "-")
      for (const auto& r : rs) print_summary(r, spec.dataset_name);
    return 0;
  }

  if (*sweep_cmd) {
    const auto spec = sweep_flags.spec();
    const auto rs = run_contamination_sweep(spec, rates);
    write_text(sweep_flags.output, experiments_json(spec, rs));
    if (sweep_flags.output != "-")
      for (const auto& r : rs) print_summary(r, spec.dataset_name);
    return 0;
  }

  if (*theory_cmd) {
    if (!(eps >= 0.0 && eps < 1.0)) throw ArgumentError("--eps must lie in [0, 1)");
    const auto labels = OrdinalLabels::parse(theory_labels);
    const auto p = expected_true_relation_proportions(eps);
    const auto s = expected_scores(labels, eps);
    std::printf("contamination eps          %.6g\n", eps);
    std::printf("ordinal labels             %s\n", labels.to_string().c_str());
    std::printf("true relation proportions  anomaly-anomaly %.6g  anomaly-normal %.6g  normal-normal %.6g\n",
                p.anomaly_anomaly, p.anomaly_normal, p.normal_normal);
    std::printf("mislabel fraction          %.6g\n", mislabel_fraction(eps));
    std::printf("expected anomaly score     %.6g\n", s.anomaly_mean);
    std::printf("expected normal score      %.6g\n", s.normal_mean);
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const prenet::Error& e) {
    std::cerr << "prenet: " << e.what() << '\n';
    switch (e.kind()) {
      case prenet::ErrorKind::Usage: return kExitUsage;
      case prenet::ErrorKind::Data: return kExitData;
      case prenet::ErrorKind::Numeric: return kExitNumeric;
    }
  } catch (const std::exception& e) {
    std::cerr << "prenet: " << e.what() << '\n';
  }
  return 1;
}

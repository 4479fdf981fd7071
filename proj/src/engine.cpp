#include "prenet/engine.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "prenet/errors.hpp"
#include "prenet/pairgen.hpp"

namespace prenet {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;

void require_pools(const TrainingPools& pools) {
  if (pools.anomalies.empty()) throw DomainError("labeled anomaly pool is empty");
  if (pools.unlabeled.empty()) throw DomainError("unlabeled pool is empty");
}

}  // namespace

void TrainConfig::validate() const {
  if (n_epochs == 0 || n_batches_per_epoch == 0 || batch_size == 0 || ensemble_size == 0)
    throw ConfigError("epochs, batches, batch size and ensemble size must be positive");
  if (model.two_stream() && batch_size % 4 != 0)
    throw ConfigError("pair variants need a batch size divisible by 4, got " +
                      std::to_string(batch_size));
  if (!model.two_stream() && batch_size % 2 != 0)
    throw ConfigError("OSNET needs an even batch size, got " + std::to_string(batch_size));
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(l2_lambda >= 0.0)) throw ConfigError("l2 lambda must be >= 0");
  model.validate();
}

double TrainReport::epoch_mean(std::size_t epoch, std::size_t batches_per_epoch) const {
  const std::size_t begin = epoch * batches_per_epoch;
  if (batches_per_epoch == 0 || begin + batches_per_epoch > objective_trace.size())
    throw ArgumentError("epoch " + std::to_string(epoch) + " outside the trace");
  double s = 0.0;
  for (std::size_t i = begin; i < begin + batches_per_epoch; ++i) s += objective_trace[i];
  return s / static_cast<double>(batches_per_epoch);
}

TrainResult train(const TrainingPools& pools, const TrainConfig& cfg) {
  cfg.validate();
  require_pools(pools);
  if (pools.dim() != cfg.model.input_dim)
    throw ShapeError("pools have " + std::to_string(pools.dim()) + " features, model expects " +
                     std::to_string(cfg.model.input_dim));

  const auto start = std::chrono::steady_clock::now();
  ModelConfig model_cfg = cfg.model;
  model_cfg.l2_lambda = cfg.l2_lambda;

  Rng init_rng = Rng::derive(cfg.seed, kInitStream);
  Rng batch_rng = Rng::derive(cfg.seed, kBatchStream);
  TrainResult result{build_variant(model_cfg, init_rng), {}};
  auto& params = result.model.params;

  OptimizerState state;
  state.learning_rate = cfg.learning_rate;
  const auto pair_targets = model_cfg.pair_targets();
  const auto [y_anomaly, y_unlabeled] = model_cfg.instance_targets();

  auto& trace = result.report.objective_trace;
  trace.reserve(cfg.n_epochs * cfg.n_batches_per_epoch);
  for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    for (std::size_t step = 0; step < cfg.n_batches_per_epoch; ++step) {
      const PairBatch batch =
          model_cfg.two_stream()
              ? sample_pair_batch(pools, cfg.batch_size, pair_targets, batch_rng)
              : sample_instance_batch(pools, cfg.batch_size, y_anomaly, y_unlabeled, batch_rng);
      auto [objective, grads] = batch_gradients(params, batch, cfg.l2_lambda);
      trace.push_back(objective);
      try {
        rmsprop_step(params, grads, state);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch + 1) +
                           ", batch " + std::to_string(step + 1) + ")");
      }
    }
  }
  result.report.seed = cfg.seed;
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

PartnerDraws PartnerDraws::permuted(std::span<const std::size_t> order) const {
  PartnerDraws out;
  out.ensemble_size = ensemble_size;
  out.anomaly.reserve(order.size() * ensemble_size);
  out.unlabeled.reserve(order.size() * ensemble_size);
  for (auto r : order) {
    const auto off = static_cast<std::ptrdiff_t>(r * ensemble_size);
    const auto len = static_cast<std::ptrdiff_t>(ensemble_size);
    out.anomaly.insert(out.anomaly.end(), anomaly.begin() + off, anomaly.begin() + off + len);
    out.unlabeled.insert(out.unlabeled.end(), unlabeled.begin() + off, unlabeled.begin() + off + len);
  }
  return out;
}

PartnerDraws draw_partners(const TrainingPools& pools, std::size_t rows, std::size_t ensemble_size,
                           Rng& rng) {
  require_pools(pools);
  if (ensemble_size == 0) throw ArgumentError("ensemble size must be positive");
  PartnerDraws d;
  d.ensemble_size = ensemble_size;
  d.anomaly.reserve(rows * ensemble_size);
  d.unlabeled.reserve(rows * ensemble_size);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t e = 0; e < ensemble_size; ++e)
      d.anomaly.push_back(static_cast<std::uint32_t>(rng.below(pools.anomalies.size())));
    for (std::size_t e = 0; e < ensemble_size; ++e)
      d.unlabeled.push_back(static_cast<std::uint32_t>(rng.below(pools.unlabeled.size())));
  }
  return d;
}

std::vector<double> score_dataset(const Model& model, const Matrix& x, const TrainingPools& pools,
                                  const PartnerDraws& draws, std::size_t threads) {
  require_pools(pools);
  const auto& params = model.params;
  if (x.cols() != params.input_dim)
    throw ShapeError("data has " + std::to_string(x.cols()) + " features, model expects " +
                     std::to_string(params.input_dim));
  if (draws.rows() != x.rows())
    throw ShapeError("partner draws cover " + std::to_string(draws.rows()) + " rows, data has " +
                     std::to_string(x.rows()));

  const std::size_t e_size = draws.ensemble_size;
  const Matrix zx = features(params, x);
  std::vector<double> scores(x.rows());

  if (!params.two_stream()) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      double s = 0.0;
      for (std::size_t e = 0; e < e_size; ++e) s += head_single(params, zx.row(r));
      scores[r] = s / static_cast<double>(e_size);
    }
    return scores;
  }

  const Matrix zpool = features(params, pools.store);
  auto score_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      double s = 0.0;
      for (std::size_t e = 0; e < e_size; ++e) {
        const auto a = pools.anomalies[draws.anomaly[r * e_size + e]];
        s += head_pair(params, zpool.row(a), zx.row(r));
      }
      for (std::size_t e = 0; e < e_size; ++e) {
        const auto u = pools.unlabeled[draws.unlabeled[r * e_size + e]];
        s += head_pair(params, zx.row(r), zpool.row(u));
      }
      scores[r] = s / static_cast<double>(2 * e_size);
    }
  };

  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, x.rows()));
  if (threads == 1) {
    score_rows(0, x.rows());
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (x.rows() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < x.rows(); begin += chunk)
      workers.emplace_back(score_rows, begin, std::min(x.rows(), begin + chunk));
  }
  return scores;
}

std::vector<double> score_dataset(const Model& model, const Matrix& x, const TrainingPools& pools,
                                  std::size_t ensemble_size, Rng& rng, std::size_t threads) {
  return score_dataset(model, x, pools, draw_partners(pools, x.rows(), ensemble_size, rng), threads);
}

double score_instance(const Model& model, std::span<const double> x, const TrainingPools& pools,
                      std::size_t ensemble_size, Rng& rng) {
  const Matrix row(1, x.size(), std::vector<double>(x.begin(), x.end()));
  return score_dataset(model, row, pools, ensemble_size, rng).front();
}

}  // namespace prenet

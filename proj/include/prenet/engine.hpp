#pragma once

#include <cstdint>
#include <vector>

#include "prenet/dataset.hpp"
#include "prenet/model.hpp"
#include "prenet/rng.hpp"

namespace prenet {

struct TrainConfig {
  std::size_t n_epochs = 50;
  std::size_t n_batches_per_epoch = 20;
  std::size_t batch_size = 512;
  double learning_rate = 0.001;
  double l2_lambda = 0.01;
  std::size_t ensemble_size = 30;
  std::uint64_t seed = 0;
  ModelConfig model;

  /// Throws ConfigError on zero counts or a batch size the variant cannot use.
  void validate() const;
};

struct TrainReport {
  /// Objective of each batch, evaluated before its optimizer step.
  std::vector<double> objective_trace;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;

  double epoch_mean(std::size_t epoch, std::size_t batches_per_epoch) const;
};

struct TrainResult {
  Model model;
  TrainReport report;
};

/// Glorot init followed by n_epochs x n_batches_per_epoch RMSprop steps on
/// stratified batches. cfg.l2_lambda overrides cfg.model.l2_lambda.
TrainResult train(const TrainingPools& pools, const TrainConfig& cfg);

/// Partner indices for ensemble scoring: for each row, E positions into A
/// followed by E positions into U (indices into pools.anomalies / pools.unlabeled).
struct PartnerDraws {
  std::size_t ensemble_size = 0;
  std::vector<std::uint32_t> anomaly;    // rows x E
  std::vector<std::uint32_t> unlabeled;  // rows x E

  std::size_t rows() const { return ensemble_size ? anomaly.size() / ensemble_size : 0; }
  /// Reorders rows: row r of the result is row order[r] of this.
  PartnerDraws permuted(std::span<const std::size_t> order) const;
};

/// Draws partners for `rows` rows in row order. Throws DomainError on empty pools.
PartnerDraws draw_partners(const TrainingPools& pools, std::size_t rows, std::size_t ensemble_size,
                           Rng& rng);

/// Ensemble score of one instance:
///   (1/2E) [ sum_i φ((a_i, x)) + sum_j φ((x, u_j)) ]
/// OSNET reduces to the mean of E single-stream evaluations of x.
double score_instance(const Model& model, std::span<const double> x, const TrainingPools& pools,
                      std::size_t ensemble_size, Rng& rng);

/// Row-wise ensemble scores with pre-drawn partners; independent of
/// evaluation order and thread count.
std::vector<double> score_dataset(const Model& model, const Matrix& x, const TrainingPools& pools,
                                  const PartnerDraws& draws, std::size_t threads = 1);

/// Convenience overload: draws partners from `rng` first.
std::vector<double> score_dataset(const Model& model, const Matrix& x, const TrainingPools& pools,
                                  std::size_t ensemble_size, Rng& rng, std::size_t threads = 1);

}  // namespace prenet

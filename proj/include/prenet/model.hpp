#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prenet/ndcore.hpp"
#include "prenet/pairgen.hpp"
#include "prenet/rng.hpp"

namespace prenet {

/// PRENET is the full two-stream ternary model; the rest are ablations:
///   BOR   - AA and AU pairs share the target c2
///   OSNET - one stream over single instances, targets c2 (A) and c3 (U)
///   LDM   - no hidden layers, linear map from the concatenated raw pair
///   A2H   - three hidden layers instead of one
enum class Variant { PRENET, BOR, OSNET, LDM, A2H };

std::string to_string(Variant v);
/// Case-insensitive. Throws ConfigError for unknown names.
Variant parse_variant(const std::string& name);
inline constexpr Variant kAllVariants[] = {Variant::PRENET, Variant::BOR, Variant::OSNET,
                                           Variant::LDM, Variant::A2H};

struct ModelConfig {
  Variant variant = Variant::PRENET;
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims{20};
  double l2_lambda = 0.01;
  OrdinalLabels labels;

  /// Paper-default architecture for `variant` over `input_dim` features.
  static ModelConfig defaults(Variant variant, std::size_t input_dim);

  /// Throws ConfigError when hidden_dims do not fit the variant.
  void validate() const;

  bool two_stream() const { return variant != Variant::OSNET; }
  /// Per-class pair targets (BOR merges AA into AU).
  PairTargets pair_targets() const;
  /// Single-instance targets for OSNET: {anomaly, unlabeled}.
  std::pair<double, double> instance_targets() const { return {labels.c2, labels.c3}; }
};

struct DenseLayer {
  Matrix weights;             // fan_in x fan_out
  std::vector<double> bias;   // fan_out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Shared feature layers plus the linear score head. There is exactly one
/// copy of the feature layers; both streams read it.
///
/// output_weights has 2M entries for a two-stream head (first M act on the
/// left instance) and M entries for a one-stream head, M being the feature
/// width (the input width when there are no hidden layers).
struct PReNetParams {
  std::size_t input_dim = 0;
  std::vector<DenseLayer> hidden;
  std::vector<double> output_weights;
  double output_bias = 0.0;

  std::size_t feature_dim() const;
  bool two_stream() const { return output_weights.size() == 2 * feature_dim(); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Layout: for each hidden layer weights then bias, then output weights, then bias.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  /// Same shapes, all zeros.
  PReNetParams zeros_like() const;

  friend bool operator==(const PReNetParams&, const PReNetParams&) = default;
};

using Gradients = PReNetParams;

struct Model {
  ModelConfig config;
  PReNetParams params;
};

/// Glorot-uniform weights, zero biases.
Model build_variant(const ModelConfig& config, Rng& rng);

/// ψ(x): relu(x W + b) chained over the hidden layers; identity without them.
std::vector<double> feature(const PReNetParams& params, std::span<const double> x);
/// Row-wise ψ over a matrix.
Matrix features(const PReNetParams& params, const Matrix& x);

/// Two-stream score φ((x_i, x_j)).
double forward_pair(const PReNetParams& params, std::span<const double> x_i,
                    std::span<const double> x_j);
/// One-stream score for OSNET.
double forward_single(const PReNetParams& params, std::span<const double> x);

/// Linear head over precomputed features.
double head_pair(const PReNetParams& params, std::span<const double> z_i,
                 std::span<const double> z_j);
double head_single(const PReNetParams& params, std::span<const double> z);

inline double pair_loss(double score, double target) { return std::abs(target - score); }

/// Sum of squared weights over every layer (biases excluded).
double regularizer(const PReNetParams& params);

/// Per-row scores for a batch; one-stream params ignore batch.right entirely.
std::vector<double> batch_scores(const PReNetParams& params, const PairBatch& batch);

/// Mean absolute error plus lambda * regularizer. Throws ArgumentError on an empty batch.
double batch_objective(const PReNetParams& params, const PairBatch& batch, double l2_lambda);

struct ObjectiveAndGradients {
  double objective;
  Gradients gradients;
};

/// Subgradient of batch_objective with sign(0) = 0 and relu'(0) = 0.
ObjectiveAndGradients batch_gradients(const PReNetParams& params, const PairBatch& batch,
                                      double l2_lambda);

struct OptimizerState {
  std::vector<double> accumulator;  // flattened, same layout as PReNetParams::flatten
  double rho = 0.9;
  double epsilon = 1e-7;
  double learning_rate = 0.001;
};

/// acc = rho acc + (1 - rho) g^2;  p -= lr g / (sqrt(acc) + epsilon).
/// Throws NumericError on a non-finite gradient, ShapeError on a layout mismatch.
void rmsprop_step(PReNetParams& params, const Gradients& grads, OptimizerState& state);

}  // namespace prenet

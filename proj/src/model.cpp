#include "prenet/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "prenet/errors.hpp"

namespace prenet {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : v < 0.0 ? -1.0 : 0.0; }

void check_input(const PReNetParams& p, std::size_t n) {
  if (n != p.input_dim)
    throw ShapeError("input has " + std::to_string(n) + " features, model expects " +
                     std::to_string(p.input_dim));
}

// Activations of one stream for a whole batch: pre-activations and outputs of
// every hidden layer. outputs.back() is the feature matrix.
struct StreamCache {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
  const Matrix* input = nullptr;

  const Matrix& features() const { return post.empty() ? *input : post.back(); }
};

StreamCache run_stream(const PReNetParams& p, const Matrix& x) {
  StreamCache c;
  c.input = &x;
  const Matrix* h = &x;
  for (const auto& layer : p.hidden) {
    Matrix a = matmul(*h, layer.weights);
    add_row_vector(a, layer.bias);
    c.post.push_back(relu(a));
    c.pre.push_back(std::move(a));
    h = &c.post.back();
  }
  return c;
}

// Accumulates gradients of one stream given d(objective)/d(features).
void backprop_stream(const PReNetParams& p, const StreamCache& c, Matrix upstream, Gradients& g) {
  for (std::size_t l = p.hidden.size(); l-- > 0;) {
    const Matrix& pre = c.pre[l];
    for (std::size_t i = 0; i < upstream.size(); ++i)
      if (!(pre.data()[i] > 0.0)) upstream.data()[i] = 0.0;
    const Matrix& below = l == 0 ? *c.input : c.post[l - 1];
    auto& gw = g.hidden[l].weights;
    auto& gb = g.hidden[l].bias;
    for (std::size_t r = 0; r < upstream.rows(); ++r) {
      const auto up = upstream.row(r);
      const auto in = below.row(r);
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == 0.0) continue;
        auto gw_row = gw.row(i);
        for (std::size_t j = 0; j < up.size(); ++j) gw_row[j] += in[i] * up[j];
      }
      for (std::size_t j = 0; j < up.size(); ++j) gb[j] += up[j];
    }
    if (l > 0) upstream = matmul(upstream, transpose(p.hidden[l].weights));
  }
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::PRENET: return "PRENET";
    case Variant::BOR: return "BOR";
    case Variant::OSNET: return "OSNET";
    case Variant::LDM: return "LDM";
    case Variant::A2H: return "A2H";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  std::string up = name;
  std::ranges::transform(up, up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto v : kAllVariants)
    if (to_string(v) == up) return v;
  throw ConfigError("unknown variant '" + name + "' (expected PRENET, BOR, OSNET, LDM or A2H)");
}

ModelConfig ModelConfig::defaults(Variant variant, std::size_t input_dim) {
  ModelConfig c;
  c.variant = variant;
  c.input_dim = input_dim;
  if (variant == Variant::LDM) c.hidden_dims.clear();
  if (variant == Variant::A2H) c.hidden_dims = {20, 20, 20};
  return c;
}

void ModelConfig::validate() const {
  if (input_dim == 0) throw ConfigError("input dimension must be positive");
  if (!(l2_lambda >= 0.0 && std::isfinite(l2_lambda))) throw ConfigError("l2 lambda must be >= 0");
  labels.validate();
  const std::size_t expected = variant == Variant::LDM ? 0 : variant == Variant::A2H ? 3 : 1;
  if (hidden_dims.size() != expected)
    throw ConfigError(to_string(variant) + " needs " + std::to_string(expected) +
                      " hidden layer(s), got " + std::to_string(hidden_dims.size()));
  for (auto h : hidden_dims)
    if (h == 0) throw ConfigError("hidden layer width must be positive");
}

PairTargets ModelConfig::pair_targets() const {
  auto t = PairTargets::from(labels);
  if (variant == Variant::BOR) t.aa = labels.c2;
  return t;
}

std::size_t PReNetParams::feature_dim() const {
  return hidden.empty() ? input_dim : hidden.back().bias.size();
}

std::size_t PReNetParams::parameter_count() const {
  std::size_t n = output_weights.size() + 1;
  for (const auto& l : hidden) n += l.weights.size() + l.bias.size();
  return n;
}

bool PReNetParams::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  for (const auto& l : hidden)
    if (!l.weights.all_finite() || !std::ranges::all_of(l.bias, finite)) return false;
  return std::ranges::all_of(output_weights, finite) && std::isfinite(output_bias);
}

std::vector<double> PReNetParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : hidden) {
    flat.insert(flat.end(), l.weights.data().begin(), l.weights.data().end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  flat.insert(flat.end(), output_weights.begin(), output_weights.end());
  flat.push_back(output_bias);
  return flat;
}

void PReNetParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw ShapeError("flat parameter vector of " + std::to_string(flat.size()) + " for " +
                     std::to_string(parameter_count()) + " parameters");
  auto it = flat.begin();
  auto take = [&it](auto& dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  for (auto& l : hidden) {
    take(l.weights.data());
    take(l.bias);
  }
  take(output_weights);
  output_bias = *it;
}

PReNetParams PReNetParams::zeros_like() const {
  PReNetParams z;
  z.input_dim = input_dim;
  for (const auto& l : hidden)
    z.hidden.push_back({Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size())});
  z.output_weights.assign(output_weights.size(), 0.0);
  return z;
}

Model build_variant(const ModelConfig& config, Rng& rng) {
  config.validate();
  Model m{config, {}};
  m.params.input_dim = config.input_dim;
  std::size_t fan_in = config.input_dim;
  for (auto width : config.hidden_dims) {
    m.params.hidden.push_back({glorot_uniform(fan_in, width, rng), std::vector<double>(width, 0.0)});
    fan_in = width;
  }
  const std::size_t head = config.two_stream() ? 2 * fan_in : fan_in;
  m.params.output_weights = glorot_uniform(head, 1, rng).data();
  m.params.output_bias = 0.0;
  return m;
}

std::vector<double> feature(const PReNetParams& params, std::span<const double> x) {
  check_input(params, x.size());
  std::vector<double> h(x.begin(), x.end());
  for (const auto& layer : params.hidden) {
    std::vector<double> next(layer.bias);
    for (std::size_t j = 0; j < next.size(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * layer.weights(i, j);
      next[j] = std::max(0.0, acc + layer.bias[j]);
    }
    h = std::move(next);
  }
  return h;
}

Matrix features(const PReNetParams& params, const Matrix& x) {
  check_input(params, x.cols());
  auto c = run_stream(params, x);
  return c.post.empty() ? x : std::move(c.post.back());
}

double head_pair(const PReNetParams& params, std::span<const double> z_i,
                 std::span<const double> z_j) {
  const std::size_t m = params.feature_dim();
  if (!params.two_stream()) throw ShapeError("one-stream parameters used for a pair score");
  if (z_i.size() != m || z_j.size() != m) throw ShapeError("feature width mismatch");
  // Each stream's sum is formed separately so that swapping streams and
  // weight halves reproduces the score exactly.
  double left = 0.0, right = 0.0;
  for (std::size_t k = 0; k < m; ++k) left += params.output_weights[k] * z_i[k];
  for (std::size_t l = 0; l < m; ++l) right += params.output_weights[m + l] * z_j[l];
  return (left + right) + params.output_bias;
}

double head_single(const PReNetParams& params, std::span<const double> z) {
  if (params.output_weights.size() != z.size()) throw ShapeError("feature width mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) s += params.output_weights[k] * z[k];
  return s + params.output_bias;
}

double forward_pair(const PReNetParams& params, std::span<const double> x_i,
                    std::span<const double> x_j) {
  return head_pair(params, feature(params, x_i), feature(params, x_j));
}

double forward_single(const PReNetParams& params, std::span<const double> x) {
  return head_single(params, feature(params, x));
}

double regularizer(const PReNetParams& params) {
  double r = 0.0;
  for (const auto& l : params.hidden)
    for (double w : l.weights.data()) r += w * w;
  for (double w : params.output_weights) r += w * w;
  return r;
}

std::vector<double> batch_scores(const PReNetParams& params, const PairBatch& batch) {
  const std::size_t b = batch.size();
  if (batch.left.rows() != b) throw ShapeError("batch left side does not match target count");
  const auto left = run_stream(params, batch.left);
  std::vector<double> scores(b);
  if (params.two_stream()) {
    if (batch.right.rows() != b) throw ShapeError("pair batch is missing its right side");
    check_input(params, batch.right.cols());
    const auto right = run_stream(params, batch.right);
    for (std::size_t r = 0; r < b; ++r)
      scores[r] = head_pair(params, left.features().row(r), right.features().row(r));
  } else {
    for (std::size_t r = 0; r < b; ++r) scores[r] = head_single(params, left.features().row(r));
  }
  return scores;
}

double batch_objective(const PReNetParams& params, const PairBatch& batch, double l2_lambda) {
  if (batch.size() == 0) throw ArgumentError("empty batch");
  const auto scores = batch_scores(params, batch);
  double loss = 0.0;
  for (std::size_t r = 0; r < scores.size(); ++r) loss += pair_loss(scores[r], batch.targets[r]);
  return loss / static_cast<double>(scores.size()) + l2_lambda * regularizer(params);
}

ObjectiveAndGradients batch_gradients(const PReNetParams& params, const PairBatch& batch,
                                      double l2_lambda) {
  const std::size_t b = batch.size();
  if (b == 0) throw ArgumentError("empty batch");
  if (batch.left.rows() != b) throw ShapeError("batch left side does not match target count");
  check_input(params, batch.left.cols());
  const bool pair = params.two_stream();
  if (pair) {
    if (batch.right.rows() != b) throw ShapeError("pair batch is missing its right side");
    check_input(params, batch.right.cols());
  }
  const std::size_t m = params.feature_dim();

  const auto left = run_stream(params, batch.left);
  StreamCache right;
  if (pair) right = run_stream(params, batch.right);

  Gradients g = params.zeros_like();
  Matrix up_left(b, m);
  Matrix up_right(pair ? b : 0, m);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t r = 0; r < b; ++r) {
    const auto zl = left.features().row(r);
    const double score = pair ? head_pair(params, zl, right.features().row(r))
                              : head_single(params, zl);
    const double residual = batch.targets[r] - score;
    loss += std::abs(residual);
    // d|y - s| / ds = -sign(y - s)
    const double ds = -sign(residual) * inv_b;
    if (ds == 0.0) continue;
    g.output_bias += ds;
    for (std::size_t k = 0; k < m; ++k) {
      g.output_weights[k] += ds * zl[k];
      up_left(r, k) = ds * params.output_weights[k];
    }
    if (pair) {
      const auto zr = right.features().row(r);
      for (std::size_t k = 0; k < m; ++k) {
        g.output_weights[m + k] += ds * zr[k];
        up_right(r, k) = ds * params.output_weights[m + k];
      }
    }
  }

  if (!params.hidden.empty()) {
    backprop_stream(params, left, std::move(up_left), g);
    if (pair) backprop_stream(params, right, std::move(up_right), g);
  }

  for (std::size_t l = 0; l < params.hidden.size(); ++l) {
    const auto& w = params.hidden[l].weights.data();
    auto& gw = g.hidden[l].weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) gw[i] += 2.0 * l2_lambda * w[i];
  }
  for (std::size_t i = 0; i < params.output_weights.size(); ++i)
    g.output_weights[i] += 2.0 * l2_lambda * params.output_weights[i];

  return {loss * inv_b + l2_lambda * regularizer(params), std::move(g)};
}

void rmsprop_step(PReNetParams& params, const Gradients& grads, OptimizerState& state) {
  auto p = params.flatten();
  const auto g = grads.flatten();
  if (g.size() != p.size()) throw ShapeError("gradient layout does not match parameters");
  if (state.accumulator.empty()) state.accumulator.assign(p.size(), 0.0);
  if (state.accumulator.size() != p.size()) throw ShapeError("optimizer state layout mismatch");
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!std::isfinite(g[i]))
      throw NumericError("non-finite gradient at flat parameter " + std::to_string(i));

  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& acc = state.accumulator[i];
    acc = state.rho * acc + (1.0 - state.rho) * g[i] * g[i];
    p[i] -= state.learning_rate * g[i] / (std::sqrt(acc) + state.epsilon);
  }
  params.assign(p);
  if (!params.all_finite()) throw NumericError("parameters became non-finite after an RMSprop step");
}

}  // namespace prenet

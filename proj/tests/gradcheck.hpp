#pragma once

// Finite-difference check of batch_gradients, shared by the unit and
// acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "prenet/model.hpp"
#include "prenet/ndcore.hpp"

namespace prenet::testing {

/// Which side of every kink the objective sits on: sign of each residual and
/// of each hidden pre-activation in both streams.
inline std::vector<std::int8_t> kink_pattern(const PReNetParams& p, const PairBatch& batch) {
  std::vector<std::int8_t> pattern;
  auto side = [](double v) -> std::int8_t { return v > 0 ? 1 : v < 0 ? -1 : 0; };
  auto stream = [&](const Matrix& x) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      std::vector<double> h(x.row(r).begin(), x.row(r).end());
      for (const auto& layer : p.hidden) {
        std::vector<double> next(layer.bias.size());
        for (std::size_t j = 0; j < next.size(); ++j) {
          double a = layer.bias[j];
          for (std::size_t i = 0; i < h.size(); ++i) a += h[i] * layer.weights(i, j);
          pattern.push_back(side(a));
          next[j] = std::max(0.0, a);
        }
        h.swap(next);
      }
    }
  };
  stream(batch.left);
  if (p.two_stream()) stream(batch.right);
  const auto scores = batch_scores(p, batch);
  for (std::size_t r = 0; r < scores.size(); ++r) pattern.push_back(side(batch.targets[r] - scores[r]));
  return pattern;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Relative error |analytic - numeric| / max(|analytic|, |numeric|, floor) over
/// all coordinates whose +-h probes stay on one side of every kink.
inline GradCheckResult check_gradients(const PReNetParams& params, const PairBatch& batch,
                                       double l2_lambda, double h = 1e-5, double floor = 1e-3) {
  const auto analytic = batch_gradients(params, batch, l2_lambda).gradients.flatten();
  const auto theta = params.flatten();
  PReNetParams probe = params;
  auto objective = [&](std::span<const double> t) {
    probe.assign(t);
    return batch_objective(probe, batch, l2_lambda);
  };
  const auto numeric = finite_diff_grad(objective, theta, h);

  GradCheckResult out;
  std::vector<double> shifted = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    shifted[i] = theta[i] + h;
    probe.assign(shifted);
    const auto up = kink_pattern(probe, batch);
    shifted[i] = theta[i] - h;
    probe.assign(shifted);
    const auto down = kink_pattern(probe, batch);
    shifted[i] = theta[i];
    if (up != down || std::find(up.begin(), up.end(), 0) != up.end()) {
      ++out.skipped;
      continue;
    }
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic[i] - numeric[i]) / denom);
    ++out.checked;
  }
  return out;
}

}  // namespace prenet::testing

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cfpred/matrix.hpp"
#include "cfpred/rng.hpp"

namespace cfpred::nn {

/// A trainable tensor: value plus gradient and Adam moment buffers, all of
/// one shape. Gradients accumulate across backward calls and are zeroed by
/// adam_step (or zero_grad).
struct Param {
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  std::string name;

  Param() = default;
  Param(int rows, int cols, std::string param_name)
      : value(rows, cols), grad(rows, cols), adam_m(rows, cols), adam_v(rows, cols), name(std::move(param_name)) {}

  void zero_grad() { grad.fill(0.0); }
  /// Glorot-uniform fill: U(-l, l) with l = sqrt(6 / (rows + cols)).
  void init_glorot(Rng& rng);
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update with bias correction at step t (1-based), then zeroes
/// every gradient.
void adam_step(const std::vector<Param*>& params, const AdamConfig& cfg, int t);

/// Scales all gradients so their global L2 norm is at most max_norm
/// (no-op when max_norm <= 0 or the norm is already below it).
void clip_grad_norm(const std::vector<Param*>& params, double max_norm);

struct LossResult {
  double value = 0.0;
  Matrix grad; ///< dLoss/dPred, same shape as pred
};

/// Mean absolute error over all entries; gradient is sign(pred - target) / count
/// with sign(0) = 0.
LossResult mae_loss(const Matrix& pred, const Matrix& target);

struct DropoutResult {
  Matrix output;
  Matrix mask; ///< per-entry factor: 0 or 1/(1-p); all ones in eval mode
};

/// Inverted dropout: each entry kept with probability 1-p and scaled by
/// 1/(1-p) in training mode; identity in eval mode. Throws InvalidRate
/// unless 0 <= p < 1.
DropoutResult dropout_forward(const Matrix& x, double p, Rng& rng, bool training);
Matrix dropout_backward(const Matrix& upstream, const Matrix& mask);

/// Central-difference gradient check. The caller runs its backward pass
/// first so that param.grad holds the analytic gradient, then passes a
/// re-evaluation function for the same scalar loss (dropout must be off or
/// its masks frozen). Returns the max over parameter entries of
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double grad_check(const std::function<double()>& loss_fn, const std::vector<Param*>& params,
                  double epsilon = 1e-5);

} // namespace cfpred::nn

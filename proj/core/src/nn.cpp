#include "cfpred/nn.hpp"

#include <cmath>

#include "cfpred/errors.hpp"

namespace cfpred::nn {

void Param::init_glorot(Rng& rng) {
  const double limit = std::sqrt(6.0 / (value.rows() + value.cols()));
  double* p = value.data();
  for (std::size_t i = 0; i < value.size(); ++i) {
    p[i] = rng.uniform(-limit, limit);
  }
}

void adam_step(const std::vector<Param*>& params, const AdamConfig& cfg, int t) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (Param* param : params) {
    double* value = param->value.data();
    double* grad = param->grad.data();
    double* m = param->adam_m.data();
    double* v = param->adam_v.data();
    const std::size_t n = param->value.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
      grad[i] = 0.0;
    }
    debug_check(param->value, "adam_step");
  }
}

void clip_grad_norm(const std::vector<Param*>& params, double max_norm) {
  if (max_norm <= 0.0) {
    return;
  }
  double sq = 0.0;
  for (const Param* param : params) {
    const double* g = param->grad.data();
    for (std::size_t i = 0; i < param->grad.size(); ++i) {
      sq += g[i] * g[i];
    }
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) {
    return;
  }
  const double factor = max_norm / norm;
  for (Param* param : params) {
    scale_in_place(param->grad, factor);
  }
}

LossResult mae_loss(const Matrix& pred, const Matrix& target) {
  if (!pred.same_shape(target)) {
    throw ShapeMismatch("mae_loss: pred " + shape_string(pred) + " vs target " + shape_string(target));
  }
  LossResult result;
  result.grad = Matrix(pred.rows(), pred.cols());
  const double* pp = pred.data();
  const double* pt = target.data();
  double* pg = result.grad.data();
  const std::size_t n = pred.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pp[i] - pt[i];
    sum += std::abs(d);
    pg[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / static_cast<double>(n);
  }
  result.value = sum / static_cast<double>(n);
  return result;
}

DropoutResult dropout_forward(const Matrix& x, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) {
    throw InvalidRate("dropout_forward: rate must satisfy 0 <= p < 1");
  }
  DropoutResult result;
  result.mask = Matrix(x.rows(), x.cols());
  if (!training || p == 0.0) {
    result.mask.fill(1.0);
    result.output = x;
    return result;
  }
  const double keep_scale = 1.0 / (1.0 - p);
  result.output = Matrix(x.rows(), x.cols());
  const double* px = x.data();
  double* pm = result.mask.data();
  double* po = result.output.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double factor = rng.uniform() < p ? 0.0 : keep_scale;
    pm[i] = factor;
    po[i] = px[i] * factor;
  }
  return result;
}

Matrix dropout_backward(const Matrix& upstream, const Matrix& mask) {
  return hadamard(upstream, mask);
}

double grad_check(const std::function<double()>& loss_fn, const std::vector<Param*>& params,
                  double epsilon) {
  double max_rel_error = 0.0;
  for (Param* param : params) {
    double* value = param->value.data();
    const double* grad = param->grad.data();
    for (std::size_t i = 0; i < param->value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + epsilon;
      const double loss_plus = loss_fn();
      value[i] = saved - epsilon;
      const double loss_minus = loss_fn();
      value[i] = saved;
      const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
      const double analytic = grad[i];
      const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      const double rel = std::abs(analytic - numeric) / denom;
      max_rel_error = std::max(max_rel_error, rel);
    }
  }
  return max_rel_error;
}

} // namespace cfpred::nn

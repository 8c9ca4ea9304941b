#include "cfpred/errors.hpp"
#include "cfpred/models.hpp"

namespace cfpred::models {

using nn::Matrix;

AdditiveAttention::AdditiveAttention(int width, std::string name)
    : w_enc(width, width, name + ".w_enc"),
      w_query(width, width, name + ".w_query"),
      v(width, 1, name + ".v"),
      width_(width) {}

void AdditiveAttention::init_weights(nn::Rng& rng) {
  w_enc.init_glorot(rng);
  w_query.init_glorot(rng);
  v.init_glorot(rng);
}

std::vector<nn::Param*> AdditiveAttention::params() { return {&w_enc, &w_query, &v}; }

AdditiveAttention::Output AdditiveAttention::forward(const Sequence& encoder_states,
                                                     const nn::Matrix& query,
                                                     AttentionTape& tape) const {
  const int steps = static_cast<int>(encoder_states.size());
  if (steps == 0 || query.cols() != width_) {
    throw ShapeMismatch("AdditiveAttention::forward: query " + shape_string(query));
  }
  const int batch = query.rows();
  tape = AttentionTape{};
  tape.encoder_states = encoder_states;
  tape.query = query;
  tape.query_proj = matmul(query, w_query.value);
  tape.scored.reserve(steps);

  Matrix scores(batch, steps);
  for (int t = 0; t < steps; ++t) {
    if (encoder_states[t].cols() != width_ || encoder_states[t].rows() != batch) {
      throw ShapeMismatch("AdditiveAttention::forward: state " + shape_string(encoder_states[t]));
    }
    Matrix pre = matmul(encoder_states[t], w_enc.value);
    add_in_place(pre, tape.query_proj);
    Matrix u = tanh_act(pre);
    set_col(scores, t, matmul(u, v.value));
    tape.scored.push_back(std::move(u));
  }
  tape.alphas = softmax_rows(scores);

  Output out;
  out.alphas = tape.alphas;
  out.context = Matrix(batch, width_);
  for (int t = 0; t < steps; ++t) {
    scale_rows_acc(out.context, encoder_states[t], get_col(tape.alphas, t));
  }
  return out;
}

AdditiveAttention::Gradients AdditiveAttention::backward(const nn::Matrix& d_context,
                                                         const AttentionTape& tape) {
  const int steps = static_cast<int>(tape.encoder_states.size());
  const int batch = d_context.rows();

  Gradients grads;
  grads.d_encoder_states.assign(steps, Matrix(batch, width_));
  grads.d_query = Matrix(batch, width_);

  // context = sum_t alpha_t h_t
  Matrix d_alpha(batch, steps);
  for (int t = 0; t < steps; ++t) {
    set_col(d_alpha, t, row_dots(d_context, tape.encoder_states[t]));
    scale_rows_acc(grads.d_encoder_states[t], d_context, get_col(tape.alphas, t));
  }

  // softmax rows: ds = alpha * (d_alpha - sum_j d_alpha_j alpha_j)
  Matrix weighted = hadamard(d_alpha, tape.alphas);
  Matrix row_total = row_sums(weighted);
  Matrix d_scores(batch, steps);
  for (int i = 0; i < batch; ++i) {
    for (int t = 0; t < steps; ++t) {
      d_scores(i, t) = tape.alphas(i, t) * (d_alpha(i, t) - row_total(i, 0));
    }
  }

  for (int t = 0; t < steps; ++t) {
    Matrix ds_col = get_col(d_scores, t);
    // score_t = u_t v
    matmul_tn_acc(v.grad, tape.scored[t], ds_col);
    Matrix du = matmul_nt(ds_col, v.value);
    Matrix d_pre = hadamard(du, tanh_grad(tape.scored[t]));
    matmul_tn_acc(w_enc.grad, tape.encoder_states[t], d_pre);
    add_in_place(grads.d_encoder_states[t], matmul_nt(d_pre, w_enc.value));
    matmul_tn_acc(w_query.grad, tape.query, d_pre);
    add_in_place(grads.d_query, matmul_nt(d_pre, w_query.value));
  }
  return grads;
}

AdditiveAttention::Output attention_forward(const AdditiveAttention& attention,
                                            const nn::Matrix& encoder_states,
                                            const nn::Matrix& query) {
  Sequence states;
  states.reserve(encoder_states.rows());
  for (int t = 0; t < encoder_states.rows(); ++t) {
    Matrix row(1, encoder_states.cols());
    for (int j = 0; j < encoder_states.cols(); ++j) {
      row(0, j) = encoder_states(t, j);
    }
    states.push_back(std::move(row));
  }
  AttentionTape tape;
  return attention.forward(states, query, tape);
}

Dense::Dense(int input_size, int output_size, std::string name)
    : w(input_size, output_size, name + ".w"), b(1, output_size, name + ".b") {}

void Dense::init_weights(nn::Rng& rng) {
  w.init_glorot(rng);
  b.value.fill(0.0);
}

std::vector<nn::Param*> Dense::params() { return {&w, &b}; }

nn::Matrix Dense::forward(const nn::Matrix& x) const {
  Matrix out = matmul(x, w.value);
  add_row_broadcast_in_place(out, b.value);
  return out;
}

nn::Matrix Dense::backward(const nn::Matrix& x, const nn::Matrix& d_out) {
  matmul_tn_acc(w.grad, x, d_out);
  col_sums_acc(b.grad, d_out);
  return matmul_nt(d_out, w.value);
}

} // namespace cfpred::models

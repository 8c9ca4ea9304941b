#include "cfpred/errors.hpp"
#include "cfpred/models.hpp"

namespace cfpred::models {

using nn::Matrix;

GruCell::GruCell(int input_size, int hidden_size, std::string name)
    : wx(input_size, 3 * hidden_size, name + ".wx"),
      wh(hidden_size, 3 * hidden_size, name + ".wh"),
      b(1, 3 * hidden_size, name + ".b"),
      input_size_(input_size),
      hidden_size_(hidden_size) {}

void GruCell::init_weights(nn::Rng& rng) {
  wx.init_glorot(rng);
  wh.init_glorot(rng);
  b.value.fill(0.0);
}

std::vector<nn::Param*> GruCell::params() { return {&wx, &wh, &b}; }

Sequence GruCell::forward(const Sequence& inputs, GruTape& tape) const {
  const int steps = static_cast<int>(inputs.size());
  const int hidden = hidden_size_;
  tape = GruTape{};
  tape.inputs = inputs;
  tape.update_z.reserve(steps);
  tape.reset_r.reserve(steps);
  tape.cand_n.reserve(steps);
  tape.rec_n.reserve(steps);
  tape.hidden.reserve(steps);

  const int batch = steps > 0 ? inputs[0].rows() : 0;
  Matrix h_prev(batch, hidden);
  Sequence outputs;
  outputs.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    if (inputs[t].cols() != input_size_) {
      throw ShapeMismatch("GruCell::forward: input width " + shape_string(inputs[t]));
    }
    Matrix pre = matmul(inputs[t], wx.value);
    add_row_broadcast_in_place(pre, b.value);
    Matrix rec = matmul(h_prev, wh.value);

    Matrix a_z = slice_cols(pre, 0, hidden);
    add_in_place(a_z, slice_cols(rec, 0, hidden));
    Matrix update_z = sigmoid(a_z);

    Matrix a_r = slice_cols(pre, hidden, 2 * hidden);
    add_in_place(a_r, slice_cols(rec, hidden, 2 * hidden));
    Matrix reset_r = sigmoid(a_r);

    Matrix rec_n = slice_cols(rec, 2 * hidden, 3 * hidden);
    Matrix a_n = slice_cols(pre, 2 * hidden, 3 * hidden);
    add_in_place(a_n, hadamard(reset_r, rec_n));
    Matrix cand_n = tanh_act(a_n);

    // h_t = z * h_{t-1} + (1 - z) * n
    Matrix hidden_state = hadamard(update_z, h_prev);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < hidden; ++j) {
        hidden_state(i, j) += (1.0 - update_z(i, j)) * cand_n(i, j);
      }
    }

    tape.update_z.push_back(update_z);
    tape.reset_r.push_back(reset_r);
    tape.cand_n.push_back(cand_n);
    tape.rec_n.push_back(rec_n);
    tape.hidden.push_back(hidden_state);

    h_prev = hidden_state;
    outputs.push_back(std::move(hidden_state));
  }
  return outputs;
}

Sequence GruCell::backward(const Sequence& d_outputs, const GruTape& tape) {
  const int steps = static_cast<int>(tape.inputs.size());
  if (static_cast<int>(d_outputs.size()) != steps) {
    throw ShapeMismatch("GruCell::backward: timestep count mismatch");
  }
  const int hidden = hidden_size_;
  const int batch = steps > 0 ? tape.inputs[0].rows() : 0;

  Sequence d_inputs(steps);
  Matrix dh_carry(batch, hidden);
  Matrix d_acts(batch, 3 * hidden);
  Matrix d_rec(batch, 3 * hidden);

  for (int t = steps - 1; t >= 0; --t) {
    Matrix dh = add(d_outputs[t], dh_carry);
    const Matrix& update_z = tape.update_z[t];
    const Matrix& reset_r = tape.reset_r[t];
    const Matrix& cand_n = tape.cand_n[t];
    const Matrix& rec_n = tape.rec_n[t];
    const bool first = t == 0;
    const Matrix* h_prev = first ? nullptr : &tape.hidden[t - 1];

    // dz = dh * (h_prev - n); dn = dh * (1 - z); dh_prev += dh * z
    Matrix da_z(batch, hidden);
    Matrix dn(batch, hidden);
    Matrix dh_prev(batch, hidden);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < hidden; ++j) {
        const double hp = first ? 0.0 : (*h_prev)(i, j);
        const double z = update_z(i, j);
        const double dz = dh(i, j) * (hp - cand_n(i, j));
        da_z(i, j) = dz * z * (1.0 - z);
        dn(i, j) = dh(i, j) * (1.0 - z);
        dh_prev(i, j) = dh(i, j) * z;
      }
    }
    Matrix da_n = hadamard(dn, tanh_grad(cand_n));
    Matrix dr = hadamard(da_n, rec_n);
    Matrix da_r = hadamard(dr, sigmoid_grad(reset_r));
    Matrix d_rec_n = hadamard(da_n, reset_r);

    paste_cols(d_acts, 0, da_z);
    paste_cols(d_acts, hidden, da_r);
    paste_cols(d_acts, 2 * hidden, da_n);
    matmul_tn_acc(wx.grad, tape.inputs[t], d_acts);
    col_sums_acc(b.grad, d_acts);
    d_inputs[t] = matmul_nt(d_acts, wx.value);

    paste_cols(d_rec, 0, da_z);
    paste_cols(d_rec, hidden, da_r);
    paste_cols(d_rec, 2 * hidden, d_rec_n);
    if (!first) {
      matmul_tn_acc(wh.grad, *h_prev, d_rec);
    }
    add_in_place(dh_prev, matmul_nt(d_rec, wh.value));
    dh_carry = std::move(dh_prev);
  }
  return d_inputs;
}

} // namespace cfpred::models

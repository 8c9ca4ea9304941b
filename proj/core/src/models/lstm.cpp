#include <cstddef>

#include "cfpred/errors.hpp"
#include "cfpred/models.hpp"

namespace cfpred::models {

using nn::Matrix;

LstmCell::LstmCell(int input_size, int hidden_size, std::string name)
    : wx(input_size, 4 * hidden_size, name + ".wx"),
      wh(hidden_size, 4 * hidden_size, name + ".wh"),
      b(1, 4 * hidden_size, name + ".b"),
      input_size_(input_size),
      hidden_size_(hidden_size) {}

void LstmCell::init_weights(nn::Rng& rng) {
  wx.init_glorot(rng);
  wh.init_glorot(rng);
  b.value.fill(0.0);
  // forget-gate block is the second H columns
  for (int j = hidden_size_; j < 2 * hidden_size_; ++j) {
    b.value(0, j) = 1.0;
  }
}

std::vector<nn::Param*> LstmCell::params() { return {&wx, &wh, &b}; }

Sequence LstmCell::forward(const Sequence& inputs, LstmTape& tape) const {
  const int steps = static_cast<int>(inputs.size());
  const int hidden = hidden_size_;
  tape = LstmTape{};
  tape.inputs = inputs;
  tape.gate_i.reserve(steps);
  tape.gate_f.reserve(steps);
  tape.gate_g.reserve(steps);
  tape.gate_o.reserve(steps);
  tape.cell.reserve(steps);
  tape.cell_tanh.reserve(steps);
  tape.hidden.reserve(steps);

  const int batch = steps > 0 ? inputs[0].rows() : 0;
  Matrix h_prev(batch, hidden);
  Matrix c_prev(batch, hidden);
  Sequence outputs;
  outputs.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    if (inputs[t].cols() != input_size_) {
      throw ShapeMismatch("LstmCell::forward: input width " + shape_string(inputs[t]));
    }
    Matrix pre = matmul(inputs[t], wx.value);
    matmul_acc(pre, h_prev, wh.value);
    add_row_broadcast_in_place(pre, b.value);

    Matrix gate_i = sigmoid(slice_cols(pre, 0, hidden));
    Matrix gate_f = sigmoid(slice_cols(pre, hidden, 2 * hidden));
    Matrix gate_g = tanh_act(slice_cols(pre, 2 * hidden, 3 * hidden));
    Matrix gate_o = sigmoid(slice_cols(pre, 3 * hidden, 4 * hidden));

    Matrix cell = hadamard(gate_f, c_prev);
    add_in_place(cell, hadamard(gate_i, gate_g));
    Matrix cell_tanh = tanh_act(cell);
    Matrix hidden_state = hadamard(gate_o, cell_tanh);

    tape.gate_i.push_back(gate_i);
    tape.gate_f.push_back(gate_f);
    tape.gate_g.push_back(gate_g);
    tape.gate_o.push_back(gate_o);
    tape.cell.push_back(cell);
    tape.cell_tanh.push_back(cell_tanh);
    tape.hidden.push_back(hidden_state);

    h_prev = hidden_state;
    c_prev = cell;
    outputs.push_back(std::move(hidden_state));
  }
  return outputs;
}

Sequence LstmCell::backward(const Sequence& d_outputs, const LstmTape& tape) {
  const int steps = static_cast<int>(tape.inputs.size());
  if (static_cast<int>(d_outputs.size()) != steps) {
    throw ShapeMismatch("LstmCell::backward: timestep count mismatch");
  }
  const int hidden = hidden_size_;
  const int batch = steps > 0 ? tape.inputs[0].rows() : 0;

  Sequence d_inputs(steps);
  Matrix dh_carry(batch, hidden);
  Matrix dc_carry(batch, hidden);
  Matrix d_acts(batch, 4 * hidden);

  for (int t = steps - 1; t >= 0; --t) {
    Matrix dh = add(d_outputs[t], dh_carry);
    const Matrix& gate_i = tape.gate_i[t];
    const Matrix& gate_f = tape.gate_f[t];
    const Matrix& gate_g = tape.gate_g[t];
    const Matrix& gate_o = tape.gate_o[t];
    const Matrix& cell_tanh = tape.cell_tanh[t];

    // dLoss/dc_t accumulates the carried term and the output-path term
    Matrix dc = dc_carry;
    Matrix through_tanh = hadamard(dh, gate_o);
    hadamard_in_place(through_tanh, tanh_grad(cell_tanh));
    add_in_place(dc, through_tanh);

    Matrix da_o = hadamard(dh, cell_tanh);
    hadamard_in_place(da_o, sigmoid_grad(gate_o));
    Matrix da_i = hadamard(dc, gate_g);
    hadamard_in_place(da_i, sigmoid_grad(gate_i));
    Matrix da_g = hadamard(dc, gate_i);
    hadamard_in_place(da_g, tanh_grad(gate_g));

    const bool first = t == 0;
    Matrix da_f(batch, hidden);
    if (!first) {
      da_f = hadamard(dc, tape.cell[t - 1]);
      hadamard_in_place(da_f, sigmoid_grad(gate_f));
    } // c_{-1} = 0, so da_f stays zero for the first step

    dc_carry = hadamard(dc, gate_f);

    paste_cols(d_acts, 0, da_i);
    paste_cols(d_acts, hidden, da_f);
    paste_cols(d_acts, 2 * hidden, da_g);
    paste_cols(d_acts, 3 * hidden, da_o);

    matmul_tn_acc(wx.grad, tape.inputs[t], d_acts);
    if (!first) {
      matmul_tn_acc(wh.grad, tape.hidden[t - 1], d_acts);
    }
    col_sums_acc(b.grad, d_acts);

    d_inputs[t] = matmul_nt(d_acts, wx.value);
    dh_carry = matmul_nt(d_acts, wh.value);
  }
  return d_inputs;
}

BiLstmLayer::BiLstmLayer(int input_size, int hidden_size, std::string name)
    : forward_cell(input_size, hidden_size, name + ".fwd"),
      backward_cell(input_size, hidden_size, name + ".bwd") {}

void BiLstmLayer::init_weights(nn::Rng& rng) {
  forward_cell.init_weights(rng);
  backward_cell.init_weights(rng);
}

std::vector<nn::Param*> BiLstmLayer::params() {
  std::vector<nn::Param*> all = forward_cell.params();
  for (nn::Param* p : backward_cell.params()) {
    all.push_back(p);
  }
  return all;
}

namespace {

Sequence reversed(const Sequence& seq) {
  return Sequence(seq.rbegin(), seq.rend());
}

} // namespace

Sequence BiLstmLayer::forward(const Sequence& inputs, BiLstmTape& tape) const {
  const int steps = static_cast<int>(inputs.size());
  Sequence fwd_out = forward_cell.forward(inputs, tape.forward_tape);
  Sequence bwd_out_rev = backward_cell.forward(reversed(inputs), tape.backward_tape);
  Sequence outputs;
  outputs.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    outputs.push_back(concat_cols(fwd_out[t], bwd_out_rev[steps - 1 - t]));
  }
  return outputs;
}

Sequence BiLstmLayer::backward(const Sequence& d_outputs, const BiLstmTape& tape) {
  const int steps = static_cast<int>(d_outputs.size());
  const int hidden = forward_cell.hidden_size();
  Sequence d_fwd(steps);
  Sequence d_bwd_rev(steps);
  for (int t = 0; t < steps; ++t) {
    d_fwd[t] = slice_cols(d_outputs[t], 0, hidden);
    d_bwd_rev[steps - 1 - t] = slice_cols(d_outputs[t], hidden, 2 * hidden);
  }
  Sequence d_in_fwd = forward_cell.backward(d_fwd, tape.forward_tape);
  Sequence d_in_bwd_rev = backward_cell.backward(d_bwd_rev, tape.backward_tape);
  Sequence d_inputs(steps);
  for (int t = 0; t < steps; ++t) {
    d_inputs[t] = add(d_in_fwd[t], d_in_bwd_rev[steps - 1 - t]);
  }
  return d_inputs;
}

} // namespace cfpred::models

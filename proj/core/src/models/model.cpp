#include <cstdio>
#include <numeric>

#include "cfpred/errors.hpp"
#include "cfpred/models.hpp"

namespace cfpred::models {

using nn::Matrix;

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LSTM: return "lstm";
    case ModelKind::GRU: return "gru";
    case ModelKind::BILSTM: return "bilstm";
    case ModelKind::LSTM_ATTN: return "lstm-attn";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lstm") return ModelKind::LSTM;
  if (name == "gru") return ModelKind::GRU;
  if (name == "bilstm" || name == "bi-lstm") return ModelKind::BILSTM;
  if (name == "lstm-attn" || name == "lstm+attention") return ModelKind::LSTM_ATTN;
  throw InvalidConfig("unknown model kind: " + std::string(name));
}

namespace {

void validate_config(const ModelConfig& c) {
  if (c.n_layers < 1 || c.hidden < 1 || c.dense_hidden < 1 || c.input_features < 1 ||
      c.output_features < 1 || c.seq_len < 1) {
    throw InvalidConfig("model config: sizes must be positive");
  }
  if (c.dropout < 0.0 || c.dropout >= 1.0) {
    throw InvalidConfig("model config: dropout must satisfy 0 <= p < 1");
  }
}

long long lstm_param_count(long long in, long long hidden) {
  return 4 * (in * hidden + hidden * hidden + hidden);
}

long long gru_param_count(long long in, long long hidden) {
  return 3 * (in * hidden + hidden * hidden + hidden);
}

} // namespace

long long expected_parameter_count(const ModelConfig& c) {
  validate_config(c);
  const long long hidden = c.hidden;
  const long long layer_in_width = c.kind == ModelKind::BILSTM ? 2 * hidden : hidden;
  long long total = 0;
  for (int layer = 0; layer < c.n_layers; ++layer) {
    const long long in = layer == 0 ? c.input_features : layer_in_width;
    switch (c.kind) {
      case ModelKind::GRU:
        total += gru_param_count(in, hidden);
        break;
      case ModelKind::BILSTM:
        total += 2 * lstm_param_count(in, hidden);
        break;
      default:
        total += lstm_param_count(in, hidden);
        break;
    }
  }
  if (c.kind == ModelKind::LSTM_ATTN) {
    total += 2 * hidden * hidden + hidden; // w_enc, w_query, v
  }
  long long head_in = hidden;
  if (c.kind == ModelKind::BILSTM || c.kind == ModelKind::LSTM_ATTN) {
    head_in = 2 * hidden;
  }
  total += head_in * c.dense_hidden + c.dense_hidden;
  total += static_cast<long long>(c.dense_hidden) * c.output_features + c.output_features;
  return total;
}

Model::Model(ModelConfig config) : config_(config) {}

int Model::recurrent_output_width() const {
  return config_.kind == ModelKind::BILSTM ? 2 * config_.hidden : config_.hidden;
}

Model Model::build(const ModelConfig& config) {
  validate_config(config);
  Model model(config);
  const int hidden = config.hidden;
  for (int layer = 0; layer < config.n_layers; ++layer) {
    const int in = layer == 0 ? config.input_features : model.recurrent_output_width();
    char name[32];
    std::snprintf(name, sizeof(name), "layer%d", layer);
    switch (config.kind) {
      case ModelKind::GRU:
        model.layers_.emplace_back(std::in_place_type<GruCell>, in, hidden, name);
        break;
      case ModelKind::BILSTM:
        model.layers_.emplace_back(std::in_place_type<BiLstmLayer>, in, hidden, name);
        break;
      default:
        model.layers_.emplace_back(std::in_place_type<LstmCell>, in, hidden, name);
        break;
    }
  }
  if (config.kind == ModelKind::LSTM_ATTN) {
    model.attention_ = std::make_unique<AdditiveAttention>(hidden, "attention");
  }
  int head_in = model.recurrent_output_width();
  if (config.kind == ModelKind::LSTM_ATTN) {
    head_in = 2 * hidden;
  }
  model.dense_hidden_ = std::make_unique<Dense>(head_in, config.dense_hidden, "dense_hidden");
  model.dense_out_ = std::make_unique<Dense>(config.dense_hidden, config.output_features, "dense_out");

  // Fixed initialization order: recurrent stack, attention, dense head.
  nn::Rng rng(config.init_seed);
  for (auto& layer : model.layers_) {
    std::visit([&rng](auto& cell) { cell.init_weights(rng); }, layer);
  }
  if (model.attention_) {
    model.attention_->init_weights(rng);
  }
  model.dense_hidden_->init_weights(rng);
  model.dense_out_->init_weights(rng);
  return model;
}

std::vector<nn::Param*> Model::params() {
  std::vector<nn::Param*> all;
  for (auto& layer : layers_) {
    std::visit(
        [&all](auto& cell) {
          for (nn::Param* p : cell.params()) {
            all.push_back(p);
          }
        },
        layer);
  }
  if (attention_) {
    for (nn::Param* p : attention_->params()) {
      all.push_back(p);
    }
  }
  for (nn::Param* p : dense_hidden_->params()) {
    all.push_back(p);
  }
  for (nn::Param* p : dense_out_->params()) {
    all.push_back(p);
  }
  return all;
}

long long Model::parameter_count() const {
  long long total = 0;
  for (nn::Param* p : const_cast<Model*>(this)->params()) {
    total += static_cast<long long>(p->value.size());
  }
  return total;
}

Model::ForwardResult Model::forward(const Sequence& batch, bool training, nn::Rng& rng) {
  if (static_cast<int>(batch.size()) != config_.seq_len) {
    throw ShapeMismatch("Model::forward: expected " + std::to_string(config_.seq_len) +
                        " timesteps, got " + std::to_string(batch.size()));
  }
  const int batch_size = batch[0].rows();
  for (const Matrix& step : batch) {
    if (step.rows() != batch_size || step.cols() != config_.input_features) {
      throw ShapeMismatch("Model::forward: batch step " + shape_string(step));
    }
  }

  ForwardResult result;
  Tape& tape = result.tape;
  tape.training = training;
  tape.batch = batch_size;
  tape.layer_tapes.resize(layers_.size());
  tape.sequence_masks.resize(layers_.size());

  const int last_layer = static_cast<int>(layers_.size()) - 1;
  const bool attention_head = config_.kind == ModelKind::LSTM_ATTN;
  Sequence seq = batch;
  for (int layer = 0; layer <= last_layer; ++layer) {
    Sequence out = std::visit(
        [&](auto& cell) -> Sequence {
          using CellT = std::decay_t<decltype(cell)>;
          auto& layer_tape = tape.layer_tapes[layer];
          if constexpr (std::is_same_v<CellT, LstmCell>) {
            layer_tape.template emplace<LstmTape>();
            return cell.forward(seq, std::get<LstmTape>(layer_tape));
          } else if constexpr (std::is_same_v<CellT, GruCell>) {
            layer_tape.template emplace<GruTape>();
            return cell.forward(seq, std::get<GruTape>(layer_tape));
          } else {
            layer_tape.template emplace<BiLstmTape>();
            return cell.forward(seq, std::get<BiLstmTape>(layer_tape));
          }
        },
        layers_[layer]);
    if (layer < last_layer || attention_head) {
      // dropout on the full output sequence
      auto& masks = tape.sequence_masks[layer];
      masks.reserve(out.size());
      for (Matrix& step : out) {
        nn::DropoutResult dropped = nn::dropout_forward(step, config_.dropout, rng, training);
        masks.push_back(std::move(dropped.mask));
        step = std::move(dropped.output);
      }
    }
    seq = std::move(out);
  }

  if (attention_head) {
    const Matrix& query = seq.back();
    AdditiveAttention::Output pooled = attention_->forward(seq, query, tape.attention);
    tape.head_input = concat_cols(pooled.context, query);
  } else {
    nn::DropoutResult dropped = nn::dropout_forward(seq.back(), config_.dropout, rng, training);
    tape.last_mask = std::move(dropped.mask);
    tape.head_input = std::move(dropped.output);
  }

  tape.dense_hidden_out = relu(dense_hidden_->forward(tape.head_input));
  result.predictions = dense_out_->forward(tape.dense_hidden_out);
  return result;
}

nn::Matrix Model::predict(const Sequence& batch) {
  nn::Rng unused(0);
  return forward(batch, /*training=*/false, unused).predictions;
}

void Model::backward(Tape& tape, const nn::Matrix& loss_grad) {
  if (!tape.training) {
    throw StaleTape("Model::backward: tape was produced by an eval-mode forward");
  }
  if (tape.consumed) {
    throw StaleTape("Model::backward: tape already consumed");
  }
  tape.consumed = true;
  if (loss_grad.rows() != tape.batch || loss_grad.cols() != config_.output_features) {
    throw ShapeMismatch("Model::backward: loss_grad " + shape_string(loss_grad));
  }

  Matrix d_hidden_out = dense_out_->backward(tape.dense_hidden_out, loss_grad);
  hadamard_in_place(d_hidden_out, relu_grad(tape.dense_hidden_out));
  Matrix d_head = dense_hidden_->backward(tape.head_input, d_hidden_out);

  const int last_layer = static_cast<int>(layers_.size()) - 1;
  const bool attention_head = config_.kind == ModelKind::LSTM_ATTN;
  const int steps = config_.seq_len;

  Sequence d_seq;
  if (attention_head) {
    const int hidden = config_.hidden;
    Matrix d_context = slice_cols(d_head, 0, hidden);
    Matrix d_query_direct = slice_cols(d_head, hidden, 2 * hidden);
    AdditiveAttention::Gradients grads = attention_->backward(d_context, tape.attention);
    d_seq = std::move(grads.d_encoder_states);
    add_in_place(d_seq.back(), grads.d_query);
    add_in_place(d_seq.back(), d_query_direct);
    const auto& masks = tape.sequence_masks[last_layer];
    for (int t = 0; t < steps; ++t) {
      hadamard_in_place(d_seq[t], masks[t]);
    }
  } else {
    Matrix d_last = nn::dropout_backward(d_head, tape.last_mask);
    const int width = recurrent_output_width();
    d_seq.assign(steps, Matrix(tape.batch, width));
    d_seq.back() = std::move(d_last);
  }

  for (int layer = last_layer; layer >= 0; --layer) {
    Sequence d_in = std::visit(
        [&](auto& cell) -> Sequence {
          using CellT = std::decay_t<decltype(cell)>;
          if constexpr (std::is_same_v<CellT, LstmCell>) {
            return cell.backward(d_seq, std::get<LstmTape>(tape.layer_tapes[layer]));
          } else if constexpr (std::is_same_v<CellT, GruCell>) {
            return cell.backward(d_seq, std::get<GruTape>(tape.layer_tapes[layer]));
          } else {
            return cell.backward(d_seq, std::get<BiLstmTape>(tape.layer_tapes[layer]));
          }
        },
        layers_[layer]);
    if (layer > 0) {
      const auto& masks = tape.sequence_masks[layer - 1];
      for (int t = 0; t < steps; ++t) {
        hadamard_in_place(d_in[t], masks[t]);
      }
      d_seq = std::move(d_in);
    }
  }
}

std::string Model::describe() const {
  std::string text;
  char line[160];
  std::snprintf(line, sizeof(line), "model %s: %d layers, hidden %d, dropout %.2f, seq_len %d\n",
                std::string(model_kind_name(config_.kind)).c_str(), config_.n_layers,
                config_.hidden, config_.dropout, config_.seq_len);
  text += line;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    std::visit(
        [&](const auto& cell) {
          using CellT = std::decay_t<decltype(cell)>;
          long long count = 0;
          for (nn::Param* p : const_cast<CellT&>(cell).params()) {
            count += static_cast<long long>(p->value.size());
          }
          const char* kind = std::is_same_v<CellT, GruCell>      ? "gru"
                             : std::is_same_v<CellT, BiLstmLayer> ? "bilstm"
                                                                  : "lstm";
          std::snprintf(line, sizeof(line), "  layer %zu: %s in=%d hidden=%d params=%lld\n", i,
                        kind, cell.input_size(), cell.hidden_size(), count);
          text += line;
        },
        layers_[i]);
  }
  if (attention_) {
    long long count = 0;
    for (nn::Param* p : attention_->params()) {
      count += static_cast<long long>(p->value.size());
    }
    std::snprintf(line, sizeof(line), "  attention: width=%d params=%lld\n", attention_->width(),
                  count);
    text += line;
  }
  std::snprintf(line, sizeof(line), "  dense_hidden: %dx%d+%d\n", dense_hidden_->w.value.rows(),
                dense_hidden_->w.value.cols(), dense_hidden_->b.value.cols());
  text += line;
  std::snprintf(line, sizeof(line), "  dense_out: %dx%d+%d\n", dense_out_->w.value.rows(),
                dense_out_->w.value.cols(), dense_out_->b.value.cols());
  text += line;
  std::snprintf(line, sizeof(line), "total params: %lld\n", parameter_count());
  text += line;
  return text;
}

std::vector<double> Model::flatten_params() const {
  std::vector<double> payload;
  payload.reserve(static_cast<std::size_t>(parameter_count()));
  for (nn::Param* p : const_cast<Model*>(this)->params()) {
    const double* data = p->value.data();
    payload.insert(payload.end(), data, data + p->value.size());
  }
  return payload;
}

void Model::load_params(std::span<const double> payload) {
  if (payload.size() != static_cast<std::size_t>(parameter_count())) {
    throw PayloadLengthMismatch("load_params: expected " + std::to_string(parameter_count()) +
                                " values, got " + std::to_string(payload.size()));
  }
  std::size_t offset = 0;
  for (nn::Param* p : params()) {
    double* data = p->value.data();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      data[i] = payload[offset + i];
    }
    offset += p->value.size();
  }
}

} // namespace cfpred::models

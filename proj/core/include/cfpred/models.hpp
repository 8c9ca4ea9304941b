#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "cfpred/dataset.hpp"
#include "cfpred/matrix.hpp"
#include "cfpred/nn.hpp"
#include "cfpred/rng.hpp"

namespace cfpred::models {

/// A batch of timesteps: seq_len matrices of batch x width.
using Sequence = std::vector<nn::Matrix>;

enum class ModelKind : std::uint8_t { LSTM = 0, GRU = 1, BILSTM = 2, LSTM_ATTN = 3 };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name); ///< throws InvalidConfig

struct ModelConfig {
  ModelKind kind = ModelKind::LSTM;
  int n_layers = 4;
  int hidden = 256;
  double dropout = 0.5;
  int dense_hidden = 100;
  int input_features = 5;
  int output_features = 5;
  int seq_len = 15;
  std::uint64_t init_seed = 0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// ---------------------------------------------------------------------------
// Recurrent cells. Each records its forward intermediates in a tape and
// implements explicit backpropagation through time; gradients accumulate
// into the cell's Params.
// ---------------------------------------------------------------------------

struct LstmTape {
  Sequence inputs;
  std::vector<nn::Matrix> gate_i, gate_f, gate_g, gate_o;
  std::vector<nn::Matrix> cell;      ///< c_t
  std::vector<nn::Matrix> cell_tanh; ///< tanh(c_t)
  std::vector<nn::Matrix> hidden;    ///< h_t
};

/// Standard LSTM: i,f,o sigmoid gates, tanh candidate and output squash,
/// c_t = f*c_{t-1} + i*g, h_t = o*tanh(c_t). Weight columns are the gate
/// blocks [i|f|g|o].
class LstmCell {
public:
  LstmCell(int input_size, int hidden_size, std::string name);
  void init_weights(nn::Rng& rng); ///< Glorot weights, zero biases, forget bias 1
  Sequence forward(const Sequence& inputs, LstmTape& tape) const;
  /// d_outputs holds dLoss/dh_t per timestep; returns dLoss/dx_t.
  Sequence backward(const Sequence& d_outputs, const LstmTape& tape);
  std::vector<nn::Param*> params();
  int input_size() const { return input_size_; }
  int hidden_size() const { return hidden_size_; }

  nn::Param wx; ///< input_size x 4H
  nn::Param wh; ///< H x 4H
  nn::Param b;  ///< 1 x 4H

private:
  int input_size_;
  int hidden_size_;
};

struct GruTape {
  Sequence inputs;
  std::vector<nn::Matrix> update_z, reset_r, cand_n;
  std::vector<nn::Matrix> rec_n;  ///< h_{t-1} * Wh n-block, pre reset gating
  std::vector<nn::Matrix> hidden; ///< h_t
};

/// GRU with the reset gate applied to the recurrent term after the matrix
/// product: n = tanh(x Wxn + r * (h Whn) + bn), h_t = z*h_{t-1} + (1-z)*n.
/// Weight columns are the gate blocks [z|r|n].
class GruCell {
public:
  GruCell(int input_size, int hidden_size, std::string name);
  void init_weights(nn::Rng& rng);
  Sequence forward(const Sequence& inputs, GruTape& tape) const;
  Sequence backward(const Sequence& d_outputs, const GruTape& tape);
  std::vector<nn::Param*> params();
  int input_size() const { return input_size_; }
  int hidden_size() const { return hidden_size_; }

  nn::Param wx; ///< input_size x 3H
  nn::Param wh; ///< H x 3H
  nn::Param b;  ///< 1 x 3H

private:
  int input_size_;
  int hidden_size_;
};

struct BiLstmTape {
  LstmTape forward_tape;
  LstmTape backward_tape; ///< over the time-reversed input
};

/// Two independent LSTM directions; per-timestep outputs are the
/// concatenation [forward | backward], width 2H.
class BiLstmLayer {
public:
  BiLstmLayer(int input_size, int hidden_size, std::string name);
  void init_weights(nn::Rng& rng);
  Sequence forward(const Sequence& inputs, BiLstmTape& tape) const;
  Sequence backward(const Sequence& d_outputs, const BiLstmTape& tape);
  std::vector<nn::Param*> params();
  int input_size() const { return forward_cell.input_size(); }
  int hidden_size() const { return forward_cell.hidden_size(); }

  LstmCell forward_cell;
  LstmCell backward_cell;
};

struct AttentionTape {
  Sequence encoder_states; ///< T of B x H
  nn::Matrix query;        ///< B x H
  nn::Matrix query_proj;   ///< B x A
  std::vector<nn::Matrix> scored; ///< u_t = tanh(...), B x A
  nn::Matrix alphas;       ///< B x T
};

/// Additive attention: score_t = v' tanh(W_enc h_t + W_query q),
/// alpha = softmax(scores), context = sum_t alpha_t h_t. The projection
/// width equals the encoder width.
class AdditiveAttention {
public:
  AdditiveAttention(int width, std::string name);
  void init_weights(nn::Rng& rng);

  struct Output {
    nn::Matrix context; ///< B x H
    nn::Matrix alphas;  ///< B x T
  };
  Output forward(const Sequence& encoder_states, const nn::Matrix& query, AttentionTape& tape) const;

  struct Gradients {
    Sequence d_encoder_states;
    nn::Matrix d_query;
  };
  Gradients backward(const nn::Matrix& d_context, const AttentionTape& tape);

  std::vector<nn::Param*> params();
  int width() const { return width_; }

  nn::Param w_enc;   ///< H x A
  nn::Param w_query; ///< H x A
  nn::Param v;       ///< A x 1

private:
  int width_;
};

/// Single-sample convenience matching the batched layer: encoder_states is
/// T x H, query 1 x H. Returns the context (1 x H) and weights (1 x T).
AdditiveAttention::Output attention_forward(const AdditiveAttention& attention,
                                            const nn::Matrix& encoder_states,
                                            const nn::Matrix& query);

/// Fully connected layer, no activation.
class Dense {
public:
  Dense(int input_size, int output_size, std::string name);
  void init_weights(nn::Rng& rng);
  nn::Matrix forward(const nn::Matrix& x) const;
  /// Accumulates weight/bias grads; returns dLoss/dx.
  nn::Matrix backward(const nn::Matrix& x, const nn::Matrix& d_out);
  std::vector<nn::Param*> params();

  nn::Param w; ///< in x out
  nn::Param b; ///< 1 x out
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

using RecurrentTape = std::variant<LstmTape, GruTape, BiLstmTape>;

/// Forward intermediates for one batch. Single use: backward consumes the
/// tape and throws StaleTape on reuse or on a tape from an eval-mode forward.
struct Tape {
  bool training = false;
  bool consumed = false;
  int batch = 0;
  std::vector<RecurrentTape> layer_tapes;
  std::vector<std::vector<nn::Matrix>> sequence_masks; ///< dropout masks per layer (full-sequence layers)
  nn::Matrix last_mask;        ///< dropout mask on the final hidden state (non-attention head)
  AttentionTape attention;     ///< LSTM_ATTN only
  nn::Matrix head_input;       ///< dense head input after dropout/pooling
  nn::Matrix dense_hidden_out; ///< post-ReLU activations of the hidden dense layer
};

/// One of the paper's four architectures: n_layers recurrent layers of the
/// configured kind (each followed by dropout), then a ReLU dense layer and a
/// linear output layer. LSTM/GRU/BILSTM feed the head from the final
/// timestep's hidden state; LSTM_ATTN pools all timesteps with additive
/// attention (query = final hidden state) and feeds concat(context, query).
class Model {
public:
  static Model build(const ModelConfig& config); ///< throws InvalidConfig

  struct ForwardResult {
    nn::Matrix predictions; ///< B x output_features
    Tape tape;
  };
  /// batch: seq_len matrices of B x input_features. Training mode draws
  /// dropout masks from rng; eval mode is deterministic.
  ForwardResult forward(const Sequence& batch, bool training, nn::Rng& rng);
  /// Convenience for eval-mode callers that do not need the tape.
  nn::Matrix predict(const Sequence& batch);

  /// Accumulates dLoss/dtheta for every Param from dLoss/dpredictions.
  void backward(Tape& tape, const nn::Matrix& loss_grad);

  std::vector<nn::Param*> params();
  long long parameter_count() const; ///< enumerated over allocated Params
  const ModelConfig& config() const { return config_; }
  std::string describe() const;

  /// Flattened parameter payload in the checkpoint's documented order.
  std::vector<double> flatten_params() const;
  void load_params(std::span<const double> payload); ///< throws PayloadLengthMismatch

private:
  explicit Model(ModelConfig config);
  int recurrent_output_width() const;

  ModelConfig config_;
  std::vector<std::variant<LstmCell, GruCell, BiLstmLayer>> layers_;
  std::unique_ptr<AdditiveAttention> attention_; ///< LSTM_ATTN only
  std::unique_ptr<Dense> dense_hidden_;
  std::unique_ptr<Dense> dense_out_;
};

/// Closed-form parameter count for a config; matches Model::parameter_count.
long long expected_parameter_count(const ModelConfig& config);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct TrainingProvenance {
  std::uint32_t epochs_run = 0;
  double best_val_mae = 0.0;
  std::uint64_t dataset_hash = 0;
  std::uint64_t shuffle_seed = 0;
  std::uint64_t split_seed = 0;

  friend bool operator==(const TrainingProvenance&, const TrainingProvenance&) = default;
};

struct Checkpoint {
  ModelConfig config;
  dataset::FeatureScaler scaler;
  TrainingProvenance provenance;
  std::vector<double> payload;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

Checkpoint make_checkpoint(const Model& model, const dataset::FeatureScaler& scaler,
                           const TrainingProvenance& provenance);
/// Rebuilds the model and loads the payload (throws PayloadLengthMismatch
/// when the payload does not match the config's closed-form count).
Model restore_model(const Checkpoint& checkpoint);

/// Binary checkpoint file, magic "CFCKPT01". save -> load -> save is
/// byte-identical.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace cfpred::models

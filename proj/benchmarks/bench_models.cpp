#include <benchmark/benchmark.h>

#include "cfpred/models.hpp"
#include "cfpred/nn.hpp"

using namespace cfpred;
using models::Model;
using models::ModelConfig;
using models::ModelKind;
using models::Sequence;
using nn::Matrix;

namespace {

Sequence random_batch(int steps, int batch, int features, nn::Rng& rng) {
  Sequence seq;
  for (int t = 0; t < steps; ++t) {
    Matrix m(batch, features);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m.data()[i] = rng.uniform(-1.0, 1.0);
    }
    seq.push_back(std::move(m));
  }
  return seq;
}

ModelConfig desk_config(ModelKind kind) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.n_layers = 2;
  cfg.hidden = 32;
  cfg.dropout = 0.0;
  cfg.dense_hidden = 32;
  cfg.input_features = 5;
  cfg.output_features = 5;
  cfg.seq_len = 15;
  cfg.init_seed = 3;
  return cfg;
}

void BM_forward(benchmark::State& state, ModelKind kind) {
  Model model = Model::build(desk_config(kind));
  nn::Rng rng(4);
  Sequence batch = random_batch(15, 64, 5, rng);
  for (auto _ : state) {
    Matrix pred = model.predict(batch);
    benchmark::DoNotOptimize(pred.data());
  }
}

void BM_train_step(benchmark::State& state, ModelKind kind) {
  Model model = Model::build(desk_config(kind));
  nn::Rng rng(5);
  Sequence batch = random_batch(15, 64, 5, rng);
  Matrix target(64, 5);
  for (std::size_t i = 0; i < target.size(); ++i) {
    target.data()[i] = rng.uniform(0.0, 1.0);
  }
  int t = 0;
  for (auto _ : state) {
    auto fwd = model.forward(batch, true, rng);
    auto loss = nn::mae_loss(fwd.predictions, target);
    model.backward(fwd.tape, loss.grad);
    nn::adam_step(model.params(), nn::AdamConfig{}, ++t);
  }
}

} // namespace

BENCHMARK_CAPTURE(BM_forward, lstm, ModelKind::LSTM);
BENCHMARK_CAPTURE(BM_forward, gru, ModelKind::GRU);
BENCHMARK_CAPTURE(BM_forward, bilstm, ModelKind::BILSTM);
BENCHMARK_CAPTURE(BM_forward, lstm_attn, ModelKind::LSTM_ATTN);
BENCHMARK_CAPTURE(BM_train_step, lstm, ModelKind::LSTM);
BENCHMARK_CAPTURE(BM_train_step, lstm_attn, ModelKind::LSTM_ATTN);

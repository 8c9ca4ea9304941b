#include <array>
#include <cstring>

#include "../io_util.hpp"
#include "cfpred/errors.hpp"
#include "cfpred/models.hpp"

namespace cfpred::models {

namespace {

constexpr char kMagic[8] = {'C', 'F', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

} // namespace

Checkpoint make_checkpoint(const Model& model, const dataset::FeatureScaler& scaler,
                           const TrainingProvenance& provenance) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.scaler = scaler;
  ckpt.provenance = provenance;
  ckpt.payload = model.flatten_params();
  return ckpt;
}

Model restore_model(const Checkpoint& checkpoint) {
  Model model = Model::build(checkpoint.config);
  model.load_params(checkpoint.payload);
  return model;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  detail::BinaryWriter w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  const ModelConfig& c = ckpt.config;
  w.u8(static_cast<std::uint8_t>(c.kind));
  w.u32(static_cast<std::uint32_t>(c.n_layers));
  w.u32(static_cast<std::uint32_t>(c.hidden));
  w.f64(c.dropout);
  w.u32(static_cast<std::uint32_t>(c.dense_hidden));
  w.u32(static_cast<std::uint32_t>(c.input_features));
  w.u32(static_cast<std::uint32_t>(c.output_features));
  w.u32(static_cast<std::uint32_t>(c.seq_len));
  w.u64(c.init_seed);
  w.u32(static_cast<std::uint32_t>(ckpt.scaler.features()));
  for (double v : ckpt.scaler.feature_min) {
    w.f64(v);
  }
  for (double v : ckpt.scaler.feature_max) {
    w.f64(v);
  }
  const TrainingProvenance& p = ckpt.provenance;
  w.u32(p.epochs_run);
  w.f64(p.best_val_mae);
  w.u64(p.dataset_hash);
  w.u64(p.shuffle_seed);
  w.u64(p.split_seed);
  w.u64(ckpt.payload.size());
  for (double v : ckpt.payload) {
    w.f64(v);
  }
  w.finish();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatVersionMismatch("not a checkpoint file: " + path.string());
  }
  if (r.u32() != kVersion) {
    throw FormatVersionMismatch("unsupported checkpoint version in " + path.string());
  }
  Checkpoint ckpt;
  ModelConfig& c = ckpt.config;
  const std::uint8_t kind = r.u8();
  if (kind > static_cast<std::uint8_t>(ModelKind::LSTM_ATTN)) {
    throw FormatVersionMismatch("unknown model kind in " + path.string());
  }
  c.kind = static_cast<ModelKind>(kind);
  c.n_layers = static_cast<int>(r.u32());
  c.hidden = static_cast<int>(r.u32());
  c.dropout = r.f64();
  c.dense_hidden = static_cast<int>(r.u32());
  c.input_features = static_cast<int>(r.u32());
  c.output_features = static_cast<int>(r.u32());
  c.seq_len = static_cast<int>(r.u32());
  c.init_seed = r.u64();
  const std::uint32_t features = r.u32();
  ckpt.scaler.feature_min.resize(features);
  ckpt.scaler.feature_max.resize(features);
  for (double& v : ckpt.scaler.feature_min) {
    v = r.f64();
  }
  for (double& v : ckpt.scaler.feature_max) {
    v = r.f64();
  }
  TrainingProvenance& p = ckpt.provenance;
  p.epochs_run = r.u32();
  p.best_val_mae = r.f64();
  p.dataset_hash = r.u64();
  p.shuffle_seed = r.u64();
  p.split_seed = r.u64();
  const std::uint64_t count = r.u64();
  if (count != static_cast<std::uint64_t>(expected_parameter_count(c))) {
    throw PayloadLengthMismatch("checkpoint payload length " + std::to_string(count) +
                                " does not match config (" +
                                std::to_string(expected_parameter_count(c)) + ")");
  }
  ckpt.payload.resize(count);
  for (double& v : ckpt.payload) {
    v = r.f64();
  }
  return ckpt;
}

} // namespace cfpred::models

// Copyright (c) 2026 The humorlm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "humor/config.hpp"
#include "humor/nn/checkpoint.hpp"
#include "humor/nn/graph.hpp"
#include "humor/nn/layers.hpp"
#include "humor/rng.hpp"
#include "humor/subword.hpp"

namespace humor::models {

using Tensor = nn::ParamTensor<float>;
using Graph = nn::Graph<float>;
using Var = Graph::Var;
using subword::TokenId;
using TokenDoc = std::vector<TokenId>;

struct LmConfig {
  std::size_t vocab_size = 30000;
  std::size_t emb_size = 400;
  std::size_t hidden_size = 2304;
  std::size_t n_layers = 3;
  std::vector<std::size_t> windows = {2, 1, 1};
  bool tie_weights = true;
  double zoneout = 0.0;

  void validate() const;
  /// emb -> hidden -> ... -> hidden -> emb
  std::vector<nn::QrnnLayerConfig> layer_configs() const;
  /// Trainable scalars, counting a tied embedding/decoder matrix once.
  std::size_t parameter_count() const;

  /// Keys: lm.vocab_size, lm.emb_size, lm.hidden_size, lm.n_layers,
  /// lm.windows, lm.tie_weights, lm.zoneout.
  static LmConfig from_config(const Config& config);
  std::map<std::string, std::string> to_metadata() const;
  static LmConfig from_metadata(const std::map<std::string, std::string>& meta);
};

/// Base dropout rates; every rate is multiplied by `multiplier`.
struct DropoutConfig {
  double embedding = 0.1;
  double input = 0.25;
  double hidden = 0.2;
  double output = 0.1;
  double weight = 0.5;
  double multiplier = 1.0;

  double scaled(double base) const;
  void validate() const;
  /// Keys under `prefix.`: embedding, input, hidden, output, weight, multiplier.
  static DropoutConfig from_config(const Config& config, const std::string& prefix,
                                   double default_multiplier);
};

/// Embedding followed by the QRNN stack. Copyable; copies are deep.
struct Encoder {
  LmConfig config;
  Tensor embedding;             // [vocab, emb]
  std::vector<Tensor> weights;  // per layer [3H, window * in]
  std::vector<Tensor> biases;   // per layer [3H]

  static Encoder build(const LmConfig& config, Rng& rng);

  std::vector<Tensor*> parameters();
  void set_frozen(bool frozen);
};

/// Randomness for one training forward pass; a null rng means evaluation mode.
struct ForwardNoise {
  Rng* rng = nullptr;
  const DropoutConfig* dropout = nullptr;
  double head_dropout = 0.0;  // already scaled
};

struct EncoderPass {
  Var output;               // [T*B, emb] top-layer states
  std::vector<Var> cells;   // per layer [T*B, H]
};

/// Runs the encoder over time-major ids (row t*B+b). `keep` marks real tokens
/// (empty = all real); padded positions are zeroed at the embedding and carry
/// the cell state. `initial_cells` holds one [B*H] state per layer or is empty.
EncoderPass encode(Graph& g, Encoder& encoder, std::span<const TokenId> ids, std::size_t steps,
                   std::size_t batch, std::span<const std::uint8_t> keep,
                   const std::vector<std::vector<float>>& initial_cells, const ForwardNoise& noise);

/// Left-pads a batch of documents into time-major ids and a keep mask.
struct PaddedBatch {
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> keep;
};
PaddedBatch pad_left(std::span<const TokenDoc* const> docs);

class LanguageModel {
 public:
  /// Embedding U[-0.1, 0.1]; gate weights and biases U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
  /// Throws ConfigInvalid.
  static LanguageModel build(const LmConfig& config, std::uint64_t seed);

  const LmConfig& config() const { return encoder_.config; }
  Encoder& encoder() { return encoder_; }
  const Encoder& encoder() const { return encoder_; }
  /// The embedding tensor itself when weights are tied.
  Tensor& decoder_weight();
  Tensor& decoder_bias() { return decoder_bias_; }

  std::vector<Tensor*> parameters();
  std::size_t parameter_count();

  /// [N, vocab] next-token logits for [N, emb] states.
  Var logits(Graph& g, Var states);

  /// Evaluation-mode top-layer states for one padded batch, [T*B*emb].
  std::vector<float> encoder_outputs(std::span<const TokenDoc* const> docs);

  nn::ModelCheckpoint to_checkpoint() const;
  /// Throws BadCheckpoint on missing tensors or shape mismatches.
  static LanguageModel from_checkpoint(const nn::ModelCheckpoint& checkpoint);

 private:
  Encoder encoder_;
  Tensor decoder_bias_;
  Tensor decoder_weight_;  // unused when tied
};

struct Phase {
  std::size_t epochs = 0;
  double lr = 0.0;
};

struct LmTrainConfig {
  std::vector<Phase> phases = {{1, 5e-3}, {15, 1e-3}};
  std::size_t batch_size = 32;
  std::size_t bptt = 70;
  double weight_decay = 0.1;
  double beta2 = 0.99;
  double warmup_frac = 0.3;
  double div_start = 25.0;
  double div_final = 1e5;
  DropoutConfig dropout;

  void validate() const;
  /// Keys under `prefix.`: phase_epochs, phase_lrs, batch_size, bptt,
  /// weight_decay, beta2, warmup_frac; dropout under `prefix.dropout.`.
  static LmTrainConfig from_config(const Config& config, const std::string& prefix,
                                   const LmTrainConfig& defaults);
};

/// Published schedules: pretraining and target-text fine-tuning.
LmTrainConfig pretrain_schedule();
LmTrainConfig finetune_schedule();

struct LmEvaluation {
  double loss = 0.0;      // mean next-token cross-entropy, nats
  double accuracy = 0.0;  // top-1 next-token accuracy
  std::size_t predictions = 0;
};

struct LmEpochLog {
  std::size_t phase = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  LmEvaluation valid;
};

struct LmTrainResult {
  LmEvaluation best;
  std::vector<LmEpochLog> history;
};

/// Evaluation-mode next-token metrics over a token stream.
LmEvaluation evaluate_lm(LanguageModel& lm, std::span<const TokenId> ids, std::size_t batch_size,
                         std::size_t bptt);

/// One-cycle AdamW training over the phases; the snapshot with the lowest
/// validation loss is kept. An empty `valid` stream validates on `train`.
LmTrainResult train_lm(LanguageModel& lm, std::span<const TokenId> train,
                       std::span<const TokenId> valid, const LmTrainConfig& config,
                       std::uint64_t seed);

/// train_lm on target-domain text. Throws EmptyCorpus for an empty stream.
LmTrainResult finetune_lm(LanguageModel& lm, std::span<const TokenId> train,
                          std::span<const TokenId> valid, const LmTrainConfig& config,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Task heads

enum class TaskKind { Classify, Regress };

struct HeadConfig {
  TaskKind kind = TaskKind::Classify;
  std::size_t num_classes = 2;
  std::size_t hidden = 50;

  void validate() const;
  std::size_t outputs() const { return kind == TaskKind::Classify ? num_classes : 1; }
};

/// lr_g = lo * (hi / lo)^(g / (G - 1)) for g = 0 .. G-1.
std::vector<double> differential_lrs(std::size_t groups, double lr_lo, double lr_hi);

class HeadModel {
 public:
  /// Copies the LM encoder, draws fresh head weights from `seed` and freezes
  /// the encoder.
  static HeadModel build(const LanguageModel& lm, const HeadConfig& head, std::uint64_t seed);

  const HeadConfig& head_config() const { return head_; }
  Encoder& encoder() { return encoder_; }
  const Encoder& encoder() const { return encoder_; }

  /// [embedding], [qrnn_1], ..., [qrnn_n], [head]
  std::vector<std::vector<Tensor*>> layer_groups();
  std::vector<Tensor*> head_parameters();

  /// [B, outputs] from pooled [B, 3*emb] features.
  Var head_forward(Graph& g, Var pooled, const ForwardNoise& noise);
  /// [B, outputs] for a padded batch.
  Var forward(Graph& g, const PaddedBatch& batch, const ForwardNoise& noise);

  /// Evaluation-mode pooled features, one row of 3*emb per document.
  std::vector<std::vector<float>> pooled_features(std::span<const TokenDoc> docs,
                                                  std::size_t batch_size = 64);
  /// Classifier: softmax rows (K per document); regressor: one score per document.
  std::vector<double> predict(std::span<const TokenDoc> docs, std::size_t batch_size = 64);
  std::vector<float> encoder_outputs(std::span<const TokenDoc* const> docs);

  nn::ModelCheckpoint to_checkpoint() const;
  static HeadModel from_checkpoint(const nn::ModelCheckpoint& checkpoint);

 private:
  HeadConfig head_;
  Encoder encoder_;
  Tensor hidden_weight_;  // [hidden, 3*emb]
  Tensor hidden_bias_;
  Tensor out_weight_;  // [outputs, hidden]
  Tensor out_bias_;
};

struct HeadTrainConfig {
  std::size_t head_epochs = 2;
  double head_lr = 1e-2;
  std::size_t unfrozen_epochs = 15;
  double lr_lo = 1e-3 / (2.6 * 2.6 * 2.6 * 2.6);
  double lr_hi = 5e-3;
  std::size_t batch_size = 32;
  double weight_decay = 0.1;
  double beta2 = 0.99;
  double warmup_frac = 0.3;
  double label_smoothing = 0.1;
  double head_dropout = 0.1;  // base rate after the hidden ReLU
  DropoutConfig dropout = {.multiplier = 0.7};
  bool smote = true;
  std::size_t smote_k = 5;
  bool oversample = true;

  void validate() const;
  /// Keys under `prefix.`: head_epochs, head_lr, unfrozen_epochs, lr_lo, lr_hi,
  /// batch_size, weight_decay, beta2, warmup_frac, label_smoothing,
  /// head_dropout, oversample; `smote.enabled`, `smote.k`; dropout under
  /// `prefix.dropout.`.
  static HeadTrainConfig from_config(const Config& config, const std::string& prefix);
};

/// Documents with targets: class indices (classifier) or scores (regressor).
struct TaskData {
  std::vector<TokenDoc> docs;
  std::vector<double> targets;
};

struct HeadEpochLog {
  std::size_t stage = 0;  // 1 = head only, 2 = unfrozen
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_metric = 0.0;
};

struct HeadTrainResult {
  double best_metric = 0.0;  // F1 (K = 2), accuracy (K > 2) or MSE (regressor)
  std::size_t best_stage = 0;
  std::size_t best_epoch = 0;
  std::vector<HeadEpochLog> history;
};

/// Validation metric used for snapshot selection.
double head_metric(const HeadConfig& head, std::span<const double> predictions,
                   std::span<const double> targets);
bool metric_improves(const HeadConfig& head, double candidate, double incumbent);

/// Stage 1 trains the head alone on pooled features (SMOTE-balanced for
/// classifiers); stage 2 unfreezes everything and trains with differential
/// learning rates on the texts (minority duplicated to balance). The best
/// validation snapshot across both stages is kept. An empty `valid` set
/// selects on `train`.
HeadTrainResult train_head_then_unfreeze(HeadModel& model, const TaskData& train,
                                         const TaskData& valid, const HeadTrainConfig& config,
                                         std::uint64_t seed);

/// Cleans, encodes and returns one token document per text.
std::vector<TokenDoc> encode_documents(const subword::BpeModel& bpe,
                                       std::span<const std::string> texts);
/// Cleans and encodes texts into one concatenated stream.
std::vector<TokenId> encode_stream(const subword::BpeModel& bpe, std::span<const std::string> texts);

}  // namespace humor::models

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "humor/error.hpp"
#include "humor/models.hpp"
#include "humor/nn/optim.hpp"
#include "humor/textclean.hpp"

namespace humor::models {

namespace {

void fill_uniform(Tensor& t, Rng& rng, double bound) {
  for (auto& v : t.values) v = static_cast<float>(rng.uniform(-bound, bound));
}

std::string join_sizes(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

std::size_t positive_size(const Config& config, const std::string& key, std::size_t fallback) {
  const auto v = config.get_int(key, static_cast<std::int64_t>(fallback));
  if (v <= 0) throw Error(ErrorKind::ConfigInvalid, key + " must be positive");
  return static_cast<std::size_t>(v);
}

std::vector<float> zoneout_keep_mask(Rng& rng, std::size_t size, double p) {
  std::vector<float> keep(size);
  for (auto& k : keep) k = rng.bernoulli(p) ? 0.0f : 1.0f;
  return keep;
}

void zero_grads(std::span<Tensor* const> params) {
  for (auto* p : params) p->zero_grad();
}

Tensor bare_copy(const Tensor& t) {
  Tensor out(t.name, t.shape);
  out.values = t.values;
  return out;
}

}  // namespace

// --- LmConfig ---------------------------------------------------------------

void LmConfig::validate() const {
  if (vocab_size == 0 || emb_size == 0 || hidden_size == 0 || n_layers == 0) {
    throw Error(ErrorKind::ConfigInvalid, "LM sizes and layer count must be positive");
  }
  if (windows.size() != n_layers) {
    throw Error(ErrorKind::ConfigInvalid, "lm.windows needs one entry per layer");
  }
  for (const auto w : windows) {
    if (w != 1 && w != 2) throw Error(ErrorKind::ConfigInvalid, "QRNN windows must be 1 or 2");
  }
  if (!(zoneout >= 0.0 && zoneout < 1.0)) {
    throw Error(ErrorKind::ConfigInvalid, "lm.zoneout must lie in [0, 1)");
  }
}

std::vector<nn::QrnnLayerConfig> LmConfig::layer_configs() const {
  std::vector<nn::QrnnLayerConfig> out;
  for (std::size_t l = 0; l < n_layers; ++l) {
    nn::QrnnLayerConfig c;
    c.input_size = l == 0 ? emb_size : hidden_size;
    c.hidden_size = l + 1 == n_layers ? emb_size : hidden_size;
    c.window = windows[l];
    c.zoneout = zoneout;
    out.push_back(c);
  }
  return out;
}

std::size_t LmConfig::parameter_count() const {
  validate();
  std::size_t total = vocab_size * emb_size;
  for (const auto& c : layer_configs()) total += c.parameter_count();
  total += vocab_size;  // decoder bias
  if (!tie_weights) total += vocab_size * emb_size;
  return total;
}

LmConfig LmConfig::from_config(const Config& config) {
  LmConfig c;
  c.vocab_size = positive_size(config, "lm.vocab_size", c.vocab_size);
  c.emb_size = positive_size(config, "lm.emb_size", c.emb_size);
  c.hidden_size = positive_size(config, "lm.hidden_size", c.hidden_size);
  c.n_layers = positive_size(config, "lm.n_layers", c.n_layers);
  if (config.contains("lm.windows")) {
    c.windows.clear();
    for (const auto w : config.get_int_list("lm.windows", {})) {
      if (w <= 0) throw Error(ErrorKind::ConfigInvalid, "lm.windows entries must be positive");
      c.windows.push_back(static_cast<std::size_t>(w));
    }
  } else {
    c.windows.assign(c.n_layers, 1);
    c.windows[0] = 2;
  }
  c.tie_weights = config.get_bool("lm.tie_weights", c.tie_weights);
  c.zoneout = config.get_double("lm.zoneout", c.zoneout);
  c.validate();
  return c;
}

std::map<std::string, std::string> LmConfig::to_metadata() const {
  char zone[64];
  std::snprintf(zone, sizeof(zone), "%.17g", zoneout);
  return {{"lm.vocab_size", std::to_string(vocab_size)},
          {"lm.emb_size", std::to_string(emb_size)},
          {"lm.hidden_size", std::to_string(hidden_size)},
          {"lm.n_layers", std::to_string(n_layers)},
          {"lm.windows", join_sizes(windows)},
          {"lm.tie_weights", tie_weights ? "true" : "false"},
          {"lm.zoneout", zone}};
}

LmConfig LmConfig::from_metadata(const std::map<std::string, std::string>& meta) {
  Config config;
  for (const auto& [k, v] : meta) config.set(k, v);
  try {
    return from_config(config);
  } catch (const Error& e) {
    throw Error(ErrorKind::BadCheckpoint, "model metadata: " + e.detail());
  }
}

// --- DropoutConfig ----------------------------------------------------------

double DropoutConfig::scaled(double base) const { return base * multiplier; }

void DropoutConfig::validate() const {
  for (const double base : {embedding, input, hidden, output, weight}) {
    const double p = scaled(base);
    if (!(p >= 0.0 && p < 1.0)) {
      throw Error(ErrorKind::ConfigInvalid, "scaled dropout rates must lie in [0, 1)");
    }
  }
}

DropoutConfig DropoutConfig::from_config(const Config& config, const std::string& prefix,
                                         double default_multiplier) {
  DropoutConfig d;
  d.embedding = config.get_double(prefix + ".embedding", d.embedding);
  d.input = config.get_double(prefix + ".input", d.input);
  d.hidden = config.get_double(prefix + ".hidden", d.hidden);
  d.output = config.get_double(prefix + ".output", d.output);
  d.weight = config.get_double(prefix + ".weight", d.weight);
  d.multiplier = config.get_double(prefix + ".multiplier", default_multiplier);
  d.validate();
  return d;
}

// --- Encoder ----------------------------------------------------------------

Encoder Encoder::build(const LmConfig& config, Rng& rng) {
  config.validate();
  Encoder e;
  e.config = config;
  e.embedding = Tensor("embedding.weight", {config.vocab_size, config.emb_size});
  fill_uniform(e.embedding, rng, 0.1);
  const auto layers = config.layer_configs();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& c = layers[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(c.window * c.input_size));
    Tensor w("qrnn." + std::to_string(l) + ".weight", c.weight_shape());
    Tensor b("qrnn." + std::to_string(l) + ".bias", c.bias_shape());
    fill_uniform(w, rng, bound);
    fill_uniform(b, rng, bound);
    e.weights.push_back(std::move(w));
    e.biases.push_back(std::move(b));
  }
  return e;
}

std::vector<Tensor*> Encoder::parameters() {
  std::vector<Tensor*> out{&embedding};
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

void Encoder::set_frozen(bool frozen) {
  for (auto* p : parameters()) p->frozen = frozen;
}

EncoderPass encode(Graph& g, Encoder& encoder, std::span<const TokenId> ids, std::size_t steps,
                   std::size_t batch, std::span<const std::uint8_t> keep,
                   const std::vector<std::vector<float>>& initial_cells, const ForwardNoise& noise) {
  const auto& cfg = encoder.config;
  if (ids.size() != steps * batch) {
    throw Error(ErrorKind::ShapeMismatch, "encoder ids do not fill steps*batch");
  }
  if (!initial_cells.empty() && initial_cells.size() != cfg.n_layers) {
    throw Error(ErrorKind::ShapeMismatch, "one initial cell state per layer required");
  }
  const bool training = noise.rng != nullptr && noise.dropout != nullptr;
  const auto layers = cfg.layer_configs();

  std::vector<float> row_scale;
  if (training && noise.dropout->scaled(noise.dropout->embedding) > 0.0) {
    row_scale = nn::embedding_row_mask<float>(*noise.rng, cfg.vocab_size,
                                              noise.dropout->scaled(noise.dropout->embedding));
  }
  auto x = g.embedding(g.param(encoder.embedding), ids, row_scale);
  x = nn::mask_rows(g, x, keep);
  if (training && noise.dropout->scaled(noise.dropout->input) > 0.0) {
    x = g.affine_const(x, nn::variational_mask<float>(*noise.rng, steps, batch, cfg.emb_size,
                                                      noise.dropout->scaled(noise.dropout->input)));
  }

  EncoderPass pass;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& lc = layers[l];
    std::vector<float> weight_mask;
    std::vector<float> zoneout_keep;
    nn::QrnnNoise<float> qnoise;
    if (training && noise.dropout->scaled(noise.dropout->weight) > 0.0) {
      weight_mask = nn::dropout_mask<float>(*noise.rng, nn::numel(lc.weight_shape()),
                                            noise.dropout->scaled(noise.dropout->weight));
      qnoise.weight_mask = &weight_mask;
    }
    if (training && lc.zoneout > 0.0) {
      zoneout_keep = zoneout_keep_mask(*noise.rng, steps * batch * lc.hidden_size, lc.zoneout);
      qnoise.zoneout_keep = &zoneout_keep;
    }
    Var c0;
    if (!initial_cells.empty()) c0 = g.constant({batch, lc.hidden_size}, initial_cells[l]);
    const auto out = nn::qrnn_forward(g, lc, g.param(encoder.weights[l]),
                                      g.param(encoder.biases[l]), x, steps, batch, c0, keep, qnoise);
    x = out.h;
    pass.cells.push_back(out.c);
    if (training && l + 1 < layers.size() && noise.dropout->scaled(noise.dropout->hidden) > 0.0) {
      x = g.affine_const(x, nn::variational_mask<float>(*noise.rng, steps, batch, lc.hidden_size,
                                                        noise.dropout->scaled(noise.dropout->hidden)));
    }
  }
  if (training && noise.dropout->scaled(noise.dropout->output) > 0.0) {
    x = g.affine_const(x, nn::variational_mask<float>(*noise.rng, steps, batch, cfg.emb_size,
                                                      noise.dropout->scaled(noise.dropout->output)));
  }
  pass.output = x;
  return pass;
}

PaddedBatch pad_left(std::span<const TokenDoc* const> docs) {
  PaddedBatch out;
  out.batch = docs.size();
  for (const auto* d : docs) out.steps = std::max(out.steps, d->size());
  out.steps = std::max<std::size_t>(out.steps, 1);
  out.ids.assign(out.steps * out.batch, subword::kPadId);
  out.keep.assign(out.steps * out.batch, 0);
  for (std::size_t b = 0; b < out.batch; ++b) {
    const auto& doc = *docs[b];
    const auto offset = out.steps - doc.size();
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto row = (offset + i) * out.batch + b;
      out.ids[row] = doc[i];
      out.keep[row] = 1;
    }
  }
  return out;
}

// --- LanguageModel ----------------------------------------------------------

LanguageModel LanguageModel::build(const LmConfig& config, std::uint64_t seed) {
  config.validate();
  auto rng = Rng::derived(seed, "lm_init");
  LanguageModel lm;
  lm.encoder_ = Encoder::build(config, rng);
  lm.decoder_bias_ = Tensor("decoder.bias", {config.vocab_size});
  if (!config.tie_weights) {
    lm.decoder_weight_ = Tensor("decoder.weight", {config.vocab_size, config.emb_size});
    fill_uniform(lm.decoder_weight_, rng, 0.1);
  }
  return lm;
}

Tensor& LanguageModel::decoder_weight() {
  return config().tie_weights ? encoder_.embedding : decoder_weight_;
}

std::vector<Tensor*> LanguageModel::parameters() {
  auto out = encoder_.parameters();
  if (!config().tie_weights) out.push_back(&decoder_weight_);
  out.push_back(&decoder_bias_);
  return out;
}

std::size_t LanguageModel::parameter_count() {
  std::size_t total = 0;
  for (const auto* p : parameters()) total += p->size();
  return total;
}

Var LanguageModel::logits(Graph& g, Var states) {
  return g.linear(states, g.param(decoder_weight()), g.param(decoder_bias_));
}

std::vector<float> LanguageModel::encoder_outputs(std::span<const TokenDoc* const> docs) {
  const auto batch = pad_left(docs);
  Graph g;
  const auto pass = encode(g, encoder_, batch.ids, batch.steps, batch.batch, batch.keep, {}, {});
  const auto v = g.value(pass.output);
  return {v.begin(), v.end()};
}

nn::ModelCheckpoint LanguageModel::to_checkpoint() const {
  nn::ModelCheckpoint ck;
  ck.metadata = config().to_metadata();
  ck.metadata["model"] = "lm";
  ck.metadata["format"] = "humorlm-v1";
  auto* self = const_cast<LanguageModel*>(this);
  for (const auto* p : self->parameters()) ck.tensors.push_back(bare_copy(*p));
  return ck;
}

namespace {

void restore_tensor(const nn::ModelCheckpoint& ck, Tensor& dst) {
  const auto* src = ck.find(dst.name);
  if (src == nullptr) throw Error(ErrorKind::BadCheckpoint, "missing tensor '" + dst.name + "'");
  if (src->shape != dst.shape) {
    throw Error(ErrorKind::BadCheckpoint, "tensor '" + dst.name + "' has shape " +
                                              nn::to_string(src->shape) + ", expected " +
                                              nn::to_string(dst.shape));
  }
  dst.values = src->values;
}

}  // namespace

LanguageModel LanguageModel::from_checkpoint(const nn::ModelCheckpoint& checkpoint) {
  const auto cfg = LmConfig::from_metadata(checkpoint.metadata);
  auto lm = build(cfg, 0);
  for (auto* p : lm.parameters()) restore_tensor(checkpoint, *p);
  return lm;
}

// --- LM training ------------------------------------------------------------

void LmTrainConfig::validate() const {
  if (batch_size == 0 || bptt == 0) {
    throw Error(ErrorKind::ConfigInvalid, "batch_size and bptt must be positive");
  }
  for (const auto& p : phases) {
    if (!(p.lr >= 0.0) || !std::isfinite(p.lr)) {
      throw Error(ErrorKind::ConfigInvalid, "phase learning rates must be finite and >= 0");
    }
  }
  nn::AdamWConfig{.lr = 0.0, .beta2 = beta2, .weight_decay = weight_decay}.validate();
  nn::OneCycleConfig{.total_steps = 1, .warmup_frac = warmup_frac, .div_start = div_start,
                     .div_final = div_final}
      .validate();
  dropout.validate();
}

LmTrainConfig LmTrainConfig::from_config(const Config& config, const std::string& prefix,
                                         const LmTrainConfig& defaults) {
  LmTrainConfig c = defaults;
  if (config.contains(prefix + ".phase_epochs") || config.contains(prefix + ".phase_lrs")) {
    const auto epochs = config.get_int_list(prefix + ".phase_epochs", {});
    const auto lrs = config.get_double_list(prefix + ".phase_lrs", {});
    if (epochs.size() != lrs.size()) {
      throw Error(ErrorKind::ConfigInvalid,
                  prefix + ".phase_epochs and " + prefix + ".phase_lrs differ in length");
    }
    c.phases.clear();
    for (std::size_t i = 0; i < epochs.size(); ++i) {
      if (epochs[i] < 0) throw Error(ErrorKind::ConfigInvalid, prefix + ".phase_epochs < 0");
      c.phases.push_back({static_cast<std::size_t>(epochs[i]), lrs[i]});
    }
  }
  c.batch_size = positive_size(config, prefix + ".batch_size", c.batch_size);
  c.bptt = positive_size(config, prefix + ".bptt", c.bptt);
  c.weight_decay = config.get_double(prefix + ".weight_decay", c.weight_decay);
  c.beta2 = config.get_double(prefix + ".beta2", c.beta2);
  c.warmup_frac = config.get_double(prefix + ".warmup_frac", c.warmup_frac);
  c.dropout = DropoutConfig::from_config(config, prefix + ".dropout", c.dropout.multiplier);
  c.validate();
  return c;
}

LmTrainConfig pretrain_schedule() { return {}; }

LmTrainConfig finetune_schedule() {
  LmTrainConfig c;
  c.phases = {{5, 3e-3}, {10, 1e-4}};
  return c;
}

LmEvaluation evaluate_lm(LanguageModel& lm, std::span<const TokenId> ids, std::size_t batch_size,
                         std::size_t bptt) {
  if (ids.size() < 2) throw Error(ErrorKind::CorpusTooSmall, "need at least two tokens to evaluate");
  if (batch_size == 0 || bptt == 0) {
    throw Error(ErrorKind::ConfigInvalid, "batch_size and bptt must be positive");
  }
  // Same stream layout as make_lm_batches, plus the ragged final block.
  const std::size_t batch = std::clamp<std::size_t>(ids.size() / (bptt + 1), 1, batch_size);
  const std::size_t stream_len = ids.size() / batch;
  const std::size_t stream = stream_len - 1;
  const auto vocab = lm.config().vocab_size;

  LmEvaluation out;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::vector<float>> cells;
  for (std::size_t start = 0; start < stream; start += bptt) {
    const auto steps = std::min(bptt, stream - start);
    std::vector<TokenId> inputs(steps * batch);
    std::vector<TokenId> targets(steps * batch);
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t b = 0; b < batch; ++b) {
        const auto pos = b * stream_len + start + t;
        inputs[t * batch + b] = ids[pos];
        targets[t * batch + b] = ids[pos + 1];
      }
    }
    Graph g;
    const auto pass = encode(g, lm.encoder(), inputs, steps, batch, {}, cells, {});
    const auto logits = lm.logits(g, pass.output);
    const auto loss = g.smoothed_cross_entropy(logits, targets, 0.0);
    loss_sum += static_cast<double>(g.value(loss)[0]) * static_cast<double>(targets.size());
    const auto lv = g.value(logits);
    for (std::size_t r = 0; r < targets.size(); ++r) {
      const auto row = lv.subspan(r * vocab, vocab);
      const auto best = std::max_element(row.begin(), row.end()) - row.begin();
      if (best == targets[r]) ++correct;
    }
    cells.clear();
    for (const auto c : pass.cells) {
      const auto cv = g.value(c);
      cells.emplace_back(cv.end() - static_cast<std::ptrdiff_t>(batch * g.cols(c)), cv.end());
    }
  }
  out.predictions = stream * batch;
  out.loss = loss_sum / static_cast<double>(out.predictions);
  out.accuracy = static_cast<double>(correct) / static_cast<double>(out.predictions);
  return out;
}

LmTrainResult train_lm(LanguageModel& lm, std::span<const TokenId> train,
                       std::span<const TokenId> valid, const LmTrainConfig& config,
                       std::uint64_t seed) {
  config.validate();
  const auto valid_ids = valid.empty() ? train : valid;
  LmTrainResult result;
  std::size_t total_epochs = 0;
  for (const auto& p : config.phases) total_epochs += p.epochs;
  if (total_epochs == 0) {
    result.best = evaluate_lm(lm, valid_ids, config.batch_size, config.bptt);
    return result;
  }
  const auto blocks = subword::make_lm_batches(train, config.batch_size, config.bptt);
  const auto params = lm.parameters();
  LanguageModel best_model = lm;
  bool have_best = false;
  std::size_t global_epoch = 0;

  for (std::size_t phase = 0; phase < config.phases.size(); ++phase) {
    const auto& ph = config.phases[phase];
    if (ph.epochs == 0) continue;
    nn::OneCycleConfig schedule{.lr_max = ph.lr,
                                .total_steps = ph.epochs * blocks.size(),
                                .warmup_frac = config.warmup_frac,
                                .div_start = config.div_start,
                                .div_final = config.div_final};
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < ph.epochs; ++epoch, ++global_epoch) {
      auto rng = Rng::derived(seed, "lm_train_epoch", global_epoch);
      std::vector<std::vector<float>> cells;
      double loss_sum = 0.0;
      for (const auto& block : blocks) {
        const auto steps = block.steps;
        const auto batch = block.batch;
        std::vector<TokenId> inputs(steps * batch);
        std::vector<TokenId> targets(steps * batch);
        for (std::size_t t = 0; t < steps; ++t) {
          for (std::size_t b = 0; b < batch; ++b) {
            inputs[t * batch + b] = block.input(b, t);
            targets[t * batch + b] = block.target(b, t);
          }
        }
        Graph g;
        const auto pass = encode(g, lm.encoder(), inputs, steps, batch, {}, cells,
                                 {&rng, &config.dropout});
        const auto loss = g.smoothed_cross_entropy(lm.logits(g, pass.output), targets, 0.0);
        loss_sum += g.value(loss)[0];
        cells.clear();
        for (const auto c : pass.cells) {
          const auto cv = g.value(c);
          cells.emplace_back(cv.end() - static_cast<std::ptrdiff_t>(batch * g.cols(c)), cv.end());
        }
        zero_grads(params);
        g.backward(loss);
        const auto sv = nn::one_cycle(step++, schedule);
        const nn::AdamWConfig adam{.lr = sv.lr,
                                   .beta1 = sv.momentum,
                                   .beta2 = config.beta2,
                                   .weight_decay = config.weight_decay};
        nn::adamw_step<float>(params, adam);
      }
      LmEpochLog log;
      log.phase = phase;
      log.epoch = epoch;
      log.train_loss = loss_sum / static_cast<double>(blocks.size());
      log.valid = evaluate_lm(lm, valid_ids, config.batch_size, config.bptt);
      result.history.push_back(log);
      if (!have_best || log.valid.loss < result.best.loss) {
        have_best = true;
        result.best = log.valid;
        best_model = lm;
      }
    }
  }
  lm = std::move(best_model);
  return result;
}

LmTrainResult finetune_lm(LanguageModel& lm, std::span<const TokenId> train,
                          std::span<const TokenId> valid, const LmTrainConfig& config,
                          std::uint64_t seed) {
  if (train.empty()) throw Error(ErrorKind::EmptyCorpus, "no target-domain text to fine-tune on");
  return train_lm(lm, train, valid, config, seed);
}

// --- Text glue --------------------------------------------------------------

std::vector<TokenDoc> encode_documents(const subword::BpeModel& bpe,
                                       std::span<const std::string> texts) {
  std::vector<TokenDoc> docs;
  docs.reserve(texts.size());
  for (const auto& t : texts) docs.push_back(bpe.encode(textclean::clean(t).text));
  return docs;
}

std::vector<TokenId> encode_stream(const subword::BpeModel& bpe, std::span<const std::string> texts) {
  std::vector<TokenId> out;
  for (const auto& doc : encode_documents(bpe, texts)) out.insert(out.end(), doc.begin(), doc.end());
  return out;
}

}  // namespace humor::models

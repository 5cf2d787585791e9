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
#include <numeric>
#include <utility>

#include "humor/error.hpp"
#include "humor/harness/metrics.hpp"
#include "humor/models.hpp"
#include "humor/nn/optim.hpp"
#include "humor/resample.hpp"

namespace humor::models {

namespace {

void fill_uniform(Tensor& t, Rng& rng, double bound) {
  for (auto& v : t.values) v = static_cast<float>(rng.uniform(-bound, bound));
}

void zero_grads(std::span<Tensor* const> params) {
  for (auto* p : params) p->zero_grad();
}

std::vector<const TokenDoc*> doc_pointers(std::span<const TokenDoc> docs, std::size_t begin,
                                          std::size_t end) {
  std::vector<const TokenDoc*> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(&docs[i]);
  return out;
}

std::vector<std::int32_t> class_targets(std::span<const double> targets, std::size_t classes) {
  std::vector<std::int32_t> out;
  out.reserve(targets.size());
  for (const double t : targets) {
    const auto k = static_cast<std::int32_t>(std::lround(t));
    if (k < 0 || static_cast<std::size_t>(k) >= classes || static_cast<double>(k) != t) {
      throw Error(ErrorKind::MalformedRow, "class target " + std::to_string(t) + " out of range");
    }
    out.push_back(k);
  }
  return out;
}

/// Indices with the minority class duplicated (cyclically) up to the majority
/// count. Only binary labels are balanced.
std::vector<std::size_t> balanced_indices(std::span<const std::int32_t> labels) {
  std::vector<std::size_t> by_class[2];
  std::vector<std::size_t> out(labels.size());
  std::iota(out.begin(), out.end(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) return out;
    by_class[labels[i]].push_back(i);
  }
  const auto minority = by_class[1].size() < by_class[0].size() ? 1 : 0;
  const auto& members = by_class[minority];
  if (members.empty()) return out;
  const auto needed = by_class[1 - minority].size() - members.size();
  for (std::size_t j = 0; j < needed; ++j) out.push_back(members[j % members.size()]);
  return out;
}

Var task_loss(Graph& g, const HeadConfig& head, Var out, std::span<const double> targets,
              double smoothing) {
  if (head.kind == TaskKind::Classify) {
    return g.smoothed_cross_entropy(out, class_targets(targets, head.num_classes), smoothing);
  }
  std::vector<float> t(targets.begin(), targets.end());
  return g.mse(out, t);
}

}  // namespace

void HeadConfig::validate() const {
  if (kind == TaskKind::Classify && num_classes < 2) {
    throw Error(ErrorKind::ConfigInvalid, "a classifier needs at least two classes");
  }
  if (hidden == 0) throw Error(ErrorKind::ConfigInvalid, "head.hidden must be positive");
}

std::vector<double> differential_lrs(std::size_t groups, double lr_lo, double lr_hi) {
  if (groups == 0) throw Error(ErrorKind::ConfigInvalid, "need at least one layer group");
  if (!(lr_lo > 0.0 && lr_hi > 0.0)) {
    throw Error(ErrorKind::ConfigInvalid, "differential learning rates must be positive");
  }
  std::vector<double> out(groups, lr_hi);
  if (groups == 1) return out;
  const double ratio = lr_hi / lr_lo;
  for (std::size_t g = 0; g + 1 < groups; ++g) {
    out[g] = lr_lo * std::pow(ratio, static_cast<double>(g) / static_cast<double>(groups - 1));
  }
  return out;
}

// --- HeadModel --------------------------------------------------------------

HeadModel HeadModel::build(const LanguageModel& lm, const HeadConfig& head, std::uint64_t seed) {
  head.validate();
  HeadModel m;
  m.head_ = head;
  m.encoder_ = lm.encoder();
  for (auto* p : m.encoder_.parameters()) {
    p->grad.clear();
    p->moment1.clear();
    p->moment2.clear();
    p->step = 0;
  }
  m.encoder_.set_frozen(true);
  const auto pooled = 3 * lm.config().emb_size;
  auto rng = Rng::derived(seed, "head_init");
  m.hidden_weight_ = Tensor("head.hidden.weight", {head.hidden, pooled});
  m.hidden_bias_ = Tensor("head.hidden.bias", {head.hidden});
  m.out_weight_ = Tensor("head.out.weight", {head.outputs(), head.hidden});
  m.out_bias_ = Tensor("head.out.bias", {head.outputs()});
  const double b1 = 1.0 / std::sqrt(static_cast<double>(pooled));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(head.hidden));
  fill_uniform(m.hidden_weight_, rng, b1);
  fill_uniform(m.hidden_bias_, rng, b1);
  fill_uniform(m.out_weight_, rng, b2);
  fill_uniform(m.out_bias_, rng, b2);
  return m;
}

std::vector<Tensor*> HeadModel::head_parameters() {
  return {&hidden_weight_, &hidden_bias_, &out_weight_, &out_bias_};
}

std::vector<std::vector<Tensor*>> HeadModel::layer_groups() {
  std::vector<std::vector<Tensor*>> groups{{&encoder_.embedding}};
  for (std::size_t l = 0; l < encoder_.weights.size(); ++l) {
    groups.push_back({&encoder_.weights[l], &encoder_.biases[l]});
  }
  groups.push_back(head_parameters());
  return groups;
}

Var HeadModel::head_forward(Graph& g, Var pooled, const ForwardNoise& noise) {
  auto h = g.relu(g.linear(pooled, g.param(hidden_weight_), g.param(hidden_bias_)));
  if (noise.rng != nullptr && noise.head_dropout > 0.0) {
    h = g.affine_const(h, nn::dropout_mask<float>(*noise.rng, g.rows(h) * g.cols(h),
                                                  noise.head_dropout));
  }
  return g.linear(h, g.param(out_weight_), g.param(out_bias_));
}

Var HeadModel::forward(Graph& g, const PaddedBatch& batch, const ForwardNoise& noise) {
  const auto pass = encode(g, encoder_, batch.ids, batch.steps, batch.batch, batch.keep, {}, noise);
  const auto pooled = g.concat_pool(pass.output, batch.steps, batch.batch, batch.keep);
  return head_forward(g, pooled, noise);
}

std::vector<std::vector<float>> HeadModel::pooled_features(std::span<const TokenDoc> docs,
                                                           std::size_t batch_size) {
  std::vector<std::vector<float>> out;
  out.reserve(docs.size());
  for (std::size_t begin = 0; begin < docs.size(); begin += batch_size) {
    const auto end = std::min(docs.size(), begin + batch_size);
    const auto ptrs = doc_pointers(docs, begin, end);
    const auto batch = pad_left(ptrs);
    Graph g;
    const auto pass = encode(g, encoder_, batch.ids, batch.steps, batch.batch, batch.keep, {}, {});
    const auto pooled = g.concat_pool(pass.output, batch.steps, batch.batch, batch.keep);
    const auto v = g.value(pooled);
    const auto d = g.cols(pooled);
    for (std::size_t b = 0; b < batch.batch; ++b) {
      out.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(b * d),
                       v.begin() + static_cast<std::ptrdiff_t>((b + 1) * d));
    }
  }
  return out;
}

std::vector<double> HeadModel::predict(std::span<const TokenDoc> docs, std::size_t batch_size) {
  std::vector<double> out;
  const auto k = head_.outputs();
  out.reserve(docs.size() * k);
  for (std::size_t begin = 0; begin < docs.size(); begin += batch_size) {
    const auto end = std::min(docs.size(), begin + batch_size);
    const auto ptrs = doc_pointers(docs, begin, end);
    Graph g;
    const auto y = forward(g, pad_left(ptrs), {});
    const auto v = g.value(y);
    if (head_.kind == TaskKind::Classify) {
      const auto probs = nn::softmax_rows(v, k);
      out.insert(out.end(), probs.begin(), probs.end());
    } else {
      out.insert(out.end(), v.begin(), v.end());
    }
  }
  return out;
}

std::vector<float> HeadModel::encoder_outputs(std::span<const TokenDoc* const> docs) {
  const auto batch = pad_left(docs);
  Graph g;
  const auto pass = encode(g, encoder_, batch.ids, batch.steps, batch.batch, batch.keep, {}, {});
  const auto v = g.value(pass.output);
  return {v.begin(), v.end()};
}

nn::ModelCheckpoint HeadModel::to_checkpoint() const {
  nn::ModelCheckpoint ck;
  ck.metadata = encoder_.config.to_metadata();
  ck.metadata["model"] = "head";
  ck.metadata["format"] = "humorlm-v1";
  ck.metadata["head.kind"] = head_.kind == TaskKind::Classify ? "classify" : "regress";
  ck.metadata["head.num_classes"] = std::to_string(head_.num_classes);
  ck.metadata["head.hidden"] = std::to_string(head_.hidden);
  auto* self = const_cast<HeadModel*>(this);
  auto params = self->encoder_.parameters();
  for (auto* p : self->head_parameters()) params.push_back(p);
  for (const auto* p : params) {
    Tensor t(p->name, p->shape);
    t.values = p->values;
    ck.tensors.push_back(std::move(t));
  }
  return ck;
}

HeadModel HeadModel::from_checkpoint(const nn::ModelCheckpoint& checkpoint) {
  const auto& meta = checkpoint.metadata;
  const auto model = meta.find("model");
  if (model == meta.end() || model->second != "head") {
    throw Error(ErrorKind::BadCheckpoint, "checkpoint does not hold a task head");
  }
  HeadConfig head;
  try {
    const auto kind = meta.at("head.kind");
    if (kind != "classify" && kind != "regress") throw std::out_of_range(kind);
    head.kind = kind == "classify" ? TaskKind::Classify : TaskKind::Regress;
    head.num_classes = std::stoul(meta.at("head.num_classes"));
    head.hidden = std::stoul(meta.at("head.hidden"));
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::BadCheckpoint, "head metadata is incomplete");
  }
  const auto lm = LanguageModel::build(LmConfig::from_metadata(meta), 0);
  auto m = build(lm, head, 0);
  auto params = m.encoder_.parameters();
  for (auto* p : m.head_parameters()) params.push_back(p);
  for (auto* p : params) {
    const auto* src = checkpoint.find(p->name);
    if (src == nullptr || src->shape != p->shape) {
      throw Error(ErrorKind::BadCheckpoint, "missing or misshapen tensor '" + p->name + "'");
    }
    p->values = src->values;
  }
  return m;
}

// --- Training ---------------------------------------------------------------

void HeadTrainConfig::validate() const {
  if (batch_size == 0) throw Error(ErrorKind::ConfigInvalid, "head.batch_size must be positive");
  if (!(head_lr >= 0.0 && lr_lo > 0.0 && lr_hi > 0.0)) {
    throw Error(ErrorKind::ConfigInvalid, "head learning rates must be positive");
  }
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw Error(ErrorKind::ConfigInvalid, "head.label_smoothing must lie in [0, 1)");
  }
  const double p = head_dropout * dropout.multiplier;
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorKind::ConfigInvalid, "head dropout out of range");
  if (smote_k == 0) throw Error(ErrorKind::ConfigInvalid, "smote.k must be >= 1");
  nn::AdamWConfig{.beta2 = beta2, .weight_decay = weight_decay}.validate();
  nn::OneCycleConfig{.warmup_frac = warmup_frac}.validate();
  dropout.validate();
}

HeadTrainConfig HeadTrainConfig::from_config(const Config& config, const std::string& prefix) {
  HeadTrainConfig c;
  const auto count = [&](const std::string& key, std::size_t fallback) {
    const auto v = config.get_int(prefix + "." + key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw Error(ErrorKind::ConfigInvalid, prefix + "." + key + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  c.head_epochs = count("head_epochs", c.head_epochs);
  c.head_lr = config.get_double(prefix + ".head_lr", c.head_lr);
  c.unfrozen_epochs = count("unfrozen_epochs", c.unfrozen_epochs);
  c.lr_lo = config.get_double(prefix + ".lr_lo", c.lr_lo);
  c.lr_hi = config.get_double(prefix + ".lr_hi", c.lr_hi);
  c.batch_size = count("batch_size", c.batch_size);
  c.weight_decay = config.get_double(prefix + ".weight_decay", c.weight_decay);
  c.beta2 = config.get_double(prefix + ".beta2", c.beta2);
  c.warmup_frac = config.get_double(prefix + ".warmup_frac", c.warmup_frac);
  c.label_smoothing = config.get_double(prefix + ".label_smoothing", c.label_smoothing);
  c.head_dropout = config.get_double(prefix + ".head_dropout", c.head_dropout);
  c.oversample = config.get_bool(prefix + ".oversample", c.oversample);
  c.smote = config.get_bool("smote.enabled", c.smote);
  c.smote_k = count("smote_k", config.get_int("smote.k", static_cast<std::int64_t>(c.smote_k)));
  c.dropout = DropoutConfig::from_config(config, prefix + ".dropout", c.dropout.multiplier);
  c.validate();
  return c;
}

double head_metric(const HeadConfig& head, std::span<const double> predictions,
                   std::span<const double> targets) {
  if (head.kind == TaskKind::Regress) return harness::compute_mse(predictions, targets);
  const auto k = head.num_classes;
  const auto labels = class_targets(targets, k);
  std::vector<int> truth(labels.begin(), labels.end());
  std::vector<int> predicted(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = predictions.subspan(i * k, k);
    predicted[i] = k == 2 ? (row[1] >= 0.5 ? 1 : 0)
                          : static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  const auto report = harness::compute_metrics(predicted, truth);
  return k == 2 ? report.f1 : report.accuracy;
}

bool metric_improves(const HeadConfig& head, double candidate, double incumbent) {
  return head.kind == TaskKind::Regress ? candidate < incumbent : candidate > incumbent;
}

HeadTrainResult train_head_then_unfreeze(HeadModel& model, const TaskData& train,
                                         const TaskData& valid, const HeadTrainConfig& config,
                                         std::uint64_t seed) {
  config.validate();
  if (train.docs.size() != train.targets.size() || valid.docs.size() != valid.targets.size()) {
    throw Error(ErrorKind::ShapeMismatch, "documents and targets differ in length");
  }
  if (train.docs.empty()) throw Error(ErrorKind::EmptyCorpus, "no training documents");
  const auto& head = model.head_config();
  const bool classify = head.kind == TaskKind::Classify;
  const auto& select = valid.docs.empty() ? train : valid;
  const double head_p = config.head_dropout * config.dropout.multiplier;

  HeadTrainResult result;
  const auto evaluate = [&] {
    return head_metric(head, model.predict(select.docs), select.targets);
  };
  HeadModel best = model;
  bool have_best = false;
  const auto consider = [&](std::size_t stage, std::size_t epoch, double train_loss) {
    const double metric = evaluate();
    result.history.push_back({stage, epoch, train_loss, metric});
    if (!have_best || metric_improves(head, metric, result.best_metric)) {
      have_best = true;
      result.best_metric = metric;
      result.best_stage = stage;
      result.best_epoch = epoch;
      best = model;
    }
  };

  // Stage 1: the encoder is frozen, so the head trains on fixed pooled features.
  if (config.head_epochs > 0) {
    model.encoder().set_frozen(true);
    const auto features = model.pooled_features(train.docs);
    std::vector<std::vector<float>> points = features;
    std::vector<double> targets = train.targets;
    if (classify) {
      const auto labels = class_targets(train.targets, head.num_classes);
      const bool binary = head.num_classes == 2;
      if (config.smote && binary) {
        std::vector<std::vector<double>> pts;
        pts.reserve(features.size());
        for (const auto& f : features) pts.emplace_back(f.begin(), f.end());
        const auto balanced = resample::smote(
            pts, std::vector<int>(labels.begin(), labels.end()),
            {.k_neighbors = config.smote_k, .seed = derive_seed(seed, "head_smote")});
        points.clear();
        targets.clear();
        for (std::size_t i = 0; i < balanced.points.size(); ++i) {
          points.emplace_back(balanced.points[i].begin(), balanced.points[i].end());
          targets.push_back(balanced.labels[i]);
        }
      } else if (config.oversample) {
        const auto idx = balanced_indices(labels);
        points.clear();
        targets.clear();
        for (const auto i : idx) {
          points.push_back(features[i]);
          targets.push_back(train.targets[i]);
        }
      }
    }
    const auto params = model.head_parameters();
    const auto n = points.size();
    const auto d = points.front().size();
    const auto batches = (n + config.batch_size - 1) / config.batch_size;
    const nn::OneCycleConfig schedule{.lr_max = config.head_lr,
                                      .total_steps = config.head_epochs * batches,
                                      .warmup_frac = config.warmup_frac};
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.head_epochs; ++epoch) {
      auto rng = Rng::derived(seed, "head_stage1_epoch", epoch);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span(order));
      double loss_sum = 0.0;
      for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
        const auto end = std::min(n, begin + config.batch_size);
        std::vector<float> x;
        std::vector<double> y;
        for (std::size_t i = begin; i < end; ++i) {
          x.insert(x.end(), points[order[i]].begin(), points[order[i]].end());
          y.push_back(targets[order[i]]);
        }
        Graph g;
        const auto pooled = g.constant({end - begin, d}, std::move(x));
        const auto out = model.head_forward(g, pooled, {&rng, nullptr, head_p});
        const auto loss = task_loss(g, head, out, y, config.label_smoothing);
        loss_sum += g.value(loss)[0];
        zero_grads(params);
        g.backward(loss);
        const auto sv = nn::one_cycle(step++, schedule);
        nn::adamw_step<float>(params, {.lr = sv.lr,
                                       .beta1 = sv.momentum,
                                       .beta2 = config.beta2,
                                       .weight_decay = config.weight_decay});
      }
      consider(1, epoch, loss_sum / static_cast<double>(batches));
    }
  }

  // Stage 2: everything trains, each layer group at its own learning rate.
  if (config.unfrozen_epochs > 0) {
    model.encoder().set_frozen(false);
    std::vector<std::size_t> pool(train.docs.size());
    std::iota(pool.begin(), pool.end(), 0);
    if (classify && config.oversample) {
      pool = balanced_indices(class_targets(train.targets, head.num_classes));
    }
    auto groups = model.layer_groups();
    const auto lrs = differential_lrs(groups.size(), config.lr_lo, config.lr_hi);
    std::vector<Tensor*> all;
    for (const auto& grp : groups) all.insert(all.end(), grp.begin(), grp.end());
    const auto n = pool.size();
    const auto batches = (n + config.batch_size - 1) / config.batch_size;
    const nn::OneCycleConfig schedule{.lr_max = 1.0,
                                      .total_steps = config.unfrozen_epochs * batches,
                                      .warmup_frac = config.warmup_frac};
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.unfrozen_epochs; ++epoch) {
      auto rng = Rng::derived(seed, "head_stage2_epoch", epoch);
      std::vector<std::size_t> order = pool;
      rng.shuffle(std::span(order));
      double loss_sum = 0.0;
      for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
        const auto end = std::min(n, begin + config.batch_size);
        std::vector<const TokenDoc*> docs;
        std::vector<double> y;
        for (std::size_t i = begin; i < end; ++i) {
          docs.push_back(&train.docs[order[i]]);
          y.push_back(train.targets[order[i]]);
        }
        Graph g;
        const auto out = model.forward(g, pad_left(docs), {&rng, &config.dropout, head_p});
        const auto loss = task_loss(g, head, out, y, config.label_smoothing);
        loss_sum += g.value(loss)[0];
        zero_grads(all);
        g.backward(loss);
        const auto sv = nn::one_cycle(step++, schedule);
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
          nn::adamw_step<float>(groups[gi], {.lr = lrs[gi],
                                             .beta1 = sv.momentum,
                                             .beta2 = config.beta2,
                                             .weight_decay = config.weight_decay},
                                sv.lr);
        }
      }
      consider(2, epoch, loss_sum / static_cast<double>(batches));
    }
  }

  if (have_best) {
    model = std::move(best);
  } else {
    result.best_metric = evaluate();
  }
  return result;
}

}  // namespace humor::models

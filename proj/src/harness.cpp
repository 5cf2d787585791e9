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

#include "humor/harness/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "humor/error.hpp"
#include "humor/io.hpp"
#include "humor/rng.hpp"

namespace humor::harness {

using models::TaskKind;

// --- Folds ------------------------------------------------------------------

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(n_folds, 0);
  for (const auto f : assignment) ++sizes[f];
  return sizes;
}

std::vector<std::size_t> FoldPlan::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::InvalidFoldCount, "k=" + std::to_string(k) + " (need k >= 2)");
  if (k > n) {
    throw Error(ErrorKind::InvalidFoldCount,
                "k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " examples");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = Rng::derived(seed, "kfold_split");
  rng.shuffle(std::span(order));
  FoldPlan plan;
  plan.n_folds = k;
  plan.seed = seed;
  plan.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) plan.assignment[order[i]] = i % k;
  return plan;
}

// --- Prediction helpers -----------------------------------------------------

std::vector<double> ensemble_mean(std::span<const std::vector<double>> members) {
  if (members.empty()) return {};
  std::vector<double> out(members.front().size(), 0.0);
  for (const auto& m : members) {
    if (m.size() != out.size()) throw Error(ErrorKind::ShapeMismatch, "ensemble members differ in size");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[i];
  }
  for (auto& v : out) v /= static_cast<double>(members.size());
  return out;
}

std::vector<int> threshold_labels(std::span<const double> probability_rows) {
  std::vector<int> out(probability_rows.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = probability_rows[2 * i + 1] >= 0.5 ? 1 : 0;
  return out;
}

std::vector<double> clip_scores(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = std::clamp(scores[i], 0.0, 5.0);
  return out;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& job) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = 0;
        {
          std::lock_guard lock(mu);
          if (failure || next >= count) return;
          i = next++;
        }
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// --- Cross-validation -------------------------------------------------------

namespace {

/// Inputs shared read-only by every fold job.
struct Prepared {
  std::vector<models::TokenDoc> docs;
  std::vector<models::TokenDoc> test_docs;
  std::vector<baseline::Doc> words;
  std::vector<baseline::Doc> test_words;
};

Prepared prepare(const CvInput& input, const CvSettings& settings, const NeuralAssets& assets) {
  if (input.texts.size() != input.targets.size()) {
    throw Error(ErrorKind::ShapeMismatch, "texts and targets differ in length");
  }
  Prepared p;
  if (settings.method == Method::Neural) {
    if (assets.lm == nullptr || assets.bpe == nullptr) {
      throw Error(ErrorKind::MissingCheckpoint, "neural cross-validation needs a tokenizer and LM");
    }
    if (assets.bpe->size() > assets.lm->config().vocab_size) {
      throw Error(ErrorKind::ConfigInvalid, "tokenizer has more ids than the LM vocabulary");
    }
    p.docs = models::encode_documents(*assets.bpe, input.texts);
    p.test_docs = models::encode_documents(*assets.bpe, input.test_texts);
  } else {
    if (settings.task != TaskKind::Classify) {
      throw Error(ErrorKind::ConfigInvalid, "the NBSVM baseline only classifies");
    }
    for (const auto& t : input.texts) p.words.push_back(baseline::baseline_tokens(t));
    for (const auto& t : input.test_texts) p.test_words.push_back(baseline::baseline_tokens(t));
  }
  return p;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& items, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(items[i]);
  return out;
}

void score_fold(FoldResult& r, TaskKind task, std::span<const double> truth) {
  if (task == TaskKind::Classify) {
    std::vector<int> t(truth.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = truth[i] >= 0.5 ? 1 : 0;
    r.metrics = compute_metrics(threshold_labels(r.valid_predictions), t);
  } else {
    r.mse = compute_mse(clip_scores(r.valid_predictions), truth);
    r.metrics.rmse = std::sqrt(r.mse);
  }
}

FoldResult train_fold(const CvInput& input, const Prepared& prep, const CvSettings& settings,
                      const NeuralAssets& assets, const FoldPlan& plan, std::size_t fold,
                      std::uint64_t seed) {
  FoldResult r;
  r.fold = fold;
  r.valid_indices = plan.members(fold);
  const auto train_idx = plan.complement(fold);
  const auto valid_truth = gather(input.targets, r.valid_indices);

  if (settings.method == Method::Neural) {
    auto model = models::HeadModel::build(*assets.lm, settings.head,
                                          derive_seed(seed, "fold_head_init", fold));
    const models::TaskData train{gather(prep.docs, train_idx), gather(input.targets, train_idx)};
    const models::TaskData valid{gather(prep.docs, r.valid_indices), valid_truth};
    models::train_head_then_unfreeze(model, train, valid, settings.train,
                                     derive_seed(seed, "fold_train", fold));
    r.valid_predictions = model.predict(valid.docs);
    r.test_predictions = model.predict(prep.test_docs);
  } else {
    std::vector<int> labels;
    for (const auto i : train_idx) labels.push_back(input.targets[i] >= 0.5 ? 1 : 0);
    const auto train_words = gather(prep.words, train_idx);
    const auto m = baseline::train_nbsvm(train_words, labels, settings.nbsvm);
    const auto emit = [&](const std::vector<baseline::Doc>& docs, std::vector<double>& out) {
      for (const auto& d : docs) {
        const double p = baseline::nbsvm_predict(m, d);
        out.push_back(1.0 - p);
        out.push_back(p);
      }
    };
    emit(gather(prep.words, r.valid_indices), r.valid_predictions);
    emit(prep.test_words, r.test_predictions);
  }
  score_fold(r, settings.task, valid_truth);
  return r;
}

SeedResult assemble(const CvInput& input, const CvSettings& settings, std::uint64_t seed,
                    std::vector<FoldResult> folds) {
  SeedResult s;
  s.seed = seed;
  s.task = settings.task;
  const auto w = s.width();
  s.oof_predictions.assign(input.texts.size() * w, 0.0);
  std::vector<std::vector<double>> test_members;
  for (const auto& f : folds) {
    for (std::size_t j = 0; j < f.valid_indices.size(); ++j) {
      std::copy_n(f.valid_predictions.begin() + static_cast<std::ptrdiff_t>(j * w), w,
                  s.oof_predictions.begin() + static_cast<std::ptrdiff_t>(f.valid_indices[j] * w));
    }
    test_members.push_back(f.test_predictions);
  }
  s.test_predictions = ensemble_mean(test_members);
  if (s.task == TaskKind::Regress) s.test_predictions = clip_scores(s.test_predictions);
  FoldResult whole;
  whole.valid_predictions = s.oof_predictions;
  score_fold(whole, s.task, input.targets);
  s.ensemble_report = whole.metrics;
  s.ensemble_metric = s.task == TaskKind::Classify ? whole.metrics.f1 : whole.mse;
  s.folds = std::move(folds);
  return s;
}

}  // namespace

SeedResult run_cv(const CvInput& input, const CvSettings& settings, const NeuralAssets& assets,
                  std::uint64_t seed) {
  return seed_search(input, settings, assets, std::span(&seed, 1)).results.front();
}

std::size_t select_best(std::span<const SeedResult> results) {
  if (results.empty()) throw Error(ErrorKind::ConfigInvalid, "no seed results to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    const auto& a = results[i];
    const auto& b = results[best];
    const bool better = a.task == TaskKind::Classify ? a.ensemble_metric > b.ensemble_metric
                                                     : a.ensemble_metric < b.ensemble_metric;
    const bool tie = a.ensemble_metric == b.ensemble_metric;
    if (better || (tie && a.seed < b.seed)) best = i;
  }
  return best;
}

SeedSearchResult seed_search(const CvInput& input, const CvSettings& settings,
                             const NeuralAssets& assets, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw Error(ErrorKind::ConfigInvalid, "seed search needs at least one seed");
  const auto prep = prepare(input, settings, assets);
  std::vector<FoldPlan> plans;
  for (const auto s : seeds) plans.push_back(kfold_split(input.texts.size(), settings.folds, s));
  const auto k = settings.folds;
  std::vector<FoldResult> folds(seeds.size() * k);
  parallel_for(folds.size(), settings.threads, [&](std::size_t job) {
    const auto si = job / k;
    folds[job] = train_fold(input, prep, settings, assets, plans[si], job % k, seeds[si]);
  });

  SeedSearchResult out;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    std::vector<FoldResult> mine(std::make_move_iterator(folds.begin() + static_cast<std::ptrdiff_t>(si * k)),
                                 std::make_move_iterator(folds.begin() + static_cast<std::ptrdiff_t>((si + 1) * k)));
    out.results.push_back(assemble(input, settings, seeds[si], std::move(mine)));
  }
  out.best = select_best(out.results);
  out.min_metric = out.max_metric = out.results.front().ensemble_metric;
  double sum = 0.0;
  for (const auto& r : out.results) {
    out.min_metric = std::min(out.min_metric, r.ensemble_metric);
    out.max_metric = std::max(out.max_metric, r.ensemble_metric);
    sum += r.ensemble_metric;
  }
  out.mean_metric = sum / static_cast<double>(out.results.size());
  return out;
}

// --- Persistence ------------------------------------------------------------

namespace {

nlohmann::ordered_json report_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  if (m.rmse) j["rmse"] = *m.rmse;
  return j;
}

const char* task_name(TaskKind t) { return t == TaskKind::Classify ? "classify" : "regress"; }

}  // namespace

std::string results_jsonl(std::span<const SeedResult> results,
                          const std::optional<std::string>& provenance) {
  std::string out;
  for (const auto& s : results) {
    for (const auto& f : s.folds) {
      nlohmann::ordered_json j;
      j["schema"] = "v1";
      j["record"] = "fold";
      j["seed"] = s.seed;
      j["fold"] = f.fold;
      j["task"] = task_name(s.task);
      j["n_valid"] = f.valid_indices.size();
      if (s.task == TaskKind::Classify) {
        j["metrics"] = report_json(f.metrics);
      } else {
        j["mse"] = f.mse;
      }
      out += j.dump() + "\n";
    }
    nlohmann::ordered_json j;
    j["schema"] = "v1";
    j["record"] = "seed";
    j["seed"] = s.seed;
    j["task"] = task_name(s.task);
    j["metric"] = s.task == TaskKind::Classify ? "f1" : "mse";
    j["ensemble_metric"] = s.ensemble_metric;
    j["ensemble_report"] = report_json(s.ensemble_report);
    j["oof_predictions"] = s.oof_predictions;
    j["test_predictions"] = s.test_predictions;
    if (provenance) j["provenance"] = *provenance;
    out += j.dump() + "\n";
  }
  return out;
}

void write_results(const std::filesystem::path& path, std::span<const SeedResult> results,
                   const std::optional<std::string>& provenance) {
  write_file(path, results_jsonl(results, provenance));
}

std::vector<std::pair<std::uint64_t, double>> read_seed_metrics(const std::filesystem::path& path) {
  const auto text = read_file(path);
  std::vector<std::pair<std::uint64_t, double>> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.at("schema") != "v1") {
        throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": unknown schema");
      }
      if (j.at("record") == "seed") {
        out.emplace_back(j.at("seed").get<std::uint64_t>(), j.at("ensemble_metric").get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw Error(ErrorKind::ConfigInvalid, "histogram needs at least one bin");
  if (values.empty()) throw Error(ErrorKind::EmptyCorpus, "no values to histogram");
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (hi == lo) {
    lo -= 0.5e-6;
    hi += 0.5e-6;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].low = lo + width * static_cast<double>(b);
    out[b].high = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (const double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    b = std::min(b, bins - 1);
    // Guard the floating-point edge so that bins stay half-open.
    while (b > 0 && v < out[b].low) --b;
    while (b + 1 < bins && v >= out[b + 1].low) ++b;
    ++out[b].count;
  }
  return out;
}

std::string histogram_csv(std::span<const HistogramBin> bins) {
  std::string out = "bin_low,bin_high,count\n";
  char buf[128];
  for (const auto& b : bins) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%zu\n", b.low, b.high, b.count);
    out += buf;
  }
  return out;
}

void emit_histogram(std::span<const double> values, std::size_t bins,
                    const std::filesystem::path& path) {
  write_file(path, histogram_csv(histogram(values, bins)));
}

}  // namespace humor::harness

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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "humor/baseline.hpp"
#include "humor/harness/metrics.hpp"
#include "humor/models.hpp"
#include "humor/subword.hpp"

namespace humor::harness {

struct FoldPlan {
  std::size_t n_folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // example -> fold

  std::vector<std::size_t> fold_sizes() const;
  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
};

/// Seeded shuffle of 0..n-1, then position i goes to fold i mod k.
/// Throws InvalidFoldCount unless 2 <= k <= n.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

enum class Method { Neural, Nbsvm };

struct CvSettings {
  std::size_t folds = 5;
  models::TaskKind task = models::TaskKind::Classify;
  Method method = Method::Neural;
  models::HeadConfig head;
  models::HeadTrainConfig train;
  baseline::NbsvmConfig nbsvm;
  std::size_t threads = 1;
};

/// Pretrained pieces the neural path needs.
struct NeuralAssets {
  const subword::BpeModel* bpe = nullptr;
  const models::LanguageModel* lm = nullptr;
};

struct CvInput {
  std::vector<std::string> texts;
  std::vector<double> targets;  // 0/1 labels or funniness scores
  std::vector<std::string> test_texts;
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::size_t> valid_indices;
  std::vector<double> valid_predictions;  // width() values per example
  std::vector<double> test_predictions;
  MetricsReport metrics;  // classification
  double mse = 0.0;       // regression
};

struct SeedResult {
  std::uint64_t seed = 0;
  models::TaskKind task = models::TaskKind::Classify;
  std::vector<FoldResult> folds;
  std::vector<double> oof_predictions;   // per example: (p0, p1) or one score
  std::vector<double> test_predictions;  // mean over fold models
  MetricsReport ensemble_report;
  double ensemble_metric = 0.0;  // F1 (classify) or MSE (regress)

  std::size_t width() const { return task == models::TaskKind::Classify ? 2 : 1; }
};

/// Element-wise mean of equally long vectors.
std::vector<double> ensemble_mean(std::span<const std::vector<double>> members);

/// Positive when the positive-class probability is at least 0.5.
std::vector<int> threshold_labels(std::span<const double> probability_rows);
/// Clamps scores to [0, 5].
std::vector<double> clip_scores(std::span<const double> scores);

/// Trains one model per fold on the other folds, predicts the held-out fold
/// and the test texts, and scores the assembled out-of-fold predictions.
/// The neural path throws MissingCheckpoint without assets.
SeedResult run_cv(const CvInput& input, const CvSettings& settings, const NeuralAssets& assets,
                  std::uint64_t seed);

struct SeedSearchResult {
  std::vector<SeedResult> results;  // in the order of the requested seeds
  std::size_t best = 0;
  double min_metric = 0.0;
  double max_metric = 0.0;
  double mean_metric = 0.0;
};

/// Index of the best result: highest F1 or lowest MSE; ties go to the lower seed.
std::size_t select_best(std::span<const SeedResult> results);

/// run_cv for every seed; (seed, fold) jobs may run on several threads.
SeedSearchResult seed_search(const CvInput& input, const CvSettings& settings,
                             const NeuralAssets& assets, std::span<const std::uint64_t> seeds);

/// Runs `count` jobs on up to `threads` workers; the first failure is rethrown.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& job);

// Persistence ---------------------------------------------------------------

/// JSON lines, schema "v1": one record per (seed, fold), then one summary per seed.
std::string results_jsonl(std::span<const SeedResult> results,
                          const std::optional<std::string>& provenance = std::nullopt);
void write_results(const std::filesystem::path& path, std::span<const SeedResult> results,
                   const std::optional<std::string>& provenance = std::nullopt);
/// Reads the per-seed summaries back (seed and ensemble metric).
std::vector<std::pair<std::uint64_t, double>> read_seed_metrics(const std::filesystem::path& path);

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the last bin is closed. A degenerate
/// range is widened by 0.5e-6 on each side.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);
std::string histogram_csv(std::span<const HistogramBin> bins);
void emit_histogram(std::span<const double> values, std::size_t bins,
                    const std::filesystem::path& path);

}  // namespace humor::harness

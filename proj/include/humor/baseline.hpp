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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace humor::baseline {

using Doc = std::vector<std::string>;
/// Sorted, de-duplicated column indices of the 1-entries of a binary row.
using BinaryRow = std::vector<std::uint32_t>;

/// Unigrams followed by adjacent-pair bigrams (joined with a space).
std::vector<std::string> doc_terms(const Doc& doc);

class Vocabulary {
 public:
  /// Every term of every document, columns in lexicographic order.
  static Vocabulary build(std::span<const Doc> docs);
  static Vocabulary from_terms(std::vector<std::string> terms);

  std::size_t size() const { return terms_.size(); }
  const std::string& term(std::size_t column) const { return terms_[column]; }
  /// Column of `term`, or -1 when absent.
  std::int64_t column(std::string_view term) const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

BinaryRow featurize(const Doc& doc, const Vocabulary& vocab);
std::vector<BinaryRow> featurize(std::span<const Doc> docs, const Vocabulary& vocab);
std::vector<std::vector<double>> to_dense(std::span<const BinaryRow> rows, std::size_t columns);

/// r = log((p / |p|_1) / (q / |q|_1)) with p = alpha + sum of positive rows and
/// q = alpha + sum of negative rows.
std::vector<double> log_count_ratio(std::span<const BinaryRow> rows, std::span<const int> labels,
                                    std::size_t columns, double alpha);

struct NbsvmConfig {
  double alpha = 1.0;
  double beta = 0.25;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::size_t epochs = 200;

  void validate() const;
};

struct NbsvmModel {
  Vocabulary vocab;
  std::vector<double> r;
  std::vector<double> w;  // interpolated weights
  double b = 0.0;
  double beta = 0.25;
  double alpha = 1.0;
};

/// Full-batch gradient descent on the L2-penalised logistic loss over x * r,
/// then w' = beta * w + (1 - beta) * |w|_1 / |V|. Throws DegenerateLabels
/// when only one class is present.
NbsvmModel train_nbsvm(std::span<const Doc> docs, std::span<const int> labels,
                       const NbsvmConfig& config);

/// sigma(w' . (x * r) + b)
double nbsvm_predict(const NbsvmModel& model, const Doc& doc);

/// Cleans the raw text and splits it on spaces.
Doc baseline_tokens(std::string_view raw_text);

}  // namespace humor::baseline

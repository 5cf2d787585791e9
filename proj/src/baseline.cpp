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

#include "humor/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "humor/error.hpp"
#include "humor/textclean.hpp"

namespace humor::baseline {

namespace {

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double score(const BinaryRow& row, std::span<const double> r, std::span<const double> w, double b) {
  double s = b;
  for (const auto j : row) s += w[j] * r[j];
  return s;
}

}  // namespace

std::vector<std::string> doc_terms(const Doc& doc) {
  std::vector<std::string> terms(doc.begin(), doc.end());
  for (std::size_t i = 0; i + 1 < doc.size(); ++i) terms.push_back(doc[i] + " " + doc[i + 1]);
  return terms;
}

Vocabulary Vocabulary::build(std::span<const Doc> docs) {
  std::vector<std::string> terms;
  for (const auto& d : docs) {
    auto t = doc_terms(d);
    terms.insert(terms.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return from_terms(std::move(terms));
}

Vocabulary Vocabulary::from_terms(std::vector<std::string> terms) {
  Vocabulary v;
  v.terms_ = std::move(terms);
  for (std::size_t i = 0; i < v.terms_.size(); ++i) {
    v.index_.emplace(v.terms_[i], static_cast<std::uint32_t>(i));
  }
  return v;
}

std::int64_t Vocabulary::column(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

BinaryRow featurize(const Doc& doc, const Vocabulary& vocab) {
  BinaryRow row;
  for (const auto& t : doc_terms(doc)) {
    const auto c = vocab.column(t);
    if (c >= 0) row.push_back(static_cast<std::uint32_t>(c));
  }
  std::sort(row.begin(), row.end());
  row.erase(std::unique(row.begin(), row.end()), row.end());
  return row;
}

std::vector<BinaryRow> featurize(std::span<const Doc> docs, const Vocabulary& vocab) {
  std::vector<BinaryRow> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(featurize(d, vocab));
  return rows;
}

std::vector<std::vector<double>> to_dense(std::span<const BinaryRow> rows, std::size_t columns) {
  std::vector<std::vector<double>> out(rows.size(), std::vector<double>(columns, 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto j : rows[i]) out[i][j] = 1.0;
  }
  return out;
}

std::vector<double> log_count_ratio(std::span<const BinaryRow> rows, std::span<const int> labels,
                                    std::size_t columns, double alpha) {
  if (rows.size() != labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "rows and labels differ in length");
  }
  std::vector<double> p(columns, alpha);
  std::vector<double> q(columns, alpha);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& target = labels[i] == 1 ? p : q;
    for (const auto j : rows[i]) target[j] += 1.0;
  }
  double p_norm = 0.0;
  double q_norm = 0.0;
  for (std::size_t j = 0; j < columns; ++j) {
    p_norm += std::abs(p[j]);
    q_norm += std::abs(q[j]);
  }
  std::vector<double> r(columns);
  for (std::size_t j = 0; j < columns; ++j) r[j] = std::log(p[j] / p_norm) - std::log(q[j] / q_norm);
  return r;
}

void NbsvmConfig::validate() const {
  if (!(alpha > 0.0)) throw Error(ErrorKind::ConfigInvalid, "nbsvm alpha must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorKind::ConfigInvalid, "nbsvm beta must lie in [0, 1]");
  }
  if (!(learning_rate > 0.0) || !(l2 >= 0.0)) {
    throw Error(ErrorKind::ConfigInvalid, "nbsvm learning rate must be positive and l2 >= 0");
  }
}

NbsvmModel train_nbsvm(std::span<const Doc> docs, std::span<const int> labels,
                       const NbsvmConfig& config) {
  config.validate();
  if (docs.size() != labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "docs and labels differ in length");
  }
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
    throw Error(ErrorKind::DegenerateLabels, "training labels contain a single class");
  }
  NbsvmModel m;
  m.vocab = Vocabulary::build(docs);
  m.beta = config.beta;
  m.alpha = config.alpha;
  const auto rows = featurize(docs, m.vocab);
  const auto v = m.vocab.size();
  m.r = log_count_ratio(rows, labels, v, config.alpha);

  std::vector<double> w(v, 0.0);
  double b = 0.0;
  const double n = static_cast<double>(rows.size());
  std::vector<double> grad(v);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double err = sigmoid(score(rows[i], m.r, w, b)) - (labels[i] == 1 ? 1.0 : 0.0);
      for (const auto j : rows[i]) grad[j] += err * m.r[j];
      grad_b += err;
    }
    for (std::size_t j = 0; j < v; ++j) {
      w[j] -= config.learning_rate * (grad[j] / n + config.l2 * w[j]);
    }
    b -= config.learning_rate * grad_b / n;
  }
  double l1 = 0.0;
  for (const double x : w) l1 += std::abs(x);
  const double mean_abs = v == 0 ? 0.0 : l1 / static_cast<double>(v);
  m.w.resize(v);
  for (std::size_t j = 0; j < v; ++j) m.w[j] = config.beta * w[j] + (1.0 - config.beta) * mean_abs;
  m.b = b;
  return m;
}

double nbsvm_predict(const NbsvmModel& model, const Doc& doc) {
  return sigmoid(score(featurize(doc, model.vocab), model.r, model.w, model.b));
}

Doc baseline_tokens(std::string_view raw_text) {
  const auto cleaned = textclean::clean(raw_text).text;
  Doc out;
  std::size_t pos = 0;
  while (pos < cleaned.size()) {
    auto end = cleaned.find(' ', pos);
    if (end == std::string::npos) end = cleaned.size();
    if (end > pos) out.emplace_back(cleaned.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

}  // namespace humor::baseline

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

#include "humor/harness/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "humor/error.hpp"

namespace humor::harness {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorKind::ShapeMismatch,
                "prediction count " + std::to_string(a) + " vs truth count " + std::to_string(b));
  }
}

}  // namespace

std::string MetricsReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "accuracy=%.4f precision=%.4f recall=%.4f f1=%.4f tp=%zu fp=%zu tn=%zu fn=%zu",
                accuracy, precision, recall, f1, tp, fp, tn, fn);
  std::string out(buf);
  if (rmse) {
    std::snprintf(buf, sizeof(buf), " rmse=%.4f", *rmse);
    out += buf;
  }
  return out;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

MetricsReport compute_metrics(std::span<const int> predicted, std::span<const int> truth) {
  check_lengths(predicted.size(), truth.size());
  MetricsReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == 1;
    const bool t = truth[i] == 1;
    if (p && t) ++r.tp;
    else if (p) ++r.fp;
    else if (t) ++r.fn;
    else ++r.tn;
  }
  const auto n = truth.size();
  r.accuracy = n == 0 ? 0.0 : static_cast<double>(r.tp + r.tn) / static_cast<double>(n);
  if (r.tp + r.fp > 0) r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  if (r.tp + r.fn > 0) r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

double compute_mse(std::span<const double> predicted, std::span<const double> truth) {
  check_lengths(predicted.size(), truth.size());
  if (truth.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = predicted[i] - truth[i];
    sum += d * d;
  }
  return sum / static_cast<double>(truth.size());
}

double compute_rmse(std::span<const double> predicted, std::span<const double> truth) {
  return std::sqrt(compute_mse(predicted, truth));
}

}  // namespace humor::harness

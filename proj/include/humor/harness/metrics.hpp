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
#include <optional>
#include <span>
#include <string>

namespace humor::harness {

/// Binary classification summary; the positive class is label 1.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> rmse;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  /// One line of `key=value` pairs.
  std::string summary() const;
};

/// Harmonic mean 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall);

/// Throws Error(ShapeMismatch) when the spans differ in length.
MetricsReport compute_metrics(std::span<const int> predicted, std::span<const int> truth);

double compute_mse(std::span<const double> predicted, std::span<const double> truth);
double compute_rmse(std::span<const double> predicted, std::span<const double> truth);

}  // namespace humor::harness

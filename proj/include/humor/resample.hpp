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
#include <vector>

namespace humor::resample {

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  std::uint64_t seed = 0;
};

/// Where a synthetic point came from: base + lambda * (neighbor - base).
struct SyntheticOrigin {
  std::size_t base = 0;      // index into the input points
  std::size_t neighbor = 0;  // index into the input points
  double lambda = 0.0;
};

struct SmoteResult {
  std::vector<std::vector<double>> points;  // originals first, then synthetics
  std::vector<int> labels;
  std::vector<SyntheticOrigin> origins;  // one per synthetic point
};

/// Raises the minority class to the majority count by interpolating between
/// minority points (taken round-robin) and one of their k nearest minority
/// neighbours. Distance ties go to the lower index. Labels are 0/1.
/// Throws SingleClass when a class is empty and ClassTooSmall when the
/// minority has no more than k points.
SmoteResult smote(const std::vector<std::vector<double>>& points, const std::vector<int>& labels,
                  const SmoteConfig& config);

/// Indices of the k nearest points of `candidates` to candidates[self]
/// (excluding self), nearest first, ties by lower index.
std::vector<std::size_t> nearest_neighbors(const std::vector<std::vector<double>>& points,
                                           const std::vector<std::size_t>& candidates,
                                           std::size_t self, std::size_t k);

}  // namespace humor::resample

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

#include "humor/resample.hpp"

#include <algorithm>
#include <utility>

#include "humor/error.hpp"
#include "humor/rng.hpp"

namespace humor::resample {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

std::vector<std::size_t> nearest_neighbors(const std::vector<std::vector<double>>& points,
                                           const std::vector<std::size_t>& candidates,
                                           std::size_t self, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(candidates.size());
  for (const auto c : candidates) {
    if (c == self) continue;
    ranked.emplace_back(squared_distance(points[self], points[c]), c);
  }
  k = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = ranked[i].second;
  return out;
}

SmoteResult smote(const std::vector<std::vector<double>>& points, const std::vector<int>& labels,
                  const SmoteConfig& config) {
  if (points.size() != labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "points and labels differ in length");
  }
  if (config.k_neighbors == 0) throw Error(ErrorKind::ConfigInvalid, "smote.k must be >= 1");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == 1 ? 1 : 0].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw Error(ErrorKind::SingleClass, "both classes need at least one example");
  }
  const int minority = by_class[1].size() < by_class[0].size() ? 1 : 0;
  const auto& members = by_class[minority];
  const auto needed = by_class[1 - minority].size() - members.size();
  if (needed > 0 && members.size() <= config.k_neighbors) {
    throw Error(ErrorKind::ClassTooSmall, "minority class has " + std::to_string(members.size()) +
                                              " points for k=" +
                                              std::to_string(config.k_neighbors));
  }

  SmoteResult out{points, labels, {}};
  std::vector<std::vector<std::size_t>> neighbors(members.size());
  auto rng = Rng::derived(config.seed, "smote");
  for (std::size_t j = 0; j < needed; ++j) {
    const auto slot = j % members.size();
    if (neighbors[slot].empty()) {
      neighbors[slot] = nearest_neighbors(points, members, members[slot], config.k_neighbors);
    }
    const auto base = members[slot];
    const auto neighbor = neighbors[slot][static_cast<std::size_t>(rng.below(neighbors[slot].size()))];
    const double lambda = rng.uniform01();
    std::vector<double> p(points[base].size());
    for (std::size_t d = 0; d < p.size(); ++d) {
      p[d] = points[base][d] + lambda * (points[neighbor][d] - points[base][d]);
    }
    out.points.push_back(std::move(p));
    out.labels.push_back(minority);
    out.origins.push_back({base, neighbor, lambda});
  }
  return out;
}

}  // namespace humor::resample

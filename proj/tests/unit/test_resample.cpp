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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "humor/error.hpp"
#include "humor/resample.hpp"
#include "humor/rng.hpp"

using namespace humor;
using namespace humor::resample;

namespace {

using Points = std::vector<std::vector<double>>;

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Brute force: all minority points whose distance to `self` is at most the
// k-th smallest distance (a superset when there are ties).
std::vector<std::size_t> knn_oracle(const Points& pts, const std::vector<std::size_t>& minority,
                                    std::size_t self, std::size_t k) {
  std::vector<double> d;
  for (auto m : minority)
    if (m != self) d.push_back(sqdist(pts[m], pts[self]));
  std::sort(d.begin(), d.end());
  const double kth = d[k - 1];
  std::vector<std::size_t> out;
  for (auto m : minority)
    if (m != self && sqdist(pts[m], pts[self]) <= kth) out.push_back(m);
  return out;
}

bool on_segment(const std::vector<double>& p, const std::vector<double>& a,
                const std::vector<double>& b, double lambda) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p[i] - (a[i] + lambda * (b[i] - a[i]))) > 1e-12) return false;
  }
  return lambda >= 0.0 && lambda < 1.0;
}

void check_result(const Points& pts, const std::vector<int>& labels, const SmoteResult& r,
                  std::size_t k) {
  const int minority =
      std::count(labels.begin(), labels.end(), 1) < std::count(labels.begin(), labels.end(), 0) ? 1 : 0;
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == minority) members.push_back(i);

  CHECK(std::count(r.labels.begin(), r.labels.end(), 0) == std::count(r.labels.begin(), r.labels.end(), 1));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(r.points[i] == pts[i]);
    CHECK(r.labels[i] == labels[i]);
  }
  REQUIRE(r.origins.size() == r.points.size() - pts.size());

  std::vector<double> lo(pts[0].size(), 1e300), hi(pts[0].size(), -1e300);
  for (auto m : members) {
    for (std::size_t d = 0; d < lo.size(); ++d) {
      lo[d] = std::min(lo[d], pts[m][d]);
      hi[d] = std::max(hi[d], pts[m][d]);
    }
  }
  for (std::size_t s = 0; s < r.origins.size(); ++s) {
    const auto& o = r.origins[s];
    const auto& p = r.points[pts.size() + s];
    CHECK(r.labels[pts.size() + s] == minority);
    CHECK(labels[o.base] == minority);
    CHECK(labels[o.neighbor] == minority);
    const auto allowed = knn_oracle(pts, members, o.base, k);
    CHECK(std::find(allowed.begin(), allowed.end(), o.neighbor) != allowed.end());
    CHECK(on_segment(p, pts[o.base], pts[o.neighbor], o.lambda));
    for (std::size_t d = 0; d < lo.size(); ++d) {
      CHECK(p[d] >= lo[d] - 1e-12);
      CHECK(p[d] <= hi[d] + 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("three-point minority with two neighbours") {
  const Points pts = {{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}, {5, 6}, {6, 6}, {7, 7}, {8, 8}};
  const std::vector<int> labels = {1, 1, 1, 0, 0, 0, 0, 0, 0};
  const auto r = smote(pts, labels, {2, 7});
  CHECK(r.points.size() == 12);
  CHECK(r.origins.size() == 3);
  // Round-robin bases.
  CHECK(r.origins[0].base == 0);
  CHECK(r.origins[1].base == 1);
  CHECK(r.origins[2].base == 2);
  check_result(pts, labels, r, 2);
}

TEST_CASE("segment endpoints and midpoint") {
  const std::vector<double> x = {0, 0};
  const std::vector<double> n = {1, 1};
  CHECK(on_segment(x, x, n, 0.0));
  CHECK(on_segment({0.5, 0.5}, x, n, 0.5));
  // Two minority points: each is the other's sole neighbour.
  const Points pts = {{0, 0}, {1, 1}, {9, 9}, {9, 8}, {8, 9}, {8, 8}};
  const std::vector<int> labels = {1, 1, 0, 0, 0, 0};
  const auto r = smote(pts, labels, {1, 3});
  for (std::size_t s = 0; s < r.origins.size(); ++s) {
    const auto& o = r.origins[s];
    CHECK(o.neighbor == 1 - o.base);
    const auto& p = r.points[6 + s];
    CHECK(p[0] == doctest::Approx(o.base == 0 ? o.lambda : 1 - o.lambda).epsilon(1e-12));
    CHECK(p[0] == p[1]);
  }
}

TEST_CASE("random data against the brute-force neighbour oracle") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(trial);
    Points pts;
    std::vector<int> labels;
    const auto n_min = 6 + rng.below(10);
    const auto n_maj = n_min + 1 + rng.below(30);
    for (std::size_t i = 0; i < n_min + n_maj; ++i) {
      std::vector<double> p(4);
      for (auto& v : p) v = rng.uniform(-3, 3);
      pts.push_back(p);
      labels.push_back(i < n_min ? (trial % 2 == 0 ? 1 : 0) : (trial % 2 == 0 ? 0 : 1));
    }
    const auto r = smote(pts, labels, {5, trial});
    check_result(pts, labels, r, 5);
  }
}

TEST_CASE("majority points never influence synthetics") {
  Points pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {3, 3}, {4, 3}, {3, 4}, {4, 4}, {5, 5}, {6, 6}};
  const std::vector<int> labels = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const auto a = smote(pts, labels, {2, 11});
  for (std::size_t i = 4; i < pts.size(); ++i) pts[i][0] += 100.0;
  const auto b = smote(pts, labels, {2, 11});
  for (std::size_t s = 0; s < a.origins.size(); ++s) CHECK(a.points[10 + s] == b.points[10 + s]);
}

TEST_CASE("deterministic per seed") {
  const Points pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {5, 5}, {6, 5}, {5, 6}, {6, 6}, {7, 7}, {8, 8}, {9, 9}};
  const std::vector<int> labels = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const auto a = smote(pts, labels, {2, 5});
  const auto b = smote(pts, labels, {2, 5});
  const auto c = smote(pts, labels, {2, 6});
  CHECK(a.points == b.points);
  CHECK(a.points != c.points);
}

TEST_CASE("errors and balanced input") {
  const Points pts = {{0}, {1}, {2}, {3}};
  try {
    smote(pts, {1, 1, 1, 1}, {});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingleClass);
  }
  try {
    smote(pts, {1, 0, 0, 0}, {1, 0});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ClassTooSmall);
  }
  const auto same = smote(pts, {1, 0, 1, 0}, {5, 0});
  CHECK(same.points == pts);
  CHECK(same.origins.empty());
}

TEST_CASE("neighbour ties go to the lower index") {
  const Points pts = {{0}, {1}, {-1}, {2}};
  const auto nn = nearest_neighbors(pts, {0, 1, 2, 3}, 0, 2);
  CHECK(nn == std::vector<std::size_t>{1, 2});
}

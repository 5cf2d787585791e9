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

// Finite-difference gradient suite shared by the unit tests and the
// acceptance runner. Every op and loss gets `trials` random instantiations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "humor/nn/gradcheck.hpp"
#include "humor/nn/layers.hpp"

namespace humor::testing {

using G = nn::Graph<double>;
using V = G::Var;
using Inputs = std::vector<nn::ParamTensor<double>>;

struct GradCase {
  std::string name;
  // Fills `inputs` and returns the op for one random trial.
  std::function<nn::GradCheckOp(Rng&, Inputs&)> make;
};

struct GradCaseResult {
  std::string name;
  int trials = 0;
  double worst = 0.0;
};

inline Inputs draw(Rng& rng, std::vector<nn::Shape> shapes, double lo = -1.0, double hi = 1.0) {
  return nn::random_inputs(shapes, rng, lo, hi);
}

// Pushes entries at least `gap` away from zero so the relu kink is never crossed.
inline void away_from_zero(nn::ParamTensor<double>& t, double gap) {
  for (auto& v : t.values) {
    if (std::abs(v) < gap) v = v < 0 ? v - gap : v + gap;
  }
}

// Spreads each column of a [steps*batch, d] tensor so that no two real steps
// of one sequence are within `gap` of each other, keeping max-pool argmaxes stable.
inline void separate_columns(nn::ParamTensor<double>& t, std::size_t steps, std::size_t batch,
                             std::size_t d, double gap) {
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<std::pair<double, std::size_t>> col;
      for (std::size_t s = 0; s < steps; ++s) col.push_back({t.values[(s * batch + b) * d + j], s});
      std::sort(col.begin(), col.end());
      for (std::size_t k = 1; k < col.size(); ++k) {
        if (col[k].first - col[k - 1].first < gap) col[k].first = col[k - 1].first + gap;
      }
      for (const auto& [v, s] : col) t.values[(s * batch + b) * d + j] = v;
    }
  }
}

inline std::vector<GradCase> grad_cases() {
  std::vector<GradCase> cases;

  cases.push_back({"linear", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{4, 3}, {5, 3}, {5}});
                     return [](G& g, std::span<const V> v) { return g.linear(v[0], v[1], v[2]); };
                   }});
  cases.push_back({"matmul_nt", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{3, 4}, {2, 4}});
                     return [](G& g, std::span<const V> v) { return g.matmul_nt(v[0], v[1]); };
                   }});
  cases.push_back({"add_mul", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{3, 4}, {3, 4}});
                     return [](G& g, std::span<const V> v) {
                       return g.add(g.mul(v[0], v[1]), g.mul(v[0], v[0]));
                     };
                   }});
  cases.push_back({"affine_const", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{2, 3}});
                     std::vector<double> scale(6);
                     std::vector<double> shift(6);
                     for (auto& s : scale) s = rng.uniform(-2, 2);
                     for (auto& s : shift) s = rng.uniform(-1, 1);
                     return [scale, shift](G& g, std::span<const V> v) {
                       return g.affine_const(v[0], scale, shift);
                     };
                   }});
  cases.push_back({"tanh", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{3, 3}}, -2, 2);
                     return [](G& g, std::span<const V> v) { return g.tanh(v[0]); };
                   }});
  cases.push_back({"sigmoid", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{3, 3}}, -3, 3);
                     return [](G& g, std::span<const V> v) { return g.sigmoid(v[0]); };
                   }});
  cases.push_back({"relu", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{3, 4}});
                     away_from_zero(in[0], 1e-2);
                     return [](G& g, std::span<const V> v) { return g.relu(v[0]); };
                   }});
  cases.push_back({"slice_concat", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{3, 5}, {3, 2}});
                     return [](G& g, std::span<const V> v) {
                       const V parts[] = {g.slice_cols(v[0], 1, 3), v[1], g.slice_cols(v[0], 0, 1)};
                       return g.concat_cols(parts);
                     };
                   }});
  cases.push_back({"embedding", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{6, 3}});
                     std::vector<std::int32_t> ids(7);
                     for (auto& id : ids) id = static_cast<std::int32_t>(rng.below(6));
                     std::vector<double> row_scale(6);
                     for (auto& s : row_scale) s = rng.bernoulli(0.3) ? 0.0 : 1.25;
                     return [ids, row_scale](G& g, std::span<const V> v) {
                       return g.embedding(v[0], ids, row_scale);
                     };
                   }});
  cases.push_back({"time_window", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{4 * 2, 3}});
                     return [](G& g, std::span<const V> v) { return g.time_window(v[0], 4, 2, 2); };
                   }});
  cases.push_back({"fo_pool", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{5 * 2, 3}, {5 * 2, 3}, {2, 3}});
                     for (auto& f : in[1].values) f = rng.uniform(0.05, 0.95);
                     std::vector<std::uint8_t> keep(10, 1);
                     keep[0] = 0;  // left padding on the first sequence
                     keep[2] = 0;
                     return [keep](G& g, std::span<const V> v) {
                       return g.fo_pool(v[0], v[1], v[2], 5, 2, keep);
                     };
                   }});
  cases.push_back({"concat_pool", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{6 * 2, 4}});
                     separate_columns(in[0], 6, 2, 4, 1e-2);
                     std::vector<std::uint8_t> keep(12, 1);
                     keep[1] = 0;
                     return [keep](G& g, std::span<const V> v) {
                       return g.concat_pool(v[0], 6, 2, keep);
                     };
                   }});
  cases.push_back({"qrnn_layer", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     nn::QrnnLayerConfig cfg{3, 5, 2, 0.0};
                     in = draw(rng, {{7, 3}, cfg.weight_shape(), cfg.bias_shape(), {1, 5}});
                     return [cfg](G& g, std::span<const V> v) {
                       return nn::qrnn_forward<double>(g, cfg, v[1], v[2], v[0], 7, 1, v[3]).h;
                     };
                   }});
  cases.push_back({"qrnn_layer_noise", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     nn::QrnnLayerConfig cfg{2, 4, 1, 0.2};
                     in = draw(rng, {{3 * 2, 2}, cfg.weight_shape(), cfg.bias_shape()});
                     auto wmask = nn::dropout_mask<double>(rng, nn::numel(cfg.weight_shape()), 0.3);
                     std::vector<double> zone(3 * 2 * 4);
                     for (auto& z : zone) z = rng.bernoulli(0.2) ? 0.0 : 1.0;
                     return [cfg, wmask, zone](G& g, std::span<const V> v) {
                       nn::QrnnNoise<double> noise{&wmask, &zone};
                       return nn::qrnn_forward<double>(g, cfg, v[1], v[2], v[0], 3, 2, V{}, {},
                                                       noise).h;
                     };
                   }});
  cases.push_back({"smoothed_ce", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{3, 5}}, -2, 2);
                     std::vector<std::int32_t> targets(3);
                     for (auto& t : targets) t = static_cast<std::int32_t>(rng.below(5));
                     return [targets](G& g, std::span<const V> v) {
                       return g.smoothed_cross_entropy(v[0], targets, 0.1);
                     };
                   }});
  cases.push_back({"mse", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{6, 1}});
                     std::vector<double> targets(6);
                     for (auto& t : targets) t = rng.uniform(-1, 1);
                     return [targets](G& g, std::span<const V> v) { return g.mse(v[0], targets); };
                   }});
  cases.push_back({"sum_dot", [](Rng& rng, Inputs& in) -> nn::GradCheckOp {
                     in = draw(rng, {{2, 3}});
                     std::vector<double> w(6);
                     for (auto& x : w) x = rng.uniform(-1, 1);
                     return [w](G& g, std::span<const V> v) {
                       return g.add(g.sum(g.mul(v[0], v[0])), g.dot_const(v[0], w));
                     };
                   }});
  return cases;
}

inline std::vector<GradCaseResult> run_grad_suite(int trials, std::uint64_t seed = 2019) {
  std::vector<GradCaseResult> results;
  for (const auto& c : grad_cases()) {
    GradCaseResult r{c.name, 0, 0.0};
    for (int t = 0; t < trials; ++t) {
      auto rng = Rng::derived(seed, c.name, static_cast<std::uint64_t>(t));
      Inputs inputs;
      const auto op = c.make(rng, inputs);
      const auto report = nn::grad_check(op, inputs, rng);
      r.worst = std::max(r.worst, report.max_rel_error);
      ++r.trials;
    }
    results.push_back(r);
  }
  return results;
}

}  // namespace humor::testing

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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "humor/nn/graph.hpp"
#include "humor/rng.hpp"

namespace humor::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t entries_checked = 0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

using GradCheckOp = std::function<Graph<double>::Var(
    Graph<double>&, std::span<const Graph<double>::Var>)>;

/// Compares backward() against central finite differences,
/// (f(x + h) - f(x - h)) / 2h, for every entry of every tensor in `inputs`.
/// Non-scalar op outputs are reduced with a fixed random projection drawn
/// from `rng`. The op must be deterministic. Error per entry is
/// |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const GradCheckOp& op, std::vector<ParamTensor<double>>& inputs,
                           Rng& rng, double h = 1e-5);

/// Tensors named in0, in1, ... with entries uniform in [lo, hi).
std::vector<ParamTensor<double>> random_inputs(std::span<const Shape> shapes, Rng& rng,
                                               double lo = -1.0, double hi = 1.0);

}  // namespace humor::nn

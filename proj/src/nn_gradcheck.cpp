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

#include "humor/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace humor::nn {

namespace {

double evaluate(const GradCheckOp& op, std::vector<ParamTensor<double>>& inputs,
                std::vector<double>& projection, Rng& rng, bool with_backward) {
  Graph<double> g;
  std::vector<Graph<double>::Var> vars;
  vars.reserve(inputs.size());
  for (auto& t : inputs) vars.push_back(g.param(t));
  auto out = op(g, vars);
  if (numel(g.shape(out)) != 1) {
    if (projection.empty()) {
      projection.resize(numel(g.shape(out)));
      for (auto& w : projection) w = rng.uniform(-1.0, 1.0);
    }
    out = g.dot_const(out, projection);
  }
  const double value = g.value(out)[0];
  if (with_backward) {
    g.backward(out);
  } else {
    g.clear();
  }
  return value;
}

}  // namespace

std::vector<ParamTensor<double>> random_inputs(std::span<const Shape> shapes, Rng& rng,
                                               double lo, double hi) {
  std::vector<ParamTensor<double>> out;
  out.reserve(shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    ParamTensor<double> t("in" + std::to_string(i), shapes[i]);
    for (auto& v : t.values) v = rng.uniform(lo, hi);
    out.push_back(std::move(t));
  }
  return out;
}

GradCheckReport grad_check(const GradCheckOp& op, std::vector<ParamTensor<double>>& inputs,
                           Rng& rng, double h) {
  std::vector<double> projection;
  for (auto& t : inputs) {
    t.frozen = false;
    t.grad.assign(t.size(), 0.0);
  }
  evaluate(op, inputs, projection, rng, true);

  GradCheckReport report;
  for (auto& t : inputs) {
    const auto analytic = t.grad;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t.values[i];
      t.values[i] = saved + h;
      const double up = evaluate(op, inputs, projection, rng, false);
      t.values[i] = saved - h;
      const double down = evaluate(op, inputs, projection, rng, false);
      t.values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++report.entries_checked;
      if (err > report.max_rel_error || report.worst_tensor.empty()) {
        report.max_rel_error = std::max(err, report.max_rel_error);
        report.worst_tensor = t.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace humor::nn

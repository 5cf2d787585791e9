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
#include <span>

#include "humor/nn/tensor.hpp"

namespace humor::nn {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  void validate() const;
};

/// Bias-corrected Adam with decoupled weight decay, applied to every
/// non-frozen parameter that has a gradient:
///   theta -= lr * wd * theta + lr * m_hat / (sqrt(v_hat) + eps),  lr = cfg.lr * lr_scale.
/// All gradients are checked first; a NaN/Inf aborts the whole step with
/// Error(NonFiniteGradient) naming the tensor.
template <typename Real>
void adamw_step(std::span<ParamTensor<Real>* const> params, const AdamWConfig& cfg,
                double lr_scale = 1.0);

struct OneCycleConfig {
  double lr_max = 1e-3;
  std::size_t total_steps = 1;
  double warmup_frac = 0.3;
  double div_start = 25.0;
  double div_final = 1e5;
  double momentum_high = 0.95;
  double momentum_low = 0.85;

  void validate() const;
};

struct ScheduleValue {
  double lr = 0.0;
  double momentum = 0.0;
};

/// Cosine warmup from lr_max/div_start to lr_max over warmup_frac of the
/// steps, then cosine annealing to lr_max/div_final. Momentum moves the
/// opposite way between momentum_high and momentum_low.
ScheduleValue one_cycle(std::size_t step, const OneCycleConfig& cfg);

}  // namespace humor::nn

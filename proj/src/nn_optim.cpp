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

#include "humor/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "humor/error.hpp"

namespace humor::nn {

void AdamWConfig::validate() const {
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) {
    throw Error(ErrorKind::ConfigInvalid, "Adam betas must lie in [0, 1)");
  }
  if (weight_decay < 0) throw Error(ErrorKind::ConfigInvalid, "weight_decay must be >= 0");
  if (!(eps > 0)) throw Error(ErrorKind::ConfigInvalid, "eps must be positive");
}

template <typename Real>
void adamw_step(std::span<ParamTensor<Real>* const> params, const AdamWConfig& cfg,
                double lr_scale) {
  for (const auto* p : params) {
    if (p->frozen || p->grad.empty()) continue;
    for (const Real g : p->grad) {
      if (!std::isfinite(g)) {
        throw Error(ErrorKind::NonFiniteGradient, "tensor '" + p->name + "'");
      }
    }
  }
  const double lr = cfg.lr * lr_scale;
  for (auto* p : params) {
    if (p->frozen || p->grad.empty()) continue;
    if (p->moment1.size() != p->size()) p->moment1.assign(p->size(), Real(0));
    if (p->moment2.size() != p->size()) p->moment2.assign(p->size(), Real(0));
    ++p->step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = p->grad[i];
      const double m = cfg.beta1 * p->moment1[i] + (1.0 - cfg.beta1) * g;
      const double v = cfg.beta2 * p->moment2[i] + (1.0 - cfg.beta2) * g * g;
      p->moment1[i] = static_cast<Real>(m);
      p->moment2[i] = static_cast<Real>(v);
      const double m_hat = m / c1;
      const double v_hat = v / c2;
      const double theta = p->values[i];
      p->values[i] = static_cast<Real>(theta - lr * cfg.weight_decay * theta -
                                       lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
    }
  }
}

template void adamw_step<float>(std::span<ParamTensor<float>* const>, const AdamWConfig&, double);
template void adamw_step<double>(std::span<ParamTensor<double>* const>, const AdamWConfig&, double);

void OneCycleConfig::validate() const {
  if (!(warmup_frac > 0 && warmup_frac < 1)) {
    throw Error(ErrorKind::ConfigInvalid, "one-cycle warmup_frac must lie in (0, 1)");
  }
  if (!(div_start > 1 && div_final > 1)) {
    throw Error(ErrorKind::ConfigInvalid, "one-cycle divisors must exceed 1");
  }
  if (total_steps == 0) throw Error(ErrorKind::ConfigInvalid, "one-cycle needs total_steps > 0");
}

namespace {

// Cosine interpolation from `from` (p = 0) to `to` (p = 1).
double cosine_anneal(double from, double to, double p) {
  return to + (from - to) * (1.0 + std::cos(std::numbers::pi * p)) / 2.0;
}

}  // namespace

ScheduleValue one_cycle(std::size_t step, const OneCycleConfig& cfg) {
  const double total = static_cast<double>(cfg.total_steps);
  const double warmup = cfg.warmup_frac * total;
  const double s = std::min(static_cast<double>(step), total);
  const double lr_start = cfg.lr_max / cfg.div_start;
  const double lr_end = cfg.lr_max / cfg.div_final;
  if (s <= warmup) {
    const double p = s / warmup;
    return {cosine_anneal(lr_start, cfg.lr_max, p),
            cosine_anneal(cfg.momentum_high, cfg.momentum_low, p)};
  }
  const double p = (s - warmup) / (total - warmup);
  return {cosine_anneal(cfg.lr_max, lr_end, p),
          cosine_anneal(cfg.momentum_low, cfg.momentum_high, p)};
}

}  // namespace humor::nn

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
#include <span>
#include <vector>

#include "humor/nn/graph.hpp"
#include "humor/rng.hpp"

namespace humor::nn {

struct QrnnLayerConfig {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::size_t window = 1;  // 1 or 2
  double zoneout = 0.0;    // in [0, 1)

  void validate() const;
  /// Gate weight shape [3 * hidden, window * input] (z, f, o stacked).
  Shape weight_shape() const { return {3 * hidden_size, window * input_size}; }
  Shape bias_shape() const { return {3 * hidden_size}; }
  std::size_t parameter_count() const;
};

/// Training-time randomness for one QRNN layer call. Null pointers disable
/// the corresponding regularizer (evaluation mode).
template <typename Real>
struct QrnnNoise {
  const std::vector<Real>* weight_mask = nullptr;  // DropConnect on the gate weights
  const std::vector<Real>* zoneout_keep = nullptr;  // 1 = keep f, 0 = force f to 1
};

template <typename Real>
struct QrnnOutput {
  typename Graph<Real>::Var h;  // [T*B, hidden]
  typename Graph<Real>::Var c;  // [T*B, hidden]; the last B rows are the carry state
};

/// One QRNN layer over time-major input [T*B, input]:
///   gates = W * [x_{t-window+1} .. x_t] + b
///   z = tanh, f = sigmoid, o = sigmoid
///   c_t = f_t * c_{t-1} + (1 - f_t) * z_t,  h_t = o_t * c_t
/// Out-of-range timesteps are zero. Masked (padding) steps keep c_{t-1}.
template <typename Real>
QrnnOutput<Real> qrnn_forward(Graph<Real>& g, const QrnnLayerConfig& cfg,
                              typename Graph<Real>::Var weight, typename Graph<Real>::Var bias,
                              typename Graph<Real>::Var input, std::size_t steps,
                              std::size_t batch, typename Graph<Real>::Var c0,
                              std::span<const std::uint8_t> keep = {},
                              const QrnnNoise<Real>& noise = {});

/// Inverted-dropout mask: each entry is 0 with probability p, else 1/(1-p).
template <typename Real>
std::vector<Real> dropout_mask(Rng& rng, std::size_t size, double p);

/// Dropout mask for a time-major [T*B, D] activation that is shared across
/// time (one draw per (b, d)).
template <typename Real>
std::vector<Real> variational_mask(Rng& rng, std::size_t steps, std::size_t batch,
                                   std::size_t dim, double p);

/// Zeroes whole vocabulary rows with probability p (scaled 1/(1-p) otherwise).
template <typename Real>
std::vector<Real> embedding_row_mask(Rng& rng, std::size_t vocab, double p);

/// Multiplies a time-major [T*B, D] activation by the keep mask row-wise,
/// zeroing padding rows. Returns x unchanged for an empty mask.
template <typename Real>
typename Graph<Real>::Var mask_rows(Graph<Real>& g, typename Graph<Real>::Var x,
                                    std::span<const std::uint8_t> keep);

}  // namespace humor::nn

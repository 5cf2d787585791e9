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

#include "humor/nn/layers.hpp"

#include "humor/error.hpp"

namespace humor::nn {

void QrnnLayerConfig::validate() const {
  if (input_size == 0 || hidden_size == 0) {
    throw Error(ErrorKind::ConfigInvalid, "QRNN sizes must be positive");
  }
  if (window != 1 && window != 2) throw Error(ErrorKind::ConfigInvalid, "QRNN window must be 1 or 2");
  if (!(zoneout >= 0.0 && zoneout < 1.0)) {
    throw Error(ErrorKind::ConfigInvalid, "QRNN zoneout must lie in [0, 1)");
  }
}

std::size_t QrnnLayerConfig::parameter_count() const {
  return numel(weight_shape()) + numel(bias_shape());
}

template <typename Real>
QrnnOutput<Real> qrnn_forward(Graph<Real>& g, const QrnnLayerConfig& cfg,
                              typename Graph<Real>::Var weight, typename Graph<Real>::Var bias,
                              typename Graph<Real>::Var input, std::size_t steps,
                              std::size_t batch, typename Graph<Real>::Var c0,
                              std::span<const std::uint8_t> keep, const QrnnNoise<Real>& noise) {
  if (g.cols(input) != cfg.input_size || g.rows(input) != steps * batch) {
    throw Error(ErrorKind::ShapeMismatch, "qrnn input " + to_string(g.shape(input)) +
                                              " for input_size " + std::to_string(cfg.input_size));
  }
  if (g.shape(weight) != cfg.weight_shape() || numel(g.shape(bias)) != 3 * cfg.hidden_size) {
    throw Error(ErrorKind::ShapeMismatch, "qrnn weights " + to_string(g.shape(weight)));
  }
  const auto hidden = cfg.hidden_size;
  auto w = weight;
  if (noise.weight_mask != nullptr) w = g.affine_const(weight, *noise.weight_mask);
  const auto x = cfg.window == 1 ? input : g.time_window(input, steps, batch, cfg.window);
  const auto gates = g.linear(x, w, bias);
  const auto z = g.tanh(g.slice_cols(gates, 0, hidden));
  auto f = g.sigmoid(g.slice_cols(gates, hidden, hidden));
  const auto o = g.sigmoid(g.slice_cols(gates, 2 * hidden, hidden));
  if (noise.zoneout_keep != nullptr) {
    // f' = f * m + (1 - m): zoned-out units keep their previous cell state.
    std::vector<Real> shift(noise.zoneout_keep->size());
    for (std::size_t i = 0; i < shift.size(); ++i) shift[i] = Real(1) - (*noise.zoneout_keep)[i];
    f = g.affine_const(f, *noise.zoneout_keep, std::move(shift));
  }
  const auto c = g.fo_pool(z, f, c0, steps, batch, keep);
  return {g.mul(o, c), c};
}

template <typename Real>
std::vector<Real> dropout_mask(Rng& rng, std::size_t size, double p) {
  std::vector<Real> mask(size, Real(1));
  if (p <= 0.0) return mask;
  const Real kept = static_cast<Real>(1.0 / (1.0 - p));
  for (auto& m : mask) m = rng.bernoulli(p) ? Real(0) : kept;
  return mask;
}

template <typename Real>
std::vector<Real> variational_mask(Rng& rng, std::size_t steps, std::size_t batch,
                                   std::size_t dim, double p) {
  const auto base = dropout_mask<Real>(rng, batch * dim, p);
  std::vector<Real> mask(steps * batch * dim);
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy(base.begin(), base.end(), mask.begin() + static_cast<std::ptrdiff_t>(t * batch * dim));
  }
  return mask;
}

template <typename Real>
std::vector<Real> embedding_row_mask(Rng& rng, std::size_t vocab, double p) {
  return dropout_mask<Real>(rng, vocab, p);
}

template <typename Real>
typename Graph<Real>::Var mask_rows(Graph<Real>& g, typename Graph<Real>::Var x,
                                    std::span<const std::uint8_t> keep) {
  if (keep.empty()) return x;
  const auto d = g.cols(x);
  std::vector<Real> scale(keep.size() * d);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    std::fill_n(scale.begin() + static_cast<std::ptrdiff_t>(r * d), d, keep[r] ? Real(1) : Real(0));
  }
  return g.affine_const(x, std::move(scale));
}

#define HUMOR_INSTANTIATE_LAYERS(Real)                                                        \
  template QrnnOutput<Real> qrnn_forward<Real>(                                               \
      Graph<Real>&, const QrnnLayerConfig&, Graph<Real>::Var, Graph<Real>::Var,              \
      Graph<Real>::Var, std::size_t, std::size_t, Graph<Real>::Var,                           \
      std::span<const std::uint8_t>, const QrnnNoise<Real>&);                                 \
  template std::vector<Real> dropout_mask<Real>(Rng&, std::size_t, double);                   \
  template std::vector<Real> variational_mask<Real>(Rng&, std::size_t, std::size_t,           \
                                                    std::size_t, double);                     \
  template std::vector<Real> embedding_row_mask<Real>(Rng&, std::size_t, double);             \
  template Graph<Real>::Var mask_rows<Real>(Graph<Real>&, Graph<Real>::Var,                   \
                                            std::span<const std::uint8_t>);

HUMOR_INSTANTIATE_LAYERS(float)
HUMOR_INSTANTIATE_LAYERS(double)

#undef HUMOR_INSTANTIATE_LAYERS

}  // namespace humor::nn

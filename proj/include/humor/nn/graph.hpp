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

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "humor/nn/tensor.hpp"

namespace humor::nn {

/// Reverse-mode tape. Every op appends a node holding its value and a
/// closure that pushes the node's gradient into its parents. backward()
/// walks the tape in reverse, accumulates into parameter grad slots (sum
/// over uses) and clears the tape.
///
/// Matrices are row-major [rows, cols]. Sequences are time-major: row
/// t * batch + b holds timestep t of sequence b. Keep masks use the same
/// layout (1 = real token, 0 = padding); an empty mask means all real.
///
/// Every op checks its output for NaN/Inf and throws Error(NonFinite)
/// naming the op.
template <typename Real>
class Graph {
 public:
  struct Var {
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t index = kNone;
    bool valid() const { return index != kNone; }
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf bound to a parameter; gradients flow into p.grad unless p.frozen.
  Var param(ParamTensor<Real>& p);
  /// Leaf without gradient.
  Var constant(Shape shape, std::vector<Real> values);

  std::span<const Real> value(Var v) const;
  const Shape& shape(Var v) const;
  std::size_t rows(Var v) const;
  std::size_t cols(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Dense algebra.
  Var linear(Var x, Var weight, Var bias);  // x[N,I] * weight[O,I]^T + bias[O]
  Var matmul_nt(Var x, Var weight);         // x[N,I] * weight[O,I]^T
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  /// y = x * scale + shift with constant vectors (empty shift means zero).
  /// Dropout masks and zoneout use this.
  Var affine_const(Var x, std::vector<Real> scale, std::vector<Real> shift = {});
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var relu(Var x);
  Var slice_cols(Var x, std::size_t start, std::size_t count);
  Var concat_cols(std::span<const Var> parts);

  /// Rows of table[V,D] gathered by ids; row_scale (optional, length V)
  /// multiplies each gathered row, implementing whole-word embedding dropout.
  Var embedding(Var table, std::span<const std::int32_t> ids, std::span<const Real> row_scale = {});

  /// [T*B, D] -> [T*B, window*D]; column block k holds x at t - (window-1) + k,
  /// zero before the start of the sequence.
  Var time_window(Var x, std::size_t steps, std::size_t batch, std::size_t window);

  /// fo-pooling: c_t = f_t * c_{t-1} + (1 - f_t) * z_t over time-major [T*B, H]
  /// inputs. c0 is [B, H] or invalid for zeros. Masked steps carry c_{t-1}.
  Var fo_pool(Var z, Var f, Var c0, std::size_t steps, std::size_t batch,
              std::span<const std::uint8_t> keep = {});

  /// [T*B, D] -> [B, 3D]: last real step, max and mean over real steps.
  Var concat_pool(Var h, std::size_t steps, std::size_t batch,
                  std::span<const std::uint8_t> keep = {});

  // Losses; all return a [1] tensor.
  /// Mean over rows of -sum_k t_k log softmax(logits)_k with
  /// t_k = epsilon / K + (1 - epsilon) [k == target].
  Var smoothed_cross_entropy(Var logits, std::span<const std::int32_t> targets, double epsilon);
  /// Mean squared error between pred (numel N) and targets (length N).
  Var mse(Var pred, std::span<const Real> targets);
  Var sum(Var x);
  /// sum_i x_i * weights_i
  Var dot_const(Var x, std::span<const Real> weights);

  /// Seeds d loss = 1, propagates, and clears the tape. Throws
  /// NoForwardRecorded when the tape is empty or `loss` is not on it.
  void backward(Var loss);
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Shape shape;
    std::vector<Real> value;
    ParamTensor<Real>* param = nullptr;
    std::vector<Real> grad;
    bool requires_grad = false;
    std::function<void(std::span<const Real>)> backward;
    std::string_view op;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  std::span<Real> grad_buffer(Var v);
  Var push(std::string_view op, Shape shape, std::vector<Real> value,
           std::initializer_list<Var> parents);
  void set_backward(Var out, std::function<void(std::span<const Real>)> fn);
  void check_same_shape(std::string_view op, Var a, Var b) const;

  std::deque<Node> nodes_;
};

/// Row-wise softmax of an [N, K] buffer, computed in double.
std::vector<double> softmax_rows(std::span<const float> logits, std::size_t k);
std::vector<double> softmax_rows(std::span<const double> logits, std::size_t k);

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace humor::nn

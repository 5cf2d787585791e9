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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace humor::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// A named dense parameter with its gradient slot and Adam moments. The
/// gradient and moment buffers are allocated on first use.
template <typename Real>
struct ParamTensor {
  std::string name;
  Shape shape;
  std::vector<Real> values;
  std::vector<Real> grad;
  std::vector<Real> moment1;
  std::vector<Real> moment2;
  std::int64_t step = 0;
  bool frozen = false;

  ParamTensor() = default;
  ParamTensor(std::string tensor_name, Shape tensor_shape)
      : name(std::move(tensor_name)), shape(std::move(tensor_shape)), values(numel(shape)) {}

  std::size_t size() const { return values.size(); }

  std::span<Real> grad_buffer() {
    if (grad.size() != values.size()) grad.assign(values.size(), Real(0));
    return grad;
  }

  void zero_grad() { std::fill(grad.begin(), grad.end(), Real(0)); }
};

}  // namespace humor::nn

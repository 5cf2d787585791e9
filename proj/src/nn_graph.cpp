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

#include "humor/nn/graph.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "humor/error.hpp"

namespace humor::nn {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

namespace {

[[noreturn]] void shape_error(std::string_view op, const std::string& what) {
  throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": " + what);
}

template <typename Real>
Real sigmoid_scalar(Real x) {
  if (x >= 0) {
    const Real e = std::exp(-x);
    return Real(1) / (Real(1) + e);
  }
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

template <typename Real>
std::vector<double> softmax_rows_impl(std::span<const Real> logits, std::size_t k) {
  std::vector<double> out(logits.size());
  const std::size_t n = k == 0 ? 0 : logits.size() / k;
  for (std::size_t r = 0; r < n; ++r) {
    const Real* row = logits.data() + r * k;
    double m = row[0];
    for (std::size_t j = 1; j < k; ++j) m = std::max<double>(m, row[j]);
    double z = 0;
    for (std::size_t j = 0; j < k; ++j) {
      out[r * k + j] = std::exp(static_cast<double>(row[j]) - m);
      z += out[r * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) out[r * k + j] /= z;
  }
  return out;
}

}  // namespace

std::vector<double> softmax_rows(std::span<const float> logits, std::size_t k) {
  return softmax_rows_impl(logits, k);
}
std::vector<double> softmax_rows(std::span<const double> logits, std::size_t k) {
  return softmax_rows_impl(logits, k);
}

template <typename Real>
typename Graph<Real>::Node& Graph<Real>::node(Var v) {
  if (!v.valid() || v.index >= nodes_.size()) {
    throw Error(ErrorKind::NoForwardRecorded, "variable is not on the current tape");
  }
  return nodes_[v.index];
}

template <typename Real>
const typename Graph<Real>::Node& Graph<Real>::node(Var v) const {
  if (!v.valid() || v.index >= nodes_.size()) {
    throw Error(ErrorKind::NoForwardRecorded, "variable is not on the current tape");
  }
  return nodes_[v.index];
}

template <typename Real>
std::span<const Real> Graph<Real>::value(Var v) const {
  const auto& n = node(v);
  if (n.param != nullptr) return n.param->values;
  return n.value;
}

template <typename Real>
const Shape& Graph<Real>::shape(Var v) const {
  return node(v).shape;
}

template <typename Real>
std::size_t Graph<Real>::rows(Var v) const {
  const auto& s = shape(v);
  return s.empty() ? 1 : s.front();
}

template <typename Real>
std::size_t Graph<Real>::cols(Var v) const {
  const auto& s = shape(v);
  if (s.size() < 2) return s.empty() ? 1 : s.front();
  return numel(s) / s.front();
}

template <typename Real>
bool Graph<Real>::requires_grad(Var v) const {
  return node(v).requires_grad;
}

template <typename Real>
std::span<Real> Graph<Real>::grad_buffer(Var v) {
  auto& n = node(v);
  if (n.param != nullptr) return n.param->grad_buffer();
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), Real(0));
  return n.grad;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::param(ParamTensor<Real>& p) {
  if (p.values.size() != numel(p.shape)) {
    shape_error("param", p.name + " holds " + std::to_string(p.values.size()) +
                             " values for shape " + to_string(p.shape));
  }
  Node n;
  n.shape = p.shape;
  n.param = &p;
  n.requires_grad = !p.frozen;
  n.op = "param";
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::constant(Shape shape, std::vector<Real> values) {
  if (values.size() != numel(shape)) {
    shape_error("constant", std::to_string(values.size()) + " values for shape " + to_string(shape));
  }
  return push("constant", std::move(shape), std::move(values), {});
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::push(std::string_view op, Shape shape,
                                            std::vector<Real> value,
                                            std::initializer_list<Var> parents) {
  for (const Real x : value) {
    if (!std::isfinite(x)) {
      throw Error(ErrorKind::NonFinite, "non-finite value in output of op '" + std::string(op) + "'");
    }
  }
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  n.op = op;
  for (const auto p : parents) n.requires_grad = n.requires_grad || node(p).requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
void Graph<Real>::set_backward(Var out, std::function<void(std::span<const Real>)> fn) {
  auto& n = node(out);
  if (n.requires_grad) n.backward = std::move(fn);
}

template <typename Real>
void Graph<Real>::check_same_shape(std::string_view op, Var a, Var b) const {
  if (numel(shape(a)) != numel(shape(b))) {
    shape_error(op, to_string(shape(a)) + " vs " + to_string(shape(b)));
  }
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::matmul_nt(Var x, Var weight) {
  const auto n = rows(x);
  const auto in = cols(x);
  if (shape(weight).size() != 2 || shape(weight)[1] != in) {
    shape_error("matmul_nt", "input " + to_string(shape(x)) + " weight " + to_string(shape(weight)));
  }
  const auto out_dim = shape(weight)[0];
  const auto xv = value(x);
  const auto wv = value(weight);
  std::vector<Real> y(n * out_dim);
  for (std::size_t r = 0; r < n; ++r) {
    const Real* xr = xv.data() + r * in;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const Real* wr = wv.data() + o * in;
      Real acc = 0;
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
      y[r * out_dim + o] = acc;
    }
  }
  const auto out = push("matmul_nt", {n, out_dim}, std::move(y), {x, weight});
  set_backward(out, [this, x, weight, n, in, out_dim](std::span<const Real> g) {
    const auto xv = value(x);
    const auto wv = value(weight);
    if (requires_grad(x)) {
      auto gx = grad_buffer(x);
      for (std::size_t r = 0; r < n; ++r) {
        Real* gxr = gx.data() + r * in;
        for (std::size_t o = 0; o < out_dim; ++o) {
          const Real go = g[r * out_dim + o];
          if (go == Real(0)) continue;
          const Real* wr = wv.data() + o * in;
          for (std::size_t i = 0; i < in; ++i) gxr[i] += go * wr[i];
        }
      }
    }
    if (requires_grad(weight)) {
      auto gw = grad_buffer(weight);
      for (std::size_t r = 0; r < n; ++r) {
        const Real* xr = xv.data() + r * in;
        for (std::size_t o = 0; o < out_dim; ++o) {
          const Real go = g[r * out_dim + o];
          if (go == Real(0)) continue;
          Real* gwr = gw.data() + o * in;
          for (std::size_t i = 0; i < in; ++i) gwr[i] += go * xr[i];
        }
      }
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::linear(Var x, Var weight, Var bias) {
  const auto prod = matmul_nt(x, weight);
  const auto n = rows(prod);
  const auto out_dim = cols(prod);
  if (numel(shape(bias)) != out_dim) {
    shape_error("linear", "bias " + to_string(shape(bias)) + " for " + std::to_string(out_dim) +
                              " outputs");
  }
  std::vector<Real> y(value(prod).begin(), value(prod).end());
  const auto bv = value(bias);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < out_dim; ++o) y[r * out_dim + o] += bv[o];
  }
  const auto out = push("linear", {n, out_dim}, std::move(y), {prod, bias});
  set_backward(out, [this, prod, bias, n, out_dim](std::span<const Real> g) {
    if (requires_grad(prod)) {
      auto gp = grad_buffer(prod);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
    }
    if (requires_grad(bias)) {
      auto gb = grad_buffer(bias);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < out_dim; ++o) gb[o] += g[r * out_dim + o];
      }
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::add(Var a, Var b) {
  check_same_shape("add", a, b);
  const auto av = value(a);
  const auto bv = value(b);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  const auto out = push("add", shape(a), std::move(y), {a, b});
  set_backward(out, [this, a, b](std::span<const Real> g) {
    for (const auto v : {a, b}) {
      if (!requires_grad(v)) continue;
      auto gv = grad_buffer(v);
      for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::mul(Var a, Var b) {
  check_same_shape("mul", a, b);
  const auto av = value(a);
  const auto bv = value(b);
  std::vector<Real> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const auto out = push("mul", shape(a), std::move(y), {a, b});
  set_backward(out, [this, a, b](std::span<const Real> g) {
    const auto av = value(a);
    const auto bv = value(b);
    if (requires_grad(a)) {
      auto ga = grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (requires_grad(b)) {
      auto gb = grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::affine_const(Var x, std::vector<Real> scale,
                                                    std::vector<Real> shift) {
  const auto xv = value(x);
  if (scale.size() != xv.size() || (!shift.empty() && shift.size() != xv.size())) {
    shape_error("affine_const", "constant length does not match " + to_string(shape(x)));
  }
  std::vector<Real> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = xv[i] * scale[i] + (shift.empty() ? Real(0) : shift[i]);
  }
  const auto out = push("affine_const", shape(x), std::move(y), {x});
  set_backward(out, [this, x, scale = std::move(scale)](std::span<const Real> g) {
    auto gx = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * scale[i];
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::tanh(Var x) {
  const auto xv = value(x);
  std::vector<Real> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(xv[i]);
  const auto out = push("tanh", shape(x), std::move(y), {x});
  set_backward(out, [this, x, out](std::span<const Real> g) {
    const auto yv = value(out);
    auto gx = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (Real(1) - yv[i] * yv[i]);
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::sigmoid(Var x) {
  const auto xv = value(x);
  std::vector<Real> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sigmoid_scalar(xv[i]);
  const auto out = push("sigmoid", shape(x), std::move(y), {x});
  set_backward(out, [this, x, out](std::span<const Real> g) {
    const auto yv = value(out);
    auto gx = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i] * (Real(1) - yv[i]);
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::relu(Var x) {
  const auto xv = value(x);
  std::vector<Real> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] > Real(0) ? xv[i] : Real(0);
  const auto out = push("relu", shape(x), std::move(y), {x});
  set_backward(out, [this, x](std::span<const Real> g) {
    const auto xv = value(x);
    auto gx = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > Real(0)) gx[i] += g[i];
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::slice_cols(Var x, std::size_t start, std::size_t count) {
  const auto n = rows(x);
  const auto c = cols(x);
  if (start + count > c) {
    shape_error("slice_cols", "columns [" + std::to_string(start) + ", " +
                                  std::to_string(start + count) + ") of " + to_string(shape(x)));
  }
  const auto xv = value(x);
  std::vector<Real> y(n * count);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(xv.data() + r * c + start, count, y.data() + r * count);
  }
  const auto out = push("slice_cols", {n, count}, std::move(y), {x});
  set_backward(out, [this, x, n, c, start, count](std::span<const Real> g) {
    auto gx = grad_buffer(x);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < count; ++j) gx[r * c + start + j] += g[r * count + j];
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) shape_error("concat_cols", "no inputs");
  const auto n = rows(parts[0]);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto p : parts) {
    if (rows(p) != n) shape_error("concat_cols", "row counts differ");
    widths.push_back(cols(p));
    total += widths.back();
  }
  std::vector<Real> y(n * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto pv = value(parts[k]);
    for (std::size_t r = 0; r < n; ++r) {
      std::copy_n(pv.data() + r * widths[k], widths[k], y.data() + r * total + offset);
    }
    offset += widths[k];
  }
  // Parents are registered one by one since the count is dynamic.
  const auto out = push("concat_cols", {n, total}, std::move(y), {});
  bool any = false;
  for (const auto p : parts) any = any || requires_grad(p);
  node(out).requires_grad = any;
  std::vector<Var> owned(parts.begin(), parts.end());
  set_backward(out, [this, owned = std::move(owned), widths, n, total](std::span<const Real> g) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < owned.size(); ++k) {
      if (requires_grad(owned[k])) {
        auto gp = grad_buffer(owned[k]);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t j = 0; j < widths[k]; ++j) {
            gp[r * widths[k] + j] += g[r * total + offset + j];
          }
        }
      }
      offset += widths[k];
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::embedding(Var table, std::span<const std::int32_t> ids,
                                                 std::span<const Real> row_scale) {
  if (shape(table).size() != 2) shape_error("embedding", "table must be 2-D");
  const auto vocab = shape(table)[0];
  const auto dim = shape(table)[1];
  if (!row_scale.empty() && row_scale.size() != vocab) {
    shape_error("embedding", "row_scale length differs from vocab size");
  }
  const auto tv = value(table);
  std::vector<Real> y(ids.size() * dim);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto id = ids[r];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw Error(ErrorKind::UnknownId, "embedding id " + std::to_string(id));
    }
    const Real s = row_scale.empty() ? Real(1) : row_scale[static_cast<std::size_t>(id)];
    const Real* src = tv.data() + static_cast<std::size_t>(id) * dim;
    for (std::size_t d = 0; d < dim; ++d) y[r * dim + d] = src[d] * s;
  }
  const auto out = push("embedding", {ids.size(), dim}, std::move(y), {table});
  std::vector<std::int32_t> id_copy(ids.begin(), ids.end());
  std::vector<Real> scale_copy(row_scale.begin(), row_scale.end());
  set_backward(out, [this, table, dim, id_copy = std::move(id_copy),
                     scale_copy = std::move(scale_copy)](std::span<const Real> g) {
    auto gt = grad_buffer(table);
    for (std::size_t r = 0; r < id_copy.size(); ++r) {
      const auto id = static_cast<std::size_t>(id_copy[r]);
      const Real s = scale_copy.empty() ? Real(1) : scale_copy[id];
      if (s == Real(0)) continue;
      for (std::size_t d = 0; d < dim; ++d) gt[id * dim + d] += g[r * dim + d] * s;
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::time_window(Var x, std::size_t steps, std::size_t batch,
                                                   std::size_t window) {
  const auto d = cols(x);
  if (rows(x) != steps * batch || window == 0) {
    shape_error("time_window", to_string(shape(x)) + " is not steps*batch rows");
  }
  const auto xv = value(x);
  const auto width = window * d;
  std::vector<Real> y(steps * batch * width, Real(0));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < window; ++k) {
      const auto lag = window - 1 - k;
      if (t < lag) continue;
      for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(xv.data() + ((t - lag) * batch + b) * d, d,
                    y.data() + (t * batch + b) * width + k * d);
      }
    }
  }
  const auto out = push("time_window", {steps * batch, width}, std::move(y), {x});
  set_backward(out, [this, x, steps, batch, window, d, width](std::span<const Real> g) {
    auto gx = grad_buffer(x);
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t k = 0; k < window; ++k) {
        const auto lag = window - 1 - k;
        if (t < lag) continue;
        for (std::size_t b = 0; b < batch; ++b) {
          Real* dst = gx.data() + ((t - lag) * batch + b) * d;
          const Real* src = g.data() + (t * batch + b) * width + k * d;
          for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
      }
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::fo_pool(Var z, Var f, Var c0, std::size_t steps,
                                               std::size_t batch,
                                               std::span<const std::uint8_t> keep) {
  check_same_shape("fo_pool", z, f);
  const auto h = cols(z);
  if (rows(z) != steps * batch) shape_error("fo_pool", "z is not steps*batch rows");
  if (c0.valid() && numel(shape(c0)) != batch * h) shape_error("fo_pool", "c0 is not [batch, hidden]");
  if (!keep.empty() && keep.size() != steps * batch) shape_error("fo_pool", "mask length");

  const auto zv = value(z);
  const auto fv = value(f);
  std::vector<Real> c(steps * batch * h);
  std::vector<Real> init(batch * h, Real(0));
  if (c0.valid()) std::copy(value(c0).begin(), value(c0).end(), init.begin());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      const auto row = t * batch + b;
      const Real* prev = t == 0 ? init.data() + b * h : c.data() + ((t - 1) * batch + b) * h;
      Real* cur = c.data() + row * h;
      if (!keep.empty() && keep[row] == 0) {
        std::copy_n(prev, h, cur);
        continue;
      }
      for (std::size_t j = 0; j < h; ++j) {
        const Real ft = fv[row * h + j];
        cur[j] = ft * prev[j] + (Real(1) - ft) * zv[row * h + j];
      }
    }
  }
  const auto out = c0.valid() ? push("fo_pool", {steps * batch, h}, std::move(c), {z, f, c0})
                              : push("fo_pool", {steps * batch, h}, std::move(c), {z, f});
  std::vector<std::uint8_t> mask(keep.begin(), keep.end());
  set_backward(out, [this, z, f, c0, out, steps, batch, h, init = std::move(init),
                     mask = std::move(mask)](std::span<const Real> g) {
    const auto zv = value(z);
    const auto fv = value(f);
    const auto cv = value(out);
    std::span<Real> gz;
    std::span<Real> gf;
    if (requires_grad(z)) gz = grad_buffer(z);
    if (requires_grad(f)) gf = grad_buffer(f);
    std::vector<Real> carry(batch * h, Real(0));
    for (std::size_t t = steps; t-- > 0;) {
      for (std::size_t b = 0; b < batch; ++b) {
        const auto row = t * batch + b;
        Real* gc = carry.data() + b * h;
        for (std::size_t j = 0; j < h; ++j) gc[j] += g[row * h + j];
        if (!mask.empty() && mask[row] == 0) continue;
        const Real* prev =
            t == 0 ? init.data() + b * h : cv.data() + ((t - 1) * batch + b) * h;
        for (std::size_t j = 0; j < h; ++j) {
          const auto idx = row * h + j;
          if (!gz.empty()) gz[idx] += gc[j] * (Real(1) - fv[idx]);
          if (!gf.empty()) gf[idx] += gc[j] * (prev[j] - zv[idx]);
          gc[j] *= fv[idx];
        }
      }
    }
    if (c0.valid() && requires_grad(c0)) {
      auto g0 = grad_buffer(c0);
      for (std::size_t i = 0; i < carry.size(); ++i) g0[i] += carry[i];
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::concat_pool(Var h, std::size_t steps, std::size_t batch,
                                                   std::span<const std::uint8_t> keep) {
  const auto d = cols(h);
  if (rows(h) != steps * batch) shape_error("concat_pool", "input is not steps*batch rows");
  if (!keep.empty() && keep.size() != steps * batch) shape_error("concat_pool", "mask length");
  const auto hv = value(h);
  constexpr auto kNoStep = std::numeric_limits<std::size_t>::max();
  std::vector<Real> y(batch * 3 * d, Real(0));
  std::vector<std::size_t> last_step(batch, kNoStep);
  std::vector<std::size_t> argmax(batch * d, kNoStep);
  std::vector<std::size_t> counts(batch, 0);
  for (std::size_t b = 0; b < batch; ++b) {
    Real* out_last = y.data() + b * 3 * d;
    Real* out_max = out_last + d;
    Real* out_mean = out_max + d;
    for (std::size_t t = 0; t < steps; ++t) {
      const auto row = t * batch + b;
      if (!keep.empty() && keep[row] == 0) continue;
      last_step[b] = t;
      ++counts[b];
      const Real* hr = hv.data() + row * d;
      for (std::size_t j = 0; j < d; ++j) {
        auto& am = argmax[b * d + j];
        if (am == kNoStep || hr[j] > out_max[j]) {
          am = t;
          out_max[j] = hr[j];
        }
        out_mean[j] += hr[j];
      }
    }
    if (counts[b] == 0) continue;
    const Real* hl = hv.data() + (last_step[b] * batch + b) * d;
    std::copy_n(hl, d, out_last);
    for (std::size_t j = 0; j < d; ++j) out_mean[j] /= static_cast<Real>(counts[b]);
  }
  const auto out = push("concat_pool", {batch, 3 * d}, std::move(y), {h});
  std::vector<std::uint8_t> mask(keep.begin(), keep.end());
  set_backward(out, [this, h, steps, batch, d, last_step = std::move(last_step),
                     argmax = std::move(argmax), counts = std::move(counts),
                     mask = std::move(mask)](std::span<const Real> g) {
    auto gh = grad_buffer(h);
    for (std::size_t b = 0; b < batch; ++b) {
      if (counts[b] == 0) continue;
      const Real* g_last = g.data() + b * 3 * d;
      const Real* g_max = g_last + d;
      const Real* g_mean = g_max + d;
      Real* dst_last = gh.data() + (last_step[b] * batch + b) * d;
      for (std::size_t j = 0; j < d; ++j) {
        dst_last[j] += g_last[j];
        gh[(argmax[b * d + j] * batch + b) * d + j] += g_max[j];
      }
      const Real inv = Real(1) / static_cast<Real>(counts[b]);
      for (std::size_t t = 0; t < steps; ++t) {
        const auto row = t * batch + b;
        if (!mask.empty() && mask[row] == 0) continue;
        for (std::size_t j = 0; j < d; ++j) gh[row * d + j] += g_mean[j] * inv;
      }
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::smoothed_cross_entropy(Var logits,
                                                              std::span<const std::int32_t> targets,
                                                              double epsilon) {
  const auto n = rows(logits);
  const auto k = cols(logits);
  if (targets.size() != n) shape_error("smoothed_cross_entropy", "one target per row required");
  if (k < 2) shape_error("smoothed_cross_entropy", "need at least two classes");
  const auto lv = value(logits);
  std::vector<Real> probs(n * k);
  double total = 0;
  const double off = epsilon / static_cast<double>(k);
  const double on = off + (1.0 - epsilon);
  for (std::size_t r = 0; r < n; ++r) {
    const auto target = targets[r];
    if (target < 0 || static_cast<std::size_t>(target) >= k) {
      shape_error("smoothed_cross_entropy", "target " + std::to_string(target) + " out of range");
    }
    const Real* row = lv.data() + r * k;
    double m = row[0];
    for (std::size_t j = 1; j < k; ++j) m = std::max<double>(m, row[j]);
    double z = 0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j]) - m);
    const double lse = m + std::log(z);
    for (std::size_t j = 0; j < k; ++j) {
      const double logp = static_cast<double>(row[j]) - lse;
      const double t = static_cast<std::size_t>(target) == j ? on : off;
      total -= t * logp;
      probs[r * k + j] = static_cast<Real>(std::exp(logp));
    }
  }
  const auto out = push("smoothed_cross_entropy", {1}, {static_cast<Real>(total / n)}, {logits});
  std::vector<std::int32_t> tcopy(targets.begin(), targets.end());
  set_backward(out, [this, logits, n, k, off, on, probs = std::move(probs),
                     tcopy = std::move(tcopy)](std::span<const Real> g) {
    auto gl = grad_buffer(logits);
    const Real scale = g[0] / static_cast<Real>(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < k; ++j) {
        const double t = static_cast<std::size_t>(tcopy[r]) == j ? on : off;
        gl[r * k + j] += scale * (probs[r * k + j] - static_cast<Real>(t));
      }
    }
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::mse(Var pred, std::span<const Real> targets) {
  const auto pv = value(pred);
  if (pv.size() != targets.size() || pv.empty()) shape_error("mse", "prediction/target length");
  double total = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double diff = static_cast<double>(pv[i]) - static_cast<double>(targets[i]);
    total += diff * diff;
  }
  const auto n = pv.size();
  const auto out = push("mse", {1}, {static_cast<Real>(total / n)}, {pred});
  std::vector<Real> tcopy(targets.begin(), targets.end());
  set_backward(out, [this, pred, n, tcopy = std::move(tcopy)](std::span<const Real> g) {
    const auto pv = value(pred);
    auto gp = grad_buffer(pred);
    const Real scale = Real(2) * g[0] / static_cast<Real>(n);
    for (std::size_t i = 0; i < n; ++i) gp[i] += scale * (pv[i] - tcopy[i]);
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::sum(Var x) {
  const auto xv = value(x);
  Real total = 0;
  for (const Real v : xv) total += v;
  const auto out = push("sum", {1}, {total}, {x});
  set_backward(out, [this, x](std::span<const Real> g) {
    auto gx = grad_buffer(x);
    for (auto& v : gx) v += g[0];
  });
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::dot_const(Var x, std::span<const Real> weights) {
  const auto xv = value(x);
  if (weights.size() != xv.size()) shape_error("dot_const", "weight length");
  Real total = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i] * weights[i];
  const auto out = push("dot_const", {1}, {total}, {x});
  std::vector<Real> wcopy(weights.begin(), weights.end());
  set_backward(out, [this, x, wcopy = std::move(wcopy)](std::span<const Real> g) {
    auto gx = grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0] * wcopy[i];
  });
  return out;
}

template <typename Real>
void Graph<Real>::backward(Var loss) {
  if (nodes_.empty() || !loss.valid() || loss.index >= nodes_.size()) {
    throw Error(ErrorKind::NoForwardRecorded, "backward() called without a recorded forward pass");
  }
  if (numel(shape(loss)) != 1) {
    shape_error("backward", "loss must be a scalar, got " + to_string(shape(loss)));
  }
  if (requires_grad(loss)) {
    grad_buffer(loss)[0] += Real(1);
    for (std::size_t i = loss.index + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.requires_grad || !n.backward || n.param != nullptr) continue;
      if (n.grad.empty()) continue;
      n.backward(n.grad);
    }
  }
  nodes_.clear();
}

template class Graph<float>;
template class Graph<double>;

}  // namespace humor::nn

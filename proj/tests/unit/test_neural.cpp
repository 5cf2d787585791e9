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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "humor/error.hpp"
#include "humor/nn/checkpoint.hpp"
#include "humor/nn/graph.hpp"
#include "humor/nn/layers.hpp"
#include "humor/nn/optim.hpp"
#include "humor/rng.hpp"

using namespace humor;
using namespace humor::nn;
using G = Graph<double>;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ParamTensor<double> tensor(std::string name, Shape shape, std::vector<double> values) {
  ParamTensor<double> t(std::move(name), std::move(shape));
  t.values = std::move(values);
  return t;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

// Plain smoothed cross-entropy from probabilities, used as an arithmetic oracle.
double ce_oracle(const std::vector<double>& logits, int target, double eps) {
  const double k = static_cast<double>(logits.size());
  double mx = logits[0];
  for (double l : logits) mx = std::max(mx, l);
  double z = 0;
  for (double l : logits) z += std::exp(l - mx);
  double loss = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double t = eps / k + (1 - eps) * (static_cast<int>(i) == target ? 1.0 : 0.0);
    loss -= t * (logits[i] - mx - std::log(z));
  }
  return loss;
}

double ce_value(const std::vector<double>& logits, std::vector<std::int32_t> targets, double eps) {
  G g;
  const auto rows = targets.size();
  auto x = g.constant({rows, logits.size() / rows}, logits);
  return g.value(g.smoothed_cross_entropy(x, targets, eps))[0];
}

}  // namespace

TEST_CASE("qrnn matches a hand-unrolled scalar recurrence") {
  const double wz = 0.7, wf = -0.4, wo = 1.3, bz = 0.1, bf = 0.2, bo = -0.3;
  const std::vector<double> xs = {0.5, -1.0, 2.0};
  const double c0 = 0.25;
  QrnnLayerConfig cfg{1, 1, 1, 0.0};
  auto w = tensor("w", {3, 1}, {wz, wf, wo});
  auto b = tensor("b", {3}, {bz, bf, bo});
  auto x = tensor("x", {3, 1}, xs);
  auto c = tensor("c0", {1, 1}, {c0});
  G g;
  auto out = qrnn_forward<double>(g, cfg, g.param(w), g.param(b), g.param(x), 3, 1, g.param(c));
  const auto h = g.value(out.h);
  double cell = c0;
  for (std::size_t t = 0; t < 3; ++t) {
    const double z = std::tanh(wz * xs[t] + bz);
    const double f = sigmoid(wf * xs[t] + bf);
    const double o = sigmoid(wo * xs[t] + bo);
    cell = f * cell + (1 - f) * z;
    CHECK(h[t] == doctest::Approx(o * cell).epsilon(1e-14));
  }
}

TEST_CASE("qrnn window two sees the previous step") {
  QrnnLayerConfig cfg{1, 1, 2, 0.0};
  // Column 0 weights x_{t-1}, column 1 weights x_t.
  auto w = tensor("w", {3, 2}, {0.3, 0.6, -0.2, 0.4, 0.5, -0.7});
  auto b = tensor("b", {3}, {0.0, 0.1, 0.2});
  const std::vector<double> xs = {1.0, -0.5, 0.25};
  auto x = tensor("x", {3, 1}, xs);
  G g;
  auto out = qrnn_forward<double>(g, cfg, g.param(w), g.param(b), g.param(x), 3, 1, G::Var{});
  const auto h = g.value(out.h);
  double cell = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    const double prev = t == 0 ? 0.0 : xs[t - 1];
    const double z = std::tanh(0.3 * prev + 0.6 * xs[t]);
    const double f = sigmoid(-0.2 * prev + 0.4 * xs[t] + 0.1);
    const double o = sigmoid(0.5 * prev - 0.7 * xs[t] + 0.2);
    cell = f * cell + (1 - f) * z;
    CHECK(h[t] == doctest::Approx(o * cell).epsilon(1e-14));
  }
}

TEST_CASE("qrnn forget gate extremes") {
  QrnnLayerConfig cfg{2, 3, 1, 0.0};
  Rng rng(4);
  auto w = tensor("w", cfg.weight_shape(), std::vector<double>(18));
  for (auto& v : w.values) v = rng.uniform(-0.5, 0.5);
  auto x = tensor("x", {4, 2}, std::vector<double>(8));
  for (auto& v : x.values) v = rng.uniform(-1, 1);

  SUBCASE("f = 1 keeps a zero state") {
    for (std::size_t r = 3; r < 6; ++r)
      for (std::size_t c = 0; c < 2; ++c) w.values[r * 2 + c] = 0.0;
    auto b = tensor("b", {9}, {0, 0, 0, 60, 60, 60, 0, 0, 0});
    G g;
    auto out = qrnn_forward<double>(g, cfg, g.param(w), g.param(b), g.param(x), 4, 1, G::Var{});
    for (double v : g.value(out.c)) CHECK(v == 0.0);
    for (double v : g.value(out.h)) CHECK(v == 0.0);
  }
  SUBCASE("f = 0 is memoryless") {
    for (std::size_t r = 3; r < 6; ++r)
      for (std::size_t c = 0; c < 2; ++c) w.values[r * 2 + c] = 0.0;
    auto b = tensor("b", {9}, {0, 0, 0, -800, -800, -800, 0, 0, 0});
    G g;
    auto out = qrnn_forward<double>(g, cfg, g.param(w), g.param(b), g.param(x), 4, 1, G::Var{});
    const auto cv = g.value(out.c);
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t j = 0; j < 3; ++j) {
        double pre = 0;
        for (std::size_t i = 0; i < 2; ++i) pre += w.values[j * 2 + i] * x.values[t * 2 + i];
        CHECK(cv[t * 3 + j] == doctest::Approx(std::tanh(pre)).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("qrnn rejects mismatched shapes") {
  QrnnLayerConfig cfg{2, 3, 1, 0.0};
  auto w = tensor("w", {9, 3}, std::vector<double>(27));
  auto b = tensor("b", {9}, std::vector<double>(9));
  auto x = tensor("x", {4, 2}, std::vector<double>(8));
  G g;
  CHECK(kind_of([&] {
          qrnn_forward<double>(g, cfg, g.param(w), g.param(b), g.param(x), 4, 1, G::Var{});
        }) == ErrorKind::ShapeMismatch);
  QrnnLayerConfig bad{0, 3, 1, 0.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  QrnnLayerConfig bad_window{2, 3, 3, 0.0};
  CHECK_THROWS_AS(bad_window.validate(), Error);
}

TEST_CASE("backward: linear map gradient has outer-product structure") {
  auto x = tensor("x", {3, 2}, {1, 2, 3, 4, 5, 6});
  auto w = tensor("w", {4, 2}, std::vector<double>(8, 0.5));
  G g;
  auto loss = g.sum(g.matmul_nt(g.constant({3, 2}, x.values), g.param(w)));
  g.backward(loss);
  for (std::size_t o = 0; o < 4; ++o) {
    CHECK(w.grad[o * 2 + 0] == 1 + 3 + 5);
    CHECK(w.grad[o * 2 + 1] == 2 + 4 + 6);
  }
  CHECK(g.size() == 0);
}

TEST_CASE("backward: unused parameters get exactly zero gradient") {
  auto a = tensor("a", {2}, {1, 2});
  auto b = tensor("b", {2}, {3, 4});
  a.zero_grad();
  b.grad_buffer();
  G g;
  g.param(b);
  g.backward(g.sum(g.tanh(g.param(a))));
  for (double v : b.grad) CHECK(v == 0.0);
  CHECK(a.grad[0] != 0.0);
}

TEST_CASE("backward: two uses accumulate") {
  auto a = tensor("a", {3}, {0.2, -0.4, 0.9});
  auto single = [&](bool first) {
    a.grad.assign(3, 0.0);
    G g;
    auto v = g.param(a);
    g.backward(first ? g.sum(g.tanh(v)) : g.sum(g.mul(v, v)));
    return a.grad;
  };
  const auto g1 = single(true);
  const auto g2 = single(false);
  a.grad.assign(3, 0.0);
  G g;
  auto p1 = g.param(a);
  auto p2 = g.param(a);
  g.backward(g.add(g.sum(g.tanh(p1)), g.sum(g.mul(p2, p2))));
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.grad[i] == doctest::Approx(g1[i] + g2[i]).epsilon(1e-15));
}

TEST_CASE("backward without a forward pass fails") {
  G g;
  CHECK(kind_of([&] { g.backward(G::Var{}); }) == ErrorKind::NoForwardRecorded);
  auto a = tensor("a", {1}, {1});
  auto v = g.sum(g.param(a));
  g.backward(v);
  CHECK(kind_of([&] { g.backward(v); }) == ErrorKind::NoForwardRecorded);
}

TEST_CASE("frozen parameters receive no gradient") {
  auto a = tensor("a", {2}, {1, 2});
  a.frozen = true;
  G g;
  auto v = g.param(a);
  CHECK_FALSE(g.requires_grad(v));
  auto b = tensor("b", {2}, {1, 1});
  g.backward(g.sum(g.mul(v, g.param(b))));
  CHECK(a.grad.empty());
  CHECK(b.grad[1] == 2.0);
}

TEST_CASE("smoothed cross-entropy values") {
  CHECK(ce_value({0.3, 0.3}, {0}, 0.0) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  CHECK(ce_value({0.3, 0.3}, {1}, 0.7) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));

  const double expected = -(0.95 * std::log(0.9) + 0.05 * std::log(0.1));
  CHECK(expected == doctest::Approx(0.21522).epsilon(1e-5));
  CHECK(std::abs(ce_value({std::log(0.9), std::log(0.1)}, {0}, 0.1) - expected) < 1e-12);

  for (int k : {2, 5, 10}) {
    for (double eps : {0.0, 0.1, 0.5, 0.9}) {
      std::vector<double> logits(static_cast<std::size_t>(k), -1.7);
      CHECK(std::abs(ce_value(logits, {k - 1}, eps) - std::log(k)) < 1e-12);
    }
  }

  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> logits(5);
    for (auto& l : logits) l = rng.uniform(-3, 3);
    const int target = static_cast<int>(rng.below(5));
    const double plain = -std::log(std::exp(logits[static_cast<std::size_t>(target)]) /
                                    [&] { double s = 0; for (double l : logits) s += std::exp(l); return s; }());
    CHECK(std::abs(ce_value(logits, {target}, 0.0) - plain) < 1e-12);
    CHECK(std::abs(ce_value(logits, {target}, 0.1) - ce_oracle(logits, target, 0.1)) < 1e-12);
  }

  // Batched form is the mean over rows.
  const double two = ce_value({0.1, 0.2, 0.3, 2.0, -1.0, 0.5}, {2, 0}, 0.1);
  CHECK(two == doctest::Approx((ce_oracle({0.1, 0.2, 0.3}, 2, 0.1) + ce_oracle({2.0, -1.0, 0.5}, 0, 0.1)) / 2).epsilon(1e-12));

  // Extreme logits stay finite.
  CHECK(std::isfinite(ce_value({1000.0, -1000.0}, {1}, 0.1)));
}

TEST_CASE("mean squared error") {
  auto mse = [](std::vector<double> p, std::vector<double> t) {
    G g;
    return g.value(g.mse(g.constant({p.size()}, p), t))[0];
  };
  CHECK(mse({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(mse({0, 1}, {0, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  Rng rng(9);
  std::vector<double> p(100), t(100);
  for (auto& v : p) v = rng.uniform(-5, 5);
  for (auto& v : t) v = rng.uniform(-5, 5);
  std::vector<double> sq(100);
  for (std::size_t i = 0; i < 100; ++i) sq[i] = (p[i] - t[i]) * (p[i] - t[i]);
  double total = 0;
  for (double v : sq) total += v;
  CHECK(std::abs(mse(p, t) - total / 100.0) < 1e-12);
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(10);
  std::vector<double> logits(7 * 6);
  for (auto& l : logits) l = rng.uniform(-30, 30);
  const auto p = softmax_rows(std::span<const double>(logits), 6);
  for (std::size_t r = 0; r < 7; ++r) {
    double s = 0;
    for (std::size_t k = 0; k < 6; ++k) s += p[r * 6 + k];
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("AdamW single-step examples") {
  AdamWConfig cfg;
  cfg.lr = 1e-3;
  auto p = tensor("p", {2}, {0.5, -2.0});
  p.grad = {1.0, 1.0};
  ParamTensor<double>* ps[] = {&p};
  adamw_step<double>(ps, cfg);
  CHECK(p.values[0] - 0.5 == doctest::Approx(-1e-3).epsilon(1e-7));
  CHECK(p.step == 1);

  auto q = tensor("q", {3}, {1, 2, 3});
  q.grad = {0, 0, 0};
  ParamTensor<double>* qs[] = {&q};
  adamw_step<double>(qs, cfg);
  CHECK(q.values == std::vector<double>{1, 2, 3});

  AdamWConfig decay = cfg;
  decay.weight_decay = 0.1;
  auto r = tensor("r", {1}, {1.0});
  r.grad = {0.0};
  ParamTensor<double>* rs[] = {&r};
  adamw_step<double>(rs, decay);
  CHECK(r.values[0] == doctest::Approx(1 - 1e-4).epsilon(1e-15));

  AdamWConfig scaled = cfg;
  auto s = tensor("s", {1}, {0.0});
  s.grad = {-3.0};
  ParamTensor<double>* ss[] = {&s};
  adamw_step<double>(ss, scaled, 0.5);
  CHECK(s.values[0] == doctest::Approx(0.5e-3).epsilon(1e-7));
}

TEST_CASE("AdamW with zero decay equals Adam step for step") {
  AdamWConfig cfg;
  cfg.lr = 3e-3;
  cfg.beta2 = 0.99;
  Rng rng(11);
  auto p = tensor("p", {4}, {0.1, -0.2, 0.3, 0.4});
  std::vector<double> theta = p.values, m(4, 0.0), v(4, 0.0);
  ParamTensor<double>* ps[] = {&p};
  for (int step = 1; step <= 50; ++step) {
    p.grad.resize(4);
    for (auto& gr : p.grad) gr = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < 4; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * p.grad[i];
      v[i] = 0.99 * v[i] + 0.01 * p.grad[i] * p.grad[i];
      const double mh = m[i] / (1 - std::pow(0.9, step));
      const double vh = v[i] / (1 - std::pow(0.99, step));
      theta[i] -= 3e-3 * mh / (std::sqrt(vh) + 1e-8);
    }
    adamw_step<double>(ps, cfg);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(p.values[i] - theta[i]) < 1e-15);
  }
}

TEST_CASE("AdamW skips frozen tensors and rejects non-finite gradients") {
  AdamWConfig cfg;
  auto p = tensor("p", {1}, {1.0});
  p.grad = {1.0};
  p.frozen = true;
  ParamTensor<double>* ps[] = {&p};
  adamw_step<double>(ps, cfg);
  CHECK(p.values[0] == 1.0);
  CHECK(p.step == 0);

  p.frozen = false;
  p.grad = {std::nan("")};
  CHECK(kind_of([&] { adamw_step<double>(ps, cfg); }) == ErrorKind::NonFiniteGradient);
  AdamWConfig bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("one-cycle endpoints and warmup midpoint") {
  OneCycleConfig cfg;
  cfg.lr_max = 1e-2;
  cfg.total_steps = 1000;
  const auto start = one_cycle(0, cfg);
  CHECK(start.lr == doctest::Approx(1e-2 / 25).epsilon(1e-14));
  CHECK(start.momentum == doctest::Approx(0.95).epsilon(1e-14));
  const auto peak = one_cycle(300, cfg);
  CHECK(peak.lr == doctest::Approx(1e-2).epsilon(1e-14));
  CHECK(peak.momentum == doctest::Approx(0.85).epsilon(1e-14));
  const auto end = one_cycle(1000, cfg);
  CHECK(end.lr == doctest::Approx(1e-2 / 1e5).epsilon(1e-12));
  CHECK(end.momentum == doctest::Approx(0.95).epsilon(1e-14));

  const double lo = 1e-2 / 25;
  const double mid = lo + (1e-2 - lo) * (1 - std::cos(std::numbers::pi / 2)) / 2;
  CHECK(one_cycle(150, cfg).lr == doctest::Approx(mid).epsilon(1e-14));
  CHECK(one_cycle(150, cfg).momentum == doctest::Approx(0.9).epsilon(1e-14));

  const double after = 1e-2 / 1e5 + (1e-2 - 1e-2 / 1e5) * (1 + std::cos(std::numbers::pi * 0.5)) / 2;
  CHECK(one_cycle(650, cfg).lr == doctest::Approx(after).epsilon(1e-14));
}

TEST_CASE("one-cycle is continuous in step") {
  for (std::size_t total : {600u, 1000u, 5000u}) {
    OneCycleConfig cfg;
    cfg.lr_max = 1.0;
    cfg.total_steps = total;
    double worst = 0;
    for (std::size_t s = 1; s <= total; ++s) {
      worst = std::max(worst, std::abs(one_cycle(s, cfg).lr - one_cycle(s - 1, cfg).lr));
    }
    CHECK(worst < cfg.lr_max / 100);
  }
  OneCycleConfig bad;
  bad.warmup_frac = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("dropout statistics") {
  Rng rng(12);
  const auto identity = dropout_mask<double>(rng, 1000, 0.0);
  for (double m : identity) CHECK(m == 1.0);

  for (double p : {0.1, 0.25, 0.5}) {
    const std::size_t n = 10000;
    const auto mask = dropout_mask<double>(rng, n, p);
    std::size_t kept = 0;
    for (double m : mask) {
      if (m != 0.0) {
        ++kept;
        CHECK(m == doctest::Approx(1.0 / (1.0 - p)).epsilon(1e-12));
      }
    }
    const double sigma = std::sqrt(static_cast<double>(n) * p * (1 - p));
    CHECK(std::abs(static_cast<double>(kept) - static_cast<double>(n) * (1 - p)) < 3 * sigma);
  }

  const auto v = variational_mask<double>(rng, 4, 2, 3, 0.5);
  for (std::size_t t = 1; t < 4; ++t)
    for (std::size_t i = 0; i < 6; ++i) CHECK(v[t * 6 + i] == v[i]);
}

TEST_CASE("checkpoint round-trip and corruption") {
  ModelCheckpoint ck;
  ck.metadata = {{"model", "lm"}, {"note", "a=b"}};
  ParamTensor<float> a("embedding.weight", {2, 3});
  a.values = {1.5f, -2.25f, 0.0f, 3.0e-8f, 7.0f, -0.0f};
  ParamTensor<float> b("bias", {2});
  b.values = {0.125f, 9.0f};
  ck.tensors = {a, b};
  const auto bytes = serialize_checkpoint(ck);
  CHECK(bytes.substr(0, 5) == "MULM1");
  const auto back = deserialize_checkpoint(bytes);
  CHECK(back.metadata == ck.metadata);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.find("embedding.weight")->values == a.values);
  CHECK(back.find("embedding.weight")->shape == a.shape);
  CHECK(back.find("bias")->values == b.values);
  CHECK(back.find("absent") == nullptr);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK(kind_of([&] { deserialize_checkpoint(bad); }) == ErrorKind::BadCheckpoint);
  CHECK(kind_of([&] { deserialize_checkpoint(bytes.substr(0, bytes.size() - 1)); }) ==
        ErrorKind::BadCheckpoint);
  CHECK(kind_of([&] { deserialize_checkpoint(bytes + "x"); }) == ErrorKind::BadCheckpoint);

  const auto path = std::filesystem::temp_directory_path() / "humor_ck_test.bin";
  save_checkpoint(path, ck);
  CHECK(load_checkpoint(path).tensors.size() == 2);
  std::filesystem::remove(path);
  CHECK(kind_of([&] { load_checkpoint(path); }) == ErrorKind::MissingCheckpoint);
}

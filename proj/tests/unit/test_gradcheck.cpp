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

#include "../support/grad_suite.hpp"

TEST_CASE("finite-difference gradient checks, 100 trials per op and loss") {
  for (const auto& r : humor::testing::run_grad_suite(100)) {
    INFO(r.name << " worst relative error " << r.worst);
    CHECK(r.trials == 100);
    CHECK(r.worst < 1e-4);
  }
}

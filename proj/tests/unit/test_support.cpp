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

#include <set>
#include <string>
#include <vector>

#include "humor/config.hpp"
#include "humor/error.hpp"
#include "humor/rng.hpp"
#include "humor/utf8.hpp"

using namespace humor;

TEST_CASE("config parsing and typed lookups") {
  const auto c = Config::parse(
      "# comment\n"
      "lm.emb_size = 16\n"
      "lm.windows = 2, 1, 1\n"
      "head.lr_hi=5e-3\n"
      "smote.enabled = false\n"
      "name = tweets corpus\n");
  CHECK(c.get_int("lm.emb_size", 0) == 16);
  CHECK(c.get_int_list("lm.windows", {}) == std::vector<std::int64_t>{2, 1, 1});
  CHECK(c.get_double("head.lr_hi", 0) == 5e-3);
  CHECK_FALSE(c.get_bool("smote.enabled", true));
  CHECK(c.get_string("name", "") == "tweets corpus");
  CHECK(c.get_int("absent", 7) == 7);
  CHECK(c.get_double_list("absent", {0.5}) == std::vector<double>{0.5});

  try {
    c.get_int("name", 0);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
  }
  CHECK_THROWS_AS(Config::parse("no equals sign here\n"), Error);
}

TEST_CASE("error kinds map to exit codes") {
  CHECK(exit_code(ErrorKind::ConfigInvalid) == 2);
  CHECK(exit_code(ErrorKind::InvalidFoldCount) == 2);
  CHECK(exit_code(ErrorKind::MissingColumn) == 3);
  CHECK(exit_code(ErrorKind::EmptyCorpus) == 3);
  CHECK(exit_code(ErrorKind::NonFiniteGradient) == 4);
  CHECK(to_string(ErrorKind::ClassTooSmall) == "ClassTooSmall");
}

TEST_CASE("derived random streams") {
  CHECK(derive_seed(1, "smote") == derive_seed(1, "smote"));
  std::set<std::uint64_t> distinct;
  for (std::uint64_t base : {0u, 1u, 2u})
    for (const char* purpose : {"smote", "kfold_split", "head_init"})
      for (std::uint64_t idx : {0u, 1u}) distinct.insert(derive_seed(base, purpose, idx));
  CHECK(distinct.size() == 18);

  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(6);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7u);
  }
  std::vector<int> items = {1, 2, 3, 4, 5, 6};
  r.shuffle(std::span(items));
  CHECK(std::multiset<int>(items.begin(), items.end()) == std::multiset<int>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("utf8 helpers") {
  CHECK(utf8::is_valid("a\xc3\xb1"));
  CHECK(utf8::first_invalid("ab\xc3") == std::optional<std::size_t>(2));
  CHECK(utf8::first_invalid("\xc0\xaf").has_value());
  CHECK(utf8::encode(utf8::decode("\xf0\x9f\x98\x82x")) == "\xf0\x9f\x98\x82x");
  CHECK(utf8::lower("\xc3\x91OS") == "\xc3\xb1os");
  CHECK(utf8::is_letter(U'ñ'));
  CHECK(utf8::is_number(U'7'));
  CHECK(utf8::is_space(U' '));
  CHECK_FALSE(utf8::is_letter(U'!'));
}

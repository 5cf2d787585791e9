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

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "humor/corpus.hpp"
#include "humor/error.hpp"

using namespace humor;
using namespace humor::corpus;

namespace {

const std::string kHeader =
    "id,text,is_humor,votes_no,votes_1,votes_2,votes_3,votes_4,votes_5,funniness_average\n";

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

RawCorpus numbered(std::size_t n) {
  RawCorpus c;
  c.tweets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) c.tweets.push_back("t" + std::to_string(i));
  return c;
}

}  // namespace

TEST_CASE("labeled row maps fields directly") {
  auto rows = parse_labeled(kHeader + "1,\"hola\",1,0,0,0,1,0,0,3.0\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].id == "1");
  CHECK(rows[0].text == "hola");
  CHECK(rows[0].is_humor);
  CHECK(rows[0].votes_star[2] == 1u);
  REQUIRE(rows[0].funniness.has_value());
  CHECK(*rows[0].funniness == doctest::Approx(3.0));
  CHECK(*rows[0].star_vote_mean() == doctest::Approx(3.0));
}

TEST_CASE("N/A and empty funniness cells are absent") {
  auto rows = parse_labeled(kHeader + "1,a,0,3,0,0,0,0,0,#N/A\n2,b,0,3,0,0,0,0,0,\n");
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].funniness.has_value());
  CHECK_FALSE(rows[1].funniness.has_value());
}

TEST_CASE("quoted text may hold commas, quotes and newlines") {
  auto rows = parse_labeled(kHeader + "7,\"uno, \"\"dos\"\"\ntres\",0,1,0,0,0,0,0,\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].text == "uno, \"dos\"\ntres");
}

TEST_CASE("missing text column is reported by name") {
  try {
    parse_labeled("id,is_humor\n1,0\n");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingColumn);
    CHECK(e.detail() == "text");
  }
}

TEST_CASE("malformed rows and invalid bytes are rejected") {
  CHECK(kind_of([] { parse_labeled(kHeader + "1,\"open,1,0,0,0,0,0,0,\n"); }) ==
        ErrorKind::MalformedRow);
  CHECK(kind_of([] { parse_labeled(kHeader + "1,a,1,-2,0,0,0,0,0,\n"); }) ==
        ErrorKind::MalformedRow);
  CHECK(kind_of([] { parse_labeled(kHeader + "1,\xff,1,0,0,0,0,0,0,\n"); }) ==
        ErrorKind::NonUtf8Input);
}

TEST_CASE("extra columns are ignored and remapped headers work") {
  auto rows = parse_labeled("tid,extra,tweet,humor\n9,x,hey,1\n", [] {
    ColumnMap m;
    m.id = "tid";
    m.text = "tweet";
    m.is_humor = "humor";
    return m;
  }());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].id == "9");
  CHECK(rows[0].text == "hey");
  CHECK(rows[0].is_humor);
}

TEST_CASE("inconsistent funniness only warns") {
  std::vector<std::string> warnings;
  auto rows = parse_labeled(kHeader + "1,a,1,0,0,0,1,0,0,4.5\n", {}, &warnings);
  CHECK(rows.size() == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("labeled load, write, load is stable") {
  auto rows = parse_labeled(kHeader + "1,\"a,\nb\",1,0,1,2,0,0,0,1.67\n2,c,0,4,0,0,0,0,0,#N/A\n");
  auto again = parse_labeled(format_labeled(rows));
  CHECK(again == rows);
  CHECK(format_labeled(again) == format_labeled(rows));
}

TEST_CASE("fill_missing_scores") {
  LabeledExample absent;
  LabeledExample present;
  present.funniness = 2.5;
  auto out = fill_missing_scores({absent, present});
  REQUIRE(out.size() == 2);
  CHECK(*out[0].funniness == 0.0);
  CHECK(*out[1].funniness == 2.5);
  CHECK(fill_missing_scores({}).empty());
}

TEST_CASE("raw corpus filters retweets and duplicates") {
  auto c = parse_raw_corpus("hola\nRT @x: hola\nhola\n");
  CHECK(c.tweets == std::vector<std::string>{"hola"});
  CHECK(c.source_stats.loaded == 3);
  CHECK(c.source_stats.retweets_dropped == 1);
  CHECK(c.source_stats.duplicates_dropped == 1);

  auto d = parse_raw_corpus("a\nb\nc\n");
  CHECK(d.tweets.size() == 3);
  CHECK(d.source_stats.retweets_dropped == 0);
  CHECK(d.source_stats.duplicates_dropped == 0);

  auto e = parse_raw_corpus("RT a\n RT @b\n");
  CHECK(e.tweets.size() == 2);
}

TEST_CASE("raw corpus escapes round-trip") {
  CHECK(parse_raw_corpus("adi\xc3\xb3s\\nchau\n").tweets ==
        std::vector<std::string>{"adi\xc3\xb3s\nchau"});
  const std::vector<std::string> tweets = {"x\\ny", "a\nb\\", "\\\\n", "plain"};
  for (const auto& t : tweets) CHECK(unescape_line(escape_line(t)) == t);
  CHECK(parse_raw_corpus(format_raw_corpus(tweets)).tweets == tweets);
  CHECK(kind_of([] { parse_raw_corpus("ok\n\xc3\n"); }) == ErrorKind::NonUtf8Input);
}

TEST_CASE("file round-trip through disk") {
  const auto dir = std::filesystem::temp_directory_path() / "humor_corpus_test";
  std::filesystem::create_directories(dir);
  write_raw_corpus(dir / "raw.txt", {"uno", "dos\ntres"});
  CHECK(load_raw_corpus(dir / "raw.txt").tweets == std::vector<std::string>{"uno", "dos\ntres"});
  CHECK(kind_of([&] { load_raw_corpus(dir / "absent.txt"); }) == ErrorKind::Io);
  std::filesystem::remove_all(dir);
}

TEST_CASE("split sizes follow round half up") {
  auto [train, valid] = split_train_valid(numbered(10), {0.1, 3});
  CHECK(train.tweets.size() == 9);
  CHECK(valid.tweets.size() == 1);

  // Integer oracle: round(n / 10) with halves going up is (n + 5) / 10.
  for (std::size_t n : {1u, 4u, 5u, 14u, 15u, 25u, 99u, 475143u}) {
    CHECK(valid_count(n, 0.1) == (n + 5) / 10);
  }
  auto [big_train, big_valid] = split_train_valid(numbered(475143), {0.1, 0});
  CHECK(big_train.tweets.size() == 427629);
  CHECK(big_valid.tweets.size() == 47514);
}

TEST_CASE("split is a deterministic partition") {
  const auto corpus = numbered(200);
  auto [a_train, a_valid] = split_train_valid(corpus, {0.25, 11});
  auto [b_train, b_valid] = split_train_valid(corpus, {0.25, 11});
  CHECK(a_valid.tweets == b_valid.tweets);
  CHECK(a_train.tweets == b_train.tweets);

  std::multiset<std::string> all(a_train.tweets.begin(), a_train.tweets.end());
  all.insert(a_valid.tweets.begin(), a_valid.tweets.end());
  CHECK(all == std::multiset<std::string>(corpus.tweets.begin(), corpus.tweets.end()));

  auto [c_train, c_valid] = split_train_valid(corpus, {0.25, 12});
  CHECK(c_valid.tweets != a_valid.tweets);

  CHECK(kind_of([] { split_train_valid(RawCorpus{}, {}); }) == ErrorKind::EmptyCorpus);
  CHECK(kind_of([&] { split_train_valid(corpus, {1.0, 0}); }) == ErrorKind::ConfigInvalid);
}

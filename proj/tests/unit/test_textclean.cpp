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

#include <random>
#include <string>
#include <vector>

#include "humor/error.hpp"
#include "humor/textclean.hpp"

using namespace humor;
using namespace humor::textclean;

namespace {

// Run-length scan over ASCII input, written independently of the library.
std::string char_rep_oracle(const std::string& s, int threshold) {
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    if (s[i] != ' ' && static_cast<int>(j - i) >= threshold) {
      out += " xxrep " + std::to_string(j - i) + " " + s[i] + " ";
    } else {
      out.append(s, i, j - i);
    }
    i = j;
  }
  return out;
}

std::string random_tweet(std::mt19937& gen) {
  static const std::vector<std::string> pool = {
      "a", "b", "A", "B", "z", "Z", "!", "?", ".", ",", "#", "@", " ", " ", "  ", "\n", "\r\n",
      "\t", "\xc3\xb1", "\xc3\x91", "\xc3\xa9", "\xf0\x9f\x98\x82", "1", "7", "xx", "XX",
      "JAJA", "jaja", "RT", "xxbos", "\xc2\xa0", "...", "\xc7\x85"};
  std::uniform_int_distribution<std::size_t> len(0, 30);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string s;
  const auto n = len(gen);
  for (std::size_t i = 0; i < n; ++i) s += pool[pick(gen)];
  return s;
}

}  // namespace

TEST_CASE("character repetition") {
  CHECK(replace_char_rep("!!!!", 4) == " xxrep 4 ! ");
  CHECK(replace_char_rep("!!!", 4) == "!!!");
  CHECK(replace_char_rep("aaaaab", 4) == " xxrep 5 a b");
  CHECK(replace_char_rep("", 4).empty());
  CHECK(replace_char_rep("\xc3\xb1\xc3\xb1\xc3\xb1\xc3\xb1", 4) == " xxrep 4 \xc3\xb1 ");
  std::size_t fired = 0;
  replace_char_rep("aaaa bbbbb cc", 4, "xxrep", &fired);
  CHECK(fired == 2);

  std::mt19937 gen(5);
  const std::string alphabet = "aab!! ";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (int i = 0; i < 20; ++i) s += alphabet[pick(gen)];
    for (int threshold : {2, 3, 4}) CHECK(replace_char_rep(s, threshold) == char_rep_oracle(s, threshold));
  }
}

TEST_CASE("word repetition") {
  CHECK(replace_word_rep("muy muy muy muy bueno", 4) == " xxwrep 4 muy bueno");
  CHECK(replace_word_rep("muy muy bueno", 4) == "muy muy bueno");
  CHECK(replace_word_rep("", 4).empty());
  CHECK(replace_word_rep("si si si", 3) == " xxwrep 3 si");
}

TEST_CASE("all caps marking") {
  CHECK(mark_all_caps("JAJAJA") == "xxup jajaja");
  CHECK(mark_all_caps("AlertaESI") == "AlertaESI");
  CHECK(mark_all_caps("A") == "A");
  CHECK(mark_all_caps("!!") == "!!");
  CHECK(mark_all_caps("NO!! se") == "xxup no!! se");
  CHECK(mark_all_caps("\xc3\x91O\xc3\x91O") == "xxup \xc3\xb1o\xc3\xb1o");
}

TEST_CASE("special characters get spaced") {
  CHECK(space_specials("!!!") == " ! ! ! ");
  CHECK(space_specials("#AlertaESI") == " # AlertaESI");
  CHECK(space_specials("abc") == "abc");
  CHECK(space_specials("a,b") == "a , b");
  CHECK(space_specials("eje.") == "eje.");
  CHECK(space_specials("a.b") == "a . b");
}

TEST_CASE("newline runs collapse to one marker") {
  CHECK(replace_newlines("a\nb") == "a xxnl b");
  CHECK(replace_newlines("a\r\n\r\nb") == "a xxnl b");
  CHECK(replace_newlines("ab") == "ab");
  CHECK(replace_newlines("a\rb") == "a xxnl b");
}

TEST_CASE("space collapsing") {
  CHECK(collapse_spaces("a  b") == "a b");
  CHECK(collapse_spaces(" a ") == "a");
  CHECK(collapse_spaces("a b") == "a b");
  CHECK(collapse_spaces("a\t\t b") == "a b");
  CHECK(collapse_spaces("a\xc2\xa0\xc2\xa0z") == "a z");
}

TEST_CASE("worked tweet cleans to the expected output") {
  const std::string raw =
      "Saber, entender y estar convencides que la frase #LaESILaDefendemosEntreTodes es nuestra "
      "linea es nuestro eje.\n#AlertaESI!!!!\nVamos por mas!!! e invitamos a todas aquellas "
      "personas que quieran se parte.";
  const std::string expected =
      "xxbos saber , entender y estar convencides que la frase # laesiladefendemosentretodes es "
      "nuestra linea es nuestro eje. xxnl # alertaesi xxrep 4 ! xxnl vamos por mas ! ! ! e "
      "invitamos a todas aquellas personas que quieran se parte.";
  RuleCounts counts;
  CHECK(clean(raw, {}, &counts).text == expected);
  CHECK(counts.char_rep == 1);
  CHECK(counts.newlines == 2);
  CHECK(counts.all_caps == 0);
}

TEST_CASE("clean on simple inputs") {
  CHECK(clean("hola").text == "xxbos hola");
  CHECK(clean("").text == "xxbos ");
  CHECK(clean("!!!!").text == "xxbos xxrep 4 !");
  CHECK(clean("!!!").text == "xxbos ! ! !");

  // Stage-by-stage oracle for the interaction of repetition and caps.
  std::string staged = replace_char_rep("HOLAAAAA", 4);
  staged = replace_word_rep(staged, 4);
  staged = mark_all_caps(staged);
  staged = space_specials(staged);
  staged = replace_newlines(staged);
  staged = collapse_spaces(staged);
  for (auto& c : staged) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  CHECK(staged == "xxup hol xxrep 5 a");
  CHECK(clean("HOLAAAAA").text == "xxbos " + staged);
}

TEST_CASE("clean rejects invalid UTF-8 and bad configs") {
  CHECK_THROWS_AS(clean("\xff"), Error);
  CleanConfig bad;
  bad.rep_threshold = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  CleanConfig dup;
  dup.tokens.caps = dup.tokens.bos;
  CHECK_THROWS_AS(dup.validate(), Error);
  CleanConfig upper;
  upper.tokens.newline = "XXNL";
  CHECK_THROWS_AS(upper.validate(), Error);
  CHECK_NOTHROW(CleanConfig{}.validate());
}

TEST_CASE("clean output invariants and idempotence over fuzzed tweets") {
  std::mt19937 gen(20190101);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto raw = random_tweet(gen);
    const auto once = clean(raw).text;
    INFO("input: " << raw);
    REQUIRE(once.rfind("xxbos ", 0) == 0);
    CHECK(once.find('\n') == std::string::npos);
    CHECK(once.find('\r') == std::string::npos);
    CHECK(once.find("  ") == std::string::npos);
    for (char c : once) CHECK_FALSE((c >= 'A' && c <= 'Z'));
    CHECK(clean(once).text == once);

    // Every repetition marker carries a count at or above the threshold.
    for (auto pos = once.find("xxrep "); pos != std::string::npos; pos = once.find("xxrep ", pos + 1)) {
      CHECK(std::stoi(once.substr(pos + 6)) >= 4);
    }
  }
}

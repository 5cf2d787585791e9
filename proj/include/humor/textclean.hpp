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
#include <string>
#include <string_view>

namespace humor::textclean {

struct ReservedTokens {
  std::string bos = "xxbos";
  std::string char_rep = "xxrep";
  std::string word_rep = "xxwrep";
  std::string caps = "xxup";
  std::string newline = "xxnl";
};

struct CleanConfig {
  /// Runs of this length or longer are replaced ("more than 3" means 4).
  int rep_threshold = 4;
  ReservedTokens tokens;

  /// Throws Error(ConfigInvalid) unless the threshold is >= 2 and the reserved
  /// tokens are lowercase, whitespace-free and pairwise distinct.
  void validate() const;
};

struct CleanedText {
  std::string text;

  bool operator==(const CleanedText&) const = default;
};

/// How many times each rule fired during a clean() call.
struct RuleCounts {
  std::size_t char_rep = 0;
  std::size_t word_rep = 0;
  std::size_t all_caps = 0;
  std::size_t specials = 0;
  std::size_t newlines = 0;
  std::size_t spaces = 0;

  RuleCounts& operator+=(const RuleCounts& other);
};

// Individual rules. Each is a pure function over UTF-8 text; the optional
// counter is incremented once per replacement.

/// Maximal runs (length >= threshold) of one non-space character become
/// " xxrep <n> <c> ".
std::string replace_char_rep(std::string_view text, int threshold,
                             std::string_view token = "xxrep", std::size_t* fired = nullptr);

/// Maximal runs (length >= threshold) of identical whitespace-separated words
/// become " xxwrep <n> <word>".
std::string replace_word_rep(std::string_view text, int threshold,
                             std::string_view token = "xxwrep", std::size_t* fired = nullptr);

/// Words of two or more characters with no lowercase and at least one
/// uppercase letter become "xxup <lowercased word>".
std::string mark_all_caps(std::string_view text, std::string_view token = "xxup",
                          std::size_t* fired = nullptr);

/// Surrounds every character that is not a letter, digit or whitespace with
/// single spaces. A run of '.' that ends a word (preceded by a letter or digit,
/// followed by whitespace or end of text) stays attached.
std::string space_specials(std::string_view text, std::size_t* fired = nullptr);

/// Each maximal run of '\n' / '\r' characters becomes " xxnl ".
std::string replace_newlines(std::string_view text, std::string_view token = "xxnl",
                             std::size_t* fired = nullptr);

/// Whitespace runs become one space; leading and trailing whitespace removed.
std::string collapse_spaces(std::string_view text, std::size_t* fired = nullptr);

/// The full normalization pipeline followed by lowercasing and the "xxbos "
/// prefix. The pipeline is re-applied until the text stops changing, so
/// clean(clean(x)) == clean(x).
CleanedText clean(std::string_view text, const CleanConfig& config = {},
                  RuleCounts* counts = nullptr);

}  // namespace humor::textclean

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

#include "humor/textclean.hpp"

#include <vector>

#include "humor/error.hpp"
#include "humor/utf8.hpp"

namespace humor::textclean {

namespace {

bool is_newline(char32_t c) { return c == U'\n' || c == U'\r'; }

struct Word {
  std::size_t begin;
  std::size_t end;
};

std::vector<Word> split_words(const std::u32string& s) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && utf8::is_space(s[i])) ++i;
    const auto begin = i;
    while (i < s.size() && !utf8::is_space(s[i])) ++i;
    if (i > begin) words.push_back({begin, i});
  }
  return words;
}

void bump(std::size_t* counter) {
  if (counter != nullptr) ++*counter;
}

std::string run_pipeline_once(std::string_view text, const CleanConfig& config,
                              RuleCounts& counts) {
  const auto& tok = config.tokens;
  auto s = replace_char_rep(text, config.rep_threshold, tok.char_rep, &counts.char_rep);
  s = replace_word_rep(s, config.rep_threshold, tok.word_rep, &counts.word_rep);
  s = mark_all_caps(s, tok.caps, &counts.all_caps);
  s = space_specials(s, &counts.specials);
  s = replace_newlines(s, tok.newline, &counts.newlines);
  s = collapse_spaces(s, &counts.spaces);
  s = utf8::lower(s);

  // A leading bos token is re-added below, never duplicated.
  if (s == tok.bos) {
    s.clear();
  } else if (s.size() > tok.bos.size() && s.starts_with(tok.bos) && s[tok.bos.size()] == ' ') {
    s.erase(0, tok.bos.size() + 1);
  }
  return tok.bos + " " + s;
}

}  // namespace

RuleCounts& RuleCounts::operator+=(const RuleCounts& other) {
  char_rep += other.char_rep;
  word_rep += other.word_rep;
  all_caps += other.all_caps;
  specials += other.specials;
  newlines += other.newlines;
  spaces += other.spaces;
  return *this;
}

void CleanConfig::validate() const {
  if (rep_threshold < 2) throw Error(ErrorKind::ConfigInvalid, "rep_threshold must be >= 2");
  const std::string* all[] = {&tokens.bos, &tokens.char_rep, &tokens.word_rep, &tokens.caps,
                              &tokens.newline};
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& t = *all[i];
    if (t.empty() || utf8::lower(t) != t) {
      throw Error(ErrorKind::ConfigInvalid, "reserved token '" + t + "' must be lowercase");
    }
    for (const char32_t c : utf8::decode(t)) {
      if (utf8::is_space(c)) {
        throw Error(ErrorKind::ConfigInvalid, "reserved token '" + t + "' contains whitespace");
      }
    }
    for (std::size_t j = i + 1; j < 5; ++j) {
      if (t == *all[j]) throw Error(ErrorKind::ConfigInvalid, "duplicate reserved token " + t);
    }
  }
}

std::string replace_char_rep(std::string_view text, int threshold, std::string_view token,
                             std::size_t* fired) {
  const auto s = utf8::decode(text);
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i + 1;
    while (j < s.size() && s[j] == s[i]) ++j;
    const auto run = j - i;
    if (!utf8::is_space(s[i]) && run >= static_cast<std::size_t>(threshold)) {
      out += ' ';
      out += token;
      out += ' ';
      out += std::to_string(run);
      out += ' ';
      utf8::append(out, s[i]);
      out += ' ';
      bump(fired);
    } else {
      for (std::size_t k = i; k < j; ++k) utf8::append(out, s[k]);
    }
    i = j;
  }
  return out;
}

std::string replace_word_rep(std::string_view text, int threshold, std::string_view token,
                             std::size_t* fired) {
  const auto s = utf8::decode(text);
  const auto words = split_words(s);
  auto same = [&](const Word& a, const Word& b) {
    return a.end - a.begin == b.end - b.begin &&
           s.compare(a.begin, a.end - a.begin, s, b.begin, b.end - b.begin) == 0;
  };

  std::u32string out;
  out.reserve(s.size());
  std::size_t copied = 0;
  std::size_t w = 0;
  while (w < words.size()) {
    std::size_t v = w + 1;
    while (v < words.size() && same(words[v], words[w])) ++v;
    const auto run = v - w;
    if (run >= static_cast<std::size_t>(threshold)) {
      out.append(s, copied, words[w].begin - copied);
      out += U' ';
      out += utf8::decode(token);
      out += U' ';
      out += utf8::decode(std::to_string(run));
      out += U' ';
      out.append(s, words[w].begin, words[w].end - words[w].begin);
      copied = words[v - 1].end;
      bump(fired);
    }
    w = v;
  }
  out.append(s, copied, std::u32string::npos);
  return utf8::encode(out);
}

std::string mark_all_caps(std::string_view text, std::string_view token, std::size_t* fired) {
  const auto s = utf8::decode(text);
  std::u32string out;
  out.reserve(s.size());
  std::size_t copied = 0;
  for (const auto& w : split_words(s)) {
    if (w.end - w.begin < 2) continue;
    bool has_upper = false;
    bool has_lower = false;
    for (std::size_t k = w.begin; k < w.end; ++k) {
      if (!utf8::is_letter(s[k])) continue;
      has_upper = has_upper || utf8::is_upper(s[k]);
      // Titlecase letters have a lowercase mapping without being uppercase.
      has_lower = has_lower || utf8::is_lower(s[k]) ||
                  (!utf8::is_upper(s[k]) && utf8::to_lower(s[k]) != s[k]);
    }
    if (!has_upper || has_lower) continue;
    out.append(s, copied, w.begin - copied);
    out += utf8::decode(token);
    out += U' ';
    for (std::size_t k = w.begin; k < w.end; ++k) out += utf8::to_lower(s[k]);
    copied = w.end;
    bump(fired);
  }
  out.append(s, copied, std::u32string::npos);
  return utf8::encode(out);
}

std::string space_specials(std::string_view text, std::size_t* fired) {
  const auto s = utf8::decode(text);
  std::string out;
  out.reserve(text.size() + text.size() / 4);
  auto is_plain = [](char32_t c) {
    return utf8::is_letter(c) || utf8::is_number(c) || utf8::is_space(c);
  };
  std::size_t i = 0;
  while (i < s.size()) {
    const char32_t c = s[i];
    if (is_plain(c)) {
      utf8::append(out, c);
      ++i;
      continue;
    }
    if (c == U'.') {
      std::size_t j = i;
      while (j < s.size() && s[j] == U'.') ++j;
      const bool after_word = i > 0 && (utf8::is_letter(s[i - 1]) || utf8::is_number(s[i - 1]));
      const bool at_boundary = j == s.size() || utf8::is_space(s[j]);
      if (after_word && at_boundary) {
        out.append(j - i, '.');
        i = j;
        continue;
      }
    }
    if (out.empty() || out.back() != ' ') out += ' ';
    utf8::append(out, c);
    out += ' ';
    bump(fired);
    ++i;
  }
  return out;
}

std::string replace_newlines(std::string_view text, std::string_view token, std::size_t* fired) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '\n' || text[i] == '\r') {
      while (i < text.size() && (text[i] == '\n' || text[i] == '\r')) ++i;
      out += ' ';
      out += token;
      out += ' ';
      bump(fired);
      continue;
    }
    out += text[i];
    ++i;
  }
  return out;
}

std::string collapse_spaces(std::string_view text, std::size_t* fired) {
  const auto s = utf8::decode(text);
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (!utf8::is_space(s[i]) || is_newline(s[i])) {
      utf8::append(out, s[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && utf8::is_space(s[j]) && !is_newline(s[j])) ++j;
    const bool edge = i == 0 || j == s.size();
    if (j - i >= 2 || edge || s[i] != U' ') bump(fired);
    if (!edge) out += ' ';
    i = j;
  }
  return out;
}

CleanedText clean(std::string_view text, const CleanConfig& config, RuleCounts* counts) {
  if (const auto bad = utf8::first_invalid(text)) {
    throw Error(ErrorKind::NonUtf8Input, "byte offset " + std::to_string(*bad));
  }
  RuleCounts local;
  auto current = run_pipeline_once(text, config, local);
  // Later rules can expose new matches for earlier ones (e.g. "aAAA" only
  // becomes a character run after lowercasing); iterate to a fixed point.
  RuleCounts scratch;
  for (int pass = 0; pass < 16; ++pass) {
    auto next = run_pipeline_once(current, config, scratch);
    if (next == current) break;
    current = std::move(next);
  }
  if (counts != nullptr) *counts += local;
  return CleanedText{std::move(current)};
}

}  // namespace humor::textclean

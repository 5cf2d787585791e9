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

#include "humor/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "humor/error.hpp"
#include "humor/io.hpp"
#include "humor/rng.hpp"
#include "humor/utf8.hpp"

namespace humor::corpus {

namespace {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may hold separators, doubled quotes and newlines.
std::vector<CsvRecord> read_csv(std::string_view text) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    CsvRecord record;
    record.line = line;
    std::string field;
    bool done = false;
    while (!done) {
      field.clear();
      if (i < n && text[i] == '"') {
        ++i;
        bool closed = false;
        while (i < n) {
          const char c = text[i];
          if (c == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        if (!closed) throw Error(ErrorKind::MalformedRow, "line " + std::to_string(record.line));
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line));
        }
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          field.push_back(text[i]);
          ++i;
        }
      }
      record.fields.push_back(field);
      if (i >= n) {
        done = true;
      } else if (text[i] == ',') {
        ++i;
      } else {
        if (text[i] == '\r') ++i;
        if (i < n && text[i] == '\n') ++i;
        ++line;
        done = true;
      }
    }
    const bool blank = record.fields.size() == 1 && record.fields[0].empty();
    if (!blank) records.push_back(std::move(record));
  }
  return records;
}

bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\n\r") != std::string_view::npos;
}

void append_csv_field(std::string& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line) + ": " + what);
}

bool parse_bool_cell(const std::string& s, std::size_t line) {
  if (s == "1" || s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "0" || s == "false" || s == "False" || s == "FALSE") return false;
  malformed(line, "bad boolean '" + s + "'");
}

std::uint32_t parse_count_cell(const std::string& s, std::size_t line) {
  if (s.empty()) return 0;
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  // Some exports write counts as "3.0".
  double d = 0;
  const auto [dptr, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (dec == std::errc() && dptr == s.data() + s.size() && d >= 0 && d == std::floor(d) &&
      d < 4.0e9) {
    return static_cast<std::uint32_t>(d);
  }
  malformed(line, "bad vote count '" + s + "'");
}

std::optional<double> parse_score_cell(const std::string& s, std::size_t line) {
  if (s.empty() || s == "#N/A" || s == "N/A" || s == "NA" || s == "nan" || s == "NaN") {
    return std::nullopt;
  }
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    malformed(line, "bad score '" + s + "'");
  }
  return v;
}

}  // namespace

std::uint32_t LabeledExample::total_star_votes() const {
  return std::accumulate(votes_star.begin(), votes_star.end(), 0U);
}

std::optional<double> LabeledExample::star_vote_mean() const {
  const auto total = total_star_votes();
  if (total == 0) return std::nullopt;
  double weighted = 0;
  for (std::size_t k = 0; k < 5; ++k) weighted += static_cast<double>(k + 1) * votes_star[k];
  return weighted / total;
}

ColumnMap ColumnMap::from_config(const Config& config) {
  ColumnMap map;
  map.id = config.get_string("column.id", map.id);
  map.text = config.get_string("column.text", map.text);
  map.is_humor = config.get_string("column.is_humor", map.is_humor);
  map.votes_no = config.get_string("column.votes_no", map.votes_no);
  for (std::size_t k = 0; k < 5; ++k) {
    map.votes_star[k] =
        config.get_string("column.votes_" + std::to_string(k + 1), map.votes_star[k]);
  }
  map.funniness = config.get_string("column.funniness", map.funniness);
  return map;
}

std::vector<LabeledExample> parse_labeled(std::string_view csv, const ColumnMap& columns,
                                          std::vector<std::string>* warnings) {
  if (const auto bad = utf8::first_invalid(csv)) {
    throw Error(ErrorKind::NonUtf8Input, "byte offset " + std::to_string(*bad));
  }
  if (csv.starts_with("\xEF\xBB\xBF")) csv.remove_prefix(3);

  auto records = read_csv(csv);
  if (records.empty()) throw Error(ErrorKind::MissingColumn, columns.id);
  const auto& header = records.front().fields;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) index.emplace(header[c], c);

  auto required = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw Error(ErrorKind::MissingColumn, name);
    return it->second;
  };
  auto optional = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };

  const auto id_col = required(columns.id);
  const auto text_col = required(columns.text);
  const auto humor_col = required(columns.is_humor);
  const auto no_col = optional(columns.votes_no);
  std::array<std::optional<std::size_t>, 5> star_cols;
  for (std::size_t k = 0; k < 5; ++k) star_cols[k] = optional(columns.votes_star[k]);
  const auto score_col = optional(columns.funniness);

  std::vector<LabeledExample> out;
  out.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      malformed(rec.line, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(rec.fields.size()));
    }
    LabeledExample ex;
    ex.id = rec.fields[id_col];
    ex.text = rec.fields[text_col];
    ex.is_humor = parse_bool_cell(rec.fields[humor_col], rec.line);
    if (no_col) ex.votes_no = parse_count_cell(rec.fields[*no_col], rec.line);
    for (std::size_t k = 0; k < 5; ++k) {
      if (star_cols[k]) ex.votes_star[k] = parse_count_cell(rec.fields[*star_cols[k]], rec.line);
    }
    if (score_col) ex.funniness = parse_score_cell(rec.fields[*score_col], rec.line);

    if (warnings != nullptr && ex.funniness) {
      if (const auto mean = ex.star_vote_mean(); mean && std::abs(*mean - *ex.funniness) > 5e-3) {
        warnings->push_back("line " + std::to_string(rec.line) + ": funniness " +
                            format_double(*ex.funniness) + " differs from star-vote mean " +
                            format_double(*mean));
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<LabeledExample> load_labeled(const std::filesystem::path& path,
                                         const ColumnMap& columns,
                                         std::vector<std::string>* warnings) {
  return parse_labeled(read_file(path), columns, warnings);
}

std::string format_labeled(const std::vector<LabeledExample>& examples,
                           const ColumnMap& columns) {
  std::string out;
  const std::array<const std::string*, 10> header = {
      &columns.id,           &columns.text,          &columns.is_humor,      &columns.votes_no,
      &columns.votes_star[0], &columns.votes_star[1], &columns.votes_star[2], &columns.votes_star[3],
      &columns.votes_star[4], &columns.funniness};
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != 0) out.push_back(',');
    append_csv_field(out, *header[c]);
  }
  out.push_back('\n');
  for (const auto& ex : examples) {
    append_csv_field(out, ex.id);
    out.push_back(',');
    append_csv_field(out, ex.text);
    out.push_back(',');
    out += ex.is_humor ? "1" : "0";
    out.push_back(',');
    out += std::to_string(ex.votes_no);
    for (const auto v : ex.votes_star) {
      out.push_back(',');
      out += std::to_string(v);
    }
    out.push_back(',');
    out += ex.funniness ? format_double(*ex.funniness) : "#N/A";
    out.push_back('\n');
  }
  return out;
}

void write_labeled(const std::filesystem::path& path, const std::vector<LabeledExample>& examples,
                   const ColumnMap& columns) {
  write_file(path, format_labeled(examples, columns));
}

std::vector<LabeledExample> fill_missing_scores(std::vector<LabeledExample> examples) {
  for (auto& ex : examples) {
    if (!ex.funniness) ex.funniness = 0.0;
  }
  return examples;
}

std::string escape_line(std::string_view tweet) {
  std::string out;
  out.reserve(tweet.size());
  for (std::size_t i = 0; i < tweet.size(); ++i) {
    const char c = tweet[i];
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string unescape_line(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && i + 1 < line.size()) {
      const char e = line[i + 1];
      if (e == 'n') {
        out.push_back('\n');
        ++i;
        continue;
      }
      if (e == 'r') {
        out.push_back('\r');
        ++i;
        continue;
      }
      if (e == '\\') {
        out.push_back('\\');
        ++i;
        continue;
      }
    }
    out.push_back(c);
  }
  return out;
}

RawCorpus parse_raw_corpus(std::string_view text) {
  RawCorpus corpus;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto bad = utf8::first_invalid(line)) {
      throw Error(ErrorKind::NonUtf8Input,
                  "line " + std::to_string(line_no) + " byte " + std::to_string(*bad));
    }
    if (line.empty()) continue;
    ++corpus.source_stats.loaded;
    auto tweet = unescape_line(line);
    if (tweet.starts_with(kRetweetPrefix)) {
      ++corpus.source_stats.retweets_dropped;
      continue;
    }
    if (!seen.insert(tweet).second) {
      ++corpus.source_stats.duplicates_dropped;
      continue;
    }
    corpus.tweets.push_back(std::move(tweet));
  }
  return corpus;
}

RawCorpus load_raw_corpus(const std::filesystem::path& path) {
  return parse_raw_corpus(read_file(path));
}

std::string format_raw_corpus(const std::vector<std::string>& tweets) {
  std::string out;
  for (const auto& t : tweets) {
    out += escape_line(t);
    out.push_back('\n');
  }
  return out;
}

void write_raw_corpus(const std::filesystem::path& path, const std::vector<std::string>& tweets) {
  write_file(path, format_raw_corpus(tweets));
}

std::size_t valid_count(std::size_t n, double valid_fraction) {
  return static_cast<std::size_t>(std::floor(valid_fraction * static_cast<double>(n) + 0.5));
}

std::pair<RawCorpus, RawCorpus> split_train_valid(const RawCorpus& corpus, const SplitSpec& spec) {
  if (corpus.tweets.empty()) throw Error(ErrorKind::EmptyCorpus, "cannot split an empty corpus");
  if (!(spec.valid_fraction > 0.0 && spec.valid_fraction < 1.0)) {
    throw Error(ErrorKind::ConfigInvalid, "valid_fraction must lie in (0, 1)");
  }
  const std::size_t n = corpus.tweets.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = Rng::derived(spec.seed, "split_train_valid");
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<bool> in_valid(n, false);
  const auto n_valid = valid_count(n, spec.valid_fraction);
  for (std::size_t i = 0; i < n_valid; ++i) in_valid[order[i]] = true;

  RawCorpus train;
  RawCorpus valid;
  train.source_stats = corpus.source_stats;
  valid.source_stats = corpus.source_stats;
  for (std::size_t i = 0; i < n; ++i) {
    (in_valid[i] ? valid : train).tweets.push_back(corpus.tweets[i]);
  }
  return {std::move(train), std::move(valid)};
}

}  // namespace humor::corpus

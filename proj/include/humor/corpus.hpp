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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "humor/config.hpp"

namespace humor::corpus {

/// One competition tweet with its humor label and star votes.
struct LabeledExample {
  std::string id;
  std::string text;  // raw UTF-8, may contain newlines
  bool is_humor = false;
  std::uint32_t votes_no = 0;
  std::array<std::uint32_t, 5> votes_star{};  // index k holds votes for k+1 stars
  std::optional<double> funniness;

  std::uint32_t total_star_votes() const;
  /// Vote-weighted mean of 1..5, or nullopt when nobody voted stars.
  std::optional<double> star_vote_mean() const;

  bool operator==(const LabeledExample&) const = default;
};

/// Column names of the labeled CSV. Overridable through `column.<field>` config keys.
struct ColumnMap {
  std::string id = "id";
  std::string text = "text";
  std::string is_humor = "is_humor";
  std::string votes_no = "votes_no";
  std::array<std::string, 5> votes_star = {"votes_1", "votes_2", "votes_3", "votes_4", "votes_5"};
  std::string funniness = "funniness_average";

  static ColumnMap from_config(const Config& config);
};

std::vector<LabeledExample> parse_labeled(std::string_view csv, const ColumnMap& columns = {},
                                          std::vector<std::string>* warnings = nullptr);
std::vector<LabeledExample> load_labeled(const std::filesystem::path& path,
                                         const ColumnMap& columns = {},
                                         std::vector<std::string>* warnings = nullptr);
std::string format_labeled(const std::vector<LabeledExample>& examples,
                           const ColumnMap& columns = {});
void write_labeled(const std::filesystem::path& path, const std::vector<LabeledExample>& examples,
                   const ColumnMap& columns = {});

/// Replaces every absent funniness score with 0.
std::vector<LabeledExample> fill_missing_scores(std::vector<LabeledExample> examples);

struct SourceStats {
  std::size_t loaded = 0;
  std::size_t retweets_dropped = 0;
  std::size_t duplicates_dropped = 0;

  bool operator==(const SourceStats&) const = default;
};

/// Unlabeled tweets with retweets and exact duplicates removed.
struct RawCorpus {
  std::vector<std::string> tweets;
  SourceStats source_stats;
};

inline constexpr std::string_view kRetweetPrefix = "RT @";

std::string escape_line(std::string_view tweet);
std::string unescape_line(std::string_view line);

RawCorpus parse_raw_corpus(std::string_view text);
RawCorpus load_raw_corpus(const std::filesystem::path& path);
std::string format_raw_corpus(const std::vector<std::string>& tweets);
void write_raw_corpus(const std::filesystem::path& path, const std::vector<std::string>& tweets);

struct SplitSpec {
  double valid_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// round-half-up(valid_fraction * n)
std::size_t valid_count(std::size_t n, double valid_fraction);

/// Seeded partition into (train, valid); both keep the corpus order.
std::pair<RawCorpus, RawCorpus> split_train_valid(const RawCorpus& corpus, const SplitSpec& spec);

}  // namespace humor::corpus

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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "humor/textclean.hpp"

namespace humor::subword {

using TokenId = std::int32_t;

/// Word-boundary marker prefixed to every word (U+2581).
inline constexpr std::string_view kSpaceMarker = "\xE2\x96\x81";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr TokenId kUnkId = 0;
inline constexpr TokenId kPadId = 1;
inline constexpr std::string_view kMergesFormatTag = "bpe-v1";

/// <unk>, <pad>, then the textclean reserved tokens.
std::vector<std::string> default_reserved_tokens();

struct BpeTrainOptions {
  std::size_t vocab_size = 30000;
  std::size_t min_pair_frequency = 2;
  std::vector<std::string> reserved = default_reserved_tokens();
};

/// Byte-pair-encoding model: ordered merge rules plus a dense token <-> id
/// vocabulary. Reserved tokens are atomic whole-word entries. Immutable once
/// built, so a single instance may be shared between threads.
class BpeModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  /// Greedy highest-frequency pair merging; ties go to the lexicographically
  /// smallest merged symbol. Throws EmptyCorpus or VocabTooSmall.
  static BpeModel train(std::span<const textclean::CleanedText> corpus,
                        const BpeTrainOptions& options);
  static BpeModel train(std::span<const std::string> corpus, const BpeTrainOptions& options);

  /// Rebuilds a model from its vocab and merges files' contents.
  static BpeModel from_text(std::string_view vocab_text, std::string_view merges_text,
                            const std::vector<std::string>& reserved = default_reserved_tokens());
  static BpeModel load(const std::filesystem::path& prefix,
                       const std::vector<std::string>& reserved = default_reserved_tokens());
  void save(const std::filesystem::path& prefix) const;

  std::string vocab_text() const;
  std::string merges_text() const;

  std::vector<TokenId> encode(std::string_view cleaned_text) const;
  /// Inverse of encode for text without unknown symbols. Throws UnknownId.
  std::string decode(std::span<const TokenId> ids) const;

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> id_of(std::string_view token) const;
  const std::vector<Merge>& merges() const { return merges_; }
  const std::vector<std::string>& reserved() const { return reserved_; }
  bool is_reserved(std::string_view token) const;

 private:
  BpeModel() = default;
  void index();
  TokenId add_token(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<Merge> merges_;
  std::unordered_map<std::string, std::size_t> merge_rank_;  // key: left + '\t' + right
  std::vector<std::string> reserved_;
};

/// Splits cleaned text into marker-prefixed symbol sequences (one per word)
/// and atomic reserved tokens.
struct PreToken {
  bool reserved = false;
  std::string text;  // reserved token, or the word without the marker
};
std::vector<PreToken> pre_tokenize(std::string_view cleaned_text,
                                   std::span<const std::string> reserved);

/// One training block for the language model. `inputs` and `targets` are
/// batch-major: element (b, t) lives at b * steps + t.
struct LmBlock {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<TokenId> inputs;
  std::vector<TokenId> targets;

  TokenId input(std::size_t b, std::size_t t) const { return inputs[b * steps + t]; }
  TokenId target(std::size_t b, std::size_t t) const { return targets[b * steps + t]; }
};

/// Reshapes a token stream into `batch_size` parallel streams cut into
/// blocks of `bptt` steps; targets are inputs shifted by one. The ragged
/// remainder is dropped. Throws CorpusTooSmall.
std::vector<LmBlock> make_lm_batches(std::span<const TokenId> ids, std::size_t batch_size,
                                     std::size_t bptt);

}  // namespace humor::subword

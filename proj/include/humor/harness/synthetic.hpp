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
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "humor/config.hpp"
#include "humor/corpus.hpp"
#include "humor/models.hpp"
#include "humor/subword.hpp"

namespace humor::harness {

/// Printed with every report computed on generated data.
inline constexpr std::string_view kSyntheticProvenanceNote =
    "NOTE: results computed on generated synthetic data; they are a functional "
    "check only and are not comparable to scores on the original competition data "
    "or the 475k-tweet corpus.";

/// Templated Spanish-like tweets for language-model training.
std::vector<std::string> make_synthetic_lm_corpus(std::size_t tweets, std::uint64_t seed);

/// Two-pattern labeled set: humorous tweets end in a laughter pattern,
/// the rest in a neutral one. About 40% are humorous; humorous rows carry
/// star votes, the others only "no" votes.
std::vector<corpus::LabeledExample> make_synthetic_labeled(std::size_t count, std::uint64_t seed);

/// Everything the desk-scale pipeline builds from generated data.
struct SyntheticPipeline {
  subword::BpeModel bpe;
  models::LanguageModel lm;
  models::LmTrainResult lm_result;
  std::vector<subword::TokenId> lm_stream;
  std::vector<corpus::LabeledExample> labeled;
};

/// Generates the LM corpus (`synthetic.lm_tweets`, truncated to
/// `synthetic.lm_tokens` tokens), trains the tokenizer (`bpe.vocab_size`) and
/// the LM (`lm.*`, `lm.train.*`) on it, and generates `synthetic.labeled`
/// labeled rows. Seeded by `synthetic.seed`.
SyntheticPipeline build_synthetic_pipeline(const Config& config);

}  // namespace humor::harness

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

#include "humor/harness/synthetic.hpp"

#include <array>

#include "humor/error.hpp"
#include "humor/rng.hpp"
#include "humor/textclean.hpp"

namespace humor::harness {

namespace {

constexpr std::array<std::string_view, 5> kSubjects = {"mi perro", "el vecino", "la profe",
                                                       "mi abuela", "el gato"};
constexpr std::array<std::string_view, 4> kVerbs = {"come", "mira", "busca", "canta"};
constexpr std::array<std::string_view, 4> kObjects = {"pan", "la tele", "una silla", "el sol"};
constexpr std::array<std::string_view, 3> kFunnyTails = {"jajaja no puedo más",
                                                         "y se cayó jajaja",
                                                         "JAJAJA qué risa!!!!"};
constexpr std::array<std::string_view, 3> kPlainTails = {"hoy por la tarde.", "en la casa.",
                                                         "según la noticia."};

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& options) {
  return options[static_cast<std::size_t>(rng.below(N))];
}

std::string sentence(Rng& rng, bool funny) {
  std::string s(pick(rng, kSubjects));
  s += " ";
  s += pick(rng, kVerbs);
  s += " ";
  s += pick(rng, kObjects);
  s += " ";
  s += funny ? pick(rng, kFunnyTails) : pick(rng, kPlainTails);
  return s;
}

}  // namespace

std::vector<std::string> make_synthetic_lm_corpus(std::size_t tweets, std::uint64_t seed) {
  auto rng = Rng::derived(seed, "synthetic_lm_corpus");
  std::vector<std::string> out;
  out.reserve(tweets);
  for (std::size_t i = 0; i < tweets; ++i) out.push_back(sentence(rng, i % 2 == 1));
  return out;
}

std::vector<corpus::LabeledExample> make_synthetic_labeled(std::size_t count, std::uint64_t seed) {
  auto rng = Rng::derived(seed, "synthetic_labeled");
  std::vector<corpus::LabeledExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    corpus::LabeledExample ex;
    ex.id = "syn" + std::to_string(i);
    ex.is_humor = rng.bernoulli(0.4);
    ex.text = sentence(rng, ex.is_humor);
    ex.votes_no = static_cast<std::uint32_t>(rng.below(3));
    if (ex.is_humor) {
      for (std::size_t v = 0; v < 3; ++v) ++ex.votes_star[static_cast<std::size_t>(rng.below(5))];
      ex.funniness = ex.star_vote_mean();
    } else {
      ex.votes_no += 3;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

SyntheticPipeline build_synthetic_pipeline(const Config& config) {
  const auto seed = static_cast<std::uint64_t>(config.get_int("synthetic.seed", 1));
  const auto tweets = static_cast<std::size_t>(config.get_int("synthetic.lm_tweets", 200));
  const auto tokens = static_cast<std::size_t>(config.get_int("synthetic.lm_tokens", 500));
  const auto rows = static_cast<std::size_t>(config.get_int("synthetic.labeled", 200));

  const auto corpus = make_synthetic_lm_corpus(tweets, seed);
  std::vector<textclean::CleanedText> cleaned;
  for (const auto& t : corpus) cleaned.push_back(textclean::clean(t));
  subword::BpeTrainOptions options;
  options.vocab_size = static_cast<std::size_t>(config.get_int("bpe.vocab_size", 200));
  auto bpe = subword::BpeModel::train(cleaned, options);

  auto stream = models::encode_stream(bpe, corpus);
  if (stream.size() < tokens) {
    throw Error(ErrorKind::CorpusTooSmall, "synthetic corpus yields " +
                                               std::to_string(stream.size()) + " tokens < " +
                                               std::to_string(tokens));
  }
  stream.resize(tokens);

  const auto lm_config = models::LmConfig::from_config(config);
  if (bpe.size() > lm_config.vocab_size) {
    throw Error(ErrorKind::ConfigInvalid, "lm.vocab_size is smaller than the tokenizer vocabulary");
  }
  auto lm = models::LanguageModel::build(lm_config, derive_seed(seed, "synthetic_lm_init"));
  const auto train_config =
      models::LmTrainConfig::from_config(config, "lm.train", models::pretrain_schedule());
  auto result = models::train_lm(lm, stream, {}, train_config, derive_seed(seed, "synthetic_lm"));
  return {std::move(bpe), std::move(lm), std::move(result), std::move(stream),
          make_synthetic_labeled(rows, seed)};
}

}  // namespace humor::harness

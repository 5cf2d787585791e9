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

#include "humor/subword.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "humor/error.hpp"
#include "humor/io.hpp"
#include "humor/utf8.hpp"

namespace humor::subword {

namespace {

using PairKey = std::uint64_t;

PairKey pair_key(std::uint32_t left, std::uint32_t right) {
  return (static_cast<PairKey>(left) << 32) | right;
}
std::uint32_t key_left(PairKey k) { return static_cast<std::uint32_t>(k >> 32); }
std::uint32_t key_right(PairKey k) { return static_cast<std::uint32_t>(k & 0xffffffffULL); }

std::string rank_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back('\t');
  key.append(right);
  return key;
}

std::vector<std::string> split_code_points(std::string_view word) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < word.size()) {
    const auto start = pos;
    utf8::next(word, pos);
    out.emplace_back(word.substr(start, pos - start));
  }
  return out;
}

// Symbol interning and word bookkeeping for one training run.
class MergeTrainer {
 public:
  MergeTrainer(const std::map<std::string, std::int64_t>& word_counts) {
    marker_ = intern(std::string(kSpaceMarker));
    for (const auto& [word, count] : word_counts) {
      std::vector<std::uint32_t> seq{marker_};
      for (auto& cp : split_code_points(word)) seq.push_back(intern(cp));
      words_.push_back(std::move(seq));
      counts_.push_back(count);
    }
    base_symbols_ = symbols_;
    stamp_.assign(words_.size(), 0);
    for (std::size_t w = 0; w < words_.size(); ++w) add_pairs(w);
  }

  const std::vector<std::string>& base_symbols() const { return base_symbols_; }
  const std::string& symbol(std::uint32_t id) const { return symbols_[id]; }

  /// Best pair by (count desc, merged string asc, left asc), skipping merged
  /// strings in `banned`.
  std::optional<PairKey> best_pair(std::size_t min_count,
                                   const std::set<std::string>& banned) const {
    std::optional<PairKey> best;
    std::int64_t best_count = 0;
    std::string best_merged;
    for (const auto& [key, count] : pair_counts_) {
      if (count < static_cast<std::int64_t>(min_count) || count < best_count) continue;
      const auto& l = symbols_[key_left(key)];
      const auto& r = symbols_[key_right(key)];
      std::string merged = l + r;
      if (banned.count(merged) != 0) continue;
      if (best && count == best_count) {
        if (merged > best_merged) continue;
        if (merged == best_merged && l >= symbols_[key_left(*best)]) continue;
      }
      best = key;
      best_count = count;
      best_merged = std::move(merged);
    }
    return best;
  }

  std::int64_t count_of(PairKey key) const {
    const auto it = pair_counts_.find(key);
    return it == pair_counts_.end() ? 0 : it->second;
  }

  void apply(PairKey key) {
    const auto left = key_left(key);
    const auto right = key_right(key);
    const auto merged = intern(symbols_[left] + symbols_[right]);
    ++generation_;
    const auto holders = std::move(pair_words_[key]);
    pair_words_.erase(key);
    for (const auto w : holders) {
      if (stamp_[w] == generation_) continue;
      stamp_[w] = generation_;
      auto& seq = words_[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        if (seq[i] == left && seq[i + 1] == right) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      remove_pairs(w);
      std::vector<std::uint32_t> next;
      next.reserve(seq.size());
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(seq[i]);
        }
      }
      seq = std::move(next);
      add_pairs(w);
    }
    pair_counts_.erase(key);
  }

 private:
  std::uint32_t intern(const std::string& s) {
    const auto it = symbol_ids_.find(s);
    if (it != symbol_ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(symbols_.size());
    symbols_.push_back(s);
    symbol_ids_.emplace(s, id);
    return id;
  }

  void add_pairs(std::size_t w) {
    const auto& seq = words_[w];
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const auto key = pair_key(seq[i], seq[i + 1]);
      pair_counts_[key] += counts_[w];
      pair_words_[key].push_back(static_cast<std::uint32_t>(w));
    }
  }

  void remove_pairs(std::size_t w) {
    const auto& seq = words_[w];
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const auto key = pair_key(seq[i], seq[i + 1]);
      const auto it = pair_counts_.find(key);
      it->second -= counts_[w];
      if (it->second == 0) pair_counts_.erase(it);
    }
  }

  std::uint32_t marker_ = 0;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::uint32_t> symbol_ids_;
  std::vector<std::string> base_symbols_;
  std::vector<std::vector<std::uint32_t>> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<PairKey, std::int64_t> pair_counts_;
  std::unordered_map<PairKey, std::vector<std::uint32_t>> pair_words_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t generation_ = 0;
};

}  // namespace

std::vector<std::string> default_reserved_tokens() {
  const textclean::ReservedTokens t;
  return {std::string(kUnkToken), std::string(kPadToken), t.bos, t.char_rep, t.word_rep,
          t.caps, t.newline};
}

std::vector<PreToken> pre_tokenize(std::string_view cleaned_text,
                                   std::span<const std::string> reserved) {
  std::vector<PreToken> out;
  if (cleaned_text.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto space = cleaned_text.find(' ', pos);
    const auto piece = cleaned_text.substr(pos, space == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : space - pos);
    const bool is_reserved = std::find(reserved.begin(), reserved.end(), piece) != reserved.end();
    out.push_back(PreToken{is_reserved, std::string(piece)});
    if (space == std::string_view::npos) break;
    pos = space + 1;
  }
  return out;
}

BpeModel BpeModel::train(std::span<const textclean::CleanedText> corpus,
                         const BpeTrainOptions& options) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& c : corpus) texts.push_back(c.text);
  return train(std::span<const std::string>(texts), options);
}

BpeModel BpeModel::train(std::span<const std::string> corpus, const BpeTrainOptions& options) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "tokenizer training corpus is empty");
  if (options.reserved.size() < 2 || options.reserved[0] != kUnkToken ||
      options.reserved[1] != kPadToken) {
    throw Error(ErrorKind::ConfigInvalid, "reserved tokens must start with <unk>, <pad>");
  }

  std::map<std::string, std::int64_t> word_counts;
  for (const auto& text : corpus) {
    if (const auto bad = utf8::first_invalid(text)) {
      throw Error(ErrorKind::NonUtf8Input, "byte offset " + std::to_string(*bad));
    }
    for (auto& pre : pre_tokenize(text, options.reserved)) {
      if (!pre.reserved) ++word_counts[pre.text];
    }
  }

  MergeTrainer trainer(word_counts);
  auto base = trainer.base_symbols();
  std::sort(base.begin(), base.end());
  if (options.vocab_size <= base.size() + options.reserved.size()) {
    throw Error(ErrorKind::VocabTooSmall,
                "vocab_size " + std::to_string(options.vocab_size) + " must exceed " +
                    std::to_string(base.size()) + " base symbols + " +
                    std::to_string(options.reserved.size()) + " reserved tokens");
  }

  BpeModel model;
  model.reserved_ = options.reserved;
  for (const auto& r : options.reserved) model.add_token(r);
  for (const auto& b : base) model.add_token(b);

  const std::set<std::string> banned(options.reserved.begin(), options.reserved.end());
  while (model.tokens_.size() < options.vocab_size) {
    const auto best = trainer.best_pair(std::max<std::size_t>(options.min_pair_frequency, 1),
                                        banned);
    if (!best) break;
    const auto& left = trainer.symbol(key_left(*best));
    const auto& right = trainer.symbol(key_right(*best));
    model.merges_.emplace_back(left, right);
    const auto merged = left + right;
    if (!model.ids_.contains(merged)) model.add_token(merged);
    trainer.apply(*best);
  }
  model.index();
  return model;
}

TokenId BpeModel::add_token(const std::string& token) {
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

void BpeModel::index() {
  ids_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw Error(ErrorKind::ConfigInvalid, "duplicate vocab entry '" + tokens_[i] + "'");
    }
  }
  merge_rank_.clear();
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    merge_rank_.emplace(rank_key(merges_[r].first, merges_[r].second), r);
  }
}

std::string BpeModel::vocab_text() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out.push_back('\n');
  }
  return out;
}

std::string BpeModel::merges_text() const {
  std::string out(kMergesFormatTag);
  out.push_back('\n');
  for (const auto& [l, r] : merges_) {
    out += l;
    out.push_back('\t');
    out += r;
    out.push_back('\n');
  }
  return out;
}

BpeModel BpeModel::from_text(std::string_view vocab_text, std::string_view merges_text,
                             const std::vector<std::string>& reserved) {
  auto lines = [](std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      out.emplace_back(text.substr(pos, end - pos));
      pos = end + 1;
    }
    return out;
  };
  BpeModel model;
  model.tokens_ = lines(vocab_text);
  const auto merge_lines = lines(merges_text);
  if (merge_lines.empty() || merge_lines.front() != kMergesFormatTag) {
    throw Error(ErrorKind::ConfigInvalid, "merges file lacks the bpe-v1 format tag");
  }
  for (std::size_t i = 1; i < merge_lines.size(); ++i) {
    const auto& line = merge_lines[i];
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::ConfigInvalid, "merges line " + std::to_string(i + 1));
    }
    model.merges_.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  for (const auto& r : reserved) {
    if (std::find(model.tokens_.begin(), model.tokens_.end(), r) != model.tokens_.end()) {
      model.reserved_.push_back(r);
    }
  }
  model.index();
  if (model.tokens_.size() < 2 || model.tokens_[kUnkId] != kUnkToken ||
      model.tokens_[kPadId] != kPadToken) {
    throw Error(ErrorKind::ConfigInvalid, "vocab must start with <unk>, <pad>");
  }
  return model;
}

BpeModel BpeModel::load(const std::filesystem::path& prefix,
                        const std::vector<std::string>& reserved) {
  return from_text(read_file(prefix.string() + ".vocab"), read_file(prefix.string() + ".merges"),
                   reserved);
}

void BpeModel::save(const std::filesystem::path& prefix) const {
  write_file(prefix.string() + ".vocab", vocab_text());
  write_file(prefix.string() + ".merges", merges_text());
}

const std::string& BpeModel::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error(ErrorKind::UnknownId, std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> BpeModel::id_of(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool BpeModel::is_reserved(std::string_view token) const {
  return std::find(reserved_.begin(), reserved_.end(), token) != reserved_.end();
}

std::vector<TokenId> BpeModel::encode(std::string_view cleaned_text) const {
  std::vector<TokenId> out;
  for (const auto& pre : pre_tokenize(cleaned_text, reserved_)) {
    if (pre.reserved) {
      out.push_back(ids_.at(pre.text));
      continue;
    }
    std::vector<std::string> symbols{std::string(kSpaceMarker)};
    for (auto& cp : split_code_points(pre.text)) symbols.push_back(std::move(cp));

    while (symbols.size() > 1) {
      std::size_t best_rank = std::numeric_limits<std::size_t>::max();
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        const auto it = merge_rank_.find(rank_key(symbols[i], symbols[i + 1]));
        if (it != merge_rank_.end() && it->second < best_rank) best_rank = it->second;
      }
      if (best_rank == std::numeric_limits<std::size_t>::max()) break;
      const auto& [left, right] = merges_[best_rank];
      std::vector<std::string> next;
      next.reserve(symbols.size());
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
          next.push_back(left + right);
          ++i;
        } else {
          next.push_back(std::move(symbols[i]));
        }
      }
      symbols = std::move(next);
    }
    for (const auto& s : symbols) {
      const auto it = ids_.find(s);
      out.push_back(it == ids_.end() ? kUnkId : it->second);
    }
  }
  return out;
}

std::string BpeModel::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (const auto id : ids) {
    const auto& tok = token(id);
    if (id == kPadId) continue;
    if (is_reserved(tok)) {
      out.push_back(' ');
      out += tok;
      continue;
    }
    std::size_t pos = 0;
    while (pos < tok.size()) {
      if (tok.compare(pos, kSpaceMarker.size(), kSpaceMarker) == 0) {
        out.push_back(' ');
        pos += kSpaceMarker.size();
      } else {
        out.push_back(tok[pos]);
        ++pos;
      }
    }
  }
  if (!out.empty() && out.front() == ' ') out.erase(0, 1);
  return out;
}

std::vector<LmBlock> make_lm_batches(std::span<const TokenId> ids, std::size_t batch_size,
                                     std::size_t bptt) {
  if (batch_size == 0 || bptt == 0) {
    throw Error(ErrorKind::ConfigInvalid, "batch_size and bptt must be positive");
  }
  if (ids.size() < batch_size * (bptt + 1)) {
    throw Error(ErrorKind::CorpusTooSmall,
                std::to_string(ids.size()) + " tokens < batch_size*(bptt+1) = " +
                    std::to_string(batch_size * (bptt + 1)));
  }
  const std::size_t stream_len = ids.size() / batch_size;
  const std::size_t n_blocks = (stream_len - 1) / bptt;
  std::vector<LmBlock> blocks;
  blocks.reserve(n_blocks);
  for (std::size_t k = 0; k < n_blocks; ++k) {
    LmBlock block;
    block.batch = batch_size;
    block.steps = bptt;
    block.inputs.resize(batch_size * bptt);
    block.targets.resize(batch_size * bptt);
    for (std::size_t b = 0; b < batch_size; ++b) {
      const auto base = b * stream_len + k * bptt;
      for (std::size_t t = 0; t < bptt; ++t) {
        block.inputs[b * bptt + t] = ids[base + t];
        block.targets[b * bptt + t] = ids[base + t + 1];
      }
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace humor::subword

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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "humor/nn/tensor.hpp"

namespace humor::nn {

/// Binary container for named float tensors:
///   "MULM1" | u64 record count | records...
///   record: u32 name length | name bytes | u32 rank | u64 extents[rank] |
///           u8 element tag | payload
/// Tag 1 is float32 values; tag 2 is raw UTF-8 bytes, used for the single
/// "__meta__" record that carries `key=value` lines (model config, tokenizer
/// reference, format version). All integers and floats are little-endian.
struct ModelCheckpoint {
  std::map<std::string, std::string> metadata;
  std::vector<ParamTensor<float>> tensors;

  const ParamTensor<float>* find(std::string_view name) const;
};

inline constexpr std::string_view kCheckpointMagic = "MULM1";
inline constexpr std::string_view kMetaRecord = "__meta__";

std::string serialize_checkpoint(const ModelCheckpoint& checkpoint);
/// Throws Error(BadCheckpoint) on unknown magic or truncated data.
ModelCheckpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& checkpoint);
/// Throws Error(MissingCheckpoint) when the file does not exist.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace humor::nn

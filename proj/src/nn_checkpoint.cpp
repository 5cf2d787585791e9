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

#include "humor/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "humor/error.hpp"
#include "humor/io.hpp"

namespace humor::nn {

namespace {

constexpr std::uint8_t kTagFloat32 = 1;
constexpr std::uint8_t kTagUtf8 = 2;

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string_view take(std::size_t n) {
    need(n);
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorKind::BadCheckpoint, "truncated checkpoint");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const ParamTensor<float>* ModelCheckpoint::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string serialize_checkpoint(const ModelCheckpoint& checkpoint) {
  std::string out(kCheckpointMagic);
  put_le<std::uint64_t>(out, checkpoint.tensors.size() + 1);

  std::string meta;
  for (const auto& [k, v] : checkpoint.metadata) meta += k + "=" + v + "\n";
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kMetaRecord.size()));
  out += kMetaRecord;
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint64_t>(out, meta.size());
  out.push_back(static_cast<char>(kTagUtf8));
  out += meta;

  for (const auto& t : checkpoint.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (const auto e : t.shape) put_le<std::uint64_t>(out, e);
    out.push_back(static_cast<char>(kTagFloat32));
    for (const float v : t.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

ModelCheckpoint deserialize_checkpoint(std::string_view bytes) {
  if (!bytes.starts_with(kCheckpointMagic)) {
    throw Error(ErrorKind::BadCheckpoint, "unknown checkpoint magic");
  }
  Reader in(bytes.substr(kCheckpointMagic.size()));
  ModelCheckpoint checkpoint;
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto name_len = in.get<std::uint32_t>();
    std::string name(in.take(name_len));
    const auto rank = in.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& e : shape) e = static_cast<std::size_t>(in.get<std::uint64_t>());
    const auto tag = in.get<std::uint8_t>();
    if (tag == kTagUtf8) {
      const auto text = in.take(numel(shape));
      std::size_t pos = 0;
      while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(pos, end - pos);
        const auto eq = line.find('=');
        if (eq != std::string_view::npos) {
          checkpoint.metadata[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
        }
        pos = end + 1;
      }
      continue;
    }
    if (tag != kTagFloat32) {
      throw Error(ErrorKind::BadCheckpoint, "unknown element tag in record '" + name + "'");
    }
    ParamTensor<float> t(std::move(name), std::move(shape));
    for (auto& v : t.values) v = std::bit_cast<float>(in.get<std::uint32_t>());
    checkpoint.tensors.push_back(std::move(t));
  }
  if (!in.done()) throw Error(ErrorKind::BadCheckpoint, "trailing bytes after last record");
  return checkpoint;
}

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& checkpoint) {
  write_file(path, serialize_checkpoint(checkpoint));
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::MissingCheckpoint, path.string());
  }
  return deserialize_checkpoint(read_file(path));
}

}  // namespace humor::nn

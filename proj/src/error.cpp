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

#include "humor/error.hpp"

namespace humor {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::InvalidFoldCount: return "InvalidFoldCount";
    case ErrorKind::VocabTooSmall: return "VocabTooSmall";
    case ErrorKind::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::NonUtf8Input: return "NonUtf8Input";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorKind::UnknownId: return "UnknownId";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::ClassTooSmall: return "ClassTooSmall";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::BadCheckpoint: return "BadCheckpoint";
    case ErrorKind::Io: return "Io";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NoForwardRecorded: return "NoForwardRecorded";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid:
    case ErrorKind::InvalidFoldCount:
    case ErrorKind::VocabTooSmall:
    case ErrorKind::MissingCheckpoint:
      return 2;
    case ErrorKind::ShapeMismatch:
    case ErrorKind::NoForwardRecorded:
    case ErrorKind::NonFinite:
    case ErrorKind::NonFiniteGradient:
      return 4;
    default:
      return 3;
  }
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + "(" + detail + ")"),
      kind_(kind),
      detail_(detail) {}

}  // namespace humor

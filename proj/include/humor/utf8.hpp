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
#include <optional>
#include <string>
#include <string_view>

namespace humor::utf8 {

/// Byte offset of the first ill-formed sequence, or nullopt if `text` is valid.
std::optional<std::size_t> first_invalid(std::string_view text);

inline bool is_valid(std::string_view text) { return !first_invalid(text).has_value(); }

/// Decodes the code point at `pos` and advances `pos`. Input must be valid.
char32_t next(std::string_view text, std::size_t& pos);

void append(std::string& out, char32_t cp);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

// Unicode general-category predicates.
bool is_letter(char32_t cp);   // L* or M* (combining marks stay with their base)
bool is_number(char32_t cp);   // N*
bool is_space(char32_t cp);    // White_Space
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
char32_t to_lower(char32_t cp);

/// Full-string lowercase, code point by code point.
std::string lower(std::string_view text);

}  // namespace humor::utf8

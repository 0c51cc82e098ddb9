// Copyright 2026 The Chunkwise Authors.
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

// UTF-8 / code point helpers shared by every module. Offsets throughout the
// library count Unicode scalar values, so documents are held as UTF-32.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace chunkwise {

// Decodes UTF-8; invalid sequences become U+FFFD.
std::u32string utf8_to_u32(std::string_view in);
std::string u32_to_utf8(std::u32string_view in);

bool is_space(char32_t c);
inline bool is_newline(char32_t c) {
  return c == U'\n' || c == U'\r' || c == 0x85 || c == 0x2028 || c == 0x2029;
}

// Whitespace-delimited token count.
std::size_t count_words(std::u32string_view text);
std::size_t count_words(std::string_view utf8);

// Splits on Unicode whitespace and rejoins with a single ASCII space.
std::u32string collapse_whitespace(std::u32string_view text);
std::string collapse_whitespace(std::string_view utf8);

// \r\n and lone \r become \n, then NFC.
std::string normalize_text(std::string_view utf8);

// Lowercased alphanumeric runs (Unicode-aware); everything else separates.
std::vector<std::string> word_tokens(std::string_view utf8);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace chunkwise

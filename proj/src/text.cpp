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

#include "chunkwise/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <cstdio>

#include "chunkwise/error.hpp"

namespace chunkwise {

std::u32string utf8_to_u32(std::string_view in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t j) {
    return static_cast<unsigned char>(in[j]);
  };
  while (i < in.size()) {
    const unsigned char c = byte(i);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6) {
      len = 2;
    } else if ((c >> 4) == 0xE) {
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      len = 4;
    }
    if (len > 1) {
      bool ok = i + len <= in.size();
      char32_t v = c & (0xFF >> (len + 1));
      for (std::size_t k = 1; ok && k < len; ++k) {
        const unsigned char cc = byte(i + k);
        if ((cc >> 6) != 0x2) {
          ok = false;
        } else {
          v = (v << 6) | (cc & 0x3F);
        }
      }
      static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      if (ok && v >= kMin[len] && v <= 0x10FFFF && (v < 0xD800 || v > 0xDFFF)) {
        cp = v;
      } else {
        len = 1;
      }
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string u32_to_utf8(std::u32string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char32_t cp : in) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

bool is_space(char32_t c) {
  if (c == U' ' || (c >= 0x09 && c <= 0x0D)) return true;
  if (c < 0x85) return false;
  switch (c) {
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

std::size_t count_words(std::u32string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char32_t c : text) {
    const bool space = is_space(c);
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::size_t count_words(std::string_view utf8) {
  return count_words(utf8_to_u32(utf8));
}

std::u32string collapse_whitespace(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char32_t c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string collapse_whitespace(std::string_view utf8) {
  return u32_to_utf8(collapse_whitespace(utf8_to_u32(utf8)));
}

std::string normalize_text(std::string_view utf8) {
  std::string unix_newlines;
  unix_newlines.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size(); ++i) {
    if (utf8[i] == '\r') {
      unix_newlines.push_back('\n');
      if (i + 1 < utf8.size() && utf8[i + 1] == '\n') ++i;
    } else {
      unix_newlines.push_back(utf8[i]);
    }
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kIo, "ICU NFC normalizer unavailable");
  }
  const icu::UnicodeString source = icu::UnicodeString::fromUTF8(unix_newlines);
  const icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kMalformedRecord, "NFC normalization failed");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::vector<std::string> word_tokens(std::string_view utf8) {
  std::vector<std::string> tokens;
  std::u32string current;
  const auto flush = [&] {
    if (!current.empty()) tokens.push_back(u32_to_utf8(current));
    current.clear();
  };
  for (char32_t c : utf8_to_u32(utf8)) {
    if (c < 0x80) {
      if (c >= U'A' && c <= U'Z') {
        current.push_back(c - U'A' + U'a');
      } else if ((c >= U'a' && c <= U'z') || (c >= U'0' && c <= U'9')) {
        current.push_back(c);
      } else {
        flush();
      }
    } else if (u_isalnum(static_cast<UChar32>(c))) {
      current.push_back(static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace chunkwise

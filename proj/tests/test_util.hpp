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

// Shared helpers for the unit and acceptance suites: synthetic documents and
// structural checks that do not go through the chunkers under test.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chunkwise/segmentation.hpp"
#include "chunkwise/text.hpp"

namespace chunkwise::testing {

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(CHUNKWISE_TEST_DATA) + "/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture_path(const std::string& name) {
  return std::string(CHUNKWISE_TEST_DATA) + "/" + name;
}

struct SyntheticDoc {
  std::string text;
  std::size_t sentences = 0;
};

// Paragraphs of capitalized sentences over a small vocabulary. Sentence
// lengths are mostly short with occasional very long ones so oversize
// sentences show up at every theta. Sentences never contain line breaks, so
// the generator's sentence count is exact.
inline SyntheticDoc random_document(std::mt19937_64& rng, std::size_t target_words,
                                    bool allow_long = true) {
  static const std::vector<std::string> vocab = {
      "river", "stone", "lantern", "harbor", "window", "quiet", "market", "winter",
      "letter", "garden", "signal", "copper", "morning", "bridge", "orchard", "paper",
      "silver", "engine", "island", "shadow", "ledger", "candle", "meadow", "thread",
      "walked", "opened", "carried", "watched", "found", "kept", "gave", "said",
      "slowly", "again", "under", "beside", "toward", "through", "and", "with"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> pct(0, 99);
  std::uniform_int_distribution<std::size_t> short_len(1, 30);
  std::uniform_int_distribution<std::size_t> long_len(120, 620);
  std::uniform_int_distribution<int> para_len(1, 9);
  const char* enders[] = {".", "!", "?", "...", ".\""};

  SyntheticDoc doc;
  std::size_t words = 0;
  while (words < target_words) {
    const int sentences = para_len(rng);
    std::string paragraph;
    for (int s = 0; s < sentences && words < target_words; ++s) {
      const std::size_t n = allow_long && pct(rng) < 3 ? long_len(rng) : short_len(rng);
      std::string sentence;
      for (std::size_t w = 0; w < n; ++w) {
        std::string word = vocab[pick(rng)];
        if (w == 0) word[0] = static_cast<char>(word[0] - 'a' + 'A');
        if (w > 0 && pct(rng) < 4) {
          sentence += "Dr. Vale";
          ++words;
          sentence += ' ';
        }
        if (w > 0 && pct(rng) < 5) word += ',';
        sentence += word;
        sentence += ' ';
        ++words;
      }
      sentence.pop_back();
      sentence += enders[pct(rng) % 5];
      if (!paragraph.empty()) paragraph += pct(rng) < 10 ? "  " : " ";
      paragraph += sentence;
      ++doc.sentences;
    }
    if (!doc.text.empty()) doc.text += pct(rng) < 20 ? "\n\n\n" : "\n\n";
    doc.text += paragraph;
  }
  return doc;
}

inline std::string joined_collapsed(const std::vector<std::string>& pieces) {
  std::string all;
  for (const auto& p : pieces) {
    all += p;
    all += ' ';
  }
  return collapse_whitespace(all);
}

}  // namespace chunkwise::testing

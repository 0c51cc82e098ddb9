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

// Logits-guided chunking: within each window of sentences, the break goes
// after the prefix whose continuation is most likely to be end-of-sequence.
// Windows are fed from a recursive chunk stream; whatever follows the break
// is carried into the next window.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chunkwise/providers.hpp"
#include "chunkwise/segmentation.hpp"

namespace chunkwise {

struct BreakCandidate {
  std::size_t sentence_index = 0;  // 1-based prefix length
  double eos_score = 0.0;
};

struct LGConfig {
  std::size_t theta = 200;
  std::size_t stop_threshold = 200;
  std::size_t window_cap = 400;
  std::vector<std::string> separator_hierarchy = default_separator_hierarchy();

  // stop_threshold = theta, window_cap = 2 * theta.
  static LGConfig with_theta(std::size_t theta);

  // stop_threshold <= theta <= window_cap <= 2 * theta.
  void validate() const;
};

struct LogitsChunkStats {
  std::size_t sentences = 0;
  std::size_t windows = 0;
  std::size_t provider_calls = 0;
  std::size_t prefixes_scored = 0;
  std::size_t forced_breaks = 0;
  std::size_t max_window_words = 0;
  std::size_t max_remainder_words = 0;
};

// One provider call for all prefixes. Throws ProviderProtocolError on a
// length mismatch or a non-finite score.
std::vector<BreakCandidate> eos_scores(LogitsProvider& provider,
                                       const std::string& rho,
                                       std::span<const std::string> sentence_prefixes);

// argmax of eos_score, ties to the larger index. Throws NoCandidates.
std::size_t select_break(std::span<const BreakCandidate> candidates);

std::vector<Chunk> logits_chunk(
    const Document& doc, const LGConfig& cfg, LogitsProvider& provider,
    const std::string& rho = std::string(kDefaultPrompt),
    LogitsChunkStats* stats = nullptr,
    const AbbreviationList& abbreviations = AbbreviationList::defaults());

// logits_chunk output tagged as parent level.
std::vector<Chunk> lg_parent_chunks(
    const Document& doc, const LGConfig& cfg, LogitsProvider& provider,
    const std::string& rho = std::string(kDefaultPrompt),
    const AbbreviationList& abbreviations = AbbreviationList::defaults());

}  // namespace chunkwise

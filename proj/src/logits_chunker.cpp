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

#include "chunkwise/logits_chunker.hpp"

#include <algorithm>
#include <cmath>

#include "chunkwise/error.hpp"

namespace chunkwise {

LGConfig LGConfig::with_theta(std::size_t theta) {
  LGConfig cfg;
  cfg.theta = theta;
  cfg.stop_threshold = theta;
  cfg.window_cap = 2 * theta;
  return cfg;
}

void LGConfig::validate() const {
  if (theta == 0) throw Error(ErrorCode::kInvalidConfig, "theta must be > 0");
  if (!(stop_threshold <= theta && theta <= window_cap && window_cap <= 2 * theta)) {
    throw Error(ErrorCode::kInvalidConfig,
                "need stop_threshold <= theta <= window_cap <= 2*theta (got " +
                    std::to_string(stop_threshold) + ", " + std::to_string(theta) +
                    ", " + std::to_string(window_cap) + ")");
  }
}

std::vector<BreakCandidate> eos_scores(LogitsProvider& provider,
                                       const std::string& rho,
                                       std::span<const std::string> sentence_prefixes) {
  if (sentence_prefixes.empty()) {
    throw Error(ErrorCode::kNoCandidates, "no sentence prefixes to score");
  }
  const auto scores = provider.eos_log_probs(rho, sentence_prefixes);
  if (scores.size() != sentence_prefixes.size()) {
    throw Error(ErrorCode::kProviderProtocolError,
                "provider returned " + std::to_string(scores.size()) +
                    " scores for " + std::to_string(sentence_prefixes.size()) +
                    " prefixes");
  }
  std::vector<BreakCandidate> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorCode::kProviderProtocolError,
                  "non-finite score for prefix " + std::to_string(i + 1));
    }
    out.push_back({i + 1, scores[i]});
  }
  return out;
}

std::size_t select_break(std::span<const BreakCandidate> candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoCandidates, "empty candidate list");
  }
  const BreakCandidate* best = &candidates.front();
  for (const auto& c : candidates.subspan(1)) {
    if (c.eos_score >= best->eos_score) best = &c;
  }
  return best->sentence_index;
}

std::vector<Chunk> logits_chunk(const Document& doc, const LGConfig& cfg,
                                LogitsProvider& provider, const std::string& rho,
                                LogitsChunkStats* stats,
                                const AbbreviationList& abbreviations) {
  cfg.validate();
  const auto sentences = split_sentences(doc.text, abbreviations);
  const auto feed = recursive_chunk_ranges(doc.text, sentences, {0, sentences.size()},
                                           cfg.theta, cfg.separator_hierarchy);
  std::vector<std::size_t> prefix_words(sentences.size() + 1, 0);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    prefix_words[i + 1] = prefix_words[i] + sentences[i].word_count;
  }
  const auto words = [&](std::size_t first, std::size_t last) {
    return prefix_words[last] - prefix_words[first];
  };

  LogitsChunkStats local;
  local.sentences = sentences.size();
  std::vector<Chunk> chunks;
  std::size_t pos = 0;
  std::size_t window_last = 0;
  std::size_t next_feed = 0;
  while (true) {
    if (next_feed < feed.size()) window_last = feed[next_feed++].last;
    if (pos >= window_last) break;
    const bool exhausted = next_feed == feed.size();
    const std::size_t window_words = words(pos, window_last);
    ++local.windows;
    local.max_window_words = std::max(local.max_window_words, window_words);

    std::size_t take = 0;
    if (exhausted && window_words < cfg.stop_threshold) {
      take = window_last - pos;
    } else if (window_words > cfg.window_cap) {
      take = 1;
      while (pos + take < window_last && words(pos, pos + take + 1) <= cfg.window_cap) {
        ++take;
      }
      ++local.forced_breaks;
    } else {
      std::vector<std::string> prefixes;
      prefixes.reserve(window_last - pos);
      for (std::size_t s = pos; s < window_last; ++s) {
        prefixes.push_back(span_text(doc, sentences[pos].start, sentences[s].end));
      }
      try {
        const auto candidates = eos_scores(provider, rho, prefixes);
        take = select_break(candidates);
      } catch (const Error& e) {
        throw Error(e.code(), "document '" + doc.id + "', window of sentences [" +
                                  std::to_string(pos) + ", " +
                                  std::to_string(window_last) + "): " + e.message());
      }
      ++local.provider_calls;
      local.prefixes_scored += prefixes.size();
    }
    chunks.push_back(make_chunk(doc, sentences, {pos, pos + take}, ChunkLevel::kParent));
    pos += take;
    local.max_remainder_words =
        std::max(local.max_remainder_words, words(pos, window_last));
  }
  if (stats) *stats = local;
  return chunks;
}

std::vector<Chunk> lg_parent_chunks(const Document& doc, const LGConfig& cfg,
                                    LogitsProvider& provider, const std::string& rho,
                                    const AbbreviationList& abbreviations) {
  auto chunks = logits_chunk(doc, cfg, provider, rho, nullptr, abbreviations);
  for (auto& c : chunks) {
    c.level = ChunkLevel::kParent;
    c.chunk_id = make_chunk_id(c.doc_id, c.start, c.end, c.level);
  }
  return chunks;
}

}  // namespace chunkwise

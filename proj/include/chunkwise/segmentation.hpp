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

// Sentence segmentation and the sentence-aligned chunkers: recursive
// fixed-size chunking over a separator hierarchy and the paragraph baseline.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace chunkwise {

struct Document {
  std::string id;
  std::u32string text;
  std::size_t word_count = 0;

  // Throws EmptyInput when id is empty or text has no non-whitespace.
  static Document make(std::string id, std::string_view utf8_text);
};

// [start, end) in code points; never starts or ends on whitespace.
struct SentenceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t word_count = 0;

  bool operator==(const SentenceSpan&) const = default;
};

enum class ChunkLevel { kParent, kChildHalf, kChildQuarter };

std::string_view level_name(ChunkLevel level);
ChunkLevel parse_level(std::string_view name);

struct Chunk {
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t word_count = 0;
  ChunkLevel level = ChunkLevel::kParent;
  std::string chunk_id;

  bool operator==(const Chunk&) const = default;
};

std::string make_chunk_id(std::string_view doc_id, std::size_t start,
                          std::size_t end, ChunkLevel level);

// Half-open range of sentence indices.
struct SentenceRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first; }
  bool operator==(const SentenceRange&) const = default;
};

// The empty separator matches every sentence boundary.
inline constexpr std::string_view kSentenceSeparator = "";

std::vector<std::string> default_separator_hierarchy();

struct ChunkerConfig {
  std::size_t theta = 200;
  std::vector<std::string> separator_hierarchy = default_separator_hierarchy();
  std::size_t stop_threshold = 200;
  std::size_t window_cap = 400;

  // theta > 0, window_cap >= theta, stop_threshold <= theta.
  void validate() const;
};

class AbbreviationList {
 public:
  AbbreviationList() = default;
  explicit AbbreviationList(std::span<const std::string> tokens);

  // Built-in English list.
  static const AbbreviationList& defaults();
  // One token per line, UTF-8; blank lines and lines starting with '#' skipped.
  static AbbreviationList load(const std::filesystem::path& path);

  bool contains(std::u32string_view token) const;
  std::size_t size() const { return tokens_.size(); }

 private:
  std::unordered_set<std::u32string> tokens_;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);

  // Throws DuplicateDocId.
  void add(Document doc);
  // Throws MissingDocument.
  const Document& at(std::string_view id) const;
  bool contains(std::string_view id) const;

  const std::vector<Document>& documents() const { return docs_; }
  std::size_t size() const { return docs_.size(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Rule-based: newlines always end a sentence; a run of . ! ? (plus closing
// quotes/brackets) ends one when followed by whitespace, unless the token is a
// guarded abbreviation, a single-letter initial, or the next word starts
// lowercase. Throws EmptyInput on whitespace-only text.
std::vector<SentenceSpan> split_sentences(
    std::u32string_view text,
    const AbbreviationList& abbreviations = AbbreviationList::defaults());

// Greedy recursive chunking of sentences [range.first, range.last) of text.
// Pieces never exceed theta words unless they are a single sentence.
std::vector<SentenceRange> recursive_chunk_ranges(
    std::u32string_view text, std::span<const SentenceSpan> sentences,
    SentenceRange range, std::size_t theta,
    std::span<const std::string> hierarchy);

Chunk make_chunk(const Document& doc, std::span<const SentenceSpan> sentences,
                 SentenceRange range, ChunkLevel level);

std::vector<Chunk> recursive_chunk(
    const Document& doc, std::size_t theta,
    std::span<const std::string> hierarchy = default_separator_hierarchy(),
    ChunkLevel level = ChunkLevel::kParent,
    const AbbreviationList& abbreviations = AbbreviationList::defaults());

// One chunk per blank-line-delimited paragraph.
std::vector<Chunk> paragraph_chunk(
    const Document& doc,
    const AbbreviationList& abbreviations = AbbreviationList::defaults());

// Verbatim UTF-8 text of the chunk. Throws MissingDocument.
std::string chunk_text(const Chunk& chunk, const Corpus& corpus);
std::string span_text(const Document& doc, std::size_t start, std::size_t end);

}  // namespace chunkwise

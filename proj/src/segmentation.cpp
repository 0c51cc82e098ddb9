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

#include "chunkwise/segmentation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "chunkwise/error.hpp"
#include "chunkwise/text.hpp"

namespace chunkwise {
namespace {

constexpr const char* kDefaultAbbreviations[] = {
    "Mr.",   "Mrs.",  "Ms.",   "Dr.",   "Prof.", "Sr.",   "Jr.",  "St.",
    "Mt.",   "Ft.",   "vs.",   "etc.",  "e.g.",  "i.e.",  "cf.",  "al.",
    "Inc.",  "Ltd.",  "Co.",   "Corp.", "No.",   "Nos.",  "Vol.", "Vols.",
    "Fig.",  "Figs.", "Eq.",   "Sec.",  "Ch.",   "pp.",   "p.",   "ed.",
    "Gen.",  "Col.",  "Capt.", "Lt.",   "Sgt.",  "Maj.",  "Cmdr.", "Adm.",
    "Rev.",  "Hon.",  "Gov.",  "Sen.",  "Rep.",  "Pres.", "Messrs.",
    "Jan.",  "Feb.",  "Aug.",  "Sept.", "Oct.",  "Nov.",  "Dec.",
    "a.m.",  "p.m.",  "U.S.",  "U.K.",  "approx.", "dept.", "est.",
};

bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_closer(char32_t c) {
  switch (c) {
    case U'"': case U'\'': case U')': case U']': case U'}':
    case 0x2019: case 0x201D: case 0xBB:
      return true;
    default:
      return false;
  }
}

bool is_opener(char32_t c) {
  switch (c) {
    case U'"': case U'\'': case U'(': case U'[': case U'{':
    case 0x2018: case 0x201C: case 0xAB:
      return true;
    default:
      return false;
  }
}

bool is_lower_ascii(char32_t c) { return c >= U'a' && c <= U'z'; }
bool is_alpha_ascii(char32_t c) {
  return is_lower_ascii(c) || (c >= U'A' && c <= U'Z');
}

std::size_t range_words(std::span<const SentenceSpan> sentences,
                        SentenceRange r) {
  std::size_t n = 0;
  for (std::size_t i = r.first; i < r.last; ++i) n += sentences[i].word_count;
  return n;
}

}  // namespace

Document Document::make(std::string id, std::string_view utf8_text) {
  if (id.empty()) throw Error(ErrorCode::kEmptyInput, "document id is empty");
  Document doc;
  doc.id = std::move(id);
  doc.text = utf8_to_u32(utf8_text);
  doc.word_count = count_words(doc.text);
  if (doc.word_count == 0) {
    throw Error(ErrorCode::kEmptyInput, "document '" + doc.id + "' is empty");
  }
  return doc;
}

std::string_view level_name(ChunkLevel level) {
  switch (level) {
    case ChunkLevel::kParent: return "parent";
    case ChunkLevel::kChildHalf: return "child_half";
    case ChunkLevel::kChildQuarter: return "child_quarter";
  }
  return "parent";
}

ChunkLevel parse_level(std::string_view name) {
  if (name == "parent") return ChunkLevel::kParent;
  if (name == "child_half") return ChunkLevel::kChildHalf;
  if (name == "child_quarter") return ChunkLevel::kChildQuarter;
  throw Error(ErrorCode::kMalformedRecord,
              "unknown chunk level '" + std::string(name) + "'");
}

std::string make_chunk_id(std::string_view doc_id, std::size_t start,
                          std::size_t end, ChunkLevel level) {
  std::string id(doc_id);
  id += ':';
  id += std::to_string(start);
  id += '-';
  id += std::to_string(end);
  id += ':';
  id += level_name(level);
  return id;
}

std::vector<std::string> default_separator_hierarchy() {
  return {"\n\n", "\n", std::string(kSentenceSeparator), " "};
}

void ChunkerConfig::validate() const {
  if (theta == 0) throw Error(ErrorCode::kInvalidConfig, "theta must be > 0");
  if (window_cap < theta) {
    throw Error(ErrorCode::kInvalidConfig, "window_cap must be >= theta");
  }
  if (stop_threshold > theta) {
    throw Error(ErrorCode::kInvalidConfig, "stop_threshold must be <= theta");
  }
}

AbbreviationList::AbbreviationList(std::span<const std::string> tokens) {
  for (const auto& t : tokens) {
    if (!t.empty()) tokens_.insert(utf8_to_u32(t));
  }
}

const AbbreviationList& AbbreviationList::defaults() {
  static const AbbreviationList list = [] {
    std::vector<std::string> tokens(std::begin(kDefaultAbbreviations),
                                    std::end(kDefaultAbbreviations));
    return AbbreviationList(tokens);
  }();
  return list;
}

AbbreviationList AbbreviationList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open abbreviation list " + path.string());
  }
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    tokens.push_back(line.substr(b, e - b + 1));
  }
  return AbbreviationList(tokens);
}

bool AbbreviationList::contains(std::u32string_view token) const {
  return tokens_.contains(std::u32string(token));
}

Corpus::Corpus(std::vector<Document> docs) {
  for (auto& d : docs) add(std::move(d));
}

void Corpus::add(Document doc) {
  if (by_id_.contains(doc.id)) {
    throw Error(ErrorCode::kDuplicateDocId, "duplicate document id '" + doc.id + "'");
  }
  by_id_.emplace(doc.id, docs_.size());
  docs_.push_back(std::move(doc));
}

const Document& Corpus::at(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) {
    throw Error(ErrorCode::kMissingDocument, "unknown document '" + std::string(id) + "'");
  }
  return docs_[it->second];
}

bool Corpus::contains(std::string_view id) const {
  return by_id_.contains(std::string(id));
}

std::vector<SentenceSpan> split_sentences(std::u32string_view text,
                                          const AbbreviationList& abbreviations) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = text.size();
  std::size_t i = 0;
  std::size_t start = std::u32string_view::npos;

  const auto emit = [&](std::size_t end) {
    while (end > start && is_space(text[end - 1])) --end;
    spans.push_back({start, end, count_words(text.substr(start, end - start))});
    start = std::u32string_view::npos;
  };

  while (i < n) {
    const char32_t c = text[i];
    if (start == std::u32string_view::npos) {
      if (!is_space(c)) start = i;
      ++i;
      continue;
    }
    if (is_newline(c)) {
      emit(i);
      ++i;
      continue;
    }
    if (!is_terminator(c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && is_terminator(text[j])) ++j;
    const std::size_t run_end = j;
    while (j < n && is_closer(text[j])) ++j;
    if (j < n && !is_space(text[j])) {
      i = j;
      continue;
    }
    bool split = true;
    if (j < n && run_end - i == 1 && text[i] == U'.') {
      std::size_t tb = i;
      while (tb > start && !is_space(text[tb - 1])) --tb;
      while (tb < i && is_opener(text[tb])) ++tb;
      const std::u32string_view token = text.substr(tb, run_end - tb);
      if (abbreviations.contains(token)) split = false;
      if (token.size() == 2 && is_alpha_ascii(token[0]) &&
          !(tb > start && !is_space(text[tb - 1]))) {
        split = false;
      }
    }
    if (split && j < n) {
      std::size_t k = j;
      bool crosses_line = false;
      while (k < n && is_space(text[k])) {
        crosses_line = crosses_line || is_newline(text[k]);
        ++k;
      }
      while (k < n && is_opener(text[k])) ++k;
      if (!crosses_line && k < n && is_lower_ascii(text[k])) split = false;
    }
    if (split) emit(j);
    i = j;
  }
  if (start != std::u32string_view::npos) emit(n);
  if (spans.empty()) throw Error(ErrorCode::kEmptyInput, "text is empty");
  return spans;
}

std::vector<SentenceRange> recursive_chunk_ranges(
    std::u32string_view text, std::span<const SentenceSpan> sentences,
    SentenceRange range, std::size_t theta,
    std::span<const std::string> hierarchy) {
  if (theta == 0) throw Error(ErrorCode::kInvalidConfig, "theta must be > 0");
  std::vector<std::u32string> separators;
  separators.reserve(hierarchy.size());
  for (const auto& s : hierarchy) separators.push_back(utf8_to_u32(s));

  std::vector<SentenceRange> out;
  const auto split = [&](auto&& self, SentenceRange r, std::size_t level) -> void {
    if (r.size() <= 1 || range_words(sentences, r) <= theta) {
      if (r.size() > 0) out.push_back(r);
      return;
    }
    // Past the last configured separator every sentence boundary qualifies.
    const bool any_boundary =
        level >= separators.size() || separators[level].empty();
    std::vector<SentenceRange> pieces;
    std::size_t piece_first = r.first;
    for (std::size_t s = r.first + 1; s < r.last; ++s) {
      bool cut = any_boundary;
      if (!cut) {
        const std::size_t gs = sentences[s - 1].end;
        const std::u32string_view gap = text.substr(gs, sentences[s].start - gs);
        cut = gap.find(separators[level]) != std::u32string_view::npos;
      }
      if (cut) {
        pieces.push_back({piece_first, s});
        piece_first = s;
      }
    }
    pieces.push_back({piece_first, r.last});
    if (pieces.size() == 1) {
      self(self, r, level + 1);
      return;
    }
    SentenceRange current{r.first, r.first};
    std::size_t current_words = 0;
    const auto flush = [&] {
      if (current.size() > 0) out.push_back(current);
      current_words = 0;
    };
    for (const auto& piece : pieces) {
      const std::size_t w = range_words(sentences, piece);
      if (w > theta) {
        flush();
        self(self, piece, level + 1);
        current = {piece.last, piece.last};
      } else if (current.size() > 0 && current_words + w <= theta) {
        current.last = piece.last;
        current_words += w;
      } else {
        flush();
        current = piece;
        current_words = w;
      }
    }
    flush();
  };
  split(split, range, 0);
  return out;
}

Chunk make_chunk(const Document& doc, std::span<const SentenceSpan> sentences,
                 SentenceRange range, ChunkLevel level) {
  Chunk c;
  c.doc_id = doc.id;
  c.start = sentences[range.first].start;
  c.end = sentences[range.last - 1].end;
  c.word_count = range_words(sentences, range);
  c.level = level;
  c.chunk_id = make_chunk_id(doc.id, c.start, c.end, level);
  return c;
}

std::vector<Chunk> recursive_chunk(const Document& doc, std::size_t theta,
                                   std::span<const std::string> hierarchy,
                                   ChunkLevel level,
                                   const AbbreviationList& abbreviations) {
  const auto sentences = split_sentences(doc.text, abbreviations);
  const auto ranges = recursive_chunk_ranges(
      doc.text, sentences, {0, sentences.size()}, theta, hierarchy);
  std::vector<Chunk> chunks;
  chunks.reserve(ranges.size());
  for (const auto& r : ranges) chunks.push_back(make_chunk(doc, sentences, r, level));
  return chunks;
}

std::vector<Chunk> paragraph_chunk(const Document& doc,
                                   const AbbreviationList& abbreviations) {
  const auto sentences = split_sentences(doc.text, abbreviations);
  std::vector<Chunk> chunks;
  std::size_t first = 0;
  for (std::size_t s = 1; s <= sentences.size(); ++s) {
    bool blank_line = s == sentences.size();
    if (!blank_line) {
      std::size_t newlines = 0;
      for (std::size_t p = sentences[s - 1].end; p < sentences[s].start; ++p) {
        if (is_newline(doc.text[p])) ++newlines;
      }
      blank_line = newlines >= 2;
    }
    if (blank_line) {
      chunks.push_back(make_chunk(doc, sentences, {first, s}, ChunkLevel::kParent));
      first = s;
    }
  }
  return chunks;
}

std::string span_text(const Document& doc, std::size_t start, std::size_t end) {
  end = std::min(end, doc.text.size());
  start = std::min(start, end);
  return u32_to_utf8(std::u32string_view(doc.text).substr(start, end - start));
}

std::string chunk_text(const Chunk& chunk, const Corpus& corpus) {
  return span_text(corpus.at(chunk.doc_id), chunk.start, chunk.end);
}

}  // namespace chunkwise

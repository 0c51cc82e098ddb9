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

#include "chunkwise/granularity.hpp"

#include <algorithm>
#include <unordered_set>

#include "chunkwise/error.hpp"
#include "chunkwise/kernels.hpp"

namespace chunkwise {

const Chunk& GranularIndex::unit(std::size_t i) const {
  return i < parents.size() ? parents[i] : children[i - parents.size()];
}

std::span<const Chunk> GranularIndex::children_of(std::size_t parent) const {
  return std::span<const Chunk>(children).subspan(
      child_offsets[parent], child_offsets[parent + 1] - child_offsets[parent]);
}

GranularIndex GranularIndex::parents_only(std::vector<Chunk> parents) {
  GranularIndex index;
  index.parents = std::move(parents);
  index.child_offsets.assign(index.parents.size() + 1, 0);
  return index;
}

GranularIndex GranularIndex::for_document(std::string_view doc_id) const {
  GranularIndex out;
  for (std::size_t p = 0; p < parents.size(); ++p) {
    if (parents[p].doc_id != doc_id) continue;
    out.parents.push_back(parents[p]);
    for (const auto& c : children_of(p)) {
      out.children.push_back(c);
      out.parent_of.emplace(c.chunk_id, parents[p].chunk_id);
    }
    out.child_offsets.push_back(out.children.size());
  }
  return out;
}

GranularIndex GranularIndex::concat(std::span<const GranularIndex> parts) {
  GranularIndex out;
  for (const auto& part : parts) {
    const std::size_t base = out.children.size();
    out.parents.insert(out.parents.end(), part.parents.begin(), part.parents.end());
    out.children.insert(out.children.end(), part.children.begin(), part.children.end());
    for (std::size_t p = 1; p < part.child_offsets.size(); ++p) {
      out.child_offsets.push_back(base + part.child_offsets[p]);
    }
    out.parent_of.insert(part.parent_of.begin(), part.parent_of.end());
  }
  return out;
}

GranularIndex build_index(const Corpus& corpus, std::span<const Chunk> parents,
                          std::size_t theta, std::span<const std::string> hierarchy,
                          int jobs, const AbbreviationList& abbreviations) {
  if (theta == 0) throw Error(ErrorCode::kInvalidConfig, "theta must be > 0");
  const std::size_t half = std::max<std::size_t>(1, theta / 2);
  const std::size_t quarter = std::max<std::size_t>(1, theta / 4);

  // Contiguous runs of parents from the same document are processed as one
  // unit of work so sentences are split once per document.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t p = 0; p < parents.size(); ++p) {
    if (groups.empty() || parents[groups.back().first].doc_id != parents[p].doc_id) {
      groups.emplace_back(p, p + 1);
    } else {
      groups.back().second = p + 1;
    }
  }

  std::vector<GranularIndex> parts(groups.size());
  kernels::parallel_for(groups.size(), jobs, [&](std::size_t g) {
    const auto [first, last] = groups[g];
    const Document& doc = corpus.at(parents[first].doc_id);
    const auto sentences = split_sentences(doc.text, abbreviations);
    GranularIndex& part = parts[g];
    for (std::size_t p = first; p < last; ++p) {
      const Chunk& parent = parents[p];
      const auto lo = std::lower_bound(
          sentences.begin(), sentences.end(), parent.start,
          [](const SentenceSpan& s, std::size_t v) { return s.start < v; });
      auto hi = lo;
      while (hi != sentences.end() && hi->end <= parent.end) ++hi;
      if (lo == hi || lo->start != parent.start || std::prev(hi)->end != parent.end) {
        throw Error(ErrorCode::kInvalidParent,
                    "parent " + parent.chunk_id + " is not sentence-aligned");
      }
      const SentenceRange range{static_cast<std::size_t>(lo - sentences.begin()),
                                static_cast<std::size_t>(hi - sentences.begin())};
      part.parents.push_back(parent);
      for (const auto& [budget, level] :
           {std::pair{half, ChunkLevel::kChildHalf},
            std::pair{quarter, ChunkLevel::kChildQuarter}}) {
        for (const auto& r :
             recursive_chunk_ranges(doc.text, sentences, range, budget, hierarchy)) {
          Chunk child = make_chunk(doc, sentences, r, level);
          part.parent_of.emplace(child.chunk_id, parent.chunk_id);
          part.children.push_back(std::move(child));
        }
      }
      part.child_offsets.push_back(part.children.size());
    }
  });
  return GranularIndex::concat(parts);
}

std::vector<ScoredParent> score_parents(const GranularIndex& index,
                                        std::span<const double> unit_scores,
                                        int jobs) {
  if (unit_scores.size() != index.unit_count()) {
    throw Error(ErrorCode::kIncompleteScores,
                std::to_string(unit_scores.size()) + " scores for " +
                    std::to_string(index.unit_count()) + " units");
  }
  const kernels::GroupedScores grouped{unit_scores.first(index.parents.size()),
                                       index.child_offsets,
                                       unit_scores.subspan(index.parents.size())};
  const auto maxima = kernels::group_max(grouped, jobs);
  std::vector<ScoredParent> out;
  out.reserve(index.parents.size());
  for (std::size_t p = 0; p < index.parents.size(); ++p) {
    const auto& m = maxima[p];
    out.push_back({index.parents[p], m.score,
                   m.best == kernels::kSelf
                       ? index.parents[p].chunk_id
                       : index.children_of(p)[static_cast<std::size_t>(m.best)].chunk_id,
                   p});
  }
  return out;
}

std::vector<ScoredParent> score_parents(
    const GranularIndex& index,
    const std::unordered_map<std::string, double>& unit_scores, int jobs) {
  std::vector<double> dense(index.unit_count());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const auto& id = index.unit(i).chunk_id;
    const auto it = unit_scores.find(id);
    if (it == unit_scores.end()) {
      throw Error(ErrorCode::kIncompleteScores, "no score for unit " + id);
    }
    dense[i] = it->second;
  }
  return score_parents(index, dense, jobs);
}

std::vector<ScoredParent> top_k_parents(std::vector<ScoredParent> scored,
                                        std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredParent& a, const ScoredParent& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.parent_index < b.parent_index;
                   });
  std::vector<ScoredParent> out;
  out.reserve(std::min(k, scored.size()));
  std::unordered_set<std::string> seen;
  for (auto& s : scored) {
    if (out.size() == k) break;
    if (seen.insert(s.parent.chunk_id).second) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace chunkwise

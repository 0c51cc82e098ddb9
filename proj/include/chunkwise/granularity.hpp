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

// Parent/child retrieval units. Each parent is re-chunked at theta/2 and
// theta/4; a parent scores as the best of itself and all of its children.

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "chunkwise/segmentation.hpp"

namespace chunkwise {

struct GranularIndex {
  std::vector<Chunk> parents;
  // Grouped by parent: children of parents[p] are
  // children[child_offsets[p] .. child_offsets[p + 1]), half level first.
  std::vector<Chunk> children;
  std::vector<std::size_t> child_offsets{0};
  std::unordered_map<std::string, std::string> parent_of;

  std::size_t unit_count() const { return parents.size() + children.size(); }
  // Parents first, then children, in storage order.
  const Chunk& unit(std::size_t i) const;
  std::span<const Chunk> children_of(std::size_t parent) const;

  // Parents-only index (no children) for single-granularity chunkers.
  static GranularIndex parents_only(std::vector<Chunk> parents);
  // Sub-index holding only the parents of one document and their children.
  GranularIndex for_document(std::string_view doc_id) const;
  // Concatenates indexes in order.
  static GranularIndex concat(std::span<const GranularIndex> parts);
};

struct ScoredParent {
  Chunk parent;
  double score = 0.0;
  std::string best_unit;
  std::size_t parent_index = 0;  // position in the index, for tie-breaking
};

// Children derived inside each parent with the separator hierarchy at
// max(1, theta/2) and max(1, theta/4). Throws InvalidParent when a parent does
// not start and end on sentence boundaries of its document.
GranularIndex build_index(
    const Corpus& corpus, std::span<const Chunk> parents, std::size_t theta,
    std::span<const std::string> hierarchy = default_separator_hierarchy(),
    int jobs = 1, const AbbreviationList& abbreviations = AbbreviationList::defaults());

// One entry per parent in index order. Throws IncompleteScores if any unit
// lacks a score.
std::vector<ScoredParent> score_parents(
    const GranularIndex& index,
    const std::unordered_map<std::string, double>& unit_scores, int jobs = 0);

// unit_scores aligned with GranularIndex::unit(i).
std::vector<ScoredParent> score_parents(const GranularIndex& index,
                                        std::span<const double> unit_scores,
                                        int jobs = 0);

// k best by score, descending; ties keep index order. Throws InvalidK for k=0.
std::vector<ScoredParent> top_k_parents(std::vector<ScoredParent> scored,
                                        std::size_t k);

}  // namespace chunkwise

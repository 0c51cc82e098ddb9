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

// Flat cosine retrieval over every unit of a GranularIndex, and context
// assembly under a word cap.

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "chunkwise/granularity.hpp"
#include "chunkwise/kernels.hpp"
#include "chunkwise/providers.hpp"
#include "chunkwise/segmentation.hpp"

namespace chunkwise {

inline constexpr std::size_t kDefaultContextCap = 1500;
inline constexpr std::string_view kContextSeparator = "\n\n";

// Throws DegenerateVector on a zero vector or mismatched dimensions.
double cosine(std::span<const double> u, std::span<const double> v);

// Throws EmptyInput on no texts; ProviderProtocolError when the provider
// returns the wrong count or dimension.
std::vector<std::vector<double>> embed(EmbeddingProvider& provider,
                                       std::span<const std::string> texts);

class VectorStore {
 public:
  explicit VectorStore(std::size_t dimension, bool normalized = true);

  // Throws DegenerateVector on a wrong dimension or a zero vector, and
  // InvalidConfig after freeze() or on a duplicate id.
  void add(const std::string& id, std::span<const double> vector);
  void freeze() { frozen_ = true; }

  bool frozen() const { return frozen_; }
  bool normalized() const { return normalized_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return ids_.size(); }
  bool contains(const std::string& id) const { return rows_.contains(id); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> vector(const std::string& id) const;
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dimension_, dimension_);
  }

 private:
  std::size_t dimension_;
  bool normalized_;
  bool frozen_ = false;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> rows_;
};

// Embeds every unit (parents then children) and returns a frozen store.
VectorStore build_store(const GranularIndex& index, const Corpus& corpus,
                        EmbeddingProvider& provider);

// An index paired with unit vectors laid out in unit order. Read-only after
// construction; safe for concurrent queries.
class Retriever {
 public:
  // Throws IncompleteScores when the store lacks a unit.
  Retriever(const GranularIndex& index, const VectorStore& store);

  const GranularIndex& index() const { return *index_; }

  // Every parent, best first.
  std::vector<ScoredParent> rank(std::span<const double> query, int jobs = 0) const;
  std::vector<ScoredParent> top_k(std::span<const double> query, std::size_t k,
                                  int jobs = 0) const;

 private:
  const GranularIndex* index_;
  std::size_t dimension_;
  std::vector<double> matrix_;
};

std::vector<ScoredParent> retrieve(const std::string& query,
                                   const GranularIndex& index,
                                   const VectorStore& store,
                                   EmbeddingProvider& provider, std::size_t k,
                                   const std::string& query_prefix = "");

struct AssembledContext {
  std::string text;
  std::vector<std::string> used_parents;
  std::size_t word_count = 0;
};

// Parents in rank order joined by a blank line until the next one would
// exceed the cap. If the top parent alone is over the cap it is cut at its
// last sentence boundary within the cap. Throws EmptyRanking.
AssembledContext assemble_context(
    std::span<const ScoredParent> ranking, const Corpus& corpus,
    std::size_t context_cap = kDefaultContextCap,
    const AbbreviationList& abbreviations = AbbreviationList::defaults());

}  // namespace chunkwise

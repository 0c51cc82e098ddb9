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

#include "chunkwise/retrieval.hpp"

#include <algorithm>

#include "chunkwise/error.hpp"
#include "chunkwise/text.hpp"

namespace chunkwise {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDegenerateVector,
                "dimension mismatch " + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()));
  }
  const double nu = kernels::l2_norm(u);
  const double nv = kernels::l2_norm(v);
  if (nu == 0.0 || nv == 0.0) {
    throw Error(ErrorCode::kDegenerateVector, "zero vector");
  }
  return std::clamp(kernels::dot(u, v) / (nu * nv), -1.0, 1.0);
}

std::vector<std::vector<double>> embed(EmbeddingProvider& provider,
                                       std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to embed");
  auto vectors = provider.embed(texts);
  if (vectors.size() != texts.size()) {
    throw Error(ErrorCode::kProviderProtocolError,
                "embedder returned " + std::to_string(vectors.size()) +
                    " vectors for " + std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : vectors) {
    if (v.size() != provider.dimension()) {
      throw Error(ErrorCode::kProviderProtocolError,
                  "embedder returned dimension " + std::to_string(v.size()) +
                      ", declared " + std::to_string(provider.dimension()));
    }
  }
  return vectors;
}

VectorStore::VectorStore(std::size_t dimension, bool normalized)
    : dimension_(dimension), normalized_(normalized) {
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidConfig, "dimension must be > 0");
}

void VectorStore::add(const std::string& id, std::span<const double> vector) {
  if (frozen_) throw Error(ErrorCode::kInvalidConfig, "vector store is frozen");
  if (vector.size() != dimension_) {
    throw Error(ErrorCode::kDegenerateVector,
                "vector for " + id + " has dimension " + std::to_string(vector.size()));
  }
  if (rows_.contains(id)) {
    throw Error(ErrorCode::kInvalidConfig, "duplicate vector id " + id);
  }
  const double norm = kernels::l2_norm(vector);
  if (norm == 0.0) throw Error(ErrorCode::kDegenerateVector, "zero vector for " + id);
  rows_.emplace(id, ids_.size());
  ids_.push_back(id);
  for (double x : vector) data_.push_back(normalized_ ? x / norm : x);
}

std::span<const double> VectorStore::vector(const std::string& id) const {
  const auto it = rows_.find(id);
  if (it == rows_.end()) {
    throw Error(ErrorCode::kIncompleteScores, "no vector for unit " + id);
  }
  return row(it->second);
}

VectorStore build_store(const GranularIndex& index, const Corpus& corpus,
                        EmbeddingProvider& provider) {
  VectorStore store(provider.dimension());
  if (index.unit_count() == 0) {
    store.freeze();
    return store;
  }
  std::vector<std::string> texts;
  texts.reserve(index.unit_count());
  for (std::size_t i = 0; i < index.unit_count(); ++i) {
    texts.push_back(chunk_text(index.unit(i), corpus));
  }
  const auto vectors = embed(provider, texts);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    store.add(index.unit(i).chunk_id, vectors[i]);
  }
  store.freeze();
  return store;
}

Retriever::Retriever(const GranularIndex& index, const VectorStore& store)
    : index_(&index), dimension_(store.dimension()) {
  matrix_.reserve(index.unit_count() * dimension_);
  for (std::size_t i = 0; i < index.unit_count(); ++i) {
    const auto v = store.vector(index.unit(i).chunk_id);
    matrix_.insert(matrix_.end(), v.begin(), v.end());
  }
}

std::vector<ScoredParent> Retriever::rank(std::span<const double> query,
                                          int jobs) const {
  if (query.size() != dimension_) {
    throw Error(ErrorCode::kDegenerateVector, "query dimension mismatch");
  }
  if (kernels::l2_norm(query) == 0.0) {
    throw Error(ErrorCode::kDegenerateVector, "zero query vector");
  }
  const kernels::MatrixView view{matrix_, index_->unit_count(), dimension_};
  const auto unit_scores = kernels::cosine_scores(view, query, jobs);
  return top_k_parents(score_parents(*index_, unit_scores, jobs),
                       std::max<std::size_t>(1, index_->parents.size()));
}

std::vector<ScoredParent> Retriever::top_k(std::span<const double> query,
                                           std::size_t k, int jobs) const {
  if (k == 0) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  auto ranked = rank(query, jobs);
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

std::vector<ScoredParent> retrieve(const std::string& query,
                                   const GranularIndex& index,
                                   const VectorStore& store,
                                   EmbeddingProvider& provider, std::size_t k,
                                   const std::string& query_prefix) {
  if (k == 0) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  const Retriever retriever(index, store);
  const std::string text = query_prefix + query;
  const auto q = embed(provider, std::span<const std::string>(&text, 1));
  return retriever.top_k(q.front(), k);
}

AssembledContext assemble_context(std::span<const ScoredParent> ranking,
                                  const Corpus& corpus, std::size_t context_cap,
                                  const AbbreviationList& abbreviations) {
  if (ranking.empty()) throw Error(ErrorCode::kEmptyRanking, "nothing to assemble");
  AssembledContext ctx;
  for (const auto& sp : ranking) {
    const Chunk& parent = sp.parent;
    if (ctx.word_count + parent.word_count > context_cap) {
      if (!ctx.used_parents.empty()) break;
      // Top parent alone is over the cap: keep its longest sentence-aligned
      // prefix that fits.
      const Document& doc = corpus.at(parent.doc_id);
      const auto sentences = split_sentences(
          std::u32string_view(doc.text).substr(0, parent.end), abbreviations);
      std::size_t end = parent.start;
      std::size_t words = 0;
      for (const auto& s : sentences) {
        if (s.start < parent.start) continue;
        if (words + s.word_count > context_cap) break;
        words += s.word_count;
        end = s.end;
      }
      if (words == 0) {
        // First sentence alone is over the cap; fall back to whole words.
        const std::u32string collapsed = collapse_whitespace(
            std::u32string_view(doc.text).substr(parent.start,
                                                 parent.end - parent.start));
        std::size_t cut = 0;
        std::size_t taken = 0;
        for (std::size_t i = 0; i <= collapsed.size() && taken < context_cap; ++i) {
          if (i == collapsed.size() || collapsed[i] == U' ') {
            ++taken;
            cut = i;
          }
        }
        ctx.text = u32_to_utf8(std::u32string_view(collapsed).substr(0, cut));
        ctx.word_count = taken;
      } else {
        ctx.text = span_text(doc, parent.start, end);
        ctx.word_count = words;
      }
      ctx.used_parents.push_back(parent.chunk_id);
      break;
    }
    if (!ctx.used_parents.empty()) ctx.text += kContextSeparator;
    ctx.text += chunk_text(parent, corpus);
    ctx.word_count += parent.word_count;
    ctx.used_parents.push_back(parent.chunk_id);
  }
  return ctx;
}

}  // namespace chunkwise

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

// Retrieval and QA metrics: ROUGE relabeling of gold evidence, DCG@k and
// Recall@k over single-gold ranks, and bag-of-words answer F1.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chunkwise/granularity.hpp"
#include "chunkwise/providers.hpp"
#include "chunkwise/retrieval.hpp"
#include "chunkwise/segmentation.hpp"
#include "json.hpp"

namespace chunkwise {

enum class RougeVariant { kRouge1, kRouge2, kRougeL };

std::string_view rouge_variant_name(RougeVariant v);
RougeVariant parse_rouge_variant(std::string_view name);

// LCS F-measure over lowercased word tokens, beta = 1. 0 when either side
// has no tokens.
double rouge_l_f(std::string_view candidate, std::string_view reference);
// Clipped n-gram overlap F-measure.
double rouge_n_f(std::string_view candidate, std::string_view reference, std::size_t n);
double rouge_f(RougeVariant variant, std::string_view candidate,
               std::string_view reference);

// Chunk whose text scores highest against the evidence; earliest on ties.
// Throws EmptyInput for an empty chunk list.
std::string relabel_gold(std::string_view evidence, std::span<const Chunk> chunks,
                         const Corpus& corpus,
                         RougeVariant variant = RougeVariant::kRougeL, int jobs = 0);

using Rank = std::optional<std::size_t>;  // 1-based; nullopt = not retrieved

// mean of 1/log2(rank+1) for rank <= k, x100. Throws EmptyEvaluation, InvalidK.
double dcg_at_k(std::span<const Rank> ranks, std::size_t k);
// percentage of ranks <= k.
double recall_at_k(std::span<const Rank> ranks, std::size_t k);

// lowercase, strip ASCII punctuation, drop a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);
// Max over gold answers of bag-of-words F1. Two empty bags score 1.
double qa_f1(std::string_view prediction, std::span<const std::string> gold_answers);
double qa_f1(std::string_view prediction, std::string_view gold);

struct RetrievalQAExample {
  std::string id;
  std::string question;
  std::string evidence;
  std::string doc_id;
};

struct AnswerQAExample {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  std::string doc_id;
};

// JSONL; "id" is optional and defaults to q<line>. Throws MalformedRecord
// with the line number.
std::vector<RetrievalQAExample> load_retrieval_examples(const std::filesystem::path& path);
std::vector<AnswerQAExample> load_qa_examples(const std::filesystem::path& path);

inline const std::vector<std::size_t> kDefaultKList{1, 2, 5, 10, 20};

struct QueryResult {
  std::string query_id;
  std::string gold_chunk_id;
  Rank rank;
  std::optional<double> f1;
  std::string prediction;
};

struct EvalReport {
  std::vector<QueryResult> per_query;
  std::map<std::size_t, double> dcg_at;
  std::map<std::size_t, double> recall_at;
  std::optional<double> f1_mean;
  nlohmann::ordered_json config;

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  // Aligned plain-text table, one row with DCG@k and Recall@k columns.
  std::string to_table(std::string_view label) const;
};

struct RetrievalEvalOptions {
  std::vector<std::size_t> k_list = kDefaultKList;
  RougeVariant rouge = RougeVariant::kRougeL;
  std::string query_prefix;
  int jobs = 0;
};

// Gold = relabel_gold against the parents of the example's document; rank =
// position of that parent among all parents of the document.
EvalReport evaluate_retrieval(std::span<const RetrievalQAExample> examples,
                              const GranularIndex& index, const VectorStore& store,
                              const Corpus& corpus, EmbeddingProvider& embedder,
                              const RetrievalEvalOptions& options = {});

struct QAEvalOptions {
  std::size_t k = 20;
  std::size_t context_cap = kDefaultContextCap;
  std::size_t max_words = 64;
  std::string query_prefix;
  int jobs = 0;
};

EvalReport evaluate_qa(std::span<const AnswerQAExample> examples,
                       const GranularIndex& index, const VectorStore& store,
                       const Corpus& corpus, EmbeddingProvider& embedder,
                       GenerationProvider& generator, const QAEvalOptions& options = {});

}  // namespace chunkwise

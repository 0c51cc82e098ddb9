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

#include "chunkwise/evaluation.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "chunkwise/error.hpp"
#include "chunkwise/kernels.hpp"
#include "chunkwise/text.hpp"

namespace chunkwise {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class Vocabulary {
 public:
  std::vector<std::uint32_t> encode(const std::vector<std::string>& tokens) {
    std::vector<std::uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) {
      const auto [it, inserted] =
          ids_.try_emplace(t, static_cast<std::uint32_t>(ids_.size()));
      ids.push_back(it->second);
    }
    return ids;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

double f_measure(double overlap, std::size_t candidate_len, std::size_t reference_len) {
  if (overlap == 0.0 || candidate_len == 0 || reference_len == 0) return 0.0;
  const double p = overlap / static_cast<double>(candidate_len);
  const double r = overlap / static_cast<double>(reference_len);
  return 2.0 * p * r / (p + r);
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

// Index of the best-scoring candidate, earliest on ties.
std::size_t argmax_first(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::vector<double> rouge_scores(std::string_view evidence,
                                 std::span<const std::string> texts,
                                 RougeVariant variant, int jobs) {
  std::vector<double> scores(texts.size());
  if (variant == RougeVariant::kRougeL) {
    Vocabulary vocab;
    const auto ref = vocab.encode(word_tokens(evidence));
    std::vector<std::vector<std::uint32_t>> cands;
    cands.reserve(texts.size());
    for (const auto& t : texts) cands.push_back(vocab.encode(word_tokens(t)));
    const auto lcs = kernels::lcs_lengths(ref, cands, jobs);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      scores[i] = f_measure(static_cast<double>(lcs[i]), cands[i].size(), ref.size());
    }
  } else {
    kernels::parallel_for(texts.size(), jobs, [&](std::size_t i) {
      scores[i] = rouge_f(variant, texts[i], evidence);
    });
  }
  return scores;
}

void check_ranks(std::span<const Rank> ranks, std::size_t k) {
  if (ranks.empty()) throw Error(ErrorCode::kEmptyEvaluation, "no queries");
  if (k == 0) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
}

bool is_ascii_punct(char32_t c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

std::vector<std::string> answer_bag(std::string_view s) {
  std::vector<std::string> bag;
  std::istringstream in(normalize_answer(s));
  std::string w;
  while (in >> w) bag.push_back(w);
  std::sort(bag.begin(), bag.end());
  return bag;
}

std::string required_string(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j.at(key).is_string() ||
      j.at(key).get<std::string>().empty()) {
    throw Error(ErrorCode::kMalformedRecord,
                "line " + std::to_string(line) + ": missing or empty '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + " line " + std::to_string(line_no) + ": not an object");
    }
    fn(j, line_no);
  }
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Per-document retrieval state shared by the evaluators.
struct DocumentIndex {
  GranularIndex index;
  std::unique_ptr<Retriever> retriever;
};

std::map<std::string, DocumentIndex> split_by_document(const GranularIndex& index,
                                                       const VectorStore& store) {
  std::map<std::string, DocumentIndex> out;
  for (const auto& p : index.parents) {
    if (out.contains(p.doc_id)) continue;
    auto& d = out[p.doc_id];
    d.index = index.for_document(p.doc_id);
  }
  for (auto& [id, d] : out) d.retriever = std::make_unique<Retriever>(d.index, store);
  return out;
}

std::vector<std::vector<double>> embed_queries(EmbeddingProvider& embedder,
                                               const std::string& prefix,
                                               const std::vector<std::string>& questions) {
  std::vector<std::string> texts;
  texts.reserve(questions.size());
  for (const auto& q : questions) texts.push_back(prefix + q);
  return embed(embedder, texts);
}

}  // namespace

std::string_view rouge_variant_name(RougeVariant v) {
  switch (v) {
    case RougeVariant::kRouge1: return "rouge1";
    case RougeVariant::kRouge2: return "rouge2";
    case RougeVariant::kRougeL: return "rougeL";
  }
  return "rougeL";
}

RougeVariant parse_rouge_variant(std::string_view name) {
  if (name == "rouge1") return RougeVariant::kRouge1;
  if (name == "rouge2") return RougeVariant::kRouge2;
  if (name == "rougeL") return RougeVariant::kRougeL;
  throw Error(ErrorCode::kInvalidConfig, "unknown ROUGE variant '" + std::string(name) + "'");
}

double rouge_l_f(std::string_view candidate, std::string_view reference) {
  Vocabulary vocab;
  const auto c = vocab.encode(word_tokens(candidate));
  const auto r = vocab.encode(word_tokens(reference));
  return f_measure(static_cast<double>(kernels::lcs_length(c, r)), c.size(), r.size());
}

double rouge_n_f(std::string_view candidate, std::string_view reference,
                 std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidConfig, "ROUGE-N needs n >= 1");
  const auto ct = word_tokens(candidate);
  const auto rt = word_tokens(reference);
  const auto cc = ngram_counts(ct, n);
  const auto rc = ngram_counts(rt, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cc) {
    const auto it = rc.find(gram);
    if (it != rc.end()) overlap += std::min(count, it->second);
  }
  const std::size_t cn = ct.size() >= n ? ct.size() - n + 1 : 0;
  const std::size_t rn = rt.size() >= n ? rt.size() - n + 1 : 0;
  return f_measure(static_cast<double>(overlap), cn, rn);
}

double rouge_f(RougeVariant variant, std::string_view candidate,
               std::string_view reference) {
  switch (variant) {
    case RougeVariant::kRouge1: return rouge_n_f(candidate, reference, 1);
    case RougeVariant::kRouge2: return rouge_n_f(candidate, reference, 2);
    case RougeVariant::kRougeL: return rouge_l_f(candidate, reference);
  }
  return 0.0;
}

std::string relabel_gold(std::string_view evidence, std::span<const Chunk> chunks,
                         const Corpus& corpus, RougeVariant variant, int jobs) {
  if (chunks.empty()) throw Error(ErrorCode::kEmptyInput, "no chunks to relabel against");
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(chunk_text(c, corpus));
  const auto scores = rouge_scores(evidence, texts, variant, jobs);
  return chunks[argmax_first(scores)].chunk_id;
}

double dcg_at_k(std::span<const Rank> ranks, std::size_t k) {
  check_ranks(ranks, k);
  double gain = 0.0;
  for (const auto& r : ranks) {
    if (r && *r >= 1 && *r <= k) gain += 1.0 / std::log2(static_cast<double>(*r) + 1.0);
  }
  return gain / static_cast<double>(ranks.size()) * 100.0;
}

double recall_at_k(std::span<const Rank> ranks, std::size_t k) {
  check_ranks(ranks, k);
  double hits = 0.0;
  for (const auto& r : ranks) {
    if (r && *r >= 1 && *r <= k) hits += 1.0;
  }
  return hits / static_cast<double>(ranks.size()) * 100.0;
}

std::string normalize_answer(std::string_view s) {
  std::u32string cleaned;
  for (char32_t c : utf8_to_u32(s)) {
    if (is_ascii_punct(c)) continue;
    cleaned.push_back(static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))));
  }
  std::u32string out;
  const std::u32string collapsed = collapse_whitespace(cleaned);
  std::size_t i = 0;
  while (i <= collapsed.size()) {
    std::size_t j = collapsed.find(U' ', i);
    if (j == std::u32string::npos) j = collapsed.size();
    const std::u32string_view word(collapsed.data() + i, j - i);
    if (!word.empty() && word != U"a" && word != U"an" && word != U"the") {
      if (!out.empty()) out.push_back(U' ');
      out += word;
    }
    i = j + 1;
  }
  return u32_to_utf8(out);
}

double qa_f1(std::string_view prediction, std::string_view gold) {
  const auto pred = answer_bag(prediction);
  const auto gt = answer_bag(gold);
  if (pred.empty() && gt.empty()) return 1.0;
  if (pred.empty() || gt.empty()) return 0.0;
  std::size_t common = 0;
  auto p = pred.begin();
  auto g = gt.begin();
  while (p != pred.end() && g != gt.end()) {
    if (*p == *g) {
      ++common;
      ++p;
      ++g;
    } else if (*p < *g) {
      ++p;
    } else {
      ++g;
    }
  }
  return f_measure(static_cast<double>(common), pred.size(), gt.size());
}

double qa_f1(std::string_view prediction, std::span<const std::string> gold_answers) {
  double best = 0.0;
  for (const auto& g : gold_answers) best = std::max(best, qa_f1(prediction, g));
  return best;
}

std::vector<RetrievalQAExample> load_retrieval_examples(
    const std::filesystem::path& path) {
  std::vector<RetrievalQAExample> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    RetrievalQAExample ex;
    ex.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                    : "q" + std::to_string(line);
    ex.question = required_string(j, "question", line);
    ex.evidence = required_string(j, "evidence", line);
    ex.doc_id = required_string(j, "doc_id", line);
    out.push_back(std::move(ex));
  });
  return out;
}

std::vector<AnswerQAExample> load_qa_examples(const std::filesystem::path& path) {
  std::vector<AnswerQAExample> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    AnswerQAExample ex;
    ex.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                    : "q" + std::to_string(line);
    ex.question = required_string(j, "question", line);
    ex.doc_id = required_string(j, "doc_id", line);
    if (!j.contains("answers") || !j["answers"].is_array() || j["answers"].empty()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(line) + ": 'answers' must be a non-empty list");
    }
    for (const auto& a : j["answers"]) {
      if (!a.is_string()) {
        throw Error(ErrorCode::kMalformedRecord,
                    "line " + std::to_string(line) + ": answers must be strings");
      }
      ex.gold_answers.push_back(a.get<std::string>());
    }
    out.push_back(std::move(ex));
  });
  return out;
}

ordered_json EvalReport::to_json() const {
  ordered_json j;
  j["schema_version"] = 1;
  j["config"] = config;
  ordered_json metrics;
  ordered_json dcg = ordered_json::object();
  for (const auto& [k, v] : dcg_at) dcg[std::to_string(k)] = v;
  ordered_json recall = ordered_json::object();
  for (const auto& [k, v] : recall_at) recall[std::to_string(k)] = v;
  metrics["dcg_at"] = dcg;
  metrics["recall_at"] = recall;
  if (f1_mean) metrics["f1_mean"] = *f1_mean;
  j["metrics"] = metrics;
  ordered_json queries = ordered_json::array();
  for (const auto& q : per_query) {
    ordered_json e;
    e["query_id"] = q.query_id;
    e["gold_chunk_id"] = q.gold_chunk_id;
    e["rank"] = q.rank ? ordered_json(*q.rank) : ordered_json(nullptr);
    if (q.f1) {
      e["f1"] = *q.f1;
      e["prediction"] = q.prediction;
    }
    queries.push_back(e);
  }
  j["per_query"] = queries;
  return j;
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  try {
    r.config = ordered_json::parse(j.at("config").dump());
    const auto& m = j.at("metrics");
    for (const auto& [k, v] : m.at("dcg_at").items()) {
      r.dcg_at[std::stoul(k)] = v.get<double>();
    }
    for (const auto& [k, v] : m.at("recall_at").items()) {
      r.recall_at[std::stoul(k)] = v.get<double>();
    }
    if (m.contains("f1_mean")) r.f1_mean = m.at("f1_mean").get<double>();
    for (const auto& e : j.at("per_query")) {
      QueryResult q;
      q.query_id = e.at("query_id").get<std::string>();
      q.gold_chunk_id = e.at("gold_chunk_id").get<std::string>();
      if (!e.at("rank").is_null()) q.rank = e.at("rank").get<std::size_t>();
      if (e.contains("f1")) q.f1 = e.at("f1").get<double>();
      if (e.contains("prediction")) q.prediction = e.at("prediction").get<std::string>();
      r.per_query.push_back(std::move(q));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("eval report: ") + e.what());
  }
  return r;
}

std::string EvalReport::to_table(std::string_view label) const {
  std::ostringstream out;
  const auto header_cells = [&](const char* name,
                                const std::map<std::size_t, double>& m) {
    for (const auto& [k, v] : m) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " %9s", (name + std::to_string(k)).c_str());
      out << buf;
    }
  };
  const auto value_cells = [&](const std::map<std::size_t, double>& m) {
    for (const auto& [k, v] : m) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " %9s", fixed2(v).c_str());
      out << buf;
    }
  };
  char name[64];
  std::snprintf(name, sizeof(name), "%-20s", "Method");
  out << name;
  header_cells("DCG@", dcg_at);
  out << " |";
  header_cells("Recall@", recall_at);
  if (f1_mean) out << " |        F1";
  out << '\n';
  std::snprintf(name, sizeof(name), "%-20s", std::string(label).c_str());
  out << name;
  value_cells(dcg_at);
  out << " |";
  value_cells(recall_at);
  if (f1_mean) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), " | %9s", fixed2(*f1_mean * 100.0).c_str());
    out << buf;
  }
  out << '\n';
  return out.str();
}

EvalReport evaluate_retrieval(std::span<const RetrievalQAExample> examples,
                              const GranularIndex& index, const VectorStore& store,
                              const Corpus& corpus, EmbeddingProvider& embedder,
                              const RetrievalEvalOptions& options) {
  if (examples.empty()) throw Error(ErrorCode::kEmptyEvaluation, "no examples");
  for (std::size_t k : options.k_list) {
    if (k == 0) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  }
  const auto docs = split_by_document(index, store);
  std::vector<std::string> questions;
  for (const auto& ex : examples) {
    if (!docs.contains(ex.doc_id)) {
      throw Error(ErrorCode::kMissingDocument,
                  "example " + ex.id + " refers to unindexed document '" + ex.doc_id + "'");
    }
    questions.push_back(ex.question);
  }
  const auto query_vectors = embed_queries(embedder, options.query_prefix, questions);

  EvalReport report;
  report.per_query.resize(examples.size());
  kernels::parallel_for(examples.size(), options.jobs, [&](std::size_t i) {
    const auto& ex = examples[i];
    const auto& doc = docs.at(ex.doc_id);
    QueryResult& q = report.per_query[i];
    q.query_id = ex.id;
    q.gold_chunk_id =
        relabel_gold(ex.evidence, doc.index.parents, corpus, options.rouge, 1);
    const auto ranking = doc.retriever->rank(query_vectors[i], 1);
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      if (ranking[r].parent.chunk_id == q.gold_chunk_id) {
        q.rank = r + 1;
        break;
      }
    }
  });

  std::vector<Rank> ranks;
  ranks.reserve(report.per_query.size());
  for (const auto& q : report.per_query) ranks.push_back(q.rank);
  for (std::size_t k : options.k_list) {
    report.dcg_at[k] = dcg_at_k(ranks, k);
    report.recall_at[k] = recall_at_k(ranks, k);
  }
  return report;
}

EvalReport evaluate_qa(std::span<const AnswerQAExample> examples,
                       const GranularIndex& index, const VectorStore& store,
                       const Corpus& corpus, EmbeddingProvider& embedder,
                       GenerationProvider& generator, const QAEvalOptions& options) {
  if (examples.empty()) throw Error(ErrorCode::kEmptyEvaluation, "no examples");
  if (options.k == 0) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  const auto docs = split_by_document(index, store);
  std::vector<std::string> questions;
  for (const auto& ex : examples) {
    if (!docs.contains(ex.doc_id)) {
      throw Error(ErrorCode::kMissingDocument,
                  "example " + ex.id + " refers to unindexed document '" + ex.doc_id + "'");
    }
    questions.push_back(ex.question);
  }
  const auto query_vectors = embed_queries(embedder, options.query_prefix, questions);

  EvalReport report;
  report.per_query.resize(examples.size());
  kernels::parallel_for(examples.size(), options.jobs, [&](std::size_t i) {
    const auto& ex = examples[i];
    QueryResult& q = report.per_query[i];
    q.query_id = ex.id;
    const auto top = docs.at(ex.doc_id).retriever->top_k(query_vectors[i], options.k, 1);
    const auto context = assemble_context(top, corpus, options.context_cap);
    q.prediction =
        generator.generate(build_qa_prompt(context.text, ex.question), options.max_words);
    q.f1 = qa_f1(q.prediction, ex.gold_answers);
  });
  double sum = 0.0;
  for (const auto& q : report.per_query) sum += *q.f1;
  report.f1_mean = sum / static_cast<double>(report.per_query.size());
  return report;
}

}  // namespace chunkwise

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

// Brute-force recomputation of gold labels and ranks for the golden corpus.
// Shares nothing with the library beyond the index it is given: its own
// tokenizer, LCS table, feature hashing and cosine.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "chunkwise/evaluation.hpp"
#include "chunkwise/granularity.hpp"
#include "chunkwise/segmentation.hpp"

namespace chunkwise::testing {

inline std::vector<std::string> ascii_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double table_rouge_l(const std::string& a_text, const std::string& b_text) {
  const auto a = ascii_tokens(a_text);
  const auto b = ascii_tokens(b_text);
  if (a.empty() || b.empty()) return 0.0;
  std::vector<std::vector<int>> t(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  const double l = t[a.size()][b.size()];
  if (l == 0) return 0.0;
  const double p = l / static_cast<double>(a.size());
  const double r = l / static_cast<double>(b.size());
  return 2 * p * r / (p + r);
}

inline std::vector<double> count_vector(const std::string& text, std::size_t dim) {
  const auto fnv = [](const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  };
  std::vector<double> v(dim, 0.0);
  const auto tokens = ascii_tokens(text);
  for (const auto& t : tokens) v[fnv(t) % dim] += 1;
  if (tokens.empty()) v[fnv("") % dim] = 1;
  return v;
}

inline double plain_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

struct OracleResult {
  std::string gold_chunk_id;
  std::size_t rank = 0;
};

inline OracleResult oracle_rank(const RetrievalQAExample& ex, const GranularIndex& index,
                                const Corpus& corpus, std::size_t dim) {
  std::vector<const Chunk*> parents;
  for (const auto& p : index.parents) {
    if (p.doc_id == ex.doc_id) parents.push_back(&p);
  }
  OracleResult out;
  double best = -1;
  for (const auto* p : parents) {
    const double s = table_rouge_l(ex.evidence, chunk_text(*p, corpus));
    if (s > best) {
      best = s;
      out.gold_chunk_id = p->chunk_id;
    }
  }
  const auto q = count_vector(ex.question, dim);
  std::vector<std::pair<double, std::string>> scored;
  for (const auto* p : parents) {
    double s = plain_cosine(q, count_vector(chunk_text(*p, corpus), dim));
    for (const auto& c : index.children) {
      if (index.parent_of.at(c.chunk_id) == p->chunk_id) {
        s = std::max(s, plain_cosine(q, count_vector(chunk_text(c, corpus), dim)));
      }
    }
    scored.emplace_back(s, p->chunk_id);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].second == out.gold_chunk_id) out.rank = i + 1;
  }
  return out;
}

}  // namespace chunkwise::testing

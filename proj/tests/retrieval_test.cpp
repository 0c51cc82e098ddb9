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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chunkwise/error.hpp"
#include "chunkwise/text.hpp"
#include "test_util.hpp"

namespace chunkwise {
namespace {

std::string sentence_of(std::size_t words, const std::string& stem) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    s += i ? " " : "Start";
    if (i) s += stem + std::to_string(i);
  }
  return s + ".";
}

std::string text_of(std::size_t sentences, std::size_t words_each,
                    const std::string& stem) {
  std::string t;
  for (std::size_t i = 0; i < sentences; ++i) {
    if (i) t += ' ';
    t += sentence_of(words_each, stem);
  }
  return t;
}

ScoredParent whole_doc_parent(const Corpus& corpus, const std::string& id,
                              std::size_t index) {
  const auto& doc = corpus.at(id);
  const auto sentences = split_sentences(doc.text);
  ScoredParent sp;
  sp.parent = make_chunk(doc, sentences, {0, sentences.size()}, ChunkLevel::kParent);
  sp.parent_index = index;
  return sp;
}

TEST(Cosine, Examples) {
  const std::vector<double> u{1.0, 2.0, 2.0};
  const std::vector<double> v{2.0, 1.0, 2.0};
  EXPECT_NEAR(cosine(u, u), 1.0, 1e-15);
  EXPECT_NEAR(cosine(u, v), 8.0 / 9.0, 1e-15);
  EXPECT_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  try {
    cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateVector);
  }
  EXPECT_THROW(cosine(std::vector<double>{1}, std::vector<double>{1, 0}), Error);
}

TEST(HashEmbedderTest, GoldenVector) {
  // the -> 4 (x2), cat -> 7, sat -> 7, on -> 0, mat -> 5 at dimension 8.
  HashEmbedder e(8);
  const auto v = e.embed_one("The cat sat on the mat.");
  const double n = std::sqrt(10.0);
  const std::vector<double> expected{1 / n, 0, 0, 0, 2 / n, 1 / n, 0, 2 / n};
  ASSERT_EQ(v.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(v[i], expected[i], 1e-15);
  // No tokens: a single bucket.
  const auto blank = e.embed_one("  ...  ");
  EXPECT_EQ(blank[5], 1.0);
}

TEST(Embed, DeterministicAndChecked) {
  HashEmbedder e(32, 2);
  const std::vector<std::string> texts{"alpha beta", "gamma", "alpha beta"};
  const auto a = embed(e, texts);
  const auto b = embed(e, texts);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0], a[2]);
  try {
    embed(e, {});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kEmptyInput);
  }
  struct Short : EmbeddingProvider {
    std::size_t dimension() const override { return 4; }
    std::vector<std::vector<double>> embed(std::span<const std::string>) override {
      return {{1, 0, 0}};
    }
  } bad;
  try {
    chunkwise::embed(bad, texts);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kProviderProtocolError);
  }
}

TEST(VectorStoreTest, RulesAndNormalization) {
  VectorStore store(3);
  store.add("a", std::vector<double>{3, 0, 4});
  EXPECT_NEAR(store.vector("a")[0], 0.6, 1e-15);
  EXPECT_NEAR(store.vector("a")[2], 0.8, 1e-15);
  EXPECT_THROW(store.add("a", std::vector<double>{1, 0, 0}), Error);
  EXPECT_THROW(store.add("b", std::vector<double>{0, 0, 0}), Error);
  EXPECT_THROW(store.add("b", std::vector<double>{1, 0}), Error);
  store.freeze();
  EXPECT_THROW(store.add("c", std::vector<double>{1, 0, 0}), Error);
  try {
    store.vector("zzz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteScores);
  }
}

TEST(Retrieve, SingleUnitAndInvalidK) {
  const Corpus corpus({Document::make("d", "Only sentence here.")});
  const auto parents = recursive_chunk(corpus.at("d"), 100);
  const auto index = GranularIndex::parents_only(parents);
  HashEmbedder e(16);
  const auto store = build_store(index, corpus, e);
  const auto top = retrieve("anything at all", index, store, e, 5);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].parent.chunk_id, parents[0].chunk_id);
  try {
    retrieve("q", index, store, e, 0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kInvalidK);
  }
}

struct Fixture {
  Corpus corpus;
  GranularIndex index;
  VectorStore store{24};
};

Fixture random_fixture(std::mt19937_64& rng, std::size_t dim) {
  Fixture f;
  f.store = VectorStore(dim);
  std::vector<Document> docs;
  for (int i = 0; i < 3; ++i) {
    docs.push_back(Document::make("d" + std::to_string(i),
                                  testing::random_document(rng, 600).text));
  }
  f.corpus = Corpus(docs);
  std::vector<Chunk> parents;
  for (const auto& d : f.corpus.documents()) {
    auto p = recursive_chunk(d, 80);
    parents.insert(parents.end(), p.begin(), p.end());
  }
  f.index = build_index(f.corpus, parents, 80);
  HashEmbedder e(dim);
  f.store = build_store(f.index, f.corpus, e);
  return f;
}

TEST(Retriever, MatchesBruteForceAndIgnoresQueryScale) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_fixture(rng, 24);
    const Retriever r(f.index, f.store);
    for (int q = 0; q < 10; ++q) {
      std::vector<double> query(24);
      for (auto& x : query) x = gauss(rng);
      // Oracle: per parent, naive cosine against itself and its children by
      // parent_of, then stable sort by score.
      std::vector<std::pair<double, std::size_t>> expected;
      for (std::size_t p = 0; p < f.index.parents.size(); ++p) {
        const auto& pid = f.index.parents[p].chunk_id;
        double best = cosine(query, f.store.vector(pid));
        for (const auto& c : f.index.children) {
          if (f.index.parent_of.at(c.chunk_id) == pid) {
            best = std::max(best, cosine(query, f.store.vector(c.chunk_id)));
          }
        }
        expected.emplace_back(best, p);
      }
      std::stable_sort(expected.begin(), expected.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      const auto ranked = r.rank(query, 2);
      ASSERT_EQ(ranked.size(), expected.size());
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        EXPECT_NEAR(ranked[i].score, expected[i].first, 1e-12);
      }
      auto scaled = query;
      for (auto& x : scaled) x *= 7.5;
      const auto again = r.top_k(scaled, 5, 1);
      for (std::size_t i = 0; i < again.size(); ++i) {
        EXPECT_EQ(again[i].parent.chunk_id, ranked[i].parent.chunk_id);
      }
    }
  }
}

TEST(AssembleContext, TwoParentsFit) {
  const Corpus corpus({Document::make("a", text_of(6, 100, "a")),
                       Document::make("b", text_of(6, 100, "b"))});
  const std::vector<ScoredParent> ranking{whole_doc_parent(corpus, "a", 0),
                                          whole_doc_parent(corpus, "b", 1)};
  const auto ctx = assemble_context(ranking, corpus, 1500);
  EXPECT_EQ(ctx.used_parents.size(), 2u);
  EXPECT_EQ(ctx.word_count, 1200u);
  EXPECT_EQ(ctx.text, chunk_text(ranking[0].parent, corpus) + "\n\n" +
                          chunk_text(ranking[1].parent, corpus));
}

TEST(AssembleContext, SecondParentWouldOverflow) {
  const Corpus corpus({Document::make("a", text_of(9, 100, "a")),
                       Document::make("b", text_of(7, 100, "b"))});
  const std::vector<ScoredParent> ranking{whole_doc_parent(corpus, "a", 0),
                                          whole_doc_parent(corpus, "b", 1)};
  const auto ctx = assemble_context(ranking, corpus, 1500);
  EXPECT_EQ(ctx.used_parents, std::vector<std::string>{ranking[0].parent.chunk_id});
  EXPECT_EQ(ctx.word_count, 900u);
}

TEST(AssembleContext, OversizeTopParentIsCutAtSentence) {
  const Corpus corpus({Document::make("a", text_of(16, 100, "a"))});
  const std::vector<ScoredParent> ranking{whole_doc_parent(corpus, "a", 0)};
  const auto ctx = assemble_context(ranking, corpus, 1500);
  EXPECT_EQ(ctx.word_count, 1500u);
  EXPECT_EQ(count_words(ctx.text), 1500u);
  EXPECT_TRUE(ctx.text.ends_with("."));
  EXPECT_EQ(ctx.text, text_of(15, 100, "a"));
}

TEST(AssembleContext, OversizeSentenceFallsBackToWords) {
  const Corpus corpus({Document::make("a", sentence_of(40, "w"))});
  const std::vector<ScoredParent> ranking{whole_doc_parent(corpus, "a", 0)};
  const auto ctx = assemble_context(ranking, corpus, 10);
  EXPECT_EQ(ctx.word_count, 10u);
  EXPECT_EQ(count_words(ctx.text), 10u);
  EXPECT_TRUE(ctx.text.starts_with("Start w1 w2"));
}

TEST(AssembleContext, EmptyRanking) {
  const Corpus corpus({Document::make("a", "x.")});
  try {
    assemble_context({}, corpus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyRanking);
  }
}

TEST(AssembleContext, NeverExceedsCap) {
  std::mt19937_64 rng(31);
  const auto f = random_fixture(rng, 16);
  std::uniform_int_distribution<std::size_t> cap(1, 400);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredParent> ranking;
    for (std::size_t p = 0; p < f.index.parents.size(); ++p) {
      ranking.push_back({f.index.parents[p], 0.0, "", p});
    }
    std::shuffle(ranking.begin(), ranking.end(), rng);
    const std::size_t c = cap(rng);
    const auto ctx = assemble_context(ranking, f.corpus, c);
    ASSERT_LE(ctx.word_count, c);
    ASSERT_EQ(count_words(ctx.text), ctx.word_count);
    ASSERT_FALSE(ctx.used_parents.empty());
    for (std::size_t i = 0; i < ctx.used_parents.size(); ++i) {
      ASSERT_EQ(ctx.used_parents[i], ranking[i].parent.chunk_id);
    }
  }
}

}  // namespace
}  // namespace chunkwise

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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "chunkwise/error.hpp"
#include "test_util.hpp"

namespace chunkwise {
namespace {

std::string words_sentence(const std::string& stem, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += stem + std::to_string(i);
  }
  return s + ".";
}

std::vector<const Chunk*> children_at(const GranularIndex& index, std::size_t p,
                                      ChunkLevel level) {
  std::vector<const Chunk*> out;
  for (const auto& c : index.children_of(p)) {
    if (c.level == level) out.push_back(&c);
  }
  return out;
}

TEST(BuildIndex, FourEqualSentencesAtTheta100) {
  std::string text;
  for (int i = 0; i < 4; ++i) {
    if (i) text += ' ';
    text += words_sentence("W" + std::to_string(i) + "x", 25);
  }
  const Corpus corpus({Document::make("d", text)});
  const auto parents = recursive_chunk(corpus.at("d"), 100);
  ASSERT_EQ(parents.size(), 1u);
  const auto index = build_index(corpus, parents, 100);
  const auto half = children_at(index, 0, ChunkLevel::kChildHalf);
  const auto quarter = children_at(index, 0, ChunkLevel::kChildQuarter);
  ASSERT_EQ(half.size(), 2u);
  ASSERT_EQ(quarter.size(), 4u);
  for (const auto* c : half) EXPECT_EQ(c->word_count, 50u);
  for (const auto* c : quarter) EXPECT_EQ(c->word_count, 25u);
  for (const auto& c : index.children) {
    EXPECT_EQ(index.parent_of.at(c.chunk_id), parents[0].chunk_id);
  }
  EXPECT_EQ(index.unit_count(), 7u);
  EXPECT_EQ(index.unit(0).chunk_id, parents[0].chunk_id);
  EXPECT_EQ(index.unit(1).level, ChunkLevel::kChildHalf);
}

TEST(BuildIndex, OversizeSentenceYieldsOneChildPerLevel) {
  const Corpus corpus({Document::make("d", words_sentence("w", 300))});
  const auto parents = recursive_chunk(corpus.at("d"), 200);
  ASSERT_EQ(parents.size(), 1u);
  const auto index = build_index(corpus, parents, 200);
  ASSERT_EQ(index.children.size(), 2u);
  for (const auto& c : index.children) {
    EXPECT_EQ(c.start, parents[0].start);
    EXPECT_EQ(c.end, parents[0].end);
    EXPECT_NE(c.chunk_id, parents[0].chunk_id);
  }
}

TEST(BuildIndex, EmptyParentsGiveEmptyIndex) {
  const Corpus corpus({Document::make("d", "Some text.")});
  const auto index = build_index(corpus, {}, 100);
  EXPECT_TRUE(index.parents.empty());
  EXPECT_TRUE(index.children.empty());
  EXPECT_EQ(index.unit_count(), 0u);
}

TEST(BuildIndex, RejectsUnalignedParent) {
  const Corpus corpus({Document::make("d", "First one here. Second one here.")});
  Chunk bad = make_chunk(corpus.at("d"), split_sentences(corpus.at("d").text), {0, 2},
                         ChunkLevel::kParent);
  bad.start = 3;
  const std::vector<Chunk> parents{bad};
  try {
    build_index(corpus, parents, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidParent);
  }
}

TEST(BuildIndex, ChildrenStayInsideParentsAndMatchSerial) {
  std::mt19937_64 rng(5);
  std::vector<Document> docs;
  for (int i = 0; i < 6; ++i) {
    docs.push_back(Document::make("doc" + std::to_string(i),
                                  testing::random_document(rng, 1200).text));
  }
  const Corpus corpus(docs);
  std::vector<Chunk> parents;
  for (const auto& d : corpus.documents()) {
    auto p = recursive_chunk(d, 200);
    parents.insert(parents.end(), p.begin(), p.end());
  }
  const auto serial = build_index(corpus, parents, 200, default_separator_hierarchy(), 1);
  const auto parallel = build_index(corpus, parents, 200, default_separator_hierarchy(), 4);
  EXPECT_EQ(serial.children, parallel.children);
  EXPECT_EQ(serial.child_offsets, parallel.child_offsets);
  for (std::size_t p = 0; p < serial.parents.size(); ++p) {
    const auto& parent = serial.parents[p];
    std::size_t half_words = 0;
    std::size_t quarter_words = 0;
    for (const auto& c : serial.children_of(p)) {
      EXPECT_EQ(c.doc_id, parent.doc_id);
      EXPECT_GE(c.start, parent.start);
      EXPECT_LE(c.end, parent.end);
      (c.level == ChunkLevel::kChildHalf ? half_words : quarter_words) += c.word_count;
    }
    EXPECT_EQ(half_words, parent.word_count);
    EXPECT_EQ(quarter_words, parent.word_count);
  }
}

class ScoreFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string text;
    for (int i = 0; i < 4; ++i) {
      if (i) text += ' ';
      text += words_sentence("S" + std::to_string(i) + "w", 25);
    }
    corpus = Corpus({Document::make("d", text)});
    parents = recursive_chunk(corpus.at("d"), 100);
    index = build_index(corpus, parents, 100);
  }
  std::unordered_map<std::string, double> scores(double parent, double first_child,
                                                 double rest) const {
    std::unordered_map<std::string, double> out;
    out[index.parents[0].chunk_id] = parent;
    bool first = true;
    for (const auto& c : index.children) {
      out[c.chunk_id] = first ? first_child : rest;
      first = false;
    }
    return out;
  }
  Corpus corpus;
  std::vector<Chunk> parents;
  GranularIndex index;
};

TEST_F(ScoreFixture, ChildWins) {
  const auto s = score_parents(index, scores(0.2, 0.9, 0.1));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].score, 0.9);
  EXPECT_EQ(s[0].best_unit, index.children[0].chunk_id);
}

TEST_F(ScoreFixture, ParentWinsAndTiesFavourParent) {
  auto s = score_parents(index, scores(0.95, 0.9, 0.1));
  EXPECT_EQ(s[0].score, 0.95);
  EXPECT_EQ(s[0].best_unit, index.parents[0].chunk_id);
  s = score_parents(index, scores(0.5, 0.5, 0.5));
  EXPECT_EQ(s[0].best_unit, index.parents[0].chunk_id);
  s = score_parents(index, scores(0.1, 0.5, 0.5));
  EXPECT_EQ(s[0].best_unit, index.children[0].chunk_id);
}

TEST_F(ScoreFixture, MissingScoreIsReported) {
  auto m = scores(0.2, 0.9, 0.1);
  m.erase(index.children.back().chunk_id);
  try {
    score_parents(index, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteScores);
  }
}

struct RandomIndex {
  Corpus corpus;
  GranularIndex index;
};

RandomIndex random_index(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ndocs(1, 3);
  std::uniform_int_distribution<std::size_t> nwords(50, 700);
  std::uniform_int_distribution<int> theta_pick(0, 2);
  const std::size_t thetas[] = {40, 80, 150};
  RandomIndex out;
  std::vector<Document> docs;
  const int n = ndocs(rng);
  for (int i = 0; i < n; ++i) {
    docs.push_back(Document::make("r" + std::to_string(i),
                                  testing::random_document(rng, nwords(rng)).text));
  }
  out.corpus = Corpus(docs);
  const std::size_t theta = thetas[theta_pick(rng)];
  std::vector<Chunk> parents;
  for (const auto& d : out.corpus.documents()) {
    auto p = recursive_chunk(d, theta);
    parents.insert(parents.end(), p.begin(), p.end());
  }
  out.index = build_index(out.corpus, parents, theta);
  return out;
}

// Independent oracle: containment by offsets, not by the index grouping.
double oracle_parent_score(const GranularIndex& index, std::size_t p,
                           const std::unordered_map<std::string, double>& scores) {
  const auto& parent = index.parents[p];
  double best = scores.at(parent.chunk_id);
  for (const auto& c : index.children) {
    if (c.doc_id == parent.doc_id && c.start >= parent.start && c.end <= parent.end &&
        index.parent_of.at(c.chunk_id) == parent.chunk_id) {
      best = std::max(best, scores.at(c.chunk_id));
    }
  }
  return best;
}

TEST(ScoreParents, MatchesBruteForceOracle) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> grid(-20, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_index(rng);
    std::unordered_map<std::string, double> scores;
    std::vector<double> dense;
    for (std::size_t u = 0; u < r.index.unit_count(); ++u) {
      const double v = grid(rng) / 20.0;
      scores[r.index.unit(u).chunk_id] = v;
      dense.push_back(v);
    }
    const auto by_map = score_parents(r.index, scores, 2);
    const auto by_span = score_parents(r.index, dense, 1);
    ASSERT_EQ(by_map.size(), r.index.parents.size());
    for (std::size_t p = 0; p < by_map.size(); ++p) {
      const double expected = oracle_parent_score(r.index, p, scores);
      ASSERT_EQ(by_map[p].score, expected);
      ASSERT_EQ(by_span[p].score, expected);
      ASSERT_EQ(by_map[p].best_unit, by_span[p].best_unit);
      ASSERT_EQ(by_map[p].parent_index, p);
      // Dominance.
      ASSERT_GE(by_map[p].score, scores.at(r.index.parents[p].chunk_id));
      for (const auto& c : r.index.children_of(p)) {
        ASSERT_GE(by_map[p].score, scores.at(c.chunk_id));
      }
    }
    // Monotonicity: raising one unit never lowers any parent score.
    std::uniform_int_distribution<std::size_t> which(0, r.index.unit_count() - 1);
    auto raised = scores;
    raised[r.index.unit(which(rng)).chunk_id] += 0.37;
    const auto after = score_parents(r.index, raised);
    for (std::size_t p = 0; p < after.size(); ++p) {
      ASSERT_GE(after[p].score, by_map[p].score);
    }
  }
}

std::vector<ScoredParent> scored_list(const std::vector<double>& scores) {
  std::vector<ScoredParent> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ScoredParent s;
    s.parent.chunk_id = "p" + std::to_string(i);
    s.score = scores[i];
    s.parent_index = i;
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> ids_of(const std::vector<ScoredParent>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.parent.chunk_id);
  return out;
}

TEST(TopK, OrdersByScoreThenIndex) {
  const auto top = top_k_parents(scored_list({0.1, 0.9, 0.5, 0.9, 0.3}), 3);
  EXPECT_EQ(ids_of(top), (std::vector<std::string>{"p1", "p3", "p2"}));
  EXPECT_EQ(top_k_parents(scored_list({0.1, 0.2}), 10).size(), 2u);
  try {
    top_k_parents(scored_list({0.1}), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidK);
  }
}

TEST(TopK, NoDuplicateParents) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> grid(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial % 17);
    for (auto& x : v) x = grid(rng);
    auto list = scored_list(v);
    // Same parent reported twice must collapse to one entry.
    list.push_back(list.front());
    const auto top = top_k_parents(list, 1 + trial % 7);
    auto ids = ids_of(top);
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
    for (std::size_t i = 1; i < top.size(); ++i) {
      EXPECT_GE(top[i - 1].score, top[i].score);
    }
  }
}

TEST(GranularIndexOps, ForDocumentAndConcat) {
  std::mt19937_64 rng(12);
  const auto r = random_index(rng);
  std::vector<GranularIndex> parts;
  for (const auto& d : r.corpus.documents()) parts.push_back(r.index.for_document(d.id));
  const auto joined = GranularIndex::concat(parts);
  EXPECT_EQ(joined.parents, r.index.parents);
  EXPECT_EQ(joined.children, r.index.children);
  EXPECT_EQ(joined.child_offsets, r.index.child_offsets);
  EXPECT_EQ(joined.parent_of, r.index.parent_of);
  const auto flat = GranularIndex::parents_only(r.index.parents);
  EXPECT_TRUE(flat.children.empty());
  EXPECT_EQ(flat.child_offsets.size(), flat.parents.size() + 1);
}

}  // namespace
}  // namespace chunkwise

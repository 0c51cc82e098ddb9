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

// Model access. Chunkers and retrieval only ever see these interfaces; the
// HTTP clients speak the JSON wire protocol and the mocks are deterministic
// in-process stand-ins for tests and --mock runs.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chunkwise {

inline constexpr std::string_view kDefaultPrompt =
    "Continue writing the following text.";

struct LogitsProviderSpec {
  std::string endpoint;
  std::string prompt_rho = std::string(kDefaultPrompt);
  std::string eos_token_label = "<|end_of_text|>";
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;

  void validate() const;
};

struct EmbeddingProviderSpec {
  std::string endpoint;
  std::size_t dimension = 256;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::size_t batch_size = 32;
  std::string query_prefix;

  void validate() const;
};

struct GenerationProviderSpec {
  std::string endpoint;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 3;
  std::size_t max_words = 64;
};

// Context first, then the question.
std::string build_qa_prompt(std::string_view context, std::string_view question);

class LogitsProvider {
 public:
  virtual ~LogitsProvider() = default;
  // scores[i] = log p(EOS | prompt ⊕ texts[i]). Must be safe to call from
  // several threads at once.
  virtual std::vector<double> eos_log_probs(const std::string& prompt,
                                            std::span<const std::string> texts) = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<std::vector<double>> embed(
      std::span<const std::string> texts) = 0;
};

class GenerationProvider {
 public:
  virtual ~GenerationProvider() = default;
  virtual std::string generate(const std::string& prompt, std::size_t max_words) = 0;
};

// POST {endpoint}/v1/eos_score
class HttpLogitsProvider final : public LogitsProvider {
 public:
  explicit HttpLogitsProvider(LogitsProviderSpec spec);
  std::vector<double> eos_log_probs(const std::string& prompt,
                                    std::span<const std::string> texts) override;

 private:
  LogitsProviderSpec spec_;
};

// POST {endpoint}/v1/embed, batch_size texts per request.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(EmbeddingProviderSpec spec);
  std::size_t dimension() const override { return spec_.dimension; }
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

 private:
  EmbeddingProviderSpec spec_;
};

// POST {endpoint}/v1/generate
class HttpGenerationProvider final : public GenerationProvider {
 public:
  explicit HttpGenerationProvider(GenerationProviderSpec spec);
  std::string generate(const std::string& prompt, std::size_t max_words) override;

 private:
  GenerationProviderSpec spec_;
};

class MockLogitsProvider final : public LogitsProvider {
 public:
  using Rule = std::function<double(std::string_view prefix)>;

  explicit MockLogitsProvider(Rule rule);
  // Replay: call i returns script[i]; running past the end throws
  // ProviderUnavailable.
  explicit MockLogitsProvider(std::vector<std::vector<double>> script);

  // Replay file: JSON list of score arrays.
  static std::vector<std::vector<double>> load_replay(const std::filesystem::path& path);

  // Pseudo-random but deterministic score from a hash of the prefix.
  static double hash_rule(std::string_view prefix);
  // 0 when the prefix ends with terminal punctuation, -1 otherwise.
  static double terminal_punctuation_rule(std::string_view prefix);
  // Shorter prefixes always win, so the first sentence is always the break.
  static double first_sentence_rule(std::string_view prefix);

  std::vector<double> eos_log_probs(const std::string& prompt,
                                    std::span<const std::string> texts) override;

  std::size_t calls() const { return calls_.load(); }
  std::size_t texts_scored() const { return texts_.load(); }

 private:
  Rule rule_;
  std::vector<std::vector<double>> script_;
  std::mutex script_mu_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> texts_{0};
};

// Feature hashing of lowercased word unigrams into `dimension` buckets,
// L2-normalized. Text without any word maps to a fixed bucket.
class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dimension, int jobs = 1);
  std::size_t dimension() const override { return dimension_; }
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

  std::vector<double> embed_one(std::string_view text) const;

 private:
  std::size_t dimension_;
  int jobs_;
};

// Extractive stand-in: answers with the context sentence sharing the most
// words with the question (earliest on ties), cut to max_words.
class MockGenerator final : public GenerationProvider {
 public:
  std::string generate(const std::string& prompt, std::size_t max_words) override;
};

}  // namespace chunkwise

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

// Corpus ingestion, configuration, on-disk formats and the command
// implementations behind the CLI.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chunkwise/evaluation.hpp"
#include "chunkwise/granularity.hpp"
#include "chunkwise/logits_chunker.hpp"
#include "chunkwise/providers.hpp"
#include "chunkwise/retrieval.hpp"
#include "chunkwise/segmentation.hpp"
#include "json.hpp"

namespace chunkwise {

enum class ChunkerKind { kRecursive, kParagraph, kLogits, kMultigranular, kLgmgc };

std::string_view chunker_name(ChunkerKind kind);
ChunkerKind parse_chunker(std::string_view name);

enum class EvalMode { kRetrieval, kQA };

struct PipelineConfig {
  ChunkerKind chunker = ChunkerKind::kLgmgc;
  std::size_t theta = 200;
  std::size_t k = 5;
  std::size_t context_cap = kDefaultContextCap;
  std::optional<std::size_t> stop_threshold;  // default theta
  std::optional<std::size_t> window_cap;      // default 2 * theta
  std::vector<std::string> separators = default_separator_hierarchy();
  std::vector<std::size_t> k_list = kDefaultKList;
  std::vector<std::size_t> thetas{200, 300, 500};
  RougeVariant rouge = RougeVariant::kRougeL;
  EvalMode mode = EvalMode::kRetrieval;

  LogitsProviderSpec logits;
  std::filesystem::path logits_replay;
  EmbeddingProviderSpec embedding;
  GenerationProviderSpec generation;

  std::filesystem::path corpus;
  std::filesystem::path index;
  std::filesystem::path store;
  std::filesystem::path dataset;
  std::filesystem::path report;
  std::filesystem::path abbreviations;

  int jobs = 1;
  bool mock = false;
  std::uint64_t seed = 0;

  LGConfig lg_config() const;
  // Throws InvalidConfig.
  void validate() const;
  // Path-free summary echoed into every output file.
  nlohmann::ordered_json echo() const;
};

// TOML-style: `key = value` lines, `[section]` headers prefixing keys with
// "section.", '#' comments. Values are quoted strings (with the usual backslash
// escapes), integers, true/false, or bracketed lists of those.
using ConfigValues = std::map<std::string, nlohmann::json>;
ConfigValues parse_config_text(std::string_view text);
// Throws InvalidConfig on unknown keys or wrong types.
void apply_config(PipelineConfig& config, const ConfigValues& values);
PipelineConfig load_config(const std::filesystem::path& path);

// JSONL of {"id","text"} or a directory of .txt files (id = file stem, sorted).
// Texts are newline- and NFC-normalized. Throws DuplicateDocId,
// MalformedRecord (with line number), EmptyInput.
Corpus ingest_corpus(const std::filesystem::path& path);

struct Providers {
  std::unique_ptr<LogitsProvider> logits;
  std::unique_ptr<EmbeddingProvider> embedding;
  std::unique_ptr<GenerationProvider> generation;
};

// Mock mode: hash-rule (or replay) logits, HashEmbedder, MockGenerator.
// Otherwise HTTP clients for whichever endpoints are configured.
Providers make_providers(const PipelineConfig& config);

// Runs the configured chunker over every document; multigranular and lgmgc
// also derive children.
GranularIndex chunk_corpus(const Corpus& corpus, const PipelineConfig& config,
                           LogitsProvider* logits);

struct IndexFile {
  Corpus corpus;
  GranularIndex index;
  nlohmann::ordered_json config;
  std::string hash;
};

nlohmann::ordered_json index_to_json(const Corpus& corpus, const GranularIndex& index,
                                     const PipelineConfig& config);
std::string index_hash(const nlohmann::ordered_json& index_json);
void save_index(const std::filesystem::path& path, const Corpus& corpus,
                const GranularIndex& index, const PipelineConfig& config);
IndexFile load_index(const std::filesystem::path& path);

void save_store(const std::filesystem::path& path, const VectorStore& store,
                const std::string& index_hash);
// Throws StaleStore when the recorded hash differs from expected_index_hash.
VectorStore load_store(const std::filesystem::path& path,
                       const std::string& expected_index_hash);

// Chunk-count and size-distribution summary.
std::string summarize_index(const GranularIndex& index);

std::string cmd_chunk(const PipelineConfig& config);
std::string cmd_index(const PipelineConfig& config);

struct RetrieveResult {
  std::vector<ScoredParent> ranking;
  AssembledContext context;
};
RetrieveResult cmd_retrieve(const PipelineConfig& config, const std::string& question);
std::string format_retrieve(const RetrieveResult& result);

// Chunk, embed and evaluate the dataset in memory. Writes <report>.json and
// <report>.txt when config.report is set.
EvalReport cmd_evaluate(const PipelineConfig& config);

struct SweepReport {
  std::vector<std::pair<std::size_t, EvalReport>> runs;
  std::map<std::string, std::pair<double, double>> mean_sd;  // metric -> (mean, sd)
  nlohmann::ordered_json config;

  nlohmann::ordered_json to_json() const;
  std::string to_table(std::string_view label) const;
};

// Sample (n-1) standard deviation; 0 for fewer than two values.
std::pair<double, double> mean_and_sd(const std::vector<double>& values);
// Metric name -> per-run value, keyed "dcg@k", "recall@k", "f1".
std::map<std::string, std::vector<double>> collect_metrics(
    const std::vector<const EvalReport*>& reports);

// cmd_evaluate per theta in config.thetas. Writes <report>.theta<θ>.json per
// run plus <report>.json / <report>.txt aggregates when config.report is set.
SweepReport cmd_sweep(const PipelineConfig& config);

void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace chunkwise

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

// chunkwise: chunk, index, retrieve and evaluate document corpora.
//
//   chunkwise chunk    --corpus docs.jsonl --index out/index.json
//   chunkwise index    --index out/index.json --store out/store.json
//   chunkwise retrieve --index out/index.json --store out/store.json "question"
//   chunkwise evaluate --corpus docs.jsonl --dataset qa.jsonl --report out/eval
//   chunkwise sweep    --corpus docs.jsonl --dataset qa.jsonl --report out/sweep
//
// Exit codes: 0 success, 2 config error, 3 provider error, 4 data error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chunkwise/error.hpp"
#include "chunkwise/pipeline.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<int> jobs;
  bool mock = false;
  std::optional<std::size_t> theta;
  std::optional<std::size_t> k;
  std::optional<std::string> chunker;
  std::optional<std::string> corpus;
  std::optional<std::string> index;
  std::optional<std::string> store;
  std::optional<std::string> dataset;
  std::optional<std::string> report;
  std::optional<std::string> mode;
  std::optional<std::vector<std::size_t>> thetas;
  std::optional<std::size_t> context_cap;
};

chunkwise::PipelineConfig resolve(const Overrides& o) {
  chunkwise::PipelineConfig c;
  if (!o.config_path.empty()) c = chunkwise::load_config(o.config_path);
  chunkwise::ConfigValues flags;
  if (o.jobs) flags["jobs"] = *o.jobs;
  if (o.mock) flags["mock"] = true;
  if (o.theta) flags["theta"] = *o.theta;
  if (o.k) flags["k"] = *o.k;
  if (o.chunker) flags["chunker"] = *o.chunker;
  if (o.corpus) flags["corpus"] = *o.corpus;
  if (o.index) flags["index"] = *o.index;
  if (o.store) flags["store"] = *o.store;
  if (o.dataset) flags["dataset"] = *o.dataset;
  if (o.report) flags["report"] = *o.report;
  if (o.mode) flags["mode"] = *o.mode;
  if (o.thetas) flags["thetas"] = *o.thetas;
  if (o.context_cap) flags["context_cap"] = *o.context_cap;
  chunkwise::apply_config(c, flags);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence-aligned document chunking, retrieval and evaluation"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "TOML-style config file");
  app.add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
  app.add_flag("--mock", o.mock, "Use deterministic in-process providers");
  app.add_option("--theta", o.theta, "Chunk size in words");
  app.add_option("--k", o.k, "Parents to retrieve");
  app.add_option("--chunker", o.chunker,
                 "recursive | paragraph | logits | multigranular | lgmgc");
  app.add_option("--context-cap", o.context_cap, "Context word cap");
  app.add_option("--corpus", o.corpus, "Corpus JSONL file or directory of .txt");
  app.add_option("--index", o.index, "Index JSON path");
  app.add_option("--store", o.store, "Vector store JSON path");
  app.add_option("--dataset", o.dataset, "Evaluation JSONL");
  app.add_option("--report", o.report, "Report path prefix (.json/.txt appended)");
  app.add_option("--mode", o.mode, "retrieval | qa");
  app.add_option("--thetas", o.thetas, "Chunk sizes for sweep");

  auto* chunk = app.add_subcommand("chunk", "Chunk a corpus and write the index");
  auto* index = app.add_subcommand("index", "Embed every retrieval unit of an index");
  auto* retrieve = app.add_subcommand("retrieve", "Rank parents for a question");
  std::string question;
  retrieve->add_option("question", question, "Question text")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a dataset end to end");
  auto* sweep = app.add_subcommand("sweep", "Evaluate across chunk sizes");
  for (auto* sub : {chunk, index, retrieve, evaluate, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const chunkwise::PipelineConfig config = resolve(o);
    if (chunk->parsed()) {
      std::cout << chunkwise::cmd_chunk(config);
    } else if (index->parsed()) {
      std::cout << chunkwise::cmd_index(config);
    } else if (retrieve->parsed()) {
      std::cout << chunkwise::format_retrieve(chunkwise::cmd_retrieve(config, question));
    } else if (evaluate->parsed()) {
      const auto report = chunkwise::cmd_evaluate(config);
      std::cout << report.to_table(chunkwise::chunker_name(config.chunker));
    } else if (sweep->parsed()) {
      const auto report = chunkwise::cmd_sweep(config);
      std::cout << report.to_table(chunkwise::chunker_name(config.chunker));
    }
  } catch (const chunkwise::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return chunkwise::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}

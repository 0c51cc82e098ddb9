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

#include "chunkwise/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "chunkwise/error.hpp"
#include "chunkwise/kernels.hpp"
#include "chunkwise/text.hpp"

namespace chunkwise {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::kInvalidConfig, message);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Minimal recursive-descent reader for config values.
class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  json parse_all() {
    json v = parse_value();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    config_error("config line " + std::to_string(line_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  json parse_value() {
    skip_space();
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_list();
    return parse_scalar();
  }

  json parse_string() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("dangling escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  json parse_list() {
    ++pos_;
    json arr = json::array();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return arr;
    }
    while (true) {
      arr.push_back(parse_value());
      skip_space();
      if (pos_ >= text_.size()) fail("unterminated list");
      if (text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return arr;
      }
      fail("expected ',' or ']'");
    }
  }

  json parse_scalar() {
    const std::size_t b = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           text_[pos_] != ' ' && text_[pos_] != '\t') {
      ++pos_;
    }
    const std::string_view tok = text_.substr(b, pos_ - b);
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("missing value");
    std::int64_t v = 0;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (i == 0 && tok[i] == '-' && tok.size() > 1) continue;
      if (tok[i] < '0' || tok[i] > '9') fail("unquoted value '" + std::string(tok) + "'");
    }
    v = std::stoll(std::string(tok));
    return v;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string strip_comment(std::string_view line) {
  std::string out;
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && in_string && i + 1 < line.size()) {
      out.push_back(c);
      out.push_back(line[++i]);
      continue;
    }
    if (c == '"') in_string = !in_string;
    if (c == '#' && !in_string) break;
    out.push_back(c);
  }
  const auto b = out.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = out.find_last_not_of(" \t\r");
  return out.substr(b, e - b + 1);
}

std::size_t as_size(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    config_error("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) config_error("'" + key + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) config_error("'" + key + "' must be true or false");
  return v.get<bool>();
}

std::vector<std::size_t> as_size_list(const json& v, const std::string& key) {
  if (!v.is_array()) config_error("'" + key + "' must be a list");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(as_size(e, key));
  return out;
}

std::vector<std::string> as_string_list(const json& v, const std::string& key) {
  if (!v.is_array()) config_error("'" + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(as_string(e, key));
  return out;
}

ordered_json chunk_to_json(const Chunk& c) {
  ordered_json j;
  j["chunk_id"] = c.chunk_id;
  j["doc_id"] = c.doc_id;
  j["start"] = c.start;
  j["end"] = c.end;
  j["word_count"] = c.word_count;
  j["level"] = std::string(level_name(c.level));
  return j;
}

Chunk chunk_from_json(const json& j) {
  Chunk c;
  c.chunk_id = j.at("chunk_id").get<std::string>();
  c.doc_id = j.at("doc_id").get<std::string>();
  c.start = j.at("start").get<std::size_t>();
  c.end = j.at("end").get<std::size_t>();
  c.word_count = j.at("word_count").get<std::size_t>();
  c.level = parse_level(j.at("level").get<std::string>());
  if (c.chunk_id != make_chunk_id(c.doc_id, c.start, c.end, c.level)) {
    throw Error(ErrorCode::kMalformedRecord, "chunk id mismatch for " + c.chunk_id);
  }
  return c;
}

std::string report_path(const std::filesystem::path& base, std::string_view suffix) {
  return base.string() + std::string(suffix);
}

VectorStore embed_index(const GranularIndex& index, const Corpus& corpus,
                        EmbeddingProvider& provider) {
  return build_store(index, corpus, provider);
}

EvalReport evaluate_in_memory(const PipelineConfig& config, Providers& providers,
                              const Corpus& corpus) {
  const GranularIndex index = chunk_corpus(corpus, config, providers.logits.get());
  if (!providers.embedding) config_error("evaluation needs an embedding provider");
  const VectorStore store = embed_index(index, corpus, *providers.embedding);
  EvalReport report;
  if (config.mode == EvalMode::kRetrieval) {
    const auto examples = load_retrieval_examples(config.dataset);
    RetrievalEvalOptions opts;
    opts.k_list = config.k_list;
    opts.rouge = config.rouge;
    opts.query_prefix = config.embedding.query_prefix;
    opts.jobs = config.jobs;
    report = evaluate_retrieval(examples, index, store, corpus, *providers.embedding, opts);
  } else {
    if (!providers.generation) config_error("QA mode needs a generation provider");
    const auto examples = load_qa_examples(config.dataset);
    QAEvalOptions opts;
    opts.k = config.k;
    opts.context_cap = config.context_cap;
    opts.max_words = config.generation.max_words;
    opts.query_prefix = config.embedding.query_prefix;
    opts.jobs = config.jobs;
    report = evaluate_qa(examples, index, store, corpus, *providers.embedding,
                         *providers.generation, opts);
  }
  report.config = config.echo();
  return report;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string_view chunker_name(ChunkerKind kind) {
  switch (kind) {
    case ChunkerKind::kRecursive: return "recursive";
    case ChunkerKind::kParagraph: return "paragraph";
    case ChunkerKind::kLogits: return "logits";
    case ChunkerKind::kMultigranular: return "multigranular";
    case ChunkerKind::kLgmgc: return "lgmgc";
  }
  return "lgmgc";
}

ChunkerKind parse_chunker(std::string_view name) {
  for (auto k : {ChunkerKind::kRecursive, ChunkerKind::kParagraph, ChunkerKind::kLogits,
                 ChunkerKind::kMultigranular, ChunkerKind::kLgmgc}) {
    if (chunker_name(k) == name) return k;
  }
  config_error("unknown chunker '" + std::string(name) + "'");
}

LGConfig PipelineConfig::lg_config() const {
  LGConfig cfg = LGConfig::with_theta(theta);
  if (stop_threshold) cfg.stop_threshold = *stop_threshold;
  if (window_cap) cfg.window_cap = *window_cap;
  cfg.separator_hierarchy = separators;
  return cfg;
}

void PipelineConfig::validate() const {
  if (theta == 0) config_error("theta must be > 0");
  if (k == 0) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  if (context_cap < theta) config_error("context_cap must be >= theta");
  for (std::size_t kk : k_list) {
    if (kk == 0) throw Error(ErrorCode::kInvalidK, "k_list entries must be >= 1");
  }
  for (std::size_t t : thetas) {
    if (t == 0) config_error("thetas must be > 0");
  }
  if (jobs < 0) config_error("jobs must be >= 0");
  if (chunker == ChunkerKind::kLogits || chunker == ChunkerKind::kLgmgc) {
    lg_config().validate();
    logits.validate();
  }
  embedding.validate();
}

ordered_json PipelineConfig::echo() const {
  ordered_json j;
  j["chunker"] = std::string(chunker_name(chunker));
  j["theta"] = theta;
  if (chunker == ChunkerKind::kLogits || chunker == ChunkerKind::kLgmgc) {
    const LGConfig lg = lg_config();
    j["stop_threshold"] = lg.stop_threshold;
    j["window_cap"] = lg.window_cap;
    j["prompt_hash"] = hex64(fnv1a64(logits.prompt_rho));
  }
  j["separators"] = separators;
  j["k"] = k;
  j["k_list"] = k_list;
  j["context_cap"] = context_cap;
  j["rouge"] = std::string(rouge_variant_name(rouge));
  j["mode"] = mode == EvalMode::kRetrieval ? "retrieval" : "qa";
  j["embedding_dimension"] = embedding.dimension;
  j["mock"] = mock;
  return j;
}

ConfigValues parse_config_text(std::string_view text) {
  ConfigValues values;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    const std::string line = strip_comment(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        config_error("config line " + std::to_string(line_no) + ": bad section header");
      }
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key.empty()) config_error("config line " + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    values[key] = ValueParser(std::string_view(line).substr(eq + 1), line_no).parse_all();
  }
  return values;
}

void apply_config(PipelineConfig& c, const ConfigValues& values) {
  for (const auto& [key, v] : values) {
    if (key == "chunker") c.chunker = parse_chunker(as_string(v, key));
    else if (key == "theta") c.theta = as_size(v, key);
    else if (key == "k") c.k = as_size(v, key);
    else if (key == "context_cap") c.context_cap = as_size(v, key);
    else if (key == "stop_threshold") c.stop_threshold = as_size(v, key);
    else if (key == "window_cap") c.window_cap = as_size(v, key);
    else if (key == "separators") c.separators = as_string_list(v, key);
    else if (key == "k_list") c.k_list = as_size_list(v, key);
    else if (key == "thetas") c.thetas = as_size_list(v, key);
    else if (key == "rouge") c.rouge = parse_rouge_variant(as_string(v, key));
    else if (key == "mode") {
      const auto m = as_string(v, key);
      if (m == "retrieval") c.mode = EvalMode::kRetrieval;
      else if (m == "qa") c.mode = EvalMode::kQA;
      else config_error("mode must be 'retrieval' or 'qa'");
    }
    else if (key == "corpus") c.corpus = as_string(v, key);
    else if (key == "index") c.index = as_string(v, key);
    else if (key == "store") c.store = as_string(v, key);
    else if (key == "dataset") c.dataset = as_string(v, key);
    else if (key == "report") c.report = as_string(v, key);
    else if (key == "abbreviations") c.abbreviations = as_string(v, key);
    else if (key == "jobs") c.jobs = static_cast<int>(as_size(v, key));
    else if (key == "mock") c.mock = as_bool(v, key);
    else if (key == "seed") c.seed = as_size(v, key);
    else if (key == "logits.endpoint") c.logits.endpoint = as_string(v, key);
    else if (key == "logits.prompt") c.logits.prompt_rho = as_string(v, key);
    else if (key == "logits.eos_token") c.logits.eos_token_label = as_string(v, key);
    else if (key == "logits.timeout_ms") c.logits.timeout = std::chrono::milliseconds(as_size(v, key));
    else if (key == "logits.max_retries") c.logits.max_retries = static_cast<int>(as_size(v, key));
    else if (key == "logits.replay") c.logits_replay = as_string(v, key);
    else if (key == "embedding.endpoint") c.embedding.endpoint = as_string(v, key);
    else if (key == "embedding.dimension") c.embedding.dimension = as_size(v, key);
    else if (key == "embedding.batch_size") c.embedding.batch_size = as_size(v, key);
    else if (key == "embedding.timeout_ms") c.embedding.timeout = std::chrono::milliseconds(as_size(v, key));
    else if (key == "embedding.max_retries") c.embedding.max_retries = static_cast<int>(as_size(v, key));
    else if (key == "embedding.query_prefix") c.embedding.query_prefix = as_string(v, key);
    else if (key == "generation.endpoint") c.generation.endpoint = as_string(v, key);
    else if (key == "generation.max_words") c.generation.max_words = as_size(v, key);
    else if (key == "generation.timeout_ms") c.generation.timeout = std::chrono::milliseconds(as_size(v, key));
    else if (key == "generation.max_retries") c.generation.max_retries = static_cast<int>(as_size(v, key));
    else config_error("unknown config key '" + key + "'");
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    config_error(e.message());
  }
  PipelineConfig config;
  apply_config(config, parse_config_text(text));
  // Relative paths in a config file resolve against the file's directory.
  const auto base = path.parent_path();
  for (auto* p : {&config.corpus, &config.index, &config.store, &config.dataset,
                  &config.report, &config.abbreviations, &config.logits_replay}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return config;
}

Corpus ingest_corpus(const std::filesystem::path& path) {
  Corpus corpus;
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      corpus.add(Document::make(f.stem().string(), normalize_text(read_file(f))));
    }
    return corpus;
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + " line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("text") || !j["text"].is_string()) {
      throw Error(ErrorCode::kMalformedRecord, where + ": need string 'id' and 'text'");
    }
    try {
      corpus.add(Document::make(j["id"].get<std::string>(),
                                normalize_text(j["text"].get<std::string>())));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDuplicateDocId) throw;
      throw Error(ErrorCode::kMalformedRecord, where + ": " + e.message());
    }
  }
  return corpus;
}

Providers make_providers(const PipelineConfig& config) {
  Providers p;
  if (config.mock) {
    if (!config.logits_replay.empty()) {
      p.logits = std::make_unique<MockLogitsProvider>(
          MockLogitsProvider::load_replay(config.logits_replay));
    } else {
      p.logits = std::make_unique<MockLogitsProvider>(&MockLogitsProvider::hash_rule);
    }
    p.embedding = std::make_unique<HashEmbedder>(config.embedding.dimension, config.jobs);
    p.generation = std::make_unique<MockGenerator>();
    return p;
  }
  if (!config.logits.endpoint.empty()) {
    p.logits = std::make_unique<HttpLogitsProvider>(config.logits);
  }
  if (!config.embedding.endpoint.empty()) {
    p.embedding = std::make_unique<HttpEmbeddingProvider>(config.embedding);
  }
  if (!config.generation.endpoint.empty()) {
    p.generation = std::make_unique<HttpGenerationProvider>(config.generation);
  }
  return p;
}

GranularIndex chunk_corpus(const Corpus& corpus, const PipelineConfig& config,
                           LogitsProvider* logits) {
  config.validate();
  const AbbreviationList abbreviations =
      config.abbreviations.empty() ? AbbreviationList::defaults()
                                   : AbbreviationList::load(config.abbreviations);
  const bool uses_logits =
      config.chunker == ChunkerKind::kLogits || config.chunker == ChunkerKind::kLgmgc;
  if (uses_logits && logits == nullptr) {
    config_error(std::string(chunker_name(config.chunker)) +
                 " chunker needs a logits provider (set logits.endpoint or --mock)");
  }
  const LGConfig lg = config.lg_config();
  const auto& docs = corpus.documents();
  std::vector<std::vector<Chunk>> per_doc(docs.size());
  kernels::parallel_for(docs.size(), config.jobs, [&](std::size_t d) {
    const Document& doc = docs[d];
    switch (config.chunker) {
      case ChunkerKind::kRecursive:
      case ChunkerKind::kMultigranular:
        per_doc[d] = recursive_chunk(doc, config.theta, config.separators,
                                     ChunkLevel::kParent, abbreviations);
        break;
      case ChunkerKind::kParagraph:
        per_doc[d] = paragraph_chunk(doc, abbreviations);
        break;
      case ChunkerKind::kLogits:
      case ChunkerKind::kLgmgc:
        per_doc[d] = lg_parent_chunks(doc, lg, *logits, config.logits.prompt_rho,
                                      abbreviations);
        break;
    }
  });
  std::vector<Chunk> parents;
  for (auto& v : per_doc) {
    parents.insert(parents.end(), std::make_move_iterator(v.begin()),
                   std::make_move_iterator(v.end()));
  }
  if (config.chunker == ChunkerKind::kMultigranular ||
      config.chunker == ChunkerKind::kLgmgc) {
    return build_index(corpus, parents, config.theta, config.separators, config.jobs,
                       abbreviations);
  }
  return GranularIndex::parents_only(std::move(parents));
}

ordered_json index_to_json(const Corpus& corpus, const GranularIndex& index,
                           const PipelineConfig& config) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config.echo();
  ordered_json docs = ordered_json::array();
  for (const auto& d : corpus.documents()) {
    ordered_json e;
    e["id"] = d.id;
    e["word_count"] = d.word_count;
    e["text"] = u32_to_utf8(d.text);
    docs.push_back(e);
  }
  j["documents"] = docs;
  ordered_json parents = ordered_json::array();
  for (const auto& p : index.parents) parents.push_back(chunk_to_json(p));
  j["parents"] = parents;
  ordered_json children = ordered_json::array();
  ordered_json parent_of = ordered_json::object();
  for (std::size_t p = 0; p < index.parents.size(); ++p) {
    for (const auto& c : index.children_of(p)) {
      children.push_back(chunk_to_json(c));
      parent_of[c.chunk_id] = index.parents[p].chunk_id;
    }
  }
  j["children"] = children;
  j["parent_of"] = parent_of;
  return j;
}

std::string index_hash(const ordered_json& index_json) {
  return hex64(fnv1a64(index_json.dump()));
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void save_index(const std::filesystem::path& path, const Corpus& corpus,
                const GranularIndex& index, const PipelineConfig& config) {
  write_text_file(path, index_to_json(corpus, index, config).dump() + "\n");
}

IndexFile load_index(const std::filesystem::path& path) {
  IndexFile file;
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + ": unsupported schema_version");
    }
    file.hash = index_hash(j);
    file.config = j.at("config");
    for (const auto& d : j.at("documents")) {
      file.corpus.add(Document::make(d.at("id").get<std::string>(),
                                     d.at("text").get<std::string>()));
    }
    std::unordered_map<std::string, std::size_t> parent_pos;
    for (const auto& p : j.at("parents")) {
      Chunk c = chunk_from_json(p);
      parent_pos.emplace(c.chunk_id, file.index.parents.size());
      file.index.parents.push_back(std::move(c));
    }
    std::vector<std::vector<Chunk>> grouped(file.index.parents.size());
    const auto& parent_of = j.at("parent_of");
    for (const auto& cj : j.at("children")) {
      Chunk c = chunk_from_json(cj);
      if (!parent_of.contains(c.chunk_id)) {
        throw Error(ErrorCode::kMalformedRecord, "child " + c.chunk_id + " has no parent");
      }
      const auto pid = parent_of.at(c.chunk_id).get<std::string>();
      const auto it = parent_pos.find(pid);
      if (it == parent_pos.end()) {
        throw Error(ErrorCode::kMalformedRecord, "unknown parent " + pid);
      }
      file.index.parent_of.emplace(c.chunk_id, pid);
      grouped[it->second].push_back(std::move(c));
    }
    file.index.child_offsets.assign(1, 0);
    for (auto& g : grouped) {
      for (auto& c : g) file.index.children.push_back(std::move(c));
      file.index.child_offsets.push_back(file.index.children.size());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
  }
  return file;
}

void save_store(const std::filesystem::path& path, const VectorStore& store,
                const std::string& hash) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["index_hash"] = hash;
  j["dimension"] = store.dimension();
  j["normalized"] = store.normalized();
  ordered_json units = ordered_json::array();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto row = store.row(i);
    ordered_json u;
    u["id"] = store.ids()[i];
    u["vector"] = std::vector<double>(row.begin(), row.end());
    units.push_back(u);
  }
  j["units"] = units;
  write_text_file(path, j.dump() + "\n");
}

VectorStore load_store(const std::filesystem::path& path,
                       const std::string& expected_index_hash) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
  }
  try {
    const auto recorded = j.at("index_hash").get<std::string>();
    if (recorded != expected_index_hash) {
      throw Error(ErrorCode::kStaleStore,
                  path.string() + " was built for index " + recorded +
                      ", loaded index is " + expected_index_hash + "; rerun `index`");
    }
    VectorStore store(j.at("dimension").get<std::size_t>(),
                      j.at("normalized").get<bool>());
    for (const auto& u : j.at("units")) {
      store.add(u.at("id").get<std::string>(), u.at("vector").get<std::vector<double>>());
    }
    store.freeze();
    return store;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
  }
}

std::string summarize_index(const GranularIndex& index) {
  std::ostringstream out;
  const auto line = [&](std::string_view name, const std::vector<std::size_t>& sizes) {
    out << name << ": " << sizes.size() << " chunks";
    if (!sizes.empty()) {
      const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
      const double mean = std::accumulate(sizes.begin(), sizes.end(), 0.0) /
                          static_cast<double>(sizes.size());
      std::vector<std::size_t> sorted = sizes;
      std::sort(sorted.begin(), sorted.end());
      out << ", words min " << *mn << " / median " << sorted[sorted.size() / 2]
          << " / mean " << fixed2(mean) << " / max " << *mx;
    }
    out << '\n';
  };
  std::vector<std::size_t> parents;
  std::vector<std::size_t> half;
  std::vector<std::size_t> quarter;
  for (const auto& p : index.parents) parents.push_back(p.word_count);
  for (const auto& c : index.children) {
    (c.level == ChunkLevel::kChildHalf ? half : quarter).push_back(c.word_count);
  }
  line("parent", parents);
  if (!index.children.empty()) {
    line("child_half", half);
    line("child_quarter", quarter);
  }
  return out.str();
}

std::string cmd_chunk(const PipelineConfig& config) {
  if (config.corpus.empty()) config_error("chunk needs a corpus path");
  if (config.index.empty()) config_error("chunk needs an index output path");
  Providers providers = make_providers(config);
  const Corpus corpus = ingest_corpus(config.corpus);
  const GranularIndex index = chunk_corpus(corpus, config, providers.logits.get());
  save_index(config.index, corpus, index, config);
  return std::to_string(corpus.size()) + " documents, chunker " +
         std::string(chunker_name(config.chunker)) + ", theta " +
         std::to_string(config.theta) + "\n" + summarize_index(index);
}

std::string cmd_index(const PipelineConfig& config) {
  if (config.index.empty()) config_error("index needs an index path");
  if (config.store.empty()) config_error("index needs a store output path");
  Providers providers = make_providers(config);
  if (!providers.embedding) config_error("no embedding provider (set embedding.endpoint or --mock)");
  const IndexFile file = load_index(config.index);
  const VectorStore store = embed_index(file.index, file.corpus, *providers.embedding);
  save_store(config.store, store, file.hash);
  return std::to_string(store.size()) + " units embedded (dimension " +
         std::to_string(store.dimension()) + ", index " + file.hash + ")\n";
}

RetrieveResult cmd_retrieve(const PipelineConfig& config, const std::string& question) {
  if (config.index.empty() || config.store.empty()) {
    config_error("retrieve needs index and store paths");
  }
  if (config.k == 0) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  Providers providers = make_providers(config);
  if (!providers.embedding) config_error("no embedding provider (set embedding.endpoint or --mock)");
  const IndexFile file = load_index(config.index);
  const VectorStore store = load_store(config.store, file.hash);
  RetrieveResult result;
  result.ranking = retrieve(question, file.index, store, *providers.embedding, config.k,
                            config.embedding.query_prefix);
  if (!result.ranking.empty()) {
    result.context = assemble_context(result.ranking, file.corpus, config.context_cap);
  }
  return result;
}

std::string format_retrieve(const RetrieveResult& result) {
  std::ostringstream out;
  for (std::size_t i = 0; i < result.ranking.size(); ++i) {
    const auto& r = result.ranking[i];
    char score[32];
    std::snprintf(score, sizeof(score), "%.6f", r.score);
    out << (i + 1) << '\t' << score << '\t' << r.parent.chunk_id << '\t'
        << r.parent.word_count << " words\tbest " << r.best_unit << '\n';
  }
  out << "\n--- context (" << result.context.word_count << " words, "
      << result.context.used_parents.size() << " parents) ---\n"
      << result.context.text << '\n';
  return out.str();
}

EvalReport cmd_evaluate(const PipelineConfig& config) {
  if (config.corpus.empty()) config_error("evaluate needs a corpus path");
  if (config.dataset.empty()) config_error("evaluate needs a dataset path");
  Providers providers = make_providers(config);
  const Corpus corpus = ingest_corpus(config.corpus);
  EvalReport report = evaluate_in_memory(config, providers, corpus);
  if (!config.report.empty()) {
    write_text_file(report_path(config.report, ".json"), report.to_json().dump(2) + "\n");
    write_text_file(report_path(config.report, ".txt"),
                    report.to_table(chunker_name(config.chunker)));
  }
  return report;
}

std::pair<double, double> mean_and_sd(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

std::map<std::string, std::vector<double>> collect_metrics(
    const std::vector<const EvalReport*>& reports) {
  std::map<std::string, std::vector<double>> out;
  for (const auto* r : reports) {
    for (const auto& [k, v] : r->dcg_at) out["dcg@" + std::to_string(k)].push_back(v);
    for (const auto& [k, v] : r->recall_at) out["recall@" + std::to_string(k)].push_back(v);
    if (r->f1_mean) out["f1"].push_back(*r->f1_mean * 100.0);
  }
  return out;
}

ordered_json SweepReport::to_json() const {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config;
  ordered_json thetas = ordered_json::array();
  for (const auto& [t, r] : runs) thetas.push_back(t);
  j["thetas"] = thetas;
  ordered_json agg = ordered_json::object();
  for (const auto& [name, ms] : mean_sd) {
    agg[name] = {{"mean", ms.first}, {"sd", ms.second}};
  }
  j["aggregate"] = agg;
  ordered_json per = ordered_json::array();
  for (const auto& [t, r] : runs) {
    ordered_json e;
    e["theta"] = t;
    e["metrics"] = r.to_json()["metrics"];
    per.push_back(e);
  }
  j["runs"] = per;
  return j;
}

std::string SweepReport::to_table(std::string_view label) const {
  std::ostringstream out;
  const auto section = [&](const std::string& prefix, const char* title) {
    std::vector<std::pair<std::size_t, std::pair<double, double>>> rows;
    for (const auto& [name, ms] : mean_sd) {
      if (name.rfind(prefix, 0) == 0) {
        rows.emplace_back(std::stoul(name.substr(prefix.size())), ms);
      }
    }
    if (rows.empty()) return;
    std::sort(rows.begin(), rows.end());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-20s", title);
    out << buf;
    for (const auto& [k, ms] : rows) {
      std::snprintf(buf, sizeof(buf), " %15zu", k);
      out << buf;
    }
    out << '\n';
    std::snprintf(buf, sizeof(buf), "%-20s", std::string(label).c_str());
    out << buf;
    for (const auto& [k, ms] : rows) {
      const std::string cell = fixed2(ms.first) + " ± " + fixed2(ms.second);
      std::snprintf(buf, sizeof(buf), " %16s", cell.c_str());
      out << buf;
    }
    out << "\n\n";
  };
  section("dcg@", "DCG@k");
  section("recall@", "Recall@k");
  if (mean_sd.contains("f1")) {
    const auto& ms = mean_sd.at("f1");
    out << "F1 " << fixed2(ms.first) << " ± " << fixed2(ms.second) << '\n';
  }
  return out.str();
}

SweepReport cmd_sweep(const PipelineConfig& config) {
  if (config.thetas.empty()) config_error("sweep needs at least one theta");
  if (config.corpus.empty()) config_error("sweep needs a corpus path");
  if (config.dataset.empty()) config_error("sweep needs a dataset path");
  Providers providers = make_providers(config);
  const Corpus corpus = ingest_corpus(config.corpus);
  SweepReport sweep;
  for (std::size_t theta : config.thetas) {
    PipelineConfig run = config;
    run.theta = theta;
    run.context_cap = std::max(config.context_cap, theta);
    EvalReport report = evaluate_in_memory(run, providers, corpus);
    if (!config.report.empty()) {
      write_text_file(report_path(config.report, ".theta" + std::to_string(theta) + ".json"),
                      report.to_json().dump(2) + "\n");
    }
    sweep.runs.emplace_back(theta, std::move(report));
  }
  std::vector<const EvalReport*> reports;
  for (const auto& [t, r] : sweep.runs) reports.push_back(&r);
  for (const auto& [name, values] : collect_metrics(reports)) {
    sweep.mean_sd[name] = mean_and_sd(values);
  }
  sweep.config = config.echo();
  sweep.config.erase("theta");
  sweep.config["thetas"] = config.thetas;
  if (!config.report.empty()) {
    write_text_file(report_path(config.report, ".json"), sweep.to_json().dump(2) + "\n");
    write_text_file(report_path(config.report, ".txt"),
                    sweep.to_table(chunker_name(config.chunker)));
  }
  return sweep;
}

}  // namespace chunkwise

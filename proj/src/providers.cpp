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

#include "chunkwise/providers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "chunkwise/error.hpp"
#include "chunkwise/kernels.hpp"
#include "chunkwise/segmentation.hpp"
#include "chunkwise/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace chunkwise {
namespace {

using nlohmann::json;

constexpr std::string_view kContextHeader = "Context:\n";
constexpr std::string_view kQuestionHeader = "\n\nQuestion: ";
constexpr std::string_view kAnswerHeader = "\nAnswer:";

struct Endpoint {
  std::string host_port;  // scheme://host:port
  std::string base_path;  // no trailing slash
};

Endpoint parse_endpoint(const std::string& uri) {
  const auto scheme_end = uri.find("://");
  if (uri.empty() || scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "endpoint '" + uri + "' is not a URI");
  }
  const auto path_start = uri.find('/', scheme_end + 3);
  Endpoint e;
  e.host_port = uri.substr(0, path_start);
  if (path_start != std::string::npos) e.base_path = uri.substr(path_start);
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  return e;
}

// POSTs JSON, retrying transport failures. Non-200 is a protocol error.
json post_json(const std::string& endpoint, const std::string& route,
               const json& body, std::chrono::milliseconds timeout,
               int max_retries) {
  const Endpoint ep = parse_endpoint(endpoint);
  httplib::Client client(ep.host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const std::string path = ep.base_path + route;
  const std::string payload = body.dump();

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= std::max(0, max_retries); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kProviderProtocolError,
                  endpoint + path + " returned HTTP " + std::to_string(res->status));
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kProviderProtocolError,
                  endpoint + path + " returned invalid JSON: " + e.what());
    }
  }
  throw Error(ErrorCode::kProviderUnavailable,
              endpoint + path + " unreachable after " +
                  std::to_string(std::max(0, max_retries) + 1) +
                  " attempts: " + last_error);
}

template <typename T>
T field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kProviderProtocolError, what + ": missing '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProviderProtocolError,
                what + ": bad '" + key + "': " + e.what());
  }
}

}  // namespace

std::string build_qa_prompt(std::string_view context, std::string_view question) {
  std::string prompt(kContextHeader);
  prompt += context;
  prompt += kQuestionHeader;
  prompt += question;
  prompt += kAnswerHeader;
  return prompt;
}

void LogitsProviderSpec::validate() const {
  if (prompt_rho.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "logits prompt must be non-empty");
  }
  if (timeout.count() <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "logits timeout must be > 0");
  }
}

void EmbeddingProviderSpec::validate() const {
  if (dimension == 0) {
    throw Error(ErrorCode::kInvalidConfig, "embedding dimension must be > 0");
  }
  if (batch_size == 0) {
    throw Error(ErrorCode::kInvalidConfig, "embedding batch_size must be >= 1");
  }
}

HttpLogitsProvider::HttpLogitsProvider(LogitsProviderSpec spec)
    : spec_(std::move(spec)) {
  spec_.validate();
  parse_endpoint(spec_.endpoint);
}

std::vector<double> HttpLogitsProvider::eos_log_probs(
    const std::string& prompt, std::span<const std::string> texts) {
  const json body = {{"prompt", prompt},
                     {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const json res =
      post_json(spec_.endpoint, "/v1/eos_score", body, spec_.timeout, spec_.max_retries);
  auto scores = field<std::vector<double>>(res, "scores", "eos_score response");
  if (scores.size() != texts.size()) {
    throw Error(ErrorCode::kProviderProtocolError,
                "eos_score returned " + std::to_string(scores.size()) +
                    " scores for " + std::to_string(texts.size()) + " texts");
  }
  return scores;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(EmbeddingProviderSpec spec)
    : spec_(std::move(spec)) {
  spec_.validate();
  parse_endpoint(spec_.endpoint);
}

std::vector<std::vector<double>> HttpEmbeddingProvider::embed(
    std::span<const std::string> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (std::size_t b = 0; b < texts.size(); b += spec_.batch_size) {
    const auto batch = texts.subspan(b, std::min(spec_.batch_size, texts.size() - b));
    const json body = {
        {"texts", std::vector<std::string>(batch.begin(), batch.end())}};
    const json res =
        post_json(spec_.endpoint, "/v1/embed", body, spec_.timeout, spec_.max_retries);
    auto vectors =
        field<std::vector<std::vector<double>>>(res, "vectors", "embed response");
    if (vectors.size() != batch.size()) {
      throw Error(ErrorCode::kProviderProtocolError,
                  "embed returned " + std::to_string(vectors.size()) +
                      " vectors for " + std::to_string(batch.size()) + " texts");
    }
    for (auto& v : vectors) {
      if (v.size() != spec_.dimension) {
        throw Error(ErrorCode::kProviderProtocolError,
                    "embed returned dimension " + std::to_string(v.size()) +
                        ", expected " + std::to_string(spec_.dimension));
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

HttpGenerationProvider::HttpGenerationProvider(GenerationProviderSpec spec)
    : spec_(std::move(spec)) {
  parse_endpoint(spec_.endpoint);
}

std::string HttpGenerationProvider::generate(const std::string& prompt,
                                             std::size_t max_words) {
  const json body = {{"prompt", prompt}, {"max_words", max_words}};
  const json res =
      post_json(spec_.endpoint, "/v1/generate", body, spec_.timeout, spec_.max_retries);
  return field<std::string>(res, "text", "generate response");
}

MockLogitsProvider::MockLogitsProvider(Rule rule) : rule_(std::move(rule)) {}

MockLogitsProvider::MockLogitsProvider(std::vector<std::vector<double>> script)
    : script_(std::move(script)) {}

std::vector<std::vector<double>> MockLogitsProvider::load_replay(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open replay file " + path.string());
  try {
    return json::parse(in).get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord,
                "replay file " + path.string() + ": " + e.what());
  }
}

double MockLogitsProvider::hash_rule(std::string_view prefix) {
  return -static_cast<double>(fnv1a64(prefix) % 1000) / 100.0;
}

double MockLogitsProvider::terminal_punctuation_rule(std::string_view prefix) {
  const auto last = prefix.find_last_not_of(" \t\r\n\"')]");
  if (last != std::string_view::npos &&
      (prefix[last] == '.' || prefix[last] == '!' || prefix[last] == '?')) {
    return 0.0;
  }
  return -1.0;
}

double MockLogitsProvider::first_sentence_rule(std::string_view prefix) {
  return -static_cast<double>(prefix.size());
}

std::vector<double> MockLogitsProvider::eos_log_probs(
    const std::string& /*prompt*/, std::span<const std::string> texts) {
  const std::size_t call = calls_.fetch_add(1);
  texts_.fetch_add(texts.size());
  if (rule_) {
    std::vector<double> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(rule_(t));
    return out;
  }
  std::lock_guard lock(script_mu_);
  if (call >= script_.size()) {
    throw Error(ErrorCode::kProviderUnavailable,
                "replay script exhausted at call " + std::to_string(call));
  }
  return script_[call];
}

HashEmbedder::HashEmbedder(std::size_t dimension, int jobs)
    : dimension_(dimension), jobs_(jobs) {
  if (dimension_ == 0) {
    throw Error(ErrorCode::kInvalidConfig, "embedding dimension must be > 0");
  }
}

std::vector<double> HashEmbedder::embed_one(std::string_view text) const {
  std::vector<double> v(dimension_, 0.0);
  const auto tokens = word_tokens(text);
  for (const auto& t : tokens) v[fnv1a64(t) % dimension_] += 1.0;
  if (tokens.empty()) v[fnv1a64("") % dimension_] = 1.0;
  const double norm = kernels::l2_norm(v);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<std::vector<double>> HashEmbedder::embed(
    std::span<const std::string> texts) {
  std::vector<std::vector<double>> out(texts.size());
  kernels::parallel_for(texts.size(), jobs_,
                        [&](std::size_t i) { out[i] = embed_one(texts[i]); });
  return out;
}

std::string MockGenerator::generate(const std::string& prompt,
                                    std::size_t max_words) {
  std::string_view p(prompt);
  std::string_view context;
  std::string_view question;
  const auto q = p.rfind(kQuestionHeader);
  if (q != std::string_view::npos) {
    const auto c0 = p.starts_with(kContextHeader) ? kContextHeader.size() : 0;
    context = p.substr(c0, q - c0);
    question = p.substr(q + kQuestionHeader.size());
    if (question.ends_with(kAnswerHeader)) {
      question.remove_suffix(kAnswerHeader.size());
    }
  } else {
    context = p;
  }
  const auto question_tokens = word_tokens(question);
  const Document doc = [&] {
    try {
      return Document::make("context", context);
    } catch (const Error&) {
      return Document{};
    }
  }();
  if (doc.text.empty()) return {};
  const auto sentences = split_sentences(doc.text);
  std::size_t best = 0;
  std::size_t best_overlap = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto tokens =
        word_tokens(span_text(doc, sentences[i].start, sentences[i].end));
    std::size_t overlap = 0;
    for (const auto& t : tokens) {
      if (std::find(question_tokens.begin(), question_tokens.end(), t) !=
          question_tokens.end()) {
        ++overlap;
      }
    }
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = i;
    }
  }
  const std::string sentence =
      span_text(doc, sentences[best].start, sentences[best].end);
  // Cut to max_words whitespace tokens.
  const std::u32string collapsed = collapse_whitespace(utf8_to_u32(sentence));
  std::size_t taken = 0;
  std::size_t cut = collapsed.size();
  for (std::size_t i = 0; i < collapsed.size(); ++i) {
    if (collapsed[i] == U' ' && ++taken == max_words) {
      cut = i;
      break;
    }
  }
  if (max_words == 0) cut = 0;
  return u32_to_utf8(std::u32string_view(collapsed).substr(0, cut));
}

}  // namespace chunkwise

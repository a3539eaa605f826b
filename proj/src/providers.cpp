// src/providers.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "simplex/providers.hpp"

#include <httplib.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <thread>

#include "simplex/textstat.hpp"

namespace simplex {
namespace providers {

using nlohmann::json;

std::string to_string(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "user";
}

void validate(const GenerationRequest& request) {
  if (request.messages.empty()) throw Error("generation request has no messages");
  if (request.messages.back().role != Role::user) {
    throw Error("generation request must end with a user message");
  }
  if (request.temperature < 0.0) throw Error("temperature must be >= 0");
  if (request.max_tokens <= 0) throw Error("max_tokens must be positive");
}

// ---------------------------------------------------------------------------
// HTTP plumbing
// ---------------------------------------------------------------------------

namespace {

constexpr int kBackoffBaseMs = 100;
constexpr int kBackoffCapMs = 2000;

void backoff_sleep(int attempt) {
  static thread_local std::mt19937 rng{std::random_device{}()};
  const int base = std::min(kBackoffBaseMs << attempt, kBackoffCapMs);
  std::uniform_real_distribution<double> jitter(0.75, 1.25);
  std::this_thread::sleep_for(
      std::chrono::milliseconds(static_cast<int>(base * jitter(rng))));
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

HttpProviderBase::HttpProviderBase(ProviderEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  const auto scheme_end = endpoint_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error("provider base_url must be absolute: " + endpoint_.base_url);
  }
  const auto path_start = endpoint_.base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = endpoint_.base_url;
  } else {
    host_ = endpoint_.base_url.substr(0, path_start);
    prefix_ = endpoint_.base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

std::string HttpProviderBase::post_json(const std::string& path, const std::string& body) const {
  httplib::Client client(host_);
  client.set_connection_timeout(endpoint_.timeout);
  client.set_read_timeout(endpoint_.timeout);
  client.set_write_timeout(endpoint_.timeout);

  httplib::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const std::string target = prefix_ + path;
  const int attempts = endpoint_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto res = client.Post(target, headers, body, "application/json");
    if (!res) {
      if (attempt + 1 < attempts) {
        backoff_sleep(attempt);
        continue;
      }
      throw TransportError("no response from " + host_ + target + " after " +
                           std::to_string(attempts) + " attempts");
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    if (res->status == 401 || res->status == 403) {
      throw AuthError("authentication rejected (" + std::to_string(res->status) + ") by " +
                      host_ + target);
    }
    if (retryable_status(res->status)) {
      if (attempt + 1 < attempts) {
        backoff_sleep(attempt);
        continue;
      }
      if (res->status == 429) {
        throw RateLimitedError("rate limited (429) by " + host_ + target + " after " +
                               std::to_string(attempts) + " attempts");
      }
      throw TransportError("server error (" + std::to_string(res->status) + ") from " + host_ +
                           target + " after " + std::to_string(attempts) + " attempts");
    }
    throw ProviderError("unexpected status " + std::to_string(res->status) + " from " + host_ +
                        target);
  }
  throw TransportError("unreachable");  // not reached
}

std::string HttpProviderBase::probe() const {
  httplib::Client client(host_);
  client.set_connection_timeout(std::chrono::seconds(2));
  client.set_read_timeout(std::chrono::seconds(2));
  auto res = client.Get(prefix_ + "/healthz");
  return res ? "ok" : "unreachable";
}

namespace {

json parse_response(const std::string& body) {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) throw MalformedResponseError("response body is not valid JSON");
  return parsed;
}

json embeddings_request(const std::string& model, const std::vector<std::string>& input) {
  return json{{"model", model}, {"input", input}};
}

// Parses {data:[{embedding:[...]}]} into row vectors, enforcing a uniform width.
std::vector<Eigen::VectorXd> parse_embeddings(const json& body, std::size_t expected_count) {
  if (!body.contains("data") || !body["data"].is_array()) {
    throw MalformedResponseError("embedding response has no data array");
  }
  const auto& data = body["data"];
  if (data.size() != expected_count) {
    throw MalformedResponseError("embedding response has " + std::to_string(data.size()) +
                                 " entries, expected " + std::to_string(expected_count));
  }
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(data.size());
  for (const auto& entry : data) {
    if (!entry.contains("embedding") || !entry["embedding"].is_array()) {
      throw MalformedResponseError("embedding entry is missing the embedding array");
    }
    const auto& arr = entry["embedding"];
    Eigen::VectorXd v(static_cast<long>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) throw MalformedResponseError("embedding contains a non-number");
      v[static_cast<long>(i)] = arr[i].get<double>();
    }
    if (!rows.empty() && rows.front().size() != v.size()) {
      throw DimensionMismatchError("embedding vectors differ in length within one response");
    }
    rows.push_back(std::move(v));
  }
  return rows;
}

void check_dim(std::atomic<long>& expected, long got) {
  long want = expected.load();
  if (want < 0) {
    if (expected.compare_exchange_strong(want, got)) return;
    want = expected.load();
  }
  if (want != got) {
    throw DimensionMismatchError("provider changed embedding dimension from " +
                                 std::to_string(want) + " to " + std::to_string(got));
  }
}

}  // namespace

std::string HttpGenerator::generate(const GenerationRequest& request) {
  validate(request);
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  const json payload{{"model", endpoint().model_name},
                     {"messages", messages},
                     {"temperature", request.temperature},
                     {"max_tokens", request.max_tokens}};
  const json body = parse_response(post_json("/v1/chat/completions", payload.dump()));
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    throw MalformedResponseError("completion response has no choices");
  }
  const auto& choice = body["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw MalformedResponseError("completion choice has no message content");
  }
  return choice["message"]["content"].get<std::string>();
}

Eigen::VectorXd HttpSentenceEmbedder::embed_sentence(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ProviderError("cannot embed blank text");
  }
  const json body = parse_response(
      post_json("/v1/embeddings", embeddings_request(endpoint().model_name, {text}).dump()));
  auto rows = parse_embeddings(body, 1);
  check_dim(expected_dim_, rows.front().size());
  return rows.front();
}

Eigen::MatrixXd HttpTokenEmbedder::embed_tokens(const std::string& text) {
  const std::vector<std::string> tokens = textstat::tokenize_words(text);
  if (tokens.empty()) throw ProviderError("cannot embed text without word tokens");
  const json body = parse_response(
      post_json("/v1/embeddings", embeddings_request(endpoint().model_name, tokens).dump()));
  auto rows = parse_embeddings(body, tokens.size());
  check_dim(expected_dim_, rows.front().size());
  Eigen::MatrixXd out(static_cast<long>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<long>(i)) = rows[i];
  return out;
}

double HttpClassifier::p_simplified(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ProviderError("cannot classify blank text");
  }
  const json payload{{"model", endpoint().model_name}, {"text", text}};
  const json body = parse_response(post_json("/v1/classify", payload.dump()));
  if (!body.contains("p_simplified") || !body["p_simplified"].is_number()) {
    throw InvalidProbabilityError("classifier response has no numeric p_simplified");
  }
  const double p = body["p_simplified"].get<double>();
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw InvalidProbabilityError("classifier returned probability outside [0,1]");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Stubs
// ---------------------------------------------------------------------------

std::string EchoGenerator::generate(const GenerationRequest& request) {
  validate(request);
  return request.messages.back().content;
}

std::string ScriptedGenerator::generate(const GenerationRequest& request) {
  validate(request);
  if (calls_ >= outputs_.size()) throw ProviderError("scripted generator exhausted");
  return outputs_[calls_++];
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

HashEmbedder::HashEmbedder(int dim) : dim_(dim) {
  if (dim <= 0) throw Error("embedding dimension must be positive");
}

Eigen::VectorXd HashEmbedder::embed_sentence(const std::string& text) {
  const auto tokens = textstat::tokenize_words(textstat::lowercase(text));
  if (tokens.empty()) throw ProviderError("cannot embed text without word tokens");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  for (const auto& t : tokens) {
    v[static_cast<long>(fnv1a64(t) % static_cast<std::uint64_t>(dim_))] += 1.0;
  }
  return v / v.norm();
}

Eigen::MatrixXd HashEmbedder::embed_tokens(const std::string& text) {
  const auto tokens = textstat::tokenize_words(textstat::lowercase(text));
  if (tokens.empty()) throw ProviderError("cannot embed text without word tokens");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<long>(tokens.size()), dim_);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    m(static_cast<long>(i),
      static_cast<long>(fnv1a64(tokens[i]) % static_cast<std::uint64_t>(dim_))) = 1.0;
  }
  return m;
}

double RuleClassifier::p_simplified(const std::string& text) {
  double grade = 0.0;
  try {
    grade = textstat::fkgl(text);
  } catch (const EmptyTextError& e) {
    throw ProviderError(std::string("cannot classify: ") + e.what());
  }
  const double z = (target_grade_ - grade) / target_grade_;
  return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace providers
}  // namespace simplex

// simplex/providers.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_PROVIDERS_HPP_
#define SIMPLEX_PROVIDERS_HPP_

#include <Eigen/Core>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "simplex/errors.hpp"

namespace simplex {
namespace providers {

enum class Role { system, user, assistant };

std::string to_string(Role role);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct GenerationRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
};

// Throws Error unless the request has >= 1 message, ends with a user message,
// and carries sane decoding parameters.
void validate(const GenerationRequest& request);

struct ProviderEndpoint {
  std::string base_url;           // absolute, e.g. http://localhost:8000
  std::string api_key_env;        // env var holding the credential; empty = none
  std::string model_name = "default";
  std::chrono::seconds timeout{60};
  int max_retries = 2;            // retries beyond the first attempt
};

// ---------------------------------------------------------------------------
// Model roles the toolkit depends on. All implementations must be safe to
// call from multiple threads at once.
// ---------------------------------------------------------------------------

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(const GenerationRequest& request) = 0;
  virtual std::string health() { return "ok"; }
};

class SentenceEmbedder {
 public:
  virtual ~SentenceEmbedder() = default;
  virtual Eigen::VectorXd embed_sentence(const std::string& text) = 0;
  virtual std::string health() { return "ok"; }
};

// One row per tokenize_words token of the input.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual Eigen::MatrixXd embed_tokens(const std::string& text) = 0;
  virtual std::string health() { return "ok"; }
};

class SimplifiedClassifier {
 public:
  virtual ~SimplifiedClassifier() = default;
  virtual double p_simplified(const std::string& text) = 0;
  virtual std::string health() { return "ok"; }
};

// ---------------------------------------------------------------------------
// HTTP clients speaking the chat-completions style JSON wire formats:
//   POST /v1/chat/completions {model, messages, temperature, max_tokens}
//       -> {choices:[{message:{content}}]}
//   POST /v1/embeddings {model, input:[...]} -> {data:[{embedding:[...]}]}
//   POST /v1/classify {model, text} -> {p_simplified}
// Transient failures (network, timeout, 5xx, 429) are retried up to
// max_retries with capped, jittered exponential backoff.
// ---------------------------------------------------------------------------

class HttpProviderBase {
 public:
  std::string probe() const;  // "ok" when the endpoint answers anything at all

 protected:
  explicit HttpProviderBase(ProviderEndpoint endpoint);
  // Returns the parsed JSON body of a 2xx response. Maps failures onto
  // AuthError / RateLimitedError / TransportError / MalformedResponseError.
  std::string post_json(const std::string& path, const std::string& body) const;
  const ProviderEndpoint& endpoint() const { return endpoint_; }

 private:
  ProviderEndpoint endpoint_;
  std::string host_;    // scheme://authority
  std::string prefix_;  // path prefix carried by base_url, usually empty
};

class HttpGenerator : public HttpProviderBase, public Generator {
 public:
  explicit HttpGenerator(ProviderEndpoint endpoint) : HttpProviderBase(std::move(endpoint)) {}
  std::string generate(const GenerationRequest& request) override;
  std::string health() override { return probe(); }
};

class HttpSentenceEmbedder : public HttpProviderBase, public SentenceEmbedder {
 public:
  explicit HttpSentenceEmbedder(ProviderEndpoint endpoint)
      : HttpProviderBase(std::move(endpoint)) {}
  Eigen::VectorXd embed_sentence(const std::string& text) override;
  std::string health() override { return probe(); }

 private:
  std::atomic<long> expected_dim_{-1};
};

class HttpTokenEmbedder : public HttpProviderBase, public TokenEmbedder {
 public:
  explicit HttpTokenEmbedder(ProviderEndpoint endpoint) : HttpProviderBase(std::move(endpoint)) {}
  Eigen::MatrixXd embed_tokens(const std::string& text) override;
  std::string health() override { return probe(); }

 private:
  std::atomic<long> expected_dim_{-1};
};

class HttpClassifier : public HttpProviderBase, public SimplifiedClassifier {
 public:
  explicit HttpClassifier(ProviderEndpoint endpoint) : HttpProviderBase(std::move(endpoint)) {}
  double p_simplified(const std::string& text) override;
  std::string health() override { return probe(); }
};

// ---------------------------------------------------------------------------
// Deterministic offline stubs for tests and dry runs.
// ---------------------------------------------------------------------------

// Returns the final user message verbatim.
class EchoGenerator : public Generator {
 public:
  std::string generate(const GenerationRequest& request) override;
};

// Replays a fixed sequence of outputs and counts calls; throws ProviderError
// once exhausted so tests catch extra generations.
class ScriptedGenerator : public Generator {
 public:
  explicit ScriptedGenerator(std::vector<std::string> outputs)
      : outputs_(std::move(outputs)) {}
  std::string generate(const GenerationRequest& request) override;
  std::size_t calls() const { return calls_; }

 private:
  std::vector<std::string> outputs_;
  std::size_t calls_ = 0;
};

// Feature-hashed bag-of-words embeddings: each lowercased token maps to one
// of `dim` buckets via 64-bit FNV-1a. Token vectors are unit basis vectors;
// sentence vectors are L2-normalized bucket counts. Bit-deterministic across
// runs and platforms.
class HashEmbedder : public SentenceEmbedder, public TokenEmbedder {
 public:
  explicit HashEmbedder(int dim = 64);
  Eigen::VectorXd embed_sentence(const std::string& text) override;
  Eigen::MatrixXd embed_tokens(const std::string& text) override;
  int dim() const { return dim_; }

 private:
  int dim_;
};

// P(simplified) as a logistic function of (target_grade - FKGL) / target_grade,
// directionally consistent with the readability reward.
class RuleClassifier : public SimplifiedClassifier {
 public:
  explicit RuleClassifier(double target_grade = 6.5) : target_grade_(target_grade) {}
  double p_simplified(const std::string& text) override;

 private:
  double target_grade_;
};

}  // namespace providers
}  // namespace simplex

#endif  // SIMPLEX_PROVIDERS_HPP_

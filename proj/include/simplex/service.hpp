// simplex/service.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_SERVICE_HPP_
#define SIMPLEX_SERVICE_HPP_

// Keep Eigen-bearing headers ahead of httplib; its system includes leak
// macros that break Eigen internals otherwise.
#include "simplex/metrics.hpp"
#include "simplex/providers.hpp"
#include "simplex/rewards.hpp"

#include <httplib.h>

#include <string>

namespace simplex {
namespace service {

// Providers are borrowed, not owned; null means "not configured". The caller
// keeps them alive for the server's lifetime.
struct ServiceProviders {
  providers::SentenceEmbedder* sentence_embedder = nullptr;
  providers::TokenEmbedder* token_embedder = nullptr;
  providers::SimplifiedClassifier* classifier = nullptr;
};

// Stateless scoring endpoints for an external RL trainer:
//   POST /v1/reward  {original, generated, composite, aggregation_mode?}
//   POST /v1/metrics {source, output, references}
//   GET  /healthz
// Reward bodies are numerically identical to in-process compute_reward; all
// handlers are safe under concurrent requests.
class RewardService {
 public:
  explicit RewardService(ServiceProviders providers, rewards::RewardConfig defaults = {});

  // Binds and serves until stop(); returns false if the address is taken.
  bool listen(const std::string& host, int port);

  // Test support: bind an ephemeral port, serve on a caller-managed thread.
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready();
  void stop();

 private:
  void setup_routes();

  ServiceProviders providers_;
  rewards::RewardConfig defaults_;
  httplib::Server server_;
};

}  // namespace service
}  // namespace simplex

#endif  // SIMPLEX_SERVICE_HPP_

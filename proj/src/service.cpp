// src/service.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "simplex/service.hpp"

#include <json.hpp>

#include <string>

namespace simplex {
namespace service {

using nlohmann::json;

namespace {

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply_json(res, status, json{{"error", message}});
}

// Content-Type, when present, must be JSON.
bool content_type_ok(const httplib::Request& req) {
  const std::string ct = req.get_header_value("Content-Type");
  return ct.empty() || ct.rfind("application/json", 0) == 0;
}

// The single provider a composite can fail on, for 502/503 bodies.
const char* provider_name_for(rewards::Composite composite) {
  switch (composite) {
    case rewards::Composite::fkgl_plus_rel:
    case rewards::Composite::rel_only:
      return "sentence_embedder";
    case rewards::Composite::fkgl_plus_ovs:
    case rewards::Composite::ovs_only:
      return "classifier";
    case rewards::Composite::fkgl_only:
      break;
  }
  return "";
}

}  // namespace

RewardService::RewardService(ServiceProviders providers, rewards::RewardConfig defaults)
    : providers_(providers), defaults_(defaults) {
  // SO_REUSEADDR only; the library default also sets SO_REUSEPORT, which lets
  // a second instance bind an occupied port instead of failing.
  server_.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes),
               sizeof(yes));
  });
  setup_routes();
}

void RewardService::setup_routes() {
  server_.Post("/v1/reward", [this](const httplib::Request& req, httplib::Response& res) {
    if (!content_type_ok(req)) {
      reply_error(res, 400, "content-type must be application/json");
      return;
    }
    const json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      reply_error(res, 400, "body is not a JSON object");
      return;
    }
    for (const char* field : {"original", "generated", "composite"}) {
      if (!body.contains(field) || !body[field].is_string()) {
        reply_error(res, 400, std::string("missing string field '") + field + "'");
        return;
      }
    }
    const auto composite = rewards::composite_from_string(body["composite"].get<std::string>());
    if (!composite) {
      reply_error(res, 400,
                  "unknown composite; valid: fkgl_plus_rel, fkgl_plus_ovs, fkgl_only, "
                  "rel_only, ovs_only");
      return;
    }
    rewards::RewardConfig config = defaults_;
    config.composite = *composite;
    if (body.contains("aggregation_mode")) {
      if (!body["aggregation_mode"].is_string()) {
        reply_error(res, 400, "aggregation_mode must be a string");
        return;
      }
      const auto mode = rewards::mode_from_string(body["aggregation_mode"].get<std::string>());
      if (!mode) {
        reply_error(res, 400,
                    "unknown aggregation_mode; valid: paper_sum_reciprocal, standard_harmonic");
        return;
      }
      config.aggregation_mode = *mode;
    }
    const std::string original = body["original"].get<std::string>();
    const std::string generated = body["generated"].get<std::string>();
    if (is_blank(original) || is_blank(generated)) {
      reply_error(res, 422, "original and generated must be non-blank");
      return;
    }

    try {
      const auto breakdown = rewards::compute_reward(config, original, generated,
                                                     providers_.sentence_embedder,
                                                     providers_.classifier);
      reply_json(res, 200, rewards::breakdown_to_json(breakdown));
    } catch (const MissingProviderError& e) {
      reply_json(res, 503,
                 json{{"error", e.what()}, {"provider", provider_name_for(config.composite)}});
    } catch (const ProviderError& e) {
      reply_json(res, 502,
                 json{{"error", e.what()}, {"provider", provider_name_for(config.composite)}});
    } catch (const EmptyTextError& e) {
      reply_error(res, 422, e.what());
    } catch (const Error& e) {
      reply_error(res, 400, e.what());
    }
  });

  server_.Post("/v1/metrics", [this](const httplib::Request& req, httplib::Response& res) {
    if (!content_type_ok(req)) {
      reply_error(res, 400, "content-type must be application/json");
      return;
    }
    const json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      reply_error(res, 400, "body is not a JSON object");
      return;
    }
    for (const char* field : {"source", "output"}) {
      if (!body.contains(field) || !body[field].is_string()) {
        reply_error(res, 400, std::string("missing string field '") + field + "'");
        return;
      }
    }
    if (!body.contains("references") || !body["references"].is_array() ||
        body["references"].empty()) {
      reply_error(res, 400, "references must be a non-empty array");
      return;
    }
    metrics::EvalPair pair;
    pair.source = body["source"].get<std::string>();
    pair.output = body["output"].get<std::string>();
    for (const auto& ref : body["references"]) {
      if (!ref.is_string()) {
        reply_error(res, 400, "references must contain strings");
        return;
      }
      pair.references.push_back(ref.get<std::string>());
    }
    if (is_blank(pair.source) || is_blank(pair.output)) {
      reply_error(res, 422, "source and output must be non-blank");
      return;
    }
    for (const auto& ref : pair.references) {
      if (is_blank(ref)) {
        reply_error(res, 422, "references must be non-blank");
        return;
      }
    }

    try {
      const auto report = metrics::evaluate_corpus({pair}, providers_.token_embedder);
      json out{{"sari", report.sari},
               {"bleu", report.bleu},
               {"bertscore_f1",
                report.bertscore_f1 ? json(*report.bertscore_f1) : json(nullptr)},
               {"rouge1_f1", report.rouge1_f1},
               {"rouge2_f1", report.rouge2_f1},
               {"rougeL_f1", report.rougeL_f1},
               {"fkgl", report.fkgl},
               {"pair_count", report.pair_count}};
      reply_json(res, 200, out);
    } catch (const ProviderError& e) {
      reply_json(res, 502, json{{"error", e.what()}, {"provider", "token_embedder"}});
    } catch (const EmptyTextError& e) {
      reply_error(res, 422, e.what());
    } catch (const EmptyOutputError& e) {
      reply_error(res, 422, e.what());
    } catch (const Error& e) {
      reply_error(res, 400, e.what());
    }
  });

  server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    json providers = json::object();
    if (providers_.sentence_embedder != nullptr) {
      providers["sentence_embedder"] = providers_.sentence_embedder->health();
    }
    if (providers_.token_embedder != nullptr) {
      providers["token_embedder"] = providers_.token_embedder->health();
    }
    if (providers_.classifier != nullptr) {
      providers["classifier"] = providers_.classifier->health();
    }
    reply_json(res, 200, json{{"status", "ok"}, {"providers", providers}});
  });
}

bool RewardService::listen(const std::string& host, int port) {
  return server_.listen(host, port);
}

int RewardService::bind_any(const std::string& host) {
  return server_.bind_to_any_port(host);
}

bool RewardService::listen_after_bind() { return server_.listen_after_bind(); }

void RewardService::wait_until_ready() { server_.wait_until_ready(); }

void RewardService::stop() { server_.stop(); }

}  // namespace service
}  // namespace simplex

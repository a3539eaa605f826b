// tools/simplex.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line front end: corpus scoring, reward computation, self-correcting
// simplification, corpus statistics and the HTTP scoring service.

#include "simplex/corpus.hpp"
#include "simplex/metrics.hpp"
#include "simplex/providers.hpp"
#include "simplex/rewards.hpp"
#include "simplex/service.hpp"
#include "simplex/simplifier.hpp"
#include "simplex/textstat.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace {

using namespace simplex;
using nlohmann::json;

// Input/usage problems exit 2; provider and I/O failures exit 3.
struct UsageError : Error {
  using Error::Error;
};

std::string slurp_stream(std::istream& in) {
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string read_text_arg(const std::string& path_or_dash, bool& stdin_used) {
  if (path_or_dash == "-") {
    if (stdin_used) throw UsageError("only one input may read from standard input");
    stdin_used = true;
    return slurp_stream(std::cin);
  }
  std::ifstream in(path_or_dash, std::ios::binary);
  if (!in) throw UsageError("cannot open input file: " + path_or_dash);
  return slurp_stream(in);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::map<std::string, std::string> values;
  if (path.empty()) return values;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + t);
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    values[trim(t.substr(0, eq))] = value;
  }
  return values;
}

// Precedence: command-line flag, then environment variable, then config file.
std::string resolve(const std::string& flag_value, const char* env_name,
                    const std::map<std::string, std::string>& file_values,
                    const std::string& file_key) {
  if (!flag_value.empty()) return flag_value;
  if (env_name != nullptr) {
    if (const char* env = std::getenv(env_name); env != nullptr && *env != '\0') return env;
  }
  if (const auto it = file_values.find(file_key); it != file_values.end()) return it->second;
  return {};
}

struct CommonOpts {
  std::string config_file;
  std::string gen_url, embed_url, cls_url;
  std::string gen_key_env = "SIMPLEX_GEN_KEY";
  std::string embed_key_env = "SIMPLEX_EMBED_KEY";
  std::string cls_key_env = "SIMPLEX_CLS_KEY";
  std::string gen_model = "default", embed_model = "default", cls_model = "default";
  bool stub_embedder = false;
  bool stub_classifier = false;
  bool echo_stub = false;
  double timeout_s = 60.0;
  int max_retries = 2;
  double target_grade = 6.5;

  void add_provider_flags(CLI::App* cmd, bool generation) {
    cmd->add_option("--config", config_file, "key=value config file (lowest precedence)");
    cmd->add_option("--embedder", embed_url, "embedding endpoint URL (env SIMPLEX_EMBED_URL)");
    cmd->add_flag("--stub-embedder", stub_embedder, "use the deterministic hash embedder");
    cmd->add_option("--classifier", cls_url, "classifier endpoint URL (env SIMPLEX_CLS_URL)");
    cmd->add_flag("--stub-classifier", stub_classifier,
                  "use the readability rule classifier stub");
    cmd->add_option("--embed-key-env", embed_key_env, "env var holding the embedder credential");
    cmd->add_option("--cls-key-env", cls_key_env, "env var holding the classifier credential");
    cmd->add_option("--embed-model", embed_model, "embedding model name");
    cmd->add_option("--cls-model", cls_model, "classifier model name");
    cmd->add_option("--timeout", timeout_s, "provider timeout in seconds");
    cmd->add_option("--max-retries", max_retries, "provider retries beyond the first attempt");
    cmd->add_option("--target-grade", target_grade, "reading-grade target for rewards");
    if (generation) {
      cmd->add_option("--gen-url", gen_url, "generation endpoint URL (env SIMPLEX_GEN_URL)");
      cmd->add_flag("--echo-stub", echo_stub, "echo generator stub for dry runs");
      cmd->add_option("--gen-key-env", gen_key_env, "env var holding the generator credential");
      cmd->add_option("--gen-model", gen_model, "generation model name");
    }
  }

  void finalize() {
    const auto file = parse_config_file(config_file);
    gen_url = resolve(gen_url, "SIMPLEX_GEN_URL", file, "gen_url");
    embed_url = resolve(embed_url, "SIMPLEX_EMBED_URL", file, "embed_url");
    cls_url = resolve(cls_url, "SIMPLEX_CLS_URL", file, "cls_url");
    if (gen_model == "default" && file.count("gen_model")) gen_model = file.at("gen_model");
    if (embed_model == "default" && file.count("embed_model")) embed_model = file.at("embed_model");
    if (cls_model == "default" && file.count("cls_model")) cls_model = file.at("cls_model");
  }

  providers::ProviderEndpoint endpoint(const std::string& url, const std::string& key_env,
                                       const std::string& model) const {
    providers::ProviderEndpoint ep;
    ep.base_url = url;
    ep.api_key_env = key_env;
    ep.model_name = model;
    ep.timeout = std::chrono::seconds(static_cast<long>(timeout_s));
    ep.max_retries = max_retries;
    return ep;
  }

  std::unique_ptr<providers::TokenEmbedder> make_token_embedder() const {
    if (stub_embedder) return std::make_unique<providers::HashEmbedder>();
    if (!embed_url.empty()) {
      return std::make_unique<providers::HttpTokenEmbedder>(
          endpoint(embed_url, embed_key_env, embed_model));
    }
    return nullptr;
  }

  std::unique_ptr<providers::SentenceEmbedder> make_sentence_embedder() const {
    if (stub_embedder) return std::make_unique<providers::HashEmbedder>();
    if (!embed_url.empty()) {
      return std::make_unique<providers::HttpSentenceEmbedder>(
          endpoint(embed_url, embed_key_env, embed_model));
    }
    return nullptr;
  }

  std::unique_ptr<providers::SimplifiedClassifier> make_classifier() const {
    if (stub_classifier) return std::make_unique<providers::RuleClassifier>(target_grade);
    if (!cls_url.empty()) {
      return std::make_unique<providers::HttpClassifier>(
          endpoint(cls_url, cls_key_env, cls_model));
    }
    return nullptr;
  }

  std::unique_ptr<providers::Generator> make_generator() const {
    if (echo_stub) return std::make_unique<providers::EchoGenerator>();
    if (!gen_url.empty()) {
      return std::make_unique<providers::HttpGenerator>(
          endpoint(gen_url, gen_key_env, gen_model));
    }
    return nullptr;
  }
};

corpus::CorpusFormat detect_format(const std::string& path, const std::string& flag) {
  if (flag == "jsonl") return corpus::CorpusFormat::jsonl;
  if (flag == "tsv") return corpus::CorpusFormat::tsv;
  return path.size() >= 4 && path.substr(path.size() - 4) == ".tsv"
             ? corpus::CorpusFormat::tsv
             : corpus::CorpusFormat::jsonl;
}

corpus::ReportFormat report_format(const std::string& name) {
  if (name == "csv") return corpus::ReportFormat::csv;
  if (name == "json") return corpus::ReportFormat::json;
  throw UsageError("unknown report format '" + name + "'; valid: json, csv");
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOpts {
  std::string corpus_path, corpus_format = "auto", system_output, out_path,
              format = "json";
  int jobs = 1;
  CommonOpts common;
};

int run_score(const ScoreOpts& opts) {
  const corpus::Corpus corp =
      corpus::load_corpus(opts.corpus_path, detect_format(opts.corpus_path, opts.corpus_format));

  std::unordered_map<std::string, std::string> outputs;
  {
    std::ifstream in(opts.system_output, std::ios::binary);
    if (!in) throw UsageError("cannot open system output file: " + opts.system_output);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("id") || !j.contains("output")) {
        throw UsageError("system output line " + std::to_string(line_no) +
                         " must be {\"id\":...,\"output\":...}");
      }
      outputs[j["id"].get<std::string>()] = j["output"].get<std::string>();
    }
  }

  std::vector<metrics::EvalPair> pairs;
  for (const auto& record : corp.records) {
    if (record.references.empty()) continue;  // unlabeled records are not scored
    const auto it = outputs.find(record.id);
    if (it == outputs.end()) {
      throw UsageError("no system output for record id '" + record.id + "'");
    }
    pairs.push_back({record.source, it->second, record.references});
  }
  if (pairs.empty()) throw UsageError("corpus has no records with references to score");

  const auto embedder = opts.common.make_token_embedder();
  const metrics::MetricReport report =
      metrics::evaluate_corpus(pairs, embedder.get(), opts.jobs);
  corpus::export_report(report, report_format(opts.format), opts.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// reward
// ---------------------------------------------------------------------------

struct RewardOpts {
  std::string original, generated, composite, mode;
  CommonOpts common;
};

int run_reward(const RewardOpts& opts) {
  const auto composite = rewards::composite_from_string(opts.composite);
  if (!composite) {
    throw UsageError("unknown composite '" + opts.composite +
                     "'; valid: fkgl_plus_rel, fkgl_plus_ovs, fkgl_only, rel_only, ovs_only");
  }
  rewards::RewardConfig config;
  config.composite = *composite;
  config.target_grade = opts.common.target_grade;
  if (!opts.mode.empty()) {
    const auto mode = rewards::mode_from_string(opts.mode);
    if (!mode) {
      throw UsageError("unknown mode '" + opts.mode +
                       "'; valid: paper_sum_reciprocal, standard_harmonic");
    }
    config.aggregation_mode = *mode;
  }

  bool stdin_used = false;
  const std::string original = read_text_arg(opts.original, stdin_used);
  const std::string generated = read_text_arg(opts.generated, stdin_used);

  const auto embedder = opts.common.make_sentence_embedder();
  const auto classifier = opts.common.make_classifier();
  try {
    const auto breakdown =
        rewards::compute_reward(config, original, generated, embedder.get(), classifier.get());
    std::cout << rewards::breakdown_to_json(breakdown).dump() << "\n";
  } catch (const MissingProviderError& e) {
    throw UsageError(std::string(e.what()) +
                     " (configure --embedder/--classifier or a stub flag)");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simplify
// ---------------------------------------------------------------------------

struct SimplifyOpts {
  std::string in_path, out_path, strategy = "zero_shot", exemplars_path;
  bool self_correct = false;
  int jobs = 1;
  simplifier::CorrectionConfig correction;
  CommonOpts common;
};

int run_simplify(const SimplifyOpts& opts) {
  const auto kind = simplifier::strategy_from_string(opts.strategy);
  if (!kind) {
    throw UsageError("unknown strategy '" + opts.strategy +
                     "'; valid: zero_shot, in_context, fkgl_enhanced, cot");
  }
  simplifier::PromptStrategy strategy;
  strategy.kind = *kind;
  if (*kind == simplifier::StrategyKind::in_context) {
    if (opts.exemplars_path.empty()) {
      throw UsageError("strategy in_context requires --exemplars <jsonl>");
    }
    std::ifstream in(opts.exemplars_path, std::ios::binary);
    if (!in) throw UsageError("cannot open exemplar file: " + opts.exemplars_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("original") || !j.contains("simplified")) {
        throw UsageError("exemplar lines must be {\"original\":...,\"simplified\":...}");
      }
      strategy.exemplars.emplace_back(j["original"].get<std::string>(),
                                      j["simplified"].get<std::string>());
    }
    if (strategy.exemplars.size() != 3) {
      throw UsageError("in_context needs exactly 3 exemplars, found " +
                       std::to_string(strategy.exemplars.size()));
    }
  }

  const auto generator = opts.common.make_generator();
  if (!generator) {
    throw UsageError("simplify needs a generator: --gen-url, SIMPLEX_GEN_URL or --echo-stub");
  }
  // Echo dry runs fall back to the hash embedder so the loop can score.
  auto embedder = opts.common.make_token_embedder();
  if (!embedder && opts.common.echo_stub) {
    embedder = std::make_unique<providers::HashEmbedder>();
  }
  if (!embedder) {
    throw UsageError(
        "simplify needs an embedder for similarity scoring: --embedder or --stub-embedder");
  }

  simplifier::CorrectionConfig correction = opts.correction;
  if (!opts.self_correct) correction.max_iterations = 1;

  const corpus::Corpus corp =
      corpus::load_corpus(opts.in_path, detect_format(opts.in_path, "auto"));
  if (corp.records.empty()) throw UsageError("input corpus is empty");

  std::vector<std::string> lines(corp.records.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= corp.records.size()) return;
      const auto& record = corp.records[i];
      json out;
      try {
        const auto trace = simplifier::self_correct(record.source, *generator, *embedder,
                                                    strategy, correction);
        out = simplifier::trace_to_json(trace);
      } catch (const Error& e) {
        failures.fetch_add(1);
        out = json{{"error", e.what()}};
      }
      out["id"] = record.id;
      lines[i] = out.dump();
    }
  };

  const int n_threads =
      std::max(1, std::min<int>(opts.jobs, static_cast<int>(corp.records.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::string payload;
  for (const auto& line : lines) {
    payload += line;
    payload += '\n';
  }
  corpus::write_file_atomic(opts.out_path, payload);

  if (failures.load() == corp.records.size()) {
    std::cerr << "simplex: every record failed\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOpts {
  std::string corpus_path, corpus_format = "auto", out_path, format = "json";
};

int run_stats(const StatsOpts& opts) {
  const corpus::Corpus corp =
      corpus::load_corpus(opts.corpus_path, detect_format(opts.corpus_path, opts.corpus_format));
  const corpus::CorpusStats stats = corpus::corpus_stats(corp);
  if (opts.out_path.empty()) {
    if (report_format(opts.format) == corpus::ReportFormat::json) {
      std::cout << corpus::stats_to_json(stats).dump(2) << "\n";
    } else {
      const auto tmp = std::filesystem::temp_directory_path() /
                       ("simplex-stats-" + std::to_string(::getpid()) + ".csv");
      corpus::export_report(stats, corpus::ReportFormat::csv, tmp);
      std::ifstream in(tmp, std::ios::binary);
      std::cout << slurp_stream(in);
      std::filesystem::remove(tmp);
    }
    return 0;
  }
  corpus::export_report(stats, report_format(opts.format), opts.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// serve
// ---------------------------------------------------------------------------

struct ServeOpts {
  std::string addr;
  std::string mode = "paper_sum_reciprocal";
  CommonOpts common;
};

service::RewardService* g_service = nullptr;

int run_serve(const ServeOpts& opts) {
  const auto file = parse_config_file(opts.common.config_file);
  std::string addr = resolve(opts.addr, "SIMPLEX_ADDR", file, "addr");
  if (addr.empty()) addr = "127.0.0.1:8080";
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw UsageError("--addr must be host:port");
  const std::string host = addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("invalid port in --addr: " + addr);
  }

  const auto mode = rewards::mode_from_string(opts.mode);
  if (!mode) {
    throw UsageError("unknown mode '" + opts.mode +
                     "'; valid: paper_sum_reciprocal, standard_harmonic");
  }

  const auto sentence_embedder = opts.common.make_sentence_embedder();
  const auto token_embedder = opts.common.make_token_embedder();
  const auto classifier = opts.common.make_classifier();

  service::ServiceProviders providers;
  providers.sentence_embedder = sentence_embedder.get();
  providers.token_embedder = token_embedder.get();
  providers.classifier = classifier.get();

  rewards::RewardConfig defaults;
  defaults.aggregation_mode = *mode;
  defaults.target_grade = opts.common.target_grade;

  service::RewardService svc(providers, defaults);
  g_service = &svc;
  std::signal(SIGINT, [](int) {
    if (g_service != nullptr) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service != nullptr) g_service->stop();
  });

  std::cerr << "simplex: serving on " << host << ":" << port << "\n";
  if (!svc.listen(host, port)) {
    std::cerr << "simplex: cannot bind " << host << ":" << port << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Readability metrics, simplification rewards and self-correction tooling"};
  app.require_subcommand(1);

  ScoreOpts score_opts;
  auto* score = app.add_subcommand("score", "Evaluate system outputs against a corpus");
  score->add_option("--corpus", score_opts.corpus_path, "corpus file (JSONL or TSV)")
      ->required();
  score->add_option("--corpus-format", score_opts.corpus_format, "jsonl, tsv or auto");
  score->add_option("--system-output", score_opts.system_output,
                    "JSONL id->output map")
      ->required();
  score->add_option("--out", score_opts.out_path, "report path")->required();
  score->add_option("--format", score_opts.format, "report format: json or csv");
  score->add_option("--jobs", score_opts.jobs, "worker threads");
  score_opts.common.add_provider_flags(score, false);

  RewardOpts reward_opts;
  auto* reward = app.add_subcommand("reward", "Compute a composite reward for one pair");
  reward->add_option("--original", reward_opts.original, "original text file or '-'")
      ->required();
  reward->add_option("--generated", reward_opts.generated, "generated text file or '-'")
      ->required();
  reward->add_option("--composite", reward_opts.composite, "reward composite name")->required();
  reward->add_option("--mode", reward_opts.mode, "aggregation mode");
  reward_opts.common.add_provider_flags(reward, false);

  SimplifyOpts simplify_opts;
  auto* simplify = app.add_subcommand("simplify", "Simplify a corpus with optional self-correction");
  simplify->add_option("--in", simplify_opts.in_path, "input corpus (JSONL)")->required();
  simplify->add_option("--out", simplify_opts.out_path, "output JSONL of correction traces")
      ->required();
  simplify->add_option("--strategy", simplify_opts.strategy,
                       "zero_shot, in_context, fkgl_enhanced or cot");
  simplify->add_option("--exemplars", simplify_opts.exemplars_path,
                       "JSONL exemplar pairs for in_context");
  simplify->add_flag("--self-correct", simplify_opts.self_correct,
                     "iterate up to --max-iterations with feedback");
  simplify->add_option("--max-iterations", simplify_opts.correction.max_iterations,
                       "generation attempts per record");
  simplify->add_option("--fkgl-threshold", simplify_opts.correction.fkgl_absolute_threshold,
                       "absolute grade-level acceptance bound");
  simplify->add_option("--fkgl-reduction", simplify_opts.correction.fkgl_reduction_threshold,
                       "required grade-level drop");
  simplify->add_option("--bertscore-threshold", simplify_opts.correction.bertscore_threshold,
                       "similarity acceptance bound");
  simplify->add_option("--jobs", simplify_opts.jobs, "worker threads");
  simplify_opts.common.add_provider_flags(simplify, true);

  StatsOpts stats_opts;
  auto* stats = app.add_subcommand("stats", "Grade-level distributions of a corpus");
  stats->add_option("--corpus", stats_opts.corpus_path, "corpus file (JSONL or TSV)")
      ->required();
  stats->add_option("--corpus-format", stats_opts.corpus_format, "jsonl, tsv or auto");
  stats->add_option("--out", stats_opts.out_path, "write to file instead of stdout");
  stats->add_option("--format", stats_opts.format, "json or csv");

  ServeOpts serve_opts;
  auto* serve = app.add_subcommand("serve", "Run the HTTP scoring service");
  serve->add_option("--addr", serve_opts.addr, "bind address host:port (env SIMPLEX_ADDR)");
  serve->add_option("--mode", serve_opts.mode, "default aggregation mode");
  serve_opts.common.add_provider_flags(serve, false);

  int rc = 0;
  score->callback([&] {
    score_opts.common.finalize();
    rc = run_score(score_opts);
  });
  reward->callback([&] {
    reward_opts.common.finalize();
    rc = run_reward(reward_opts);
  });
  simplify->callback([&] {
    simplify_opts.common.finalize();
    rc = run_simplify(simplify_opts);
  });
  stats->callback([&] { rc = run_stats(stats_opts); });
  serve->callback([&] {
    serve_opts.common.finalize();
    rc = run_serve(serve_opts);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "simplex: " << e.what() << "\n";
    return 2;
  } catch (const ProviderError& e) {
    std::cerr << "simplex: provider failure: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "simplex: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "simplex: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "simplex: unexpected error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}

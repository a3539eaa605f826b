// src/simplifier.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "simplex/simplifier.hpp"

#include <cstdio>
#include <limits>

#include "simplex/metrics.hpp"
#include "simplex/textstat.hpp"

namespace simplex {
namespace simplifier {

namespace {

const char* kBaseInstruction =
    "Simplify the text you are given to an elementary reading level. Keep the original "
    "meaning and every important fact. Reply with only the simplified text.";

const char* kFkglDescription =
    "Readability is measured with the Flesch-Kincaid Grade Level. Lower reading levels are "
    "associated with shorter words and shorter sentences. The grade level is computed as "
    "0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59. Aim for grade 6 or "
    "below.";

std::string format2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string cot_context(const std::string& text) {
  const textstat::TextStats stats = textstat::cot_stats(text);
  std::string longs;
  for (const auto& w : stats.long_words) {
    if (!longs.empty()) longs += ", ";
    longs += w;
  }
  if (longs.empty()) longs = "(none)";
  std::string out = "Statistics for the text you will receive:\n";
  out += "- average word length: " + format2(stats.avg_word_length_chars) + " characters\n";
  out += "- average sentence length: " + format2(stats.avg_sentence_length_words) + " words\n";
  out += "- words with 3 or more syllables: " + longs + "\n";
  out +=
      "Think step by step about which long words and long sentences to shorten, then reply "
      "with only the simplified text.";
  return out;
}

}  // namespace

providers::GenerationRequest build_prompt(const PromptStrategy& strategy,
                                          const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw EmptyTextError("build_prompt: text is blank");
  }
  if (strategy.kind == StrategyKind::in_context) {
    if (strategy.exemplars.size() != 3) {
      throw MissingExemplarsError("in_context strategy requires exactly 3 exemplar pairs, got " +
                                  std::to_string(strategy.exemplars.size()));
    }
  } else if (!strategy.exemplars.empty()) {
    throw Error("exemplars are only valid with the in_context strategy");
  }

  using providers::ChatMessage;
  using providers::Role;
  providers::GenerationRequest request;
  request.temperature = 0.0;

  std::string system = kBaseInstruction;
  if (strategy.kind == StrategyKind::fkgl_enhanced || strategy.kind == StrategyKind::cot) {
    system += "\n\n";
    system += kFkglDescription;
  }
  if (strategy.kind == StrategyKind::cot) {
    system += "\n\n";
    system += cot_context(text);
  }
  request.messages.push_back({Role::system, system});

  if (strategy.kind == StrategyKind::in_context) {
    for (const auto& [original, simplified] : strategy.exemplars) {
      request.messages.push_back({Role::user, original});
      request.messages.push_back({Role::assistant, simplified});
    }
  }
  request.messages.push_back({Role::user, text});
  return request;
}

bool acceptance_from_scores(double fkgl_original, double fkgl_candidate, double bertscore,
                            const CorrectionConfig& config) {
  const bool readable = fkgl_candidate <= config.fkgl_absolute_threshold ||
                        fkgl_original - fkgl_candidate >= config.fkgl_reduction_threshold;
  return readable && bertscore >= config.bertscore_threshold;
}

bool acceptance(const std::string& original, const std::string& candidate,
                double bertscore_vs_original, const CorrectionConfig& config) {
  return acceptance_from_scores(textstat::fkgl(original), textstat::fkgl(candidate),
                                bertscore_vs_original, config);
}

namespace {

std::string feedback_for(const Attempt& attempt, double fkgl_original,
                         const CorrectionConfig& config) {
  const bool readable = attempt.fkgl <= config.fkgl_absolute_threshold ||
                        fkgl_original - attempt.fkgl >= config.fkgl_reduction_threshold;
  const bool faithful = attempt.bertscore_vs_original >= config.bertscore_threshold;

  std::string out = "The previous simplification was not accepted.\n\nPrevious attempt:\n";
  out += attempt.candidate;
  out += "\n\nIts grade level is " + format2(attempt.fkgl) + " (the original is " +
         format2(fkgl_original) + "); it must reach " +
         format2(config.fkgl_absolute_threshold) + " or drop by at least " +
         format2(config.fkgl_reduction_threshold) + " grades. Its similarity to the original is " +
         format2(attempt.bertscore_vs_original) + "; it must stay at or above " +
         format2(config.bertscore_threshold) + ".\n";
  if (!readable) out += "Use shorter words and shorter sentences.\n";
  if (!faithful) out += "Stay closer to the original meaning.\n";
  out += "Reply with only the improved simplified text.";
  return out;
}

// Lowest FKGL among attempts meeting the similarity clause, else attempt 1.
void settle_with_best(CorrectionTrace& trace, const CorrectionConfig& config) {
  const Attempt* best = nullptr;
  for (const auto& a : trace.attempts) {
    if (a.bertscore_vs_original >= config.bertscore_threshold &&
        (best == nullptr || a.fkgl < best->fkgl)) {
      best = &a;
    }
  }
  trace.final_text = best != nullptr ? best->candidate : trace.attempts.front().candidate;
  trace.final_accepted = false;
}

}  // namespace

CorrectionTrace self_correct(const std::string& original, providers::Generator& generator,
                             providers::TokenEmbedder& embedder, const PromptStrategy& strategy,
                             const CorrectionConfig& config) {
  if (config.max_iterations < 1) throw Error("max_iterations must be >= 1");
  const double fkgl_original = textstat::fkgl(original);

  CorrectionTrace trace;
  trace.original = original;
  providers::GenerationRequest request = build_prompt(strategy, original);

  for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
    Attempt attempt;
    try {
      attempt.candidate = generator.generate(request);
      attempt.fkgl = textstat::fkgl(attempt.candidate);
      attempt.bertscore_vs_original =
          metrics::bertscore(attempt.candidate, original, embedder).f1;
    } catch (const Error& e) {
      if (trace.attempts.empty()) throw;
      trace.error = e.what();
      settle_with_best(trace, config);
      return trace;
    }

    attempt.accepted =
        acceptance_from_scores(fkgl_original, attempt.fkgl, attempt.bertscore_vs_original, config);
    if (attempt.accepted) {
      trace.final_text = attempt.candidate;
      trace.final_accepted = true;
      trace.attempts.push_back(std::move(attempt));
      return trace;
    }

    if (iteration + 1 < config.max_iterations) {
      attempt.feedback_prompt = feedback_for(attempt, fkgl_original, config);
      request.messages.push_back({providers::Role::assistant, attempt.candidate});
      request.messages.push_back({providers::Role::user, *attempt.feedback_prompt});
    }
    trace.attempts.push_back(std::move(attempt));
  }

  trace.final_text = trace.attempts.back().candidate;
  trace.final_accepted = false;
  return trace;
}

nlohmann::json trace_to_json(const CorrectionTrace& trace) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : trace.attempts) {
    attempts.push_back({
        {"candidate", a.candidate},
        {"fkgl", a.fkgl},
        {"bertscore_vs_original", a.bertscore_vs_original},
        {"accepted", a.accepted},
        {"feedback_prompt",
         a.feedback_prompt ? nlohmann::json(*a.feedback_prompt) : nlohmann::json(nullptr)},
    });
  }
  nlohmann::json out{{"original", trace.original},
                     {"attempts", attempts},
                     {"final", trace.final_text},
                     {"final_accepted", trace.final_accepted}};
  if (trace.error) out["error"] = *trace.error;
  return out;
}

CorrectionTrace trace_from_json(const nlohmann::json& j) {
  CorrectionTrace trace;
  trace.original = j.at("original").get<std::string>();
  trace.final_text = j.at("final").get<std::string>();
  trace.final_accepted = j.at("final_accepted").get<bool>();
  if (j.contains("error") && !j["error"].is_null()) {
    trace.error = j["error"].get<std::string>();
  }
  for (const auto& ja : j.at("attempts")) {
    Attempt a;
    a.candidate = ja.at("candidate").get<std::string>();
    a.fkgl = ja.at("fkgl").get<double>();
    a.bertscore_vs_original = ja.at("bertscore_vs_original").get<double>();
    a.accepted = ja.at("accepted").get<bool>();
    if (!ja.at("feedback_prompt").is_null()) {
      a.feedback_prompt = ja["feedback_prompt"].get<std::string>();
    }
    trace.attempts.push_back(std::move(a));
  }
  return trace;
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::zero_shot:
      return "zero_shot";
    case StrategyKind::in_context:
      return "in_context";
    case StrategyKind::fkgl_enhanced:
      return "fkgl_enhanced";
    case StrategyKind::cot:
      return "cot";
  }
  return "zero_shot";
}

std::optional<StrategyKind> strategy_from_string(const std::string& name) {
  if (name == "zero_shot") return StrategyKind::zero_shot;
  if (name == "in_context") return StrategyKind::in_context;
  if (name == "fkgl_enhanced") return StrategyKind::fkgl_enhanced;
  if (name == "cot") return StrategyKind::cot;
  return std::nullopt;
}

}  // namespace simplifier
}  // namespace simplex

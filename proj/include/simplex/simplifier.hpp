// simplex/simplifier.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_SIMPLIFIER_HPP_
#define SIMPLEX_SIMPLIFIER_HPP_

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "simplex/errors.hpp"
#include "simplex/providers.hpp"

namespace simplex {
namespace simplifier {

enum class StrategyKind { zero_shot, in_context, fkgl_enhanced, cot };

// in_context requires exactly three (original, simplified) exemplar pairs;
// the other strategies take none.
struct PromptStrategy {
  StrategyKind kind = StrategyKind::zero_shot;
  std::vector<std::pair<std::string, std::string>> exemplars;
};

struct CorrectionConfig {
  int max_iterations = 3;
  double fkgl_absolute_threshold = 6.0;
  double fkgl_reduction_threshold = 3.0;
  double bertscore_threshold = 0.95;
};

struct Attempt {
  std::string candidate;
  double fkgl = 0.0;
  double bertscore_vs_original = 0.0;
  bool accepted = false;
  // Present exactly on rejected attempts that fed another iteration.
  std::optional<std::string> feedback_prompt;
};

struct CorrectionTrace {
  std::string original;
  std::vector<Attempt> attempts;
  std::string final_text;
  bool final_accepted = false;
  // Set when a provider failure cut the loop short.
  std::optional<std::string> error;
};

// Builds the chat request for one strategy. The passage always travels as the
// final user message by itself; instructions, exemplars and sample statistics
// live in the earlier messages. Byte-identical output for identical inputs.
providers::GenerationRequest build_prompt(const PromptStrategy& strategy,
                                          const std::string& text);

// (fkgl(candidate) <= absolute  OR  fkgl(original) - fkgl(candidate) >= reduction)
// AND bertscore >= threshold; all comparisons inclusive.
bool acceptance_from_scores(double fkgl_original, double fkgl_candidate, double bertscore,
                            const CorrectionConfig& config = {});

bool acceptance(const std::string& original, const std::string& candidate,
                double bertscore_vs_original, const CorrectionConfig& config = {});

// Generate / assess / refine, at most max_iterations generations. Each
// rejection feeds the candidate, its scores and targeted instructions back as
// a new user turn. A provider failure after the first scored attempt is
// recorded on the trace and the loop exits with the best candidate so far
// (lowest FKGL among attempts meeting the similarity clause, else attempt 1).
CorrectionTrace self_correct(const std::string& original, providers::Generator& generator,
                             providers::TokenEmbedder& embedder, const PromptStrategy& strategy,
                             const CorrectionConfig& config = {});

nlohmann::json trace_to_json(const CorrectionTrace& trace);
CorrectionTrace trace_from_json(const nlohmann::json& j);

std::string to_string(StrategyKind kind);
std::optional<StrategyKind> strategy_from_string(const std::string& name);

}  // namespace simplifier
}  // namespace simplex

#endif  // SIMPLEX_SIMPLIFIER_HPP_

// tests/test_simplifier.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "simplex/providers.hpp"
#include "simplex/simplifier.hpp"
#include "simplex/textstat.hpp"

using namespace simplex;
using namespace simplex::simplifier;

namespace {

// One long sentence; splitting it drops the grade by more than three levels
// without changing any word, which keeps token-level similarity at 1.
const std::string kComplexOriginal =
    "The radiological examination procedure requires considerable expertise and the "
    "interpretation demands extensive training today.";
const std::string kSplitCandidate =
    "The radiological examination procedure requires considerable expertise. And the "
    "interpretation demands. Extensive training today.";
const std::string kGibberish =
    "Quantum chromodynamics dominates multidimensional theoretical frameworks rapidly.";

std::string flatten(const providers::GenerationRequest& req) {
  std::string out;
  for (const auto& m : req.messages) {
    out += providers::to_string(m.role);
    out += '\x1f';
    out += m.content;
    out += '\x1e';
  }
  return out;
}

}  // namespace

TEST_CASE("zero_shot prompt carries the text as the final user message") {
  const auto req = build_prompt({StrategyKind::zero_shot, {}}, "X");
  REQUIRE(req.messages.size() == 2);
  CHECK(req.messages.front().role == providers::Role::system);
  CHECK(req.messages.front().content.find("elementary reading level") != std::string::npos);
  CHECK(req.messages.back().role == providers::Role::user);
  CHECK(req.messages.back().content == "X");
}

TEST_CASE("in_context prompt interleaves the three exemplars in order") {
  PromptStrategy strategy;
  strategy.kind = StrategyKind::in_context;
  strategy.exemplars = {{"orig one", "simple one"},
                        {"orig two", "simple two"},
                        {"orig three", "simple three"}};
  const auto req = build_prompt(strategy, "the passage");
  REQUIRE(req.messages.size() == 8);  // system + 3 pairs + final user
  const std::string all = flatten(req);
  std::size_t pos = 0;
  for (const std::string needle : {"orig one", "simple one", "orig two", "simple two",
                                   "orig three", "simple three", "the passage"}) {
    const std::size_t found = all.find(needle, pos);
    REQUIRE(found != std::string::npos);
    pos = found;
  }
  CHECK(req.messages.back().content == "the passage");
}

TEST_CASE("in_context without exactly three exemplars is rejected") {
  PromptStrategy strategy;
  strategy.kind = StrategyKind::in_context;
  CHECK_THROWS_AS(build_prompt(strategy, "text"), MissingExemplarsError);
  strategy.exemplars = {{"a", "b"}, {"c", "d"}};
  CHECK_THROWS_AS(build_prompt(strategy, "text"), MissingExemplarsError);
  // Exemplars outside in_context violate the strategy invariant.
  PromptStrategy zero;
  zero.exemplars = {{"a", "b"}};
  CHECK_THROWS_AS(build_prompt(zero, "text"), Error);
}

TEST_CASE("fkgl_enhanced prompt explains the grade-level formula") {
  const auto req = build_prompt({StrategyKind::fkgl_enhanced, {}}, "Some text here.");
  const std::string& system = req.messages.front().content;
  CHECK(system.find("0.39") != std::string::npos);
  CHECK(system.find("11.8") != std::string::npos);
  CHECK(system.find("shorter words and shorter sentences") != std::string::npos);
}

TEST_CASE("cot prompt embeds the sample statistics") {
  const std::string text = "The radiologist examined the tissue.";
  const auto req = build_prompt({StrategyKind::cot, {}}, text);
  const std::string& system = req.messages.front().content;
  // Long-word list must match cot_stats for this sample.
  const auto stats = textstat::cot_stats(text);
  for (const auto& w : stats.long_words) {
    CHECK(system.find(w) != std::string::npos);
  }
  CHECK(system.find("average word length") != std::string::npos);
  CHECK(system.find("average sentence length") != std::string::npos);
  CHECK(req.messages.back().content == text);

  // No long words -> explicit placeholder instead of a dangling list.
  const auto simple = build_prompt({StrategyKind::cot, {}}, "The cat sat.");
  CHECK(simple.messages.front().content.find("(none)") != std::string::npos);
}

TEST_CASE("build_prompt is byte-deterministic") {
  PromptStrategy strategy;
  strategy.kind = StrategyKind::cot;
  const std::string text = "The radiological examination requires expertise.";
  CHECK(flatten(build_prompt(strategy, text)) == flatten(build_prompt(strategy, text)));
  CHECK_THROWS_AS(build_prompt(strategy, "  \n"), EmptyTextError);
}

TEST_CASE("acceptance hand cases from the contract") {
  CorrectionConfig config;
  CHECK(acceptance_from_scores(12.0, 5.9, 0.96, config));   // absolute clause
  CHECK(acceptance_from_scores(12.0, 8.7, 0.95, config));   // reduction 3.3, inclusive 0.95
  CHECK_FALSE(acceptance_from_scores(8.0, 6.2, 0.99, config));  // 6.2 > 6 and only 1.8 dropped
}

TEST_CASE("acceptance comparisons are inclusive at the thresholds") {
  CorrectionConfig config;
  CHECK(acceptance_from_scores(20.0, 6.0, 0.95, config));
  CHECK(acceptance_from_scores(12.0, 9.0, 0.95, config));  // reduction exactly 3
  CHECK_FALSE(acceptance_from_scores(11.9, 9.0, 0.95, config));
  CHECK_FALSE(acceptance_from_scores(20.0, 6.0, 0.95 - 1e-9, config));
}

TEST_CASE("acceptance is monotone in candidate quality") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> grades(0.0, 20.0);
  std::uniform_real_distribution<double> sims(0.5, 1.0);
  CorrectionConfig config;
  for (int i = 0; i < 2000; ++i) {
    const double orig = grades(rng);
    const double cand = grades(rng);
    const double bert = sims(rng);
    if (!acceptance_from_scores(orig, cand, bert, config)) continue;
    // Lowering FKGL or raising similarity never flips true -> false.
    CHECK(acceptance_from_scores(orig, cand - 0.5, bert, config));
    CHECK(acceptance_from_scores(orig, cand, std::min(bert + 0.01, 1.0), config));
  }
}

TEST_CASE("acceptance on real texts wraps the score predicate") {
  CHECK(acceptance("The cat sat on the mat.", "The cat sat.", 1.0));
  CHECK_FALSE(acceptance(kComplexOriginal, kComplexOriginal, 1.0));
  CHECK_THROWS_AS(acceptance("", "The cat sat.", 1.0), EmptyTextError);
}

TEST_CASE("self_correct accepts an already-simple echo on the first attempt") {
  providers::EchoGenerator echo;
  providers::HashEmbedder embedder;
  const std::string simple = "The cat sat on the mat.";
  const auto trace = self_correct(simple, echo, embedder, {StrategyKind::zero_shot, {}});
  REQUIRE(trace.attempts.size() == 1);
  CHECK(trace.attempts.front().accepted);
  CHECK(trace.final_accepted);
  CHECK(trace.final_text == simple);
  CHECK_FALSE(trace.attempts.front().feedback_prompt.has_value());
  CHECK_FALSE(trace.error.has_value());
}

TEST_CASE("self_correct converges on the third scripted attempt") {
  providers::ScriptedGenerator scripted({kComplexOriginal, kGibberish, kSplitCandidate});
  providers::HashEmbedder embedder;
  const auto trace =
      self_correct(kComplexOriginal, scripted, embedder, {StrategyKind::zero_shot, {}});
  REQUIRE(trace.attempts.size() == 3);
  CHECK(scripted.calls() == 3);
  CHECK_FALSE(trace.attempts[0].accepted);
  CHECK_FALSE(trace.attempts[1].accepted);
  CHECK(trace.attempts[2].accepted);
  CHECK(trace.final_accepted);
  CHECK(trace.final_text == kSplitCandidate);
  // Feedback sits exactly on the rejected non-final attempts.
  CHECK(trace.attempts[0].feedback_prompt.has_value());
  CHECK(trace.attempts[1].feedback_prompt.has_value());
  CHECK_FALSE(trace.attempts[2].feedback_prompt.has_value());
  // The feedback quotes the candidate and the targeted instruction.
  CHECK(trace.attempts[0].feedback_prompt->find(kComplexOriginal) != std::string::npos);
  CHECK(trace.attempts[0].feedback_prompt->find("shorter words") != std::string::npos);
  CHECK(trace.attempts[1].feedback_prompt->find("closer to the original") != std::string::npos);
}

TEST_CASE("self_correct never issues a fourth generation") {
  // Exactly three scripted outputs: a fourth call would throw inside the loop.
  providers::ScriptedGenerator scripted({kComplexOriginal, kGibberish, kComplexOriginal});
  providers::HashEmbedder embedder;
  const auto trace =
      self_correct(kComplexOriginal, scripted, embedder, {StrategyKind::zero_shot, {}});
  REQUIRE(trace.attempts.size() == 3);
  CHECK(scripted.calls() == 3);
  CHECK_FALSE(trace.final_accepted);
  CHECK(trace.final_text == trace.attempts.back().candidate);
  CHECK_FALSE(trace.error.has_value());
  // Only non-final rejected attempts carry feedback.
  CHECK(trace.attempts[0].feedback_prompt.has_value());
  CHECK(trace.attempts[1].feedback_prompt.has_value());
  CHECK_FALSE(trace.attempts[2].feedback_prompt.has_value());
}

TEST_CASE("self_correct honors a custom iteration bound") {
  providers::ScriptedGenerator scripted({kComplexOriginal});
  providers::HashEmbedder embedder;
  CorrectionConfig config;
  config.max_iterations = 1;
  const auto trace =
      self_correct(kComplexOriginal, scripted, embedder, {StrategyKind::zero_shot, {}}, config);
  CHECK(trace.attempts.size() == 1);
  CHECK(scripted.calls() == 1);
  CHECK_FALSE(trace.final_accepted);
}

TEST_CASE("self_correct records provider failures and keeps the best candidate") {
  // One failing output, then the script is exhausted and throws.
  providers::ScriptedGenerator scripted({kComplexOriginal});
  providers::HashEmbedder embedder;
  const auto trace =
      self_correct(kComplexOriginal, scripted, embedder, {StrategyKind::zero_shot, {}});
  REQUIRE(trace.attempts.size() == 1);
  REQUIRE(trace.error.has_value());
  CHECK_FALSE(trace.final_accepted);
  // Attempt 1 meets the similarity clause, so it is the best-so-far candidate.
  CHECK(trace.final_text == kComplexOriginal);
}

TEST_CASE("self_correct propagates a failure on the very first generation") {
  providers::ScriptedGenerator scripted({});
  providers::HashEmbedder embedder;
  CHECK_THROWS_AS(
      self_correct(kComplexOriginal, scripted, embedder, {StrategyKind::zero_shot, {}}),
      ProviderError);
}

TEST_CASE("traces serialize and deserialize losslessly") {
  providers::ScriptedGenerator scripted({kComplexOriginal, kGibberish, kSplitCandidate});
  providers::HashEmbedder embedder;
  const auto trace =
      self_correct(kComplexOriginal, scripted, embedder, {StrategyKind::zero_shot, {}});
  const auto j = trace_to_json(trace);
  const auto back = trace_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.original == trace.original);
  CHECK(back.final_text == trace.final_text);
  CHECK(back.final_accepted == trace.final_accepted);
  CHECK(back.error == trace.error);
  REQUIRE(back.attempts.size() == trace.attempts.size());
  for (std::size_t i = 0; i < trace.attempts.size(); ++i) {
    CHECK(back.attempts[i].candidate == trace.attempts[i].candidate);
    CHECK(back.attempts[i].fkgl == trace.attempts[i].fkgl);
    CHECK(back.attempts[i].bertscore_vs_original == trace.attempts[i].bertscore_vs_original);
    CHECK(back.attempts[i].accepted == trace.attempts[i].accepted);
    CHECK(back.attempts[i].feedback_prompt == trace.attempts[i].feedback_prompt);
  }
}

TEST_CASE("strategy names round-trip") {
  for (auto kind : {StrategyKind::zero_shot, StrategyKind::in_context,
                    StrategyKind::fkgl_enhanced, StrategyKind::cot}) {
    CHECK(strategy_from_string(to_string(kind)) == kind);
  }
  CHECK_FALSE(strategy_from_string("few_shot").has_value());
}

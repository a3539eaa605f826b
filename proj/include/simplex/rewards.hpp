// simplex/rewards.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_REWARDS_HPP_
#define SIMPLEX_REWARDS_HPP_

#include <json.hpp>

#include <optional>
#include <string>

#include "simplex/errors.hpp"
#include "simplex/providers.hpp"

namespace simplex {
namespace rewards {

// How two component rewards combine. paper_sum_reciprocal is 1/(1/x1 + 1/x2),
// which is half the conventional harmonic mean and tops out at 0.5 for inputs
// in (0,1]. standard_harmonic is the conventional 2/(1/x1 + 1/x2). The two
// rank any candidate set identically (standard is exactly twice paper), so
// the choice does not affect which rollout a trainer prefers.
enum class AggregationMode { paper_sum_reciprocal, standard_harmonic };

enum class Composite { fkgl_plus_rel, fkgl_plus_ovs, fkgl_only, rel_only, ovs_only };

struct RewardConfig {
  double target_grade = 6.5;
  AggregationMode aggregation_mode = AggregationMode::paper_sum_reciprocal;
  Composite composite = Composite::fkgl_plus_rel;
};

// Component values are present exactly when the configured composite needs
// them. fkgl_raw carries the unmapped grade level whenever r_fkgl is present.
struct RewardBreakdown {
  std::optional<double> r_fkgl;
  std::optional<double> r_rel;
  std::optional<double> r_ovs;
  double aggregate = 0.0;
  AggregationMode mode = AggregationMode::paper_sum_reciprocal;
  Composite composite = Composite::fkgl_only;
  std::optional<double> fkgl_raw;
};

// sigmoid((target_grade - fkgl_value) / target_grade); strictly decreasing in
// fkgl_value with fixed point 0.5 at the target grade.
double reward_from_fkgl(double fkgl_value, double target_grade = 6.5);

// Same, computing the grade level of the generated text first.
double reward_fkgl(const std::string& generated, double target_grade = 6.5);

// Cosine similarity of the two sentence embeddings, clamped to [0,1].
double reward_rel(const std::string& original, const std::string& generated,
                  providers::SentenceEmbedder& embedder);

// Pass-through of the classifier's P(simplified); rejects values outside [0,1].
double reward_ovs(const std::string& generated, providers::SimplifiedClassifier& classifier);

// Combines two positive component rewards per the mode above.
double aggregate(double x1, double x2, AggregationMode mode);

// Evaluates the configured composite, calling only the providers it needs.
// Throws MissingProviderError when a needed provider is null.
RewardBreakdown compute_reward(const RewardConfig& config, const std::string& original,
                               const std::string& generated,
                               providers::SentenceEmbedder* embedder,
                               providers::SimplifiedClassifier* classifier);

// Stable JSON shape shared by the CLI, the exports and the HTTP service.
// Absent components serialize as null.
nlohmann::json breakdown_to_json(const RewardBreakdown& breakdown);

std::string to_string(AggregationMode mode);
std::string to_string(Composite composite);
std::optional<AggregationMode> mode_from_string(const std::string& name);
std::optional<Composite> composite_from_string(const std::string& name);

}  // namespace rewards
}  // namespace simplex

#endif  // SIMPLEX_REWARDS_HPP_

// src/rewards.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "simplex/rewards.hpp"

#include <algorithm>
#include <cmath>

#include "simplex/textstat.hpp"

namespace simplex {
namespace rewards {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double reward_from_fkgl(double fkgl_value, double target_grade) {
  if (target_grade <= 0.0) throw Error("target_grade must be positive");
  return sigmoid((target_grade - fkgl_value) / target_grade);
}

double reward_fkgl(const std::string& generated, double target_grade) {
  return reward_from_fkgl(textstat::fkgl(generated), target_grade);
}

double reward_rel(const std::string& original, const std::string& generated,
                  providers::SentenceEmbedder& embedder) {
  const Eigen::VectorXd a = embedder.embed_sentence(original);
  const Eigen::VectorXd b = embedder.embed_sentence(generated);
  if (a.size() != b.size()) {
    throw DimensionMismatchError("reward_rel: sentence embeddings differ in length");
  }
  const double norm_a = a.norm();
  const double norm_b = b.norm();
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw ZeroVectorError("reward_rel: sentence embedding has zero norm");
  }
  const double cosine = a.dot(b) / (norm_a * norm_b);
  return std::clamp(cosine, 0.0, 1.0);
}

double reward_ovs(const std::string& generated, providers::SimplifiedClassifier& classifier) {
  const double p = classifier.p_simplified(generated);
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw InvalidProbabilityError("reward_ovs: classifier returned " + std::to_string(p));
  }
  return p;
}

double aggregate(double x1, double x2, AggregationMode mode) {
  if (!(x1 > 0.0) || !(x2 > 0.0)) {
    throw NonPositiveInputError("aggregate: inputs must be positive");
  }
  const double reciprocal_sum = 1.0 / x1 + 1.0 / x2;
  return mode == AggregationMode::paper_sum_reciprocal ? 1.0 / reciprocal_sum
                                                       : 2.0 / reciprocal_sum;
}

RewardBreakdown compute_reward(const RewardConfig& config, const std::string& original,
                               const std::string& generated,
                               providers::SentenceEmbedder* embedder,
                               providers::SimplifiedClassifier* classifier) {
  const bool needs_fkgl = config.composite == Composite::fkgl_plus_rel ||
                          config.composite == Composite::fkgl_plus_ovs ||
                          config.composite == Composite::fkgl_only;
  const bool needs_rel = config.composite == Composite::fkgl_plus_rel ||
                         config.composite == Composite::rel_only;
  const bool needs_ovs = config.composite == Composite::fkgl_plus_ovs ||
                         config.composite == Composite::ovs_only;
  if (needs_rel && embedder == nullptr) {
    throw MissingProviderError("composite " + to_string(config.composite) +
                               " requires a sentence embedder");
  }
  if (needs_ovs && classifier == nullptr) {
    throw MissingProviderError("composite " + to_string(config.composite) +
                               " requires a classifier");
  }

  RewardBreakdown out;
  out.mode = config.aggregation_mode;
  out.composite = config.composite;
  if (needs_fkgl) {
    out.fkgl_raw = textstat::fkgl(generated);
    out.r_fkgl = reward_from_fkgl(*out.fkgl_raw, config.target_grade);
  }
  if (needs_rel) out.r_rel = reward_rel(original, generated, *embedder);
  if (needs_ovs) out.r_ovs = reward_ovs(generated, *classifier);

  switch (config.composite) {
    case Composite::fkgl_plus_rel:
      out.aggregate = aggregate(*out.r_fkgl, *out.r_rel, config.aggregation_mode);
      break;
    case Composite::fkgl_plus_ovs:
      out.aggregate = aggregate(*out.r_fkgl, *out.r_ovs, config.aggregation_mode);
      break;
    case Composite::fkgl_only:
      out.aggregate = *out.r_fkgl;
      break;
    case Composite::rel_only:
      out.aggregate = *out.r_rel;
      break;
    case Composite::ovs_only:
      out.aggregate = *out.r_ovs;
      break;
  }
  return out;
}

nlohmann::json breakdown_to_json(const RewardBreakdown& breakdown) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return nlohmann::json{
      {"aggregate", breakdown.aggregate}, {"composite", to_string(breakdown.composite)},
      {"fkgl_raw", opt(breakdown.fkgl_raw)}, {"mode", to_string(breakdown.mode)},
      {"r_fkgl", opt(breakdown.r_fkgl)},     {"r_ovs", opt(breakdown.r_ovs)},
      {"r_rel", opt(breakdown.r_rel)},
  };
}

std::string to_string(AggregationMode mode) {
  return mode == AggregationMode::paper_sum_reciprocal ? "paper_sum_reciprocal"
                                                       : "standard_harmonic";
}

std::string to_string(Composite composite) {
  switch (composite) {
    case Composite::fkgl_plus_rel:
      return "fkgl_plus_rel";
    case Composite::fkgl_plus_ovs:
      return "fkgl_plus_ovs";
    case Composite::fkgl_only:
      return "fkgl_only";
    case Composite::rel_only:
      return "rel_only";
    case Composite::ovs_only:
      return "ovs_only";
  }
  return "fkgl_only";
}

std::optional<AggregationMode> mode_from_string(const std::string& name) {
  if (name == "paper_sum_reciprocal") return AggregationMode::paper_sum_reciprocal;
  if (name == "standard_harmonic") return AggregationMode::standard_harmonic;
  return std::nullopt;
}

std::optional<Composite> composite_from_string(const std::string& name) {
  if (name == "fkgl_plus_rel") return Composite::fkgl_plus_rel;
  if (name == "fkgl_plus_ovs") return Composite::fkgl_plus_ovs;
  if (name == "fkgl_only") return Composite::fkgl_only;
  if (name == "rel_only") return Composite::rel_only;
  if (name == "ovs_only") return Composite::ovs_only;
  return std::nullopt;
}

}  // namespace rewards
}  // namespace simplex

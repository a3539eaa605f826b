// simplex/metrics.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_METRICS_HPP_
#define SIMPLEX_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "simplex/errors.hpp"
#include "simplex/providers.hpp"

namespace simplex {
namespace metrics {

// One system output aligned with its source and human references.
struct EvalPair {
  std::string source;
  std::string output;
  std::vector<std::string> references;  // must be non-empty
};

struct RougeScores {
  double rouge1_f1 = 0.0;
  double rouge2_f1 = 0.0;
  double rougeL_f1 = 0.0;
};

struct BertScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricReport {
  double sari = 0.0;                    // [0, 100]
  double bleu = 0.0;                    // [0, 1]
  std::optional<double> bertscore_f1;   // absent when no embedder is configured
  double rouge1_f1 = 0.0;
  double rouge2_f1 = 0.0;
  double rougeL_f1 = 0.0;
  double fkgl = 0.0;                    // of the concatenated outputs
  std::size_t pair_count = 0;
};

// Shared tokenization for every n-gram metric: lowercase + word tokens.
std::vector<std::string> metric_tokens(const std::string& text);

// SARI over multiset n-grams (n = 1..max_n), averaging a keep-F1, an add-F1
// and a deletion precision per order:
//   keep weights each kept source n-gram by the fraction of references
//   containing it; add compares output-minus-source n-grams against the
//   reference union minus source; deletion credits each deleted copy by the
//   average number of copies the references deleted. A side with an empty
//   candidate or target multiset scores 1 vacuously.
double sari(const EvalPair& pair, int max_n = 4);

// Geometric mean of clipped n-gram precisions with add-one smoothing on zero
// counts for n >= 2, times brevity penalty exp(1 - r/c) when c < r with r the
// closest-reference length (ties to the shorter reference).
double bleu(const std::string& output, const std::vector<std::string>& references, int max_n = 4);

// Unigram-F1, bigram-F1 and LCS-F1 per reference; per-variant maximum across
// references.
RougeScores rouge(const std::string& output, const std::vector<std::string>& references);

// Greedy cosine matching of contextual token embeddings, no baseline
// rescaling: precision is the mean over output tokens of the best cosine
// against the reference tokens, recall the symmetric quantity, f1 their
// harmonic mean.
BertScore bertscore(const std::string& output, const std::string& reference,
                    providers::TokenEmbedder& embedder);

// Arithmetic mean of per-pair scores; FKGL of the concatenated outputs.
// BERTScore per pair is the best f1 across that pair's references and is
// omitted when embedder is null. jobs > 1 evaluates pairs on a worker pool;
// results are aggregated in input order either way.
MetricReport evaluate_corpus(const std::vector<EvalPair>& pairs,
                             providers::TokenEmbedder* embedder, int jobs = 1);

}  // namespace metrics
}  // namespace simplex

#endif  // SIMPLEX_METRICS_HPP_

// src/metrics.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "simplex/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "simplex/textstat.hpp"

namespace simplex {
namespace metrics {

namespace {

using Counts = std::unordered_map<std::string, long long>;

// Tokens never contain spaces, so joining with one is collision-free.
Counts ngram_counts(const std::vector<std::string>& tokens, int n) {
  Counts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key += ' ';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

long long total(const Counts& counts) {
  long long t = 0;
  for (const auto& [_, c] : counts) t += c;
  return t;
}

long long get(const Counts& counts, const std::string& key) {
  const auto it = counts.find(key);
  return it == counts.end() ? 0 : it->second;
}

double f1(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double ratio_or(long long num, long long den, double vacuous) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : vacuous;
}

}  // namespace

std::vector<std::string> metric_tokens(const std::string& text) {
  return textstat::tokenize_words(textstat::lowercase(text));
}

double sari(const EvalPair& pair, int max_n) {
  if (max_n < 1) throw InvalidNError("sari: max_n must be >= 1");
  if (pair.references.empty()) throw Error("sari: references must be non-empty");

  const auto src = metric_tokens(pair.source);
  const auto out = metric_tokens(pair.output);
  std::vector<std::vector<std::string>> refs;
  refs.reserve(pair.references.size());
  for (const auto& r : pair.references) refs.push_back(metric_tokens(r));
  const long long r = static_cast<long long>(refs.size());

  double score_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const Counts s_counts = ngram_counts(src, n);
    const Counts c_counts = ngram_counts(out, n);
    std::vector<Counts> ref_counts;
    ref_counts.reserve(refs.size());
    for (const auto& ref : refs) ref_counts.push_back(ngram_counts(ref, n));

    std::unordered_set<std::string> universe;
    for (const auto& [g, _] : s_counts) universe.insert(g);
    for (const auto& [g, _] : c_counts) universe.insert(g);
    for (const auto& rc : ref_counts) {
      for (const auto& [g, _] : rc) universe.insert(g);
    }

    long long keep_num = 0, keep_den_p = 0, keep_den_r = 0;
    long long add_num = 0, add_den_p = 0, add_den_r = 0;
    long long del_num = 0, del_den = 0;

    for (const auto& g : universe) {
      const long long s = get(s_counts, g);
      const long long c = get(c_counts, g);
      long long containing = 0, max_ref = 0, deleted_by_refs = 0;
      for (const auto& rc : ref_counts) {
        const long long count = get(rc, g);
        if (count > 0) ++containing;
        max_ref = std::max(max_ref, count);
        deleted_by_refs += std::max(s - count, 0LL);
      }

      const long long kept = std::min(s, c);
      keep_num += kept * containing;
      keep_den_p += kept * r;
      keep_den_r += s * containing;

      const long long added = std::max(c - s, 0LL);
      const long long add_target = std::max(max_ref - s, 0LL);
      add_num += std::min(added, add_target);
      add_den_p += added;
      add_den_r += add_target;

      const long long deleted = std::max(s - c, 0LL);
      del_num += std::min(r * deleted, deleted_by_refs);
      del_den += r * deleted;
    }

    const double keep_f1 = f1(ratio_or(keep_num, keep_den_p, 1.0),
                              ratio_or(keep_num, keep_den_r, 1.0));
    const double add_f1 =
        f1(ratio_or(add_num, add_den_p, 1.0), ratio_or(add_num, add_den_r, 1.0));
    const double del_p = ratio_or(del_num, del_den, 1.0);
    score_sum += (keep_f1 + add_f1 + del_p) / 3.0;
  }
  return 100.0 * score_sum / static_cast<double>(max_n);
}

double bleu(const std::string& output, const std::vector<std::string>& references, int max_n) {
  if (max_n < 1) throw InvalidNError("bleu: max_n must be >= 1");
  if (references.empty()) throw Error("bleu: references must be non-empty");

  const auto out = metric_tokens(output);
  if (out.empty()) throw EmptyOutputError("bleu: output has no tokens");
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& ref : references) refs.push_back(metric_tokens(ref));

  const long long c_len = static_cast<long long>(out.size());
  long long r_len = static_cast<long long>(refs.front().size());
  for (const auto& ref : refs) {
    const long long len = static_cast<long long>(ref.size());
    const long long best = std::llabs(r_len - c_len);
    const long long cur = std::llabs(len - c_len);
    if (cur < best || (cur == best && len < r_len)) r_len = len;
  }

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const Counts out_counts = ngram_counts(out, n);
    const long long t = total(out_counts);
    long long matched = 0;
    for (const auto& [g, count] : out_counts) {
      long long best_ref = 0;
      for (const auto& ref : refs) best_ref = std::max(best_ref, get(ngram_counts(ref, n), g));
      matched += std::min(count, best_ref);
    }
    double p;
    if (matched == 0) {
      if (n == 1) return 0.0;
      p = 1.0 / static_cast<double>(t + 1);
    } else {
      p = static_cast<double>(matched) / static_cast<double>(t);
    }
    log_sum += std::log(p);
  }

  const double bp = c_len < r_len
                        ? std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(c_len))
                        : 1.0;
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

namespace {

double rouge_n_f1(const std::vector<std::string>& out, const std::vector<std::string>& ref,
                  int n) {
  const Counts out_counts = ngram_counts(out, n);
  const Counts ref_counts = ngram_counts(ref, n);
  const long long out_total = total(out_counts);
  const long long ref_total = total(ref_counts);
  if (out_total == 0 || ref_total == 0) return 0.0;
  long long overlap = 0;
  for (const auto& [g, count] : out_counts) overlap += std::min(count, get(ref_counts, g));
  return f1(static_cast<double>(overlap) / static_cast<double>(out_total),
            static_cast<double>(overlap) / static_cast<double>(ref_total));
}

long long lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<long long> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double rouge_l_f1(const std::vector<std::string>& out, const std::vector<std::string>& ref) {
  if (out.empty() || ref.empty()) return 0.0;
  const long long lcs = lcs_length(out, ref);
  return f1(static_cast<double>(lcs) / static_cast<double>(out.size()),
            static_cast<double>(lcs) / static_cast<double>(ref.size()));
}

}  // namespace

RougeScores rouge(const std::string& output, const std::vector<std::string>& references) {
  if (references.empty()) throw Error("rouge: references must be non-empty");
  const auto out = metric_tokens(output);
  if (out.empty()) throw EmptyOutputError("rouge: output has no tokens");

  RougeScores best;
  for (const auto& reference : references) {
    const auto ref = metric_tokens(reference);
    best.rouge1_f1 = std::max(best.rouge1_f1, rouge_n_f1(out, ref, 1));
    best.rouge2_f1 = std::max(best.rouge2_f1, rouge_n_f1(out, ref, 2));
    best.rougeL_f1 = std::max(best.rougeL_f1, rouge_l_f1(out, ref));
  }
  return best;
}

BertScore bertscore(const std::string& output, const std::string& reference,
                    providers::TokenEmbedder& embedder) {
  Eigen::MatrixXd out = embedder.embed_tokens(output);
  Eigen::MatrixXd ref = embedder.embed_tokens(reference);
  if (out.rows() == 0) throw EmptyOutputError("bertscore: output has no tokens");
  if (ref.rows() == 0) throw EmptyOutputError("bertscore: reference has no tokens");
  if (out.cols() != ref.cols()) {
    throw DimensionMismatchError("bertscore: token vectors differ in length");
  }

  auto normalize_rows = [](Eigen::MatrixXd& m) {
    for (long i = 0; i < m.rows(); ++i) {
      const double norm = m.row(i).norm();
      if (norm > 0.0) m.row(i) /= norm;
    }
  };
  normalize_rows(out);
  normalize_rows(ref);

  const Eigen::MatrixXd sim = out * ref.transpose();
  BertScore score;
  score.precision = sim.rowwise().maxCoeff().mean();
  score.recall = sim.colwise().maxCoeff().mean();
  score.f1 = f1(score.precision, score.recall);
  return score;
}

namespace {

struct PairScores {
  double sari = 0.0;
  double bleu = 0.0;
  RougeScores rouge;
  std::optional<double> bert_f1;
};

PairScores score_pair(const EvalPair& pair, providers::TokenEmbedder* embedder) {
  PairScores scores;
  scores.sari = sari(pair);
  scores.bleu = bleu(pair.output, pair.references);
  scores.rouge = rouge(pair.output, pair.references);
  if (embedder != nullptr) {
    double best = -1.0;
    for (const auto& ref : pair.references) {
      best = std::max(best, bertscore(pair.output, ref, *embedder).f1);
    }
    scores.bert_f1 = best;
  }
  return scores;
}

}  // namespace

MetricReport evaluate_corpus(const std::vector<EvalPair>& pairs,
                             providers::TokenEmbedder* embedder, int jobs) {
  if (pairs.empty()) throw EmptyCorpusError("evaluate_corpus: no pairs");
  for (const auto& pair : pairs) {
    if (pair.references.empty()) throw Error("evaluate_corpus: pair without references");
  }

  std::vector<PairScores> scores(pairs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < pairs.size(); ++i) scores[i] = score_pair(pairs[i], embedder);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= pairs.size()) return;
        try {
          scores[i] = score_pair(pairs[i], embedder);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    const int n_threads = std::min<int>(jobs, static_cast<int>(pairs.size()));
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  MetricReport report;
  report.pair_count = pairs.size();
  double bert_sum = 0.0;
  bool have_bert = embedder != nullptr;
  for (const auto& s : scores) {
    report.sari += s.sari;
    report.bleu += s.bleu;
    report.rouge1_f1 += s.rouge.rouge1_f1;
    report.rouge2_f1 += s.rouge.rouge2_f1;
    report.rougeL_f1 += s.rouge.rougeL_f1;
    if (s.bert_f1) bert_sum += *s.bert_f1;
  }
  const double n = static_cast<double>(pairs.size());
  report.sari /= n;
  report.bleu /= n;
  report.rouge1_f1 /= n;
  report.rouge2_f1 /= n;
  report.rougeL_f1 /= n;
  if (have_bert) report.bertscore_f1 = bert_sum / n;

  std::string all_outputs;
  for (const auto& pair : pairs) {
    if (!all_outputs.empty()) all_outputs += ' ';
    all_outputs += pair.output;
  }
  report.fkgl = textstat::fkgl(all_outputs);
  return report;
}

}  // namespace metrics
}  // namespace simplex

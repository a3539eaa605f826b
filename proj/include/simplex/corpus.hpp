// simplex/corpus.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_CORPUS_HPP_
#define SIMPLEX_CORPUS_HPP_

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simplex/errors.hpp"
#include "simplex/metrics.hpp"
#include "simplex/rewards.hpp"

namespace simplex {
namespace corpus {

enum class Split { train, dev, test, unlabeled };

struct CorpusRecord {
  std::string id;
  std::string source;
  std::vector<std::string> references;  // may be empty only for unlabeled records
  Split split = Split::unlabeled;
  std::optional<std::string> origin;
};

struct Corpus {
  std::vector<CorpusRecord> records;
};

enum class CorpusFormat { jsonl, tsv };

// JSONL: one {"id","source","references":[...],"split","origin"?} object per
// line. TSV: id, split, source, reference columns with one reference per row,
// grouped by id. Errors carry the offending line number; duplicate ids and
// unknown splits are rejected.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

// Writes the JSONL form above, one key-sorted object per line, LF endings.
// load_corpus of the result reproduces every field.
void export_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);

struct Distribution {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct SplitStats {
  std::size_t count = 0;
  std::optional<Distribution> source_fkgl;
  std::optional<Distribution> reference_fkgl;
};

struct CorpusStats {
  std::size_t total = 0;
  std::map<Split, SplitStats> per_split;
};

// Grade-level distributions (quartiles by linear interpolation) of sources
// and references, per split.
CorpusStats corpus_stats(const Corpus& corpus);

enum class ReportFormat { json, csv };

void export_report(const metrics::MetricReport& report, ReportFormat format,
                   const std::filesystem::path& path);
void export_report(const CorpusStats& stats, ReportFormat format,
                   const std::filesystem::path& path);
void export_report(const std::vector<rewards::RewardBreakdown>& breakdowns, ReportFormat format,
                   const std::filesystem::path& path);

nlohmann::json report_to_json(const metrics::MetricReport& report);
nlohmann::json stats_to_json(const CorpusStats& stats);

// Writes via a temp file plus rename so interrupted runs never leave a
// truncated file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string to_string(Split split);
std::optional<Split> split_from_string(const std::string& name);

}  // namespace corpus
}  // namespace simplex

#endif  // SIMPLEX_CORPUS_HPP_

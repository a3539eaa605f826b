// src/corpus.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "simplex/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "simplex/textstat.hpp"

namespace simplex {
namespace corpus {

using nlohmann::json;

namespace {

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

void validate_record(const CorpusRecord& record, std::size_t line) {
  if (is_blank(record.id)) throw MissingFieldError("record id is blank (line " +
                                                   std::to_string(line) + ")");
  if (is_blank(record.source)) {
    throw MissingFieldError("record '" + record.id + "' has a blank source (line " +
                            std::to_string(line) + ")");
  }
  if (record.split != Split::unlabeled && record.references.empty()) {
    throw MissingFieldError("record '" + record.id + "' in split '" + to_string(record.split) +
                            "' has no references (line " + std::to_string(line) + ")");
  }
  for (const auto& ref : record.references) {
    if (is_blank(ref)) {
      throw MissingFieldError("record '" + record.id + "' has a blank reference (line " +
                              std::to_string(line) + ")");
    }
  }
}

Split parse_split(const std::string& name, std::size_t line) {
  const auto split = split_from_string(name);
  if (!split) {
    throw InvalidSplitError("unknown split '" + name + "' (line " + std::to_string(line) + ")");
  }
  return *split;
}

Corpus load_jsonl(std::istream& in) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> seen;  // id -> first line
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("invalid JSON object", line_no);

    CorpusRecord record;
    for (const char* field : {"id", "source", "split"}) {
      if (!j.contains(field) || !j[field].is_string()) {
        throw MissingFieldError("missing string field '" + std::string(field) + "' (line " +
                                std::to_string(line_no) + ")");
      }
    }
    record.id = j["id"].get<std::string>();
    record.source = j["source"].get<std::string>();
    record.split = parse_split(j["split"].get<std::string>(), line_no);
    if (j.contains("references")) {
      if (!j["references"].is_array()) throw ParseError("references must be an array", line_no);
      for (const auto& ref : j["references"]) {
        if (!ref.is_string()) throw ParseError("references must contain strings", line_no);
        record.references.push_back(ref.get<std::string>());
      }
    }
    if (j.contains("origin") && !j["origin"].is_null()) {
      if (!j["origin"].is_string()) throw ParseError("origin must be a string", line_no);
      record.origin = j["origin"].get<std::string>();
    }

    const auto [it, inserted] = seen.emplace(record.id, line_no);
    if (!inserted) {
      throw DuplicateIdError("duplicate id '" + record.id + "' on line " +
                             std::to_string(line_no) + " (first seen on line " +
                             std::to_string(it->second) + ")");
    }
    validate_record(record, line_no);
    corpus.records.push_back(std::move(record));
  }
  return corpus;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

Corpus load_tsv(std::istream& in) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> index;  // id -> record position
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError("expected id, split, source and an optional reference column, got " +
                           std::to_string(fields.size()) + " fields",
                       line_no);
    }
    const std::string& id = fields[0];
    const Split split = parse_split(fields[1], line_no);
    const std::string& source = fields[2];
    const std::string reference = fields.size() == 4 ? fields[3] : std::string();

    const auto it = index.find(id);
    if (it == index.end()) {
      CorpusRecord record;
      record.id = id;
      record.source = source;
      record.split = split;
      if (!reference.empty()) record.references.push_back(reference);
      index.emplace(id, corpus.records.size());
      corpus.records.push_back(std::move(record));
    } else {
      CorpusRecord& record = corpus.records[it->second];
      if (record.split != split || record.source != source) {
        throw ParseError("rows for id '" + id + "' disagree on split or source", line_no);
      }
      if (!reference.empty()) record.references.push_back(reference);
    }
  }
  std::size_t line_hint = 0;
  for (const auto& record : corpus.records) validate_record(record, ++line_hint);
  return corpus;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  return format == CorpusFormat::jsonl ? load_jsonl(in) : load_tsv(in);
}

namespace {

json record_to_json(const CorpusRecord& record) {
  json j{{"id", record.id},
         {"source", record.source},
         {"references", record.references},
         {"split", to_string(record.split)}};
  if (record.origin) j["origin"] = *record.origin;
  return j;
}

}  // namespace

void export_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const auto& record : corpus.records) {
    out += record_to_json(record).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

namespace {

Distribution distribution_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(m - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= m) return values[m - 1];
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
  };
  Distribution d;
  d.min = values.front();
  d.q1 = quantile(0.25);
  d.median = quantile(0.5);
  d.q3 = quantile(0.75);
  d.max = values.back();
  double sum = 0.0;
  for (double v : values) sum += v;
  d.mean = sum / static_cast<double>(m);
  return d;
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.records.empty()) throw EmptyCorpusError("corpus_stats: corpus is empty");
  CorpusStats stats;
  stats.total = corpus.records.size();
  std::map<Split, std::vector<double>> source_values;
  std::map<Split, std::vector<double>> reference_values;
  for (const auto& record : corpus.records) {
    ++stats.per_split[record.split].count;
    source_values[record.split].push_back(textstat::fkgl(record.source));
    for (const auto& ref : record.references) {
      reference_values[record.split].push_back(textstat::fkgl(ref));
    }
  }
  for (auto& [split, values] : source_values) {
    stats.per_split[split].source_fkgl = distribution_of(std::move(values));
  }
  for (auto& [split, values] : reference_values) {
    if (!values.empty()) stats.per_split[split].reference_fkgl = distribution_of(std::move(values));
  }
  return stats;
}

namespace {

std::string csv_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

json distribution_to_json(const Distribution& d) {
  return json{{"min", d.min},   {"q1", d.q1}, {"median", d.median},
              {"q3", d.q3},     {"max", d.max}, {"mean", d.mean}};
}

}  // namespace

nlohmann::json report_to_json(const metrics::MetricReport& report) {
  return json{
      {"sari", report.sari},
      {"bleu", report.bleu},
      {"bertscore_f1",
       report.bertscore_f1 ? json(*report.bertscore_f1) : json(nullptr)},
      {"rouge1_f1", report.rouge1_f1},
      {"rouge2_f1", report.rouge2_f1},
      {"rougeL_f1", report.rougeL_f1},
      {"fkgl", report.fkgl},
      {"pair_count", report.pair_count},
  };
}

nlohmann::json stats_to_json(const CorpusStats& stats) {
  json splits = json::object();
  for (const auto& [split, s] : stats.per_split) {
    json entry{{"count", s.count}};
    entry["source_fkgl"] = s.source_fkgl ? distribution_to_json(*s.source_fkgl) : json(nullptr);
    entry["reference_fkgl"] =
        s.reference_fkgl ? distribution_to_json(*s.reference_fkgl) : json(nullptr);
    splits[to_string(split)] = std::move(entry);
  }
  return json{{"total", stats.total}, {"splits", splits}};
}

void export_report(const metrics::MetricReport& report, ReportFormat format,
                   const std::filesystem::path& path) {
  if (format == ReportFormat::json) {
    write_file_atomic(path, report_to_json(report).dump(2) + "\n");
    return;
  }
  std::string out = "SARI,BLEU,BERTScore,ROUGE-1,ROUGE-2,ROUGE-L,FKGL,pairs\n";
  out += csv_double(report.sari) + ',' + csv_double(report.bleu) + ',';
  out += report.bertscore_f1 ? csv_double(*report.bertscore_f1) : std::string();
  out += ',' + csv_double(report.rouge1_f1) + ',' + csv_double(report.rouge2_f1) + ',' +
         csv_double(report.rougeL_f1) + ',' + csv_double(report.fkgl) + ',' +
         std::to_string(report.pair_count) + '\n';
  write_file_atomic(path, out);
}

void export_report(const CorpusStats& stats, ReportFormat format,
                   const std::filesystem::path& path) {
  if (format == ReportFormat::json) {
    write_file_atomic(path, stats_to_json(stats).dump(2) + "\n");
    return;
  }
  std::string out = "split,count,field,min,q1,median,q3,max,mean\n";
  for (const auto& [split, s] : stats.per_split) {
    auto row = [&](const char* field, const Distribution& d) {
      out += to_string(split) + ',' + std::to_string(s.count) + ',' + field + ',' +
             csv_double(d.min) + ',' + csv_double(d.q1) + ',' + csv_double(d.median) + ',' +
             csv_double(d.q3) + ',' + csv_double(d.max) + ',' + csv_double(d.mean) + '\n';
    };
    if (s.source_fkgl) row("source", *s.source_fkgl);
    if (s.reference_fkgl) row("reference", *s.reference_fkgl);
  }
  write_file_atomic(path, out);
}

void export_report(const std::vector<rewards::RewardBreakdown>& breakdowns, ReportFormat format,
                   const std::filesystem::path& path) {
  if (format == ReportFormat::json) {
    json arr = json::array();
    for (const auto& b : breakdowns) arr.push_back(rewards::breakdown_to_json(b));
    write_file_atomic(path, arr.dump(2) + "\n");
    return;
  }
  std::string out = "composite,mode,aggregate,r_fkgl,r_rel,r_ovs,fkgl_raw\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? csv_double(*v) : std::string();
  };
  for (const auto& b : breakdowns) {
    out += rewards::to_string(b.composite) + ',' + rewards::to_string(b.mode) + ',' +
           csv_double(b.aggregate) + ',' + opt(b.r_fkgl) + ',' + opt(b.r_rel) + ',' +
           opt(b.r_ovs) + ',' + opt(b.fkgl_raw) + '\n';
  }
  write_file_atomic(path, out);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write to " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move report into place at " + path.string());
  }
}

std::string to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::dev:
      return "dev";
    case Split::test:
      return "test";
    case Split::unlabeled:
      return "unlabeled";
  }
  return "unlabeled";
}

std::optional<Split> split_from_string(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "test") return Split::test;
  if (name == "unlabeled") return Split::unlabeled;
  return std::nullopt;
}

}  // namespace corpus
}  // namespace simplex

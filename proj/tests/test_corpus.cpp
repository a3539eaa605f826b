// tests/test_corpus.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "simplex/corpus.hpp"
#include "simplex/textstat.hpp"

using namespace simplex;
using namespace simplex::corpus;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("simplex-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path write_temp(const TempDir& dir, const std::string& name, const std::string& content) {
  const fs::path p = dir.path / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("load_corpus reads valid JSONL") {
  TempDir dir;
  const auto path = write_temp(
      dir, "corpus.jsonl",
      R"({"id":"a1","source":"The tumor was resected.","references":["The tumor was removed."],"split":"train"})"
      "\n"
      R"({"id":"a2","source":"Unlabeled page text.","references":[],"split":"unlabeled","origin":"acs"})"
      "\n");
  const Corpus corpus = load_corpus(path, CorpusFormat::jsonl);
  REQUIRE(corpus.records.size() == 2);
  CHECK(corpus.records[0].id == "a1");
  CHECK(corpus.records[0].split == Split::train);
  CHECK(corpus.records[0].references.size() == 1);
  CHECK(corpus.records[1].split == Split::unlabeled);
  CHECK(corpus.records[1].references.empty());
  REQUIRE(corpus.records[1].origin.has_value());
  CHECK(*corpus.records[1].origin == "acs");
}

TEST_CASE("load_corpus rejects duplicate ids with the line number") {
  TempDir dir;
  const auto path = write_temp(
      dir, "dup.jsonl",
      R"({"id":"x","source":"One sentence.","references":["One."],"split":"train"})"
      "\n"
      R"({"id":"x","source":"Two sentences.","references":["Two."],"split":"train"})"
      "\n");
  try {
    load_corpus(path, CorpusFormat::jsonl);
    FAIL("expected DuplicateIdError");
  } catch (const DuplicateIdError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }
}

TEST_CASE("load_corpus error paths") {
  TempDir dir;
  CHECK_THROWS_AS(load_corpus(dir.path / "missing.jsonl", CorpusFormat::jsonl), IoError);

  const auto bad_json = write_temp(dir, "bad.jsonl", "{not json}\n");
  CHECK_THROWS_AS(load_corpus(bad_json, CorpusFormat::jsonl), ParseError);

  const auto no_source = write_temp(dir, "nosrc.jsonl", R"({"id":"a","split":"train"})" "\n");
  CHECK_THROWS_AS(load_corpus(no_source, CorpusFormat::jsonl), MissingFieldError);

  const auto bad_split = write_temp(
      dir, "split.jsonl",
      R"({"id":"a","source":"Text here.","references":["T."],"split":"validation"})" "\n");
  CHECK_THROWS_AS(load_corpus(bad_split, CorpusFormat::jsonl), InvalidSplitError);

  // A labeled record must carry at least one reference.
  const auto no_refs = write_temp(
      dir, "norefs.jsonl", R"({"id":"a","source":"Text here.","references":[],"split":"dev"})" "\n");
  CHECK_THROWS_AS(load_corpus(no_refs, CorpusFormat::jsonl), MissingFieldError);

  // ParseError carries the line number.
  const auto multi = write_temp(
      dir, "multi.jsonl",
      R"({"id":"a","source":"Fine text.","references":["F."],"split":"train"})" "\n"
      "][\n");
  try {
    load_corpus(multi, CorpusFormat::jsonl);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("load_corpus reads TSV grouped by id") {
  TempDir dir;
  const auto path = write_temp(dir, "corpus.tsv",
                               "a1\ttrain\tThe tumor was resected.\tThe tumor was removed.\n"
                               "a1\ttrain\tThe tumor was resected.\tDoctors removed the tumor.\n"
                               "u1\tunlabeled\tSome page text.\n");
  const Corpus corpus = load_corpus(path, CorpusFormat::tsv);
  REQUIRE(corpus.records.size() == 2);
  CHECK(corpus.records[0].references.size() == 2);
  CHECK(corpus.records[0].references[1] == "Doctors removed the tumor.");
  CHECK(corpus.records[1].split == Split::unlabeled);
}

TEST_CASE("load_corpus TSV error paths") {
  TempDir dir;
  const auto one_col = write_temp(dir, "one.tsv", "justonefield\n");
  CHECK_THROWS_AS(load_corpus(one_col, CorpusFormat::tsv), ParseError);

  const auto conflict = write_temp(dir, "conflict.tsv",
                                   "a\ttrain\tText one.\tRef one.\n"
                                   "a\tdev\tText one.\tRef two.\n");
  CHECK_THROWS_AS(load_corpus(conflict, CorpusFormat::tsv), ParseError);
}

TEST_CASE("corpus round-trips through JSONL export") {
  TempDir dir;
  Corpus corpus;
  corpus.records.push_back({"r1", "Na\xC3\xAFve patients ask about the c\xC5\x93liac exam.",
                            {"People ask about the gut exam."},
                            Split::train,
                            "nci"});
  corpus.records.push_back({"r2", "Plain text.", {}, Split::unlabeled, std::nullopt});
  corpus.records.push_back(
      {"r3", "The scan was clear.", {"Scan clear.", "All clear."}, Split::test, "cdc"});

  const auto path = dir.path / "out.jsonl";
  export_corpus_jsonl(corpus, path);
  const Corpus back = load_corpus(path, CorpusFormat::jsonl);
  REQUIRE(back.records.size() == corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    CHECK(back.records[i].id == corpus.records[i].id);
    CHECK(back.records[i].source == corpus.records[i].source);
    CHECK(back.records[i].references == corpus.records[i].references);
    CHECK(back.records[i].split == corpus.records[i].split);
    CHECK(back.records[i].origin == corpus.records[i].origin);
  }

  // Identical inputs produce identical bytes.
  const auto again = dir.path / "out2.jsonl";
  export_corpus_jsonl(corpus, again);
  CHECK(slurp(path) == slurp(again));
}

TEST_CASE("corpus_stats on a single record collapses the distribution") {
  Corpus corpus;
  corpus.records.push_back({"only", "The cat sat on the mat.", {}, Split::unlabeled, {}});
  const CorpusStats stats = corpus_stats(corpus);
  CHECK(stats.total == 1);
  const auto& s = stats.per_split.at(Split::unlabeled);
  REQUIRE(s.source_fkgl.has_value());
  const double v = textstat::fkgl("The cat sat on the mat.");
  CHECK(s.source_fkgl->min == v);
  CHECK(s.source_fkgl->median == v);
  CHECK(s.source_fkgl->max == v);
  CHECK(s.source_fkgl->mean == v);
  CHECK_FALSE(s.reference_fkgl.has_value());
}

TEST_CASE("corpus_stats quartiles use linear interpolation") {
  Corpus corpus;
  const std::vector<std::string> sources = {
      "The cat sat on the mat.",
      "Doctors study patient records carefully every day.",
      "The radiological examination procedure requires considerable expertise.",
      "Go now.",
  };
  for (std::size_t i = 0; i < sources.size(); ++i) {
    corpus.records.push_back(
        {"r" + std::to_string(i), sources[i], {}, Split::unlabeled, {}});
  }
  const CorpusStats stats = corpus_stats(corpus);
  std::vector<double> values;
  for (const auto& s : sources) values.push_back(textstat::fkgl(s));
  std::sort(values.begin(), values.end());
  const auto& d = *stats.per_split.at(Split::unlabeled).source_fkgl;
  CHECK(d.min == values[0]);
  CHECK(d.max == values[3]);
  CHECK(d.median == values[1] + 0.5 * (values[2] - values[1]));
  CHECK(d.q1 == values[0] + 0.75 * (values[1] - values[0]));
  CHECK(d.q3 == values[2] + 0.25 * (values[3] - values[2]));
  CHECK(d.mean ==
        doctest::Approx((values[0] + values[1] + values[2] + values[3]) / 4.0).epsilon(1e-12));
  CHECK(d.q1 <= d.median);
  CHECK(d.median <= d.q3);
}

TEST_CASE("corpus_stats counts partition by split and ignore order") {
  Corpus corpus;
  corpus.records.push_back({"t1", "Train text one.", {"Ref."}, Split::train, {}});
  corpus.records.push_back({"t2", "Train text two.", {"Ref."}, Split::train, {}});
  corpus.records.push_back({"d1", "Dev text here.", {"Ref."}, Split::dev, {}});
  corpus.records.push_back({"u1", "Unlabeled text here.", {}, Split::unlabeled, {}});
  const CorpusStats stats = corpus_stats(corpus);
  CHECK(stats.per_split.at(Split::train).count == 2);
  CHECK(stats.per_split.at(Split::dev).count == 1);
  CHECK(stats.per_split.at(Split::unlabeled).count == 1);
  CHECK(stats.total == 4);

  Corpus shuffled = corpus;
  std::reverse(shuffled.records.begin(), shuffled.records.end());
  const CorpusStats stats2 = corpus_stats(shuffled);
  CHECK(stats2.per_split.at(Split::train).source_fkgl->median ==
        stats.per_split.at(Split::train).source_fkgl->median);
  CHECK(stats2.per_split.at(Split::train).source_fkgl->mean ==
        stats.per_split.at(Split::train).source_fkgl->mean);

  CHECK_THROWS_AS(corpus_stats(Corpus{}), EmptyCorpusError);
}

TEST_CASE("metric report exports to the documented CSV schema") {
  TempDir dir;
  metrics::MetricReport report;
  report.sari = 73.5;
  report.bleu = 0.71;
  report.bertscore_f1 = 0.97;
  report.rouge1_f1 = 0.86;
  report.rouge2_f1 = 0.8;
  report.rougeL_f1 = 0.85;
  report.fkgl = 7.85;
  report.pair_count = 3;

  const auto csv_path = dir.path / "report.csv";
  export_report(report, ReportFormat::csv, csv_path);
  const std::string csv = slurp(csv_path);
  CHECK(csv.rfind("SARI,BLEU,BERTScore,ROUGE-1,ROUGE-2,ROUGE-L,FKGL,pairs\n", 0) == 0);
  CHECK(csv.find("73.5") != std::string::npos);
  CHECK(csv.back() == '\n');

  // Determinism: same input, identical bytes.
  const auto csv2 = dir.path / "report2.csv";
  export_report(report, ReportFormat::csv, csv2);
  CHECK(slurp(csv_path) == slurp(csv2));

  const auto json_path = dir.path / "report.json";
  export_report(report, ReportFormat::json, json_path);
  const auto j = nlohmann::json::parse(slurp(json_path));
  CHECK(j["sari"] == 73.5);
  CHECK(j["pair_count"] == 3);

  // Missing BERTScore leaves an empty CSV cell and a JSON null.
  report.bertscore_f1.reset();
  const auto no_bert = dir.path / "nobert.csv";
  export_report(report, ReportFormat::csv, no_bert);
  CHECK(slurp(no_bert).find(",,") != std::string::npos);  // empty BERTScore cell
  export_report(report, ReportFormat::json, json_path);
  CHECK(nlohmann::json::parse(slurp(json_path))["bertscore_f1"].is_null());
}

TEST_CASE("reward breakdowns export to CSV and JSON") {
  TempDir dir;
  rewards::RewardBreakdown b;
  b.r_fkgl = 0.5;
  b.aggregate = 0.5;
  b.fkgl_raw = 6.5;
  b.composite = rewards::Composite::fkgl_only;
  const auto path = dir.path / "rewards.csv";
  export_report(std::vector<rewards::RewardBreakdown>{b}, ReportFormat::csv, path);
  const std::string csv = slurp(path);
  CHECK(csv.rfind("composite,mode,aggregate,r_fkgl,r_rel,r_ovs,fkgl_raw\n", 0) == 0);
  CHECK(csv.find("fkgl_only,paper_sum_reciprocal,0.5,0.5,,,6.5") != std::string::npos);

  const auto jpath = dir.path / "rewards.json";
  export_report(std::vector<rewards::RewardBreakdown>{b}, ReportFormat::json, jpath);
  const auto j = nlohmann::json::parse(slurp(jpath));
  REQUIRE(j.is_array());
  CHECK(j[0]["aggregate"] == 0.5);
  CHECK(j[0]["r_rel"].is_null());
}

TEST_CASE("stats export renders both formats") {
  TempDir dir;
  Corpus corpus;
  corpus.records.push_back({"t1", "Train text one.", {"Ref text."}, Split::train, {}});
  corpus.records.push_back({"u1", "Unlabeled text here.", {}, Split::unlabeled, {}});
  const CorpusStats stats = corpus_stats(corpus);

  const auto jpath = dir.path / "stats.json";
  export_report(stats, ReportFormat::json, jpath);
  const auto j = nlohmann::json::parse(slurp(jpath));
  CHECK(j["total"] == 2);
  CHECK(j["splits"]["train"]["count"] == 1);
  CHECK(j["splits"]["unlabeled"]["reference_fkgl"].is_null());

  const auto cpath = dir.path / "stats.csv";
  export_report(stats, ReportFormat::csv, cpath);
  CHECK(slurp(cpath).rfind("split,count,field,min,q1,median,q3,max,mean\n", 0) == 0);
}

TEST_CASE("unwritable path raises IoError") {
  metrics::MetricReport report;
  report.pair_count = 1;
  CHECK_THROWS_AS(
      export_report(report, ReportFormat::json, "/nonexistent-dir/report.json"), IoError);
}

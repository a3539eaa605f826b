// simplex/textstat.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_TEXTSTAT_HPP_
#define SIMPLEX_TEXTSTAT_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "simplex/errors.hpp"

namespace simplex {
namespace textstat {

// Tokenized view of a text together with the counts grade-level scoring needs.
// long_words holds every word with >= 3 syllables in document order, duplicates kept.
struct TextStats {
  std::size_t sentence_count = 0;
  std::size_t word_count = 0;
  std::size_t syllable_count = 0;
  double avg_word_length_chars = 0.0;  // mean code points per word
  double avg_sentence_length_words = 0.0;
  std::vector<std::string> long_words;
};

// Rule-based sentence segmentation. Terminators are . ! ? and the ellipsis,
// with a fixed abbreviation exception list (Dr., Mr., Mrs., e.g., i.e., etc., vs.)
// and no split inside decimal numbers. Throws EmptyTextError for blank input.
std::vector<std::string> split_sentences(const std::string& text);

// Word tokens are maximal runs of alphabetic characters plus internal
// apostrophes and hyphens. Punctuation and digits are excluded. Case preserved.
std::vector<std::string> tokenize_words(const std::string& text);

// Heuristic syllable count: number of contiguous vowel groups (a e i o u y,
// case-insensitive), minus one for a terminal silent "e" unless the word ends
// in "le" preceded by a consonant, floored at 1. Words without any vowel from
// that set (including non-Latin scripts) count as 1.
// Throws NotAWordError for tokens with no alphabetic character.
std::size_t count_syllables(const std::string& word);

// Flesch-Kincaid grade level of a text:
//   0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59
// May be negative; unbounded above. Throws EmptyTextError when no words found.
double fkgl(const std::string& text);

// Same formula applied to raw counts.
double fkgl_from_counts(std::size_t sentences, std::size_t words, std::size_t syllables);

// Full per-sample statistics (word/sentence averages plus the long-word list).
TextStats cot_stats(const std::string& text);

// Code-point lowercasing for ASCII and the Latin-1 letters. Everything else
// passes through. Shared by the metric tokenization.
std::string lowercase(const std::string& text);

}  // namespace textstat
}  // namespace simplex

#endif  // SIMPLEX_TEXTSTAT_HPP_

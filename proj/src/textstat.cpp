// src/textstat.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "simplex/textstat.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_set>

namespace simplex {
namespace textstat {

namespace {

// ---------------------------------------------------------------------------
// Minimal UTF-8 handling. Invalid bytes decode to U+FFFD so a malformed input
// never crashes the counters.
// ---------------------------------------------------------------------------

std::vector<char32_t> decode_utf8(const std::string& s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + len > n) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(s[i + k]);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(const std::vector<char32_t>& cps, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) append_utf8(out, cps[i]);
  return out;
}

// Canonical composition for the Latin-1 precomposed letters. Full NFC needs
// the Unicode database; the Latin set covers the accents that occur in this
// domain's text and keeps the counters stable across encoder choices.
char32_t compose_latin(char32_t base, char32_t mark) {
  struct Entry {
    char base;
    char32_t mark;
    char32_t composed;
  };
  static constexpr std::array<Entry, 33> kTable = {{
      {'A', 0x300, 0xC0}, {'A', 0x301, 0xC1}, {'A', 0x302, 0xC2}, {'A', 0x303, 0xC3},
      {'A', 0x308, 0xC4}, {'A', 0x30A, 0xC5}, {'C', 0x327, 0xC7}, {'E', 0x300, 0xC8},
      {'E', 0x301, 0xC9}, {'E', 0x302, 0xCA}, {'E', 0x308, 0xCB}, {'I', 0x300, 0xCC},
      {'I', 0x301, 0xCD}, {'I', 0x302, 0xCE}, {'I', 0x308, 0xCF}, {'N', 0x303, 0xD1},
      {'O', 0x300, 0xD2}, {'O', 0x301, 0xD3}, {'O', 0x302, 0xD4}, {'O', 0x303, 0xD5},
      {'O', 0x308, 0xD6}, {'U', 0x300, 0xD9}, {'U', 0x301, 0xDA}, {'U', 0x302, 0xDB},
      {'U', 0x308, 0xDC}, {'Y', 0x301, 0xDD}, {'a', 0x30A, 0xE5}, {'c', 0x327, 0xE7},
      {'n', 0x303, 0xF1}, {'y', 0x301, 0xFD}, {'y', 0x308, 0xFF}, {'o', 0x303, 0xF5},
      {'u', 0x308, 0xFC},
  }};
  // Lowercase vowels with grave/acute/circumflex/diaeresis follow the
  // uppercase layout at +0x20.
  if (base >= 'a' && base <= 'z') {
    const char32_t upper = compose_latin(base - 0x20, mark);
    if (upper != 0 && upper >= 0xC0 && upper <= 0xDD) return upper + 0x20;
  }
  for (const auto& e : kTable) {
    if (static_cast<char32_t>(e.base) == base && e.mark == mark) return e.composed;
  }
  return 0;
}

std::vector<char32_t> normalize(const std::string& text) {
  std::vector<char32_t> cps = decode_utf8(text);
  std::vector<char32_t> out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (cp >= 0x300 && cp <= 0x36F && !out.empty()) {
      const char32_t composed = compose_latin(out.back(), cp);
      if (composed != 0) {
        out.back() = composed;
        continue;
      }
    }
    out.push_back(cp);
  }
  return out;
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0xA0;
}

bool is_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_combining(char32_t cp) { return cp >= 0x300 && cp <= 0x36F; }

bool is_letter(char32_t cp) {
  if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return true;
  if (cp < 0xC0) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;              // multiplication/division signs
  if (is_combining(cp)) return false;                      // joined separately
  if (cp >= 0x2000 && cp <= 0x206F) return false;          // general punctuation
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;          // supplemental punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return false;          // CJK symbols and punctuation
  if (cp == 0xFFFD) return false;
  return true;
}

bool is_word_joiner(char32_t cp) {
  return cp == '\'' || cp == 0x2019 || cp == '-' || cp == 0x2010;
}

char32_t lower_cp(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

bool is_vowel(char32_t cp) {
  const char32_t c = lower_cp(cp);
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool is_terminator(char32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026;
}

bool is_closing(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == 0x201D || cp == 0x2019 || cp == ')' || cp == ']' ||
         cp == '}';
}

// True when the period at index i closes one of the fixed abbreviations.
bool is_abbreviation_period(const std::vector<char32_t>& cps, std::size_t i) {
  static const std::unordered_set<std::string> kAbbrev = {
      "dr.", "mr.", "mrs.", "e.g.", "i.e.", "etc.", "vs.",
  };
  std::string token;
  std::size_t start = i;
  while (start > 0) {
    const char32_t prev = cps[start - 1];
    if (is_letter(prev) || prev == '.') {
      --start;
    } else {
      break;
    }
    if (i - start > 8) return false;  // abbreviations in the list are short
  }
  for (std::size_t k = start; k <= i; ++k) append_utf8(token, lower_cp(cps[k]));
  return kAbbrev.count(token) > 0;
}

std::vector<std::string> tokenize_cps(const std::vector<char32_t>& cps) {
  std::vector<std::string> tokens;
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_letter(cps[i])) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    std::size_t end = i + 1;
    while (end < n) {
      const char32_t cp = cps[end];
      if (is_letter(cp) || is_combining(cp)) {
        ++end;
      } else if (is_word_joiner(cp) && end + 1 < n && is_letter(cps[end + 1])) {
        end += 2;
      } else {
        break;
      }
    }
    tokens.push_back(encode_utf8(cps, begin, end));
    i = end;
  }
  return tokens;
}

std::size_t count_syllables_cps(const std::vector<char32_t>& cps) {
  std::size_t groups = 0;
  bool prev_vowel = false;
  for (char32_t cp : cps) {
    const bool v = is_vowel(cp);
    if (v && !prev_vowel) ++groups;
    prev_vowel = v;
  }
  const std::size_t n = cps.size();
  if (n >= 2 && lower_cp(cps[n - 1]) == 'e') {
    const bool le_exception = n >= 3 && lower_cp(cps[n - 2]) == 'l' && is_letter(cps[n - 3]) &&
                              !is_vowel(cps[n - 3]);
    if (!le_exception && groups > 0) --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

bool is_blank(const std::vector<char32_t>& cps) {
  return std::all_of(cps.begin(), cps.end(), [](char32_t cp) { return is_space(cp); });
}

}  // namespace

std::vector<std::string> split_sentences(const std::string& text) {
  const std::vector<char32_t> cps = normalize(text);
  if (is_blank(cps)) throw EmptyTextError("split_sentences: input is blank");

  std::vector<std::string> sentences;
  const std::size_t n = cps.size();
  std::size_t seg_begin = 0;

  auto flush = [&](std::size_t end_exclusive) {
    std::size_t b = seg_begin;
    std::size_t e = end_exclusive;
    while (b < e && is_space(cps[b])) ++b;
    while (e > b && is_space(cps[e - 1])) --e;
    if (b < e) sentences.push_back(encode_utf8(cps, b, e));
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (!is_terminator(cps[i])) continue;
    if (cps[i] == '.') {
      if (i > 0 && i + 1 < n && is_digit(cps[i - 1]) && is_digit(cps[i + 1])) continue;
      if (is_abbreviation_period(cps, i)) continue;
    }
    std::size_t j = i;
    while (j + 1 < n && is_terminator(cps[j + 1])) ++j;
    std::size_t k = j;
    while (k + 1 < n && is_closing(cps[k + 1])) ++k;
    if (k + 1 >= n || is_space(cps[k + 1])) {
      flush(k + 1);
      seg_begin = k + 1;
    }
    i = k;
  }
  flush(n);
  return sentences;
}

std::vector<std::string> tokenize_words(const std::string& text) {
  return tokenize_cps(normalize(text));
}

std::size_t count_syllables(const std::string& word) {
  const std::vector<char32_t> cps = normalize(word);
  if (std::none_of(cps.begin(), cps.end(), [](char32_t cp) { return is_letter(cp); })) {
    throw NotAWordError("count_syllables: token has no alphabetic character");
  }
  return count_syllables_cps(cps);
}

double fkgl_from_counts(std::size_t sentences, std::size_t words, std::size_t syllables) {
  return 0.39 * (static_cast<double>(words) / static_cast<double>(sentences)) +
         11.8 * (static_cast<double>(syllables) / static_cast<double>(words)) - 15.59;
}

double fkgl(const std::string& text) {
  const std::vector<std::string> sentences = split_sentences(text);
  const std::vector<std::string> words = tokenize_words(text);
  if (words.empty()) throw EmptyTextError("fkgl: no words found");
  std::size_t syllables = 0;
  for (const auto& w : words) syllables += count_syllables(w);
  return fkgl_from_counts(sentences.size(), words.size(), syllables);
}

TextStats cot_stats(const std::string& text) {
  const std::vector<std::string> sentences = split_sentences(text);
  const std::vector<std::string> words = tokenize_words(text);
  if (words.empty()) throw EmptyTextError("cot_stats: no words found");

  TextStats stats;
  stats.sentence_count = sentences.size();
  stats.word_count = words.size();

  std::size_t total_chars = 0;
  for (const auto& w : words) {
    const std::vector<char32_t> cps = decode_utf8(w);
    total_chars += cps.size();
    const std::size_t syl = count_syllables_cps(cps);
    stats.syllable_count += syl;
    if (syl >= 3) stats.long_words.push_back(w);
  }
  stats.avg_word_length_chars =
      static_cast<double>(total_chars) / static_cast<double>(stats.word_count);
  stats.avg_sentence_length_words =
      static_cast<double>(stats.word_count) / static_cast<double>(stats.sentence_count);
  return stats;
}

std::string lowercase(const std::string& text) {
  const std::vector<char32_t> cps = decode_utf8(text);
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : cps) append_utf8(out, lower_cp(cp));
  return out;
}

}  // namespace textstat
}  // namespace simplex

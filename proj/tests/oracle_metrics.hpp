// tests/oracle_metrics.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_TESTS_ORACLE_METRICS_HPP_
#define SIMPLEX_TESTS_ORACLE_METRICS_HPP_

#include <string>
#include <vector>

// Brute-force reference implementations of the n-gram metrics, written before
// and independently of the library versions. Everything works on explicit
// n-gram lists with linear scans; no shared code with src/.
namespace oracle {

using Tokens = std::vector<std::string>;

double sari(const Tokens& source, const Tokens& output, const std::vector<Tokens>& references,
            int max_n = 4);

double bleu(const Tokens& output, const std::vector<Tokens>& references, int max_n = 4);

}  // namespace oracle

#endif  // SIMPLEX_TESTS_ORACLE_METRICS_HPP_

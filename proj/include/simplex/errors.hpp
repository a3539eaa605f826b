// simplex/errors.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SIMPLEX_ERRORS_HPP_
#define SIMPLEX_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simplex {

// Base class for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- text analysis ---
class EmptyTextError : public Error {
 public:
  using Error::Error;
};

class NotAWordError : public Error {
 public:
  using Error::Error;
};

// --- metrics ---
class InvalidNError : public Error {
 public:
  using Error::Error;
};

class EmptyOutputError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

// --- rewards ---
class NonPositiveInputError : public Error {
 public:
  using Error::Error;
};

class InvalidProbabilityError : public Error {
 public:
  using Error::Error;
};

class MissingProviderError : public Error {
 public:
  using Error::Error;
};

class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

// --- providers ---
class ProviderError : public Error {
 public:
  using Error::Error;
};

class AuthError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class RateLimitedError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class MalformedResponseError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// --- prompting ---
class MissingExemplarsError : public Error {
 public:
  using Error::Error;
};

// --- corpus files ---
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
};

class MissingFieldError : public Error {
 public:
  using Error::Error;
};

class InvalidSplitError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace simplex

#endif  // SIMPLEX_ERRORS_HPP_

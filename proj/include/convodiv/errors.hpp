#pragma once

#include <stdexcept>
#include <string>

namespace convodiv {

// Error taxonomy shared across the library. The CLI maps these onto
// distinct exit codes (validation/parameter -> 1, eligibility -> 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (bad JSON, wrong types); message carries line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a corpus invariant
// (duplicate order_index, empty message list, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Caller passed an out-of-contract argument.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The requested analysis cell does not meet its data requirements
// (too few conversations, ratings, peers, ...).
class EligibilityError : public Error {
 public:
  using Error::Error;
};

// A sampling budget exceeds the available data.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Lookup of a token/word that was never observed.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace convodiv

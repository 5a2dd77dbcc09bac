#pragma once

#include <stdexcept>
#include <string>

namespace wdmdiff {

// Exit-code mapping used by the CLI:
//   ConfigError -> 1, NumericError -> 2, IoError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed or inconsistent configuration, geometry mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, divergence, violated numeric invariants.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wdmdiff

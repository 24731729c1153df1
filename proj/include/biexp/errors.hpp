#pragma once

#include <stdexcept>
#include <string>

namespace biexp {

// Invalid input: parameters outside their domain, malformed grids, bad indices.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Floating-point failure: underflowed spacings, failed factorizations.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The likelihood could not be minimised (degenerate data, no finite values).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace biexp

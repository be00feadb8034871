#pragma once

#include <stdexcept>
#include <string>

namespace moero {

/// Array shapes that do not agree (coil count, image size, mask height, feature width).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called in a state that does not satisfy its precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input data that breaks a type contract (e.g. a codeword index >= K).
class ContractViolation : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Metric reference that makes the metric undefined (all-zero image, zero dynamic range).
class DegenerateReference : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or unreadable file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace moero

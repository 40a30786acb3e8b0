#pragma once

#include <stdexcept>

namespace wavecone {

/// Malformed or out-of-range input supplied by the caller.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Valid input that a routine does not handle (e.g. a Grassmannian grid for
/// an unsupported (l, d) pair).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wavecone

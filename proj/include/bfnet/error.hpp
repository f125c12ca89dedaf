#pragma once

#include <stdexcept>
#include <string>

namespace bfnet {

/// Precondition violated by a caller-supplied argument.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The low-rank error bound only holds for gamma < 1.
struct BoundInapplicable : std::domain_error {
  using std::domain_error::domain_error;
};

/// An operation was called on an object that is not in the required state.
struct InvalidState : std::logic_error {
  using std::logic_error::logic_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A request that would exceed the supported memory/compute envelope.
struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bfnet

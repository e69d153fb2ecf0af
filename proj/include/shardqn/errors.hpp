#pragma once

#include <stdexcept>
#include <string>

namespace shardqn {

// Error taxonomy shared by all modules. Everything derives from Error so
// callers can catch the whole family at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input parameters violate a documented precondition.
struct InvalidParams : Error {
  using Error::Error;
};

// Requested arrival rate is at or above the stability boundary.
struct UnstableInput : Error {
  using Error::Error;
};

// An iterative solver failed to converge or to bracket a root.
struct NonConvergence : Error {
  using Error::Error;
};

// Checked integer arithmetic overflowed.
struct OverflowError : Error {
  using Error::Error;
};

// Enumeration guard exceeded (state space too large to enumerate).
struct GuardViolation : Error {
  using Error::Error;
};

// Truncated Markov chain has no unique stationary distribution.
struct SingularChain : Error {
  using Error::Error;
};

// Boundary tail mass too large for the requested verification.
struct TruncationTooSmall : Error {
  using Error::Error;
};

// Tandem traffic equations imply a load >= 1 on some queue.
struct UnstableTandem : Error {
  using Error::Error;
};

// Experiment configuration file is malformed.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace shardqn

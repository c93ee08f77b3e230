#pragma once

#include <stdexcept>
#include <string>

namespace kron {

// Raised on malformed or out-of-contract input (bad JSON, wrong shapes,
// requests beyond supported sizes). Maps to CLI exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an internal postcondition fails; indicates a bug, never bad
// input. Maps to CLI exit code 3.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a supplied certificate fails verification against the data it
// claims to witness. Maps to CLI exit code 4.
struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_input(bool ok, const std::string& msg) {
  if (!ok) throw InputError(msg);
}

inline void require_invariant(bool ok, const std::string& msg) {
  if (!ok) throw InvariantError(msg);
}

inline void require_cert(bool ok, const std::string& msg) {
  if (!ok) throw CertificateError(msg);
}

}  // namespace kron

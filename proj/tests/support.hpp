#pragma once

// Shared helpers for the test suites: small deterministic generators and
// brute-force reference oracles that are independent of the library's own
// search strategies.

#include <cstdint>
#include <optional>
#include <vector>

#include "kron/fields.hpp"
#include "kron/matrices.hpp"

namespace kron::testing {

// All matrices of shape r x c over a finite field, enumeration order.
inline std::vector<Matrix> all_matrices(const FieldPtr& f, std::size_t r,
                                        std::size_t c) {
  std::uint64_t q = f->cardinality().value();
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < r * c; ++k) total *= q;
  std::vector<Matrix> out;
  out.reserve(total);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    Matrix m(f, r, c);
    std::uint64_t rest = idx;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        m.at(i, j) = element_at(f, rest % q);
        rest /= q;
      }
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<Matrix> all_invertible(const FieldPtr& f, std::size_t n) {
  std::vector<Matrix> out;
  for (auto& m : all_matrices(f, n, n))
    if (!det(m).is_zero()) out.push_back(std::move(m));
  return out;
}

// Reference similarity decision by full GL_n scan.
inline std::optional<Matrix> brute_similar(const std::vector<Matrix>& A,
                                           const std::vector<Matrix>& B,
                                           const FieldPtr& f, std::size_t n) {
  for (const auto& S : all_invertible(f, n)) {
    bool ok = true;
    for (std::size_t i = 0; i < A.size() && ok; ++i)
      ok = (S * A[i] == B[i] * S);
    if (ok) return S;
  }
  return std::nullopt;
}

// Reference equivalence decision by full GL_n x GL_p scan.
inline bool brute_equivalent(const std::vector<Matrix>& A,
                             const std::vector<Matrix>& B, const FieldPtr& f,
                             std::size_t n, std::size_t p) {
  auto gl_n = all_invertible(f, n);
  auto gl_p = all_invertible(f, p);
  for (const auto& P : gl_n)
    for (const auto& Q : gl_p) {
      bool ok = true;
      for (std::size_t i = 0; i < A.size() && ok; ++i)
        ok = (P * A[i] * Q == B[i]);
      if (ok) return true;
    }
  return false;
}

}  // namespace kron::testing

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kron/matrices.hpp"

namespace kron {

// A labelled list of matrices sharing one shape and one field. Similarity
// works on square families; equivalence allows rows != cols.
struct MatrixFamily {
  FieldPtr field;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::string> labels;
  std::vector<Matrix> mats;
};

inline MatrixFamily make_family(FieldPtr field, std::size_t rows,
                                std::size_t cols,
                                std::vector<std::string> labels,
                                std::vector<Matrix> mats) {
  require_input(labels.size() == mats.size(),
                "family needs exactly one label per matrix");
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      require_input(labels[i] != labels[j], "family labels must be unique");
  for (const Matrix& m : mats) {
    require_input(same_field(m.field(), field),
                  "family matrices must live over the family field");
    require_input(m.rows() == rows && m.cols() == cols,
                  "family matrices must share one shape");
  }
  return MatrixFamily{std::move(field), rows, cols, std::move(labels),
                      std::move(mats)};
}

inline bool same_family_shape(const MatrixFamily& a, const MatrixFamily& b) {
  return same_field(a.field, b.field) && a.labels == b.labels &&
         a.rows == b.rows && a.cols == b.cols;
}

inline bool families_identical(const MatrixFamily& a, const MatrixFamily& b) {
  if (!same_family_shape(a, b)) return false;
  for (std::size_t i = 0; i < a.mats.size(); ++i)
    if (!(a.mats[i] == b.mats[i])) return false;
  return true;
}

// Entrywise constant lift of a family into an extension of its field.
inline MatrixFamily lift_family(const MatrixFamily& fam,
                                const FieldPtr& super) {
  if (same_field(fam.field, super)) return fam;
  std::vector<Matrix> mats;
  mats.reserve(fam.mats.size());
  for (const Matrix& m : fam.mats) mats.push_back(lift_matrix(m, super));
  return MatrixFamily{super, fam.rows, fam.cols, fam.labels, std::move(mats)};
}

// Entrywise image of a family under a field homomorphism.
inline MatrixFamily map_family(const MatrixFamily& fam, const Embedding& emb) {
  std::vector<Matrix> mats;
  mats.reserve(fam.mats.size());
  for (const Matrix& m : fam.mats) mats.push_back(apply_embedding(m, emb));
  return MatrixFamily{emb.target, fam.rows, fam.cols, fam.labels,
                      std::move(mats)};
}

// Basis of the space { P : P*A_i = B_i*P for all i }.
struct IntertwinerSpace {
  std::vector<Matrix> basis;
  std::size_t dimension() const { return basis.size(); }
};

// Solves the n^2-unknown homogeneous system with P vectorised row-major;
// the basis order is the deterministic kernel-basis order.
inline IntertwinerSpace intertwiner_basis(const MatrixFamily& A,
                                          const MatrixFamily& B) {
  require_input(same_field(A.field, B.field), "families must share a field");
  require_input(A.labels == B.labels, "families must share index labels");
  require_input(A.rows == A.cols && B.rows == B.cols && A.rows == B.rows,
                "intertwiner system needs square families of one size");
  const FieldPtr& K = A.field;
  const std::size_t n = A.rows;
  const std::size_t m = A.mats.size();
  Matrix sys(K, m * n * n, n * n);
  for (std::size_t i = 0; i < m; ++i) {
    const Matrix& Ai = A.mats[i];
    const Matrix& Bi = B.mats[i];
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t row = (i * n + u) * n + v;
        for (std::size_t k = 0; k < n; ++k) {
          sys.at(row, u * n + k) = sys.at(row, u * n + k) + Ai.at(k, v);
          sys.at(row, k * n + v) = sys.at(row, k * n + v) - Bi.at(u, k);
        }
      }
  }
  Matrix ker = kernel_basis(sys);
  IntertwinerSpace out;
  out.basis.reserve(ker.cols());
  for (std::size_t j = 0; j < ker.cols(); ++j) {
    Matrix P(K, n, n);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) P.at(u, v) = ker.at(u * n + v, j);
    out.basis.push_back(std::move(P));
  }
  return out;
}

// True when enumerating every coefficient tuple of a dim-dimensional span
// over K stays within desk scale.
inline bool exhaustive_feasible(const FieldPtr& K, std::size_t dim) {
  if (!K->is_finite()) return false;
  auto card = K->cardinality();
  if (!card) return false;
  auto total = detail::checked_pow(*card, dim);
  return total && *total <= (1u << 16);
}

// Searches the span of `basis` for an invertible matrix. Tiers: exhaustive
// enumeration when |K|^dim fits desk scale (a definitive answer), otherwise
// a deterministic grid over the first min(|K|, n+1) elements per coordinate
// (complete whenever |K| >= n+1, since the determinant of a general span
// element has degree at most n in each coefficient), and {0..n} over
// infinite fields. Coefficient tuples are scanned odometer-style with the
// last coordinate moving fastest.
inline std::optional<Matrix> find_nonsingular(
    const std::vector<Matrix>& basis) {
  if (basis.empty()) return std::nullopt;
  const FieldPtr K = basis.front().field();
  const std::size_t n = basis.front().rows();
  const std::size_t dim = basis.size();
  for (const Matrix& m : basis)
    require_input(same_field(m.field(), K) && m.rows() == n && m.cols() == n,
                  "span basis must hold square matrices over one field");
  if (n == 0) return Matrix::identity(K, 0);
  std::vector<Element> sample;
  if (K->is_finite()) {
    const std::uint64_t card = *K->cardinality();
    std::uint64_t take = card;
    if (!exhaustive_feasible(K, dim))
      take = std::min<std::uint64_t>(card, n + 1);
    for (std::uint64_t i = 0; i < take; ++i)
      sample.push_back(element_at(K, i));
  } else {
    for (std::size_t i = 0; i <= n; ++i)
      sample.push_back(K->from_int(static_cast<long long>(i)));
  }
  const auto total = detail::checked_pow(sample.size(), dim);
  require_input(total && *total <= (1u << 24),
                "invertible-element search larger than the supported scale");
  std::vector<std::size_t> digit(dim, 0);
  for (std::uint64_t step = 1; step < *total; ++step) {
    for (std::size_t j = dim; j-- > 0;) {
      if (++digit[j] < sample.size()) break;
      digit[j] = 0;
    }
    Matrix cand(K, n, n);
    for (std::size_t j = 0; j < dim; ++j) {
      if (digit[j] == 0) continue;  // sample[0] is the zero scalar
      cand = cand + sample[digit[j]] * basis[j];
    }
    if (!det(cand).is_zero()) return cand;
  }
  return std::nullopt;
}

// An invertible P with P*A_i*P^-1 = B_i for all i.
struct SimilarityCertificate {
  FieldPtr field;
  Matrix P;
};

// An invertible pair (P, Q) with P*A_i*Q = B_i for all i.
struct EquivalenceCertificate {
  FieldPtr field;
  Matrix P;
  Matrix Q;
};

// Exact check of every defining equation; false on any failure, including
// shape or field mismatches.
inline bool verify_similarity(const MatrixFamily& A, const MatrixFamily& B,
                              const Matrix& P) {
  if (!same_family_shape(A, B)) return false;
  if (A.rows != A.cols) return false;
  if (!same_field(P.field(), A.field)) return false;
  if (P.rows() != A.rows || P.cols() != A.rows) return false;
  auto Pi = invert(P);
  if (!Pi) return false;
  for (std::size_t i = 0; i < A.mats.size(); ++i)
    if (!(P * A.mats[i] * *Pi == B.mats[i])) return false;
  return true;
}

inline bool verify_equivalence(const MatrixFamily& A, const MatrixFamily& B,
                               const Matrix& P, const Matrix& Q) {
  if (!same_family_shape(A, B)) return false;
  if (!same_field(P.field(), A.field) || !same_field(Q.field(), A.field))
    return false;
  if (P.rows() != A.rows || P.cols() != A.rows) return false;
  if (Q.rows() != A.cols || Q.cols() != A.cols) return false;
  if (!invert(P) || !invert(Q)) return false;
  for (std::size_t i = 0; i < A.mats.size(); ++i)
    if (!(P * A.mats[i] * Q == B.mats[i])) return false;
  return true;
}

}  // namespace kron

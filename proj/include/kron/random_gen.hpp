#pragma once

// Seeded random generators for test data: matrices, pencils, similar and
// equivalent family pairs, and base-field-similar pairs carrying a witness
// over a chosen extension. All draws come from one mt19937_64 stream via
// raw modulo reduction, so a fixed seed reproduces byte-identical output on
// every platform.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kron/intertwine.hpp"

namespace kron {

struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  // Uniform-enough draw from [0, m); m must be positive.
  std::uint64_t below(std::uint64_t m) {
    require_input(m > 0, "random draw needs a positive range");
    return eng() % m;
  }
};

inline Element random_element(Rng& rng, const FieldPtr& f) {
  if (auto card = f->cardinality()) return element_at(f, rng.below(*card));
  if (f->kind == FieldKind::Extension) {
    std::vector<Element> c;
    c.reserve(f->degree);
    for (std::size_t i = 0; i < f->degree; ++i)
      c.push_back(random_element(rng, f->base));
    return f->from_coeffs(std::move(c));
  }
  // Small integers keep exact rational arithmetic cheap.
  return f->from_int(static_cast<long long>(rng.below(7)) - 3);
}

inline Matrix random_matrix(Rng& rng, const FieldPtr& f, std::size_t rows,
                            std::size_t cols) {
  Matrix m(f, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = random_element(rng, f);
  return m;
}

inline Matrix random_invertible(Rng& rng, const FieldPtr& f, std::size_t n) {
  if (n == 0) return Matrix::identity(f, 0);
  for (int tries = 0; tries < 10000; ++tries) {
    Matrix m = random_matrix(rng, f, n, n);
    if (!det(m).is_zero()) return m;
  }
  throw InvariantError("random invertible matrix search failed to converge");
}

inline Pencil random_pencil(Rng& rng, const FieldPtr& f, std::size_t rows,
                            std::size_t cols) {
  return Pencil(random_matrix(rng, f, rows, cols),
                random_matrix(rng, f, rows, cols));
}

inline std::vector<std::string> numbered_labels(std::size_t m) {
  std::vector<std::string> out;
  out.reserve(m);
  for (std::size_t i = 1; i <= m; ++i) out.push_back("m" + std::to_string(i));
  return out;
}

inline MatrixFamily random_family(Rng& rng, const FieldPtr& f, std::size_t m,
                                  std::size_t rows, std::size_t cols) {
  std::vector<Matrix> mats;
  mats.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
    mats.push_back(random_matrix(rng, f, rows, cols));
  return make_family(f, rows, cols, numbered_labels(m), std::move(mats));
}

struct SimilarPair {
  MatrixFamily A;
  MatrixFamily B;
  Matrix S;  // B_i = S * A_i * S^-1
};

inline SimilarPair random_similar_pair(Rng& rng, const FieldPtr& f,
                                       std::size_t m, std::size_t n) {
  MatrixFamily A = random_family(rng, f, m, n, n);
  Matrix S = random_invertible(rng, f, n);
  Matrix Si = invert(S).value();
  std::vector<Matrix> bs;
  bs.reserve(m);
  for (const auto& Ai : A.mats) bs.push_back(S * Ai * Si);
  MatrixFamily B = make_family(f, n, n, A.labels, std::move(bs));
  return {std::move(A), std::move(B), std::move(S)};
}

struct EquivalentPair {
  MatrixFamily A;
  MatrixFamily B;
  Matrix P;  // B_i = P * A_i * Q
  Matrix Q;
};

inline EquivalentPair random_equivalent_pair(Rng& rng, const FieldPtr& f,
                                             std::size_t m, std::size_t n,
                                             std::size_t p) {
  MatrixFamily A = random_family(rng, f, m, n, p);
  Matrix P = random_invertible(rng, f, n);
  Matrix Q = random_invertible(rng, f, p);
  std::vector<Matrix> bs;
  bs.reserve(m);
  for (const auto& Ai : A.mats) bs.push_back(P * Ai * Q);
  MatrixFamily B = make_family(f, n, p, A.labels, std::move(bs));
  return {std::move(A), std::move(B), std::move(P), std::move(Q)};
}

struct CertifiedInstance {
  MatrixFamily A;  // over the base field
  MatrixFamily B;  // B_i = S * A_i * S^-1 for some base-field S
  Matrix P;        // witness over ext: P * A_i * P^-1 = B_i
  FieldPtr ext;
};

// Builds a base-field-similar pair whose shipped witness lives over ext.
// P = lift(S) * Z with Z an invertible ext-combination of the lifted
// commutant basis of A, so conjugation by P still maps A onto B.
inline CertifiedInstance random_certified_instance(Rng& rng,
                                                   const FieldPtr& base,
                                                   const FieldPtr& ext,
                                                   std::size_t m,
                                                   std::size_t n) {
  require_input(is_subtower(base, ext),
                "witness field must be a tower over the base field");
  SimilarPair sp = random_similar_pair(rng, base, m, n);
  IntertwinerSpace comm = intertwiner_basis(sp.A, sp.A);
  std::vector<Matrix> lifted;
  lifted.reserve(comm.basis.size());
  for (const auto& C : comm.basis) lifted.push_back(lift_matrix(C, ext));
  Matrix Z = Matrix::identity(ext, n);
  for (int tries = 0; tries < 200; ++tries) {
    Matrix cand(ext, n, n);
    for (const auto& C : lifted) {
      Element a = random_element(rng, ext);
      if (a.is_zero()) continue;
      cand = cand + a * C;
    }
    if (n == 0 || !det(cand).is_zero()) {
      Z = std::move(cand);
      break;
    }
  }
  Matrix P = lift_matrix(sp.S, ext) * Z;
  return {std::move(sp.A), std::move(sp.B), std::move(P), ext};
}

}  // namespace kron

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kron/descent.hpp"

namespace kron {

// Reserved index label for the marker idempotent; parsers keep user labels
// out of the '~' namespace so it can never collide.
inline constexpr const char* kEquivMarkerLabel = "~a";

// Simultaneous equivalence of n x p families restated as simultaneous
// similarity of (n+p) x (n+p) families: every A_i sits in the upper right
// corner and one shared marker diag(I_n, 0) pins the block structure.
struct BridgedPair {
  MatrixFamily C;
  MatrixFamily D;
  std::size_t n = 0;
  std::size_t p = 0;
};

inline BridgedPair embed_equiv_as_sim(const MatrixFamily& A,
                                      const MatrixFamily& B) {
  require_input(same_family_shape(A, B),
                "equivalence needs families of one shape, field and label "
                "set");
  for (const std::string& l : A.labels)
    require_input(l.empty() || l[0] != '~',
                  "family labels may not use the reserved '~' prefix");
  const FieldPtr& K = A.field;
  const std::size_t n = A.rows;
  const std::size_t p = A.cols;
  const std::size_t s = n + p;
  auto corner = [&](const Matrix& M) {
    Matrix out(K, s, s);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) out.at(i, n + j) = M.at(i, j);
    return out;
  };
  std::vector<Matrix> Cs, Ds;
  Cs.reserve(A.mats.size() + 1);
  Ds.reserve(A.mats.size() + 1);
  for (const Matrix& M : A.mats) Cs.push_back(corner(M));
  for (const Matrix& M : B.mats) Ds.push_back(corner(M));
  Matrix marker(K, s, s);
  for (std::size_t i = 0; i < n; ++i) marker.at(i, i) = K->one();
  Cs.push_back(marker);
  Ds.push_back(marker);
  std::vector<std::string> labels = A.labels;
  labels.push_back(kEquivMarkerLabel);
  BridgedPair out;
  out.C = make_family(K, s, s, labels, std::move(Cs));
  out.D = make_family(K, s, s, std::move(labels), std::move(Ds));
  out.n = n;
  out.p = p;
  return out;
}

// Reads the diagonal blocks (P, Q) out of an invertible R that commutes
// with the marker idempotent; commuting forces both off-diagonal blocks to
// vanish, so nonzero ones mean the precondition fails.
inline std::pair<Matrix, Matrix> extract_equiv_certificate(const Matrix& R,
                                                           std::size_t n,
                                                           std::size_t p) {
  require_input(R.rows() == n + p && R.cols() == n + p,
                "block extraction needs an (n+p) x (n+p) matrix");
  require_input(invert(R).has_value(),
                "block extraction needs an invertible matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      require_input(R.at(i, n + j).is_zero() && R.at(n + j, i).is_zero(),
                    "matrix does not commute with the marker idempotent");
  Matrix P = R.slice(0, n, 0, n);
  Matrix Q = R.slice(n, n + p, n, n + p);
  require_invariant(invert(P).has_value() && invert(Q).has_value(),
                    "diagonal blocks of an invertible block-diagonal matrix "
                    "must be invertible");
  return {std::move(P), std::move(Q)};
}

// Decides simultaneous equivalence by deciding similarity of the bridged
// families. The bridged witness is block-diagonal with blocks (P, Q'), and
// P*A_i*Q'^-1 = B_i, so the returned pair is (P, Q'^-1).
inline std::optional<EquivalenceCertificate> decide_equivalence(
    const MatrixFamily& A, const MatrixFamily& B) {
  BridgedPair bridged = embed_equiv_as_sim(A, B);
  auto sim = decide_similarity(bridged.C, bridged.D);
  if (!sim) return std::nullopt;
  auto [P, Qc] = extract_equiv_certificate(sim->P, bridged.n, bridged.p);
  auto Qi = invert(Qc);
  require_invariant(Qi.has_value(), "extracted block must be invertible");
  EquivalenceCertificate cert{A.field, std::move(P), std::move(*Qi)};
  require_invariant(verify_equivalence(A, B, cert.P, cert.Q),
                    "equivalence witness failed verification");
  return cert;
}

// Descends an extension-field equivalence pair (P, Q) to the family field:
// diag(P, Q^-1) is a similarity witness for the bridged families, descends
// as such, and splits back into an equivalence pair.
inline EquivalenceCertificate descend_equivalence(
    const Matrix& P, const Matrix& Q, const MatrixFamily& A,
    const MatrixFamily& B, DescentTrace* trace = nullptr) {
  require_input(same_family_shape(A, B),
                "equivalence needs families of one shape, field and label "
                "set");
  const FieldPtr& K = A.field;
  const FieldPtr L = P.field();
  require_input(same_field(P.field(), Q.field()),
                "both witness matrices must share one field");
  require_input(is_subtower(K, L),
                "witness field must be a tower over the family field");
  require_cert(
      verify_equivalence(lift_family(A, L), lift_family(B, L), P, Q),
      "input pair is not an equivalence witness over its field");
  auto Qi = invert(Q);
  require_invariant(Qi.has_value(), "verified witness must be invertible");
  BridgedPair bridged = embed_equiv_as_sim(A, B);
  std::vector<Matrix> blocks{P, *Qi};
  Matrix R = block_diag(L, std::span<const Matrix>(blocks));
  SimilarityCertificate sim = descend_tower(R, bridged.C, bridged.D, trace);
  auto [Pk, Qck] = extract_equiv_certificate(sim.P, bridged.n, bridged.p);
  auto Qki = invert(Qck);
  require_invariant(Qki.has_value(), "extracted block must be invertible");
  EquivalenceCertificate cert{K, std::move(Pk), std::move(*Qki)};
  require_invariant(verify_equivalence(A, B, cert.P, cert.Q),
                    "equivalence witness failed verification");
  return cert;
}

}  // namespace kron

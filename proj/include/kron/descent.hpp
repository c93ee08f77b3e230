#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kron/intertwine.hpp"
#include "kron/pencil.hpp"

namespace kron {

// One intermediate witness produced while walking a certificate down a
// field tower; `stage` names the move that produced it.
struct DescentStep {
  std::string stage;
  SimilarityCertificate cert;
};
using DescentTrace = std::vector<DescentStep>;

namespace detail {

inline void check_descent_families(const MatrixFamily& A,
                                   const MatrixFamily& B) {
  require_input(same_field(A.field, B.field), "families must share a field");
  require_input(A.labels == B.labels, "families must share index labels");
  require_input(A.rows == A.cols && B.rows == B.cols && A.rows == B.rows,
                "descent needs square families of one size");
}

}  // namespace detail

// Turns a similarity witness over an extension L of the family field K into
// one over K. Every entry of P is decomposed along the tower coordinate
// basis of L over K; each component matrix intertwines the families, so an
// invertible element of their span (which exists whenever the input is
// valid and |K| >= n) is a witness over K.
inline Matrix descend_span(const Matrix& P, const MatrixFamily& A,
                           const MatrixFamily& B) {
  detail::check_descent_families(A, B);
  const FieldPtr K = A.field;
  const FieldPtr L = P.field();
  require_input(is_subtower(K, L),
                "witness field must be a tower over the family field");
  const std::size_t n = A.rows;
  if (n == 0) return Matrix(K, 0, 0);
  require_input(P.rows() == n && P.cols() == n,
                "witness shape must match the families");
  require_cert(verify_similarity(lift_family(A, L), lift_family(B, L), P),
               "input matrix is not a similarity witness over its field");
  const std::size_t d = static_cast<std::size_t>(L->total_degree() /
                                                 K->total_degree());
  std::vector<Matrix> comp(d, Matrix(K, n, n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto c = tower_coords(P.at(i, j), K);
      require_invariant(c.size() == d, "tower coordinate length mismatch");
      for (std::size_t k = 0; k < d; ++k) comp[k].at(i, j) = c[k];
    }
  // Keep a linearly independent subset of the components (pivot columns of
  // the vectorised stack), preserving order.
  Matrix vecs(K, n * n, d);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        vecs.at(i * n + j, k) = comp[k].at(i, j);
  std::vector<Matrix> span;
  for (std::size_t idx : row_reduce(vecs).pivots)
    span.push_back(comp[idx]);
  for (const Matrix& Pk : span)
    for (std::size_t i = 0; i < A.mats.size(); ++i)
      require_invariant(Pk * A.mats[i] == B.mats[i] * Pk,
                        "witness component fails to intertwine");
  require_input(!K->is_finite() || cardinality_at_least(K, n) ||
                    exhaustive_feasible(K, span.size()),
                "family field too small for a complete span search");
  auto found = find_nonsingular(span);
  require_invariant(found.has_value(),
                    "witness component span holds no invertible matrix");
  require_invariant(verify_similarity(A, B, *found),
                    "descended witness failed verification");
  return *found;
}

// Descends one separable quadratic step L = K(eps) -> K. Splitting
// P = Q + eps*R and normalising the pencil Q + X*R with (P1, P2) conjugates
// both families onto one and the same family, so P1^-1*P2 is a witness
// over K.
inline Matrix descend_quadratic(const Matrix& P, const MatrixFamily& A,
                                const MatrixFamily& B) {
  detail::check_descent_families(A, B);
  const FieldPtr K = A.field;
  const FieldPtr L = P.field();
  require_input(L->kind == FieldKind::Extension && L->degree == 2 &&
                    same_field(L->base, K),
                "witness field must be a quadratic extension of the family "
                "field");
  require_input(quadratic_separable(L),
                "quadratic descent needs a separable extension");
  const std::size_t n = A.rows;
  if (n == 0) return Matrix(K, 0, 0);
  require_input(P.rows() == n && P.cols() == n,
                "witness shape must match the families");
  require_cert(verify_similarity(lift_family(A, L), lift_family(B, L), P),
               "input matrix is not a similarity witness over its field");
  Matrix Qm(K, n, n);
  Matrix Rm(K, n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& c = P.at(i, j).coeffs();
      require_invariant(c.size() == 2, "quadratic coefficient length");
      Qm.at(i, j) = c[0];
      Rm.at(i, j) = c[1];
    }
  WeierstrassForm wf = weierstrass_normalize(Pencil(Qm, Rm));
  auto P1i = invert(wf.P1);
  auto P2i = invert(wf.P2);
  require_invariant(P1i && P2i, "normalisation witnesses must be invertible");
  for (std::size_t i = 0; i < A.mats.size(); ++i) {
    Matrix Ai = wf.P2 * A.mats[i] * *P2i;
    Matrix Bi = wf.P1 * B.mats[i] * *P1i;
    require_invariant(Ai == Bi,
                      "conjugated families disagree after normalisation");
  }
  Matrix S = *P1i * wf.P2;
  require_invariant(verify_similarity(A, B, S),
                    "descended witness failed verification");
  return S;
}

// Route from an extension L down to the base K: a quadratic tower over K
// whose top is large enough for span descent, a compositum holding both the
// tower top and L, and the two embeddings into it.
struct DescentPlan {
  FieldPtr base;
  FieldPtr ext;
  std::vector<FieldPtr> tower;
  FieldPtr compositum;
  Embedding from_top;
  Embedding from_ext;
};

inline DescentPlan build_descent_plan(const FieldPtr& K, const FieldPtr& L,
                                      std::size_t n) {
  require_input(K->is_finite(), "descent plans cover finite fields only");
  require_input(is_subtower(K, L),
                "extension must be a tower over the base field");
  DescentPlan plan;
  plan.base = K;
  plan.ext = L;
  plan.tower = build_quadratic_tower(K, n);
  FieldPtr top = plan.tower.empty() ? K : plan.tower.back();
  Compositum comp = compositum_embed(top, L);
  plan.compositum = comp.field;
  plan.from_top = comp.from_top;
  plan.from_ext = comp.from_other;
  return plan;
}

// Full descent of a similarity witness from L to the family field K: one
// span descent into the tower top, then one quadratic descent per tower
// level. Infinite K and |K| >= n take the single span step directly.
inline SimilarityCertificate descend_tower(const Matrix& P,
                                           const MatrixFamily& A,
                                           const MatrixFamily& B,
                                           DescentTrace* trace = nullptr) {
  detail::check_descent_families(A, B);
  const FieldPtr K = A.field;
  const FieldPtr L = P.field();
  require_input(is_subtower(K, L),
                "witness field must be a tower over the family field");
  const std::size_t n = A.rows;
  require_input(n == 0 || (P.rows() == n && P.cols() == n),
                "witness shape must match the families");
  require_cert(n == 0 ||
                   verify_similarity(lift_family(A, L), lift_family(B, L), P),
               "input matrix is not a similarity witness over its field");
  auto note = [&](const char* stage, const FieldPtr& f, const Matrix& m) {
    if (trace) trace->push_back({stage, SimilarityCertificate{f, m}});
  };
  if (n == 0) {
    Matrix I0(K, 0, 0);
    note("trivial", K, I0);
    return {K, I0};
  }
  if (same_field(L, K)) {
    note("trivial", K, P);
    return {K, P};
  }
  if (!K->is_finite() || cardinality_at_least(K, n)) {
    Matrix S = descend_span(P, A, B);
    note("span", K, S);
    return {K, S};
  }
  DescentPlan plan = build_descent_plan(K, L, n);
  Matrix PM = apply_embedding(P, plan.from_ext);
  FieldPtr top = plan.tower.back();
  Matrix cur = descend_span(PM, lift_family(A, top), lift_family(B, top));
  note("span", top, cur);
  for (std::size_t idx = plan.tower.size(); idx-- > 0;) {
    FieldPtr below = idx == 0 ? K : plan.tower[idx - 1];
    cur = descend_quadratic(cur, lift_family(A, below),
                            lift_family(B, below));
    note("quadratic", below, cur);
  }
  require_invariant(verify_similarity(A, B, cur),
                    "descended witness failed verification");
  return {K, cur};
}

// Decides simultaneous similarity of two square families over their common
// field. The intertwiner span is searched directly when that is complete
// (exhaustive scale, |K| >= n+1, or infinite K); otherwise the span is
// lifted to a tower top with at least n+1 elements, searched there, and the
// witness descended back. A none answer is always definitive.
inline std::optional<SimilarityCertificate> decide_similarity(
    const MatrixFamily& A, const MatrixFamily& B) {
  detail::check_descent_families(A, B);
  const FieldPtr& K = A.field;
  const std::size_t n = A.rows;
  if (n == 0) return SimilarityCertificate{K, Matrix::identity(K, 0)};
  if (A.mats.empty() || families_identical(A, B))
    return SimilarityCertificate{K, Matrix::identity(K, n)};
  IntertwinerSpace W = intertwiner_basis(A, B);
  if (W.dimension() == 0) return std::nullopt;
  const bool lift_needed = K->is_finite() &&
                           !exhaustive_feasible(K, W.dimension()) &&
                           !cardinality_at_least(K, n + 1);
  if (!lift_needed) {
    auto P = find_nonsingular(W.basis);
    if (!P) return std::nullopt;
    require_invariant(verify_similarity(A, B, *P),
                      "similarity witness failed verification");
    return SimilarityCertificate{K, *P};
  }
  auto tower = build_quadratic_tower(K, n + 1);
  require_invariant(!tower.empty(), "lift tower must be nontrivial");
  const FieldPtr& L = tower.back();
  std::vector<Matrix> WL;
  WL.reserve(W.basis.size());
  for (const Matrix& Pk : W.basis) WL.push_back(lift_matrix(Pk, L));
  auto PL = find_nonsingular(WL);
  if (!PL) return std::nullopt;
  SimilarityCertificate cert = descend_tower(*PL, A, B);
  require_invariant(verify_similarity(A, B, cert.P),
                    "similarity witness failed verification");
  return cert;
}

}  // namespace kron

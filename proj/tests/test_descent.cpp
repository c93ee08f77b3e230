#include <catch2/catch_amalgamated.hpp>

#include "kron/descent.hpp"
#include "support.hpp"

using namespace kron;

namespace {

MatrixFamily fam(const FieldPtr& f, std::vector<Matrix> mats) {
  std::size_t r = mats.empty() ? 2 : mats[0].rows();
  std::size_t c = mats.empty() ? 2 : mats[0].cols();
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < mats.size(); ++i)
    labels.push_back("m" + std::to_string(i + 1));
  return make_family(f, r, c, std::move(labels), std::move(mats));
}

struct Lcg {
  std::uint64_t s;
  explicit Lcg(std::uint64_t seed) : s(seed) {}
  std::uint64_t next(std::uint64_t m) {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    return (s >> 17) % m;
  }
  Element elem(const FieldPtr& f) {
    if (f->is_finite()) return element_at(f, next(f->cardinality().value()));
    return f->from_int(static_cast<long long>(next(7)) - 3);
  }
  Matrix mat(const FieldPtr& f, std::size_t r, std::size_t c) {
    Matrix m(f, r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m.at(i, j) = elem(f);
    return m;
  }
  Matrix invertible(const FieldPtr& f, std::size_t n) {
    while (true) {
      Matrix m = mat(f, n, n);
      if (!det(m).is_zero()) return m;
    }
  }
};

// A valid extension-field witness for (A, S*A*S^-1): S times an invertible
// combination of the lifted commutant of A.
Matrix certified_witness(Lcg& rng, const MatrixFamily& A, const Matrix& S,
                         const FieldPtr& L) {
  auto W = intertwiner_basis(A, A);
  REQUIRE(W.dimension() >= 1);
  std::vector<Matrix> WL;
  for (const auto& Pk : W.basis) WL.push_back(lift_matrix(Pk, L));
  while (true) {
    Matrix Z(L, A.rows, A.rows);
    for (const auto& Pk : WL) Z = Z + rng.elem(L) * Pk;
    if (det(Z).is_zero()) continue;
    return lift_matrix(S, L) * Z;
  }
}

}  // namespace

TEST_CASE("span descent keeps a base-field witness unchanged in spirit") {
  auto f2 = Field::prime(2);
  Matrix M = Matrix::from_rows(f2, {{0, 1}, {1, 1}});
  Matrix S = Matrix::from_rows(f2, {{1, 1}, {0, 1}});
  auto A = fam(f2, {M});
  auto B = fam(f2, {S * M * *invert(S)});
  Matrix got = descend_span(S, A, B);
  CHECK(got == S);
}

TEST_CASE("span descent drops the generator factor over a quadratic pair") {
  auto f3 = Field::prime(3);
  auto f9 = make_extension(f3, {f3->one(), f3->zero(), f3->one()});
  Matrix M = Matrix::from_rows(f3, {{1, 2}, {0, 1}});
  auto A = fam(f3, {M});
  Matrix P(f9, 2, 2);
  Element u = generator_of(f9);
  P.at(0, 0) = u;
  P.at(1, 1) = u;
  Matrix got = descend_span(P, A, A);
  CHECK(got == Matrix::identity(f3, 2));
}

TEST_CASE("span descent over the rationals picks the identity component") {
  auto q = Field::rationals();
  auto qr2 = make_extension(q, {q->from_int(-2), q->zero(), q->one()});
  Matrix N = Matrix::from_rows(q, {{0, 1}, {0, 0}});
  auto A = fam(q, {N});
  Element t = generator_of(qr2);
  Matrix P = lift_matrix(Matrix::identity(q, 2), qr2);
  Matrix NL = lift_matrix(N, qr2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      P.at(i, j) = P.at(i, j) + t * NL.at(i, j);
  Matrix got = descend_span(P, A, A);
  CHECK(got == Matrix::identity(q, 2));
}

TEST_CASE("span descent rejects a non-witness") {
  auto f3 = Field::prime(3);
  auto f9 = make_extension(f3, {f3->one(), f3->zero(), f3->one()});
  Matrix M = Matrix::from_rows(f3, {{1, 2}, {0, 1}});
  Matrix Mo = Matrix::from_rows(f3, {{0, 1}, {2, 2}});
  auto A = fam(f3, {M});
  auto B = fam(f3, {Mo});
  Matrix P = lift_matrix(Matrix::identity(f3, 2), f9);
  CHECK_THROWS_AS(descend_span(P, A, B), CertificateError);
}

TEST_CASE("quadratic descent, generator times identity") {
  auto f2 = Field::prime(2);
  auto f4 = make_extension(f2, {f2->one(), f2->one(), f2->one()});
  Matrix M = Matrix::from_rows(f2, {{0, 1}, {1, 1}});
  auto A = fam(f2, {M});
  Element eps = generator_of(f4);
  Matrix P(f4, 2, 2);
  P.at(0, 0) = eps;
  P.at(1, 1) = eps;
  Matrix got = descend_quadratic(P, A, A);
  CHECK(got == Matrix::identity(f2, 2));
}

TEST_CASE("quadratic descent, generator times a conjugator") {
  auto f2 = Field::prime(2);
  auto f4 = make_extension(f2, {f2->one(), f2->one(), f2->one()});
  Matrix A1 = Matrix::from_rows(f2, {{0, 1}, {1, 1}});
  Matrix S = Matrix::from_rows(f2, {{1, 1}, {0, 1}});
  auto A = fam(f2, {A1});
  auto B = fam(f2, {S * A1 * *invert(S)});
  Element eps = generator_of(f4);
  Matrix P = lift_matrix(S, f4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) P.at(i, j) = eps * P.at(i, j);
  Matrix got = descend_quadratic(P, A, B);
  CHECK(got == S);
}

TEST_CASE("quadratic descent with an empty family returns some witness") {
  auto f2 = Field::prime(2);
  auto f4 = make_extension(f2, {f2->one(), f2->one(), f2->one()});
  auto A = make_family(f2, 2, 2, {}, {});
  Element eps = generator_of(f4);
  Matrix P = lift_matrix(Matrix::identity(f2, 2), f4);
  P.at(0, 0) = eps;
  Matrix got = descend_quadratic(P, A, A);
  CHECK(same_field(got.field(), f2));
  CHECK(invert(got).has_value());
}

TEST_CASE("quadratic descent input validation") {
  auto f2 = Field::prime(2);
  auto f4 = make_extension(f2, {f2->one(), f2->one(), f2->one()});
  auto f8 = make_extension(f2, first_irreducible_monic(f2, 3, true));
  Matrix M = Matrix::from_rows(f2, {{0, 1}, {1, 1}});
  auto A = fam(f2, {M});
  SECTION("cubic extension is rejected") {
    Matrix P = lift_matrix(Matrix::identity(f2, 2), f8);
    CHECK_THROWS_AS(descend_quadratic(P, A, A), InputError);
  }
  SECTION("tampered witness is rejected") {
    Matrix P = lift_matrix(Matrix::identity(f2, 2), f4);
    auto B = fam(f2, {Matrix::from_rows(f2, {{1, 1}, {1, 0}})});
    CHECK_THROWS_AS(descend_quadratic(P, A, B), CertificateError);
  }
}

TEST_CASE("tower descent, single span step when the base is big enough") {
  auto f5 = Field::prime(5);
  auto f25 = make_extension(f5, first_irreducible_monic(f5, 2, true));
  Matrix M = Matrix::from_rows(f5, {{1, 2}, {3, 4}});
  auto A = fam(f5, {M});
  Element u = generator_of(f25);
  Matrix P(f25, 2, 2);
  P.at(0, 0) = u;
  P.at(1, 1) = u;
  DescentTrace trace;
  auto cert = descend_tower(P, A, A, &trace);
  CHECK(same_field(cert.field, f5));
  CHECK(cert.P == Matrix::identity(f5, 2));
  REQUIRE(trace.size() == 1);
  CHECK(trace[0].stage == "span");
}

TEST_CASE("tower descent through a compositum, cubic over quadratic") {
  auto f2 = Field::prime(2);
  auto f8 = make_extension(f2, first_irreducible_monic(f2, 3, true));
  Matrix A1 = Matrix::from_rows(f2, {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  Matrix S = Matrix::from_rows(f2, {{1, 1, 0}, {0, 1, 0}, {0, 1, 1}});
  REQUIRE(invert(S).has_value());
  auto A = fam(f2, {A1});
  auto B = fam(f2, {S * A1 * *invert(S)});
  Element u = generator_of(f8);
  Matrix P = lift_matrix(S, f8);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) P.at(i, j) = u * P.at(i, j);
  DescentTrace trace;
  auto cert = descend_tower(P, A, B, &trace);
  CHECK(same_field(cert.field, f2));
  CHECK(verify_similarity(A, B, cert.P));
  REQUIRE(trace.size() == 2);
  CHECK(trace[0].stage == "span");
  CHECK(trace[1].stage == "quadratic");
  CHECK(same_field(trace[1].cert.field, f2));
  CHECK(trace[0].cert.field->total_degree() == 2);
}

TEST_CASE("tower descent with a trivial extension returns the input") {
  auto f5 = Field::prime(5);
  Matrix M = Matrix::from_rows(f5, {{1, 2}, {3, 4}});
  auto A = fam(f5, {M});
  auto cert = descend_tower(Matrix::identity(f5, 2), A, A);
  CHECK(cert.P == Matrix::identity(f5, 2));
}

TEST_CASE("tower descent rejects a tampered witness") {
  auto f2 = Field::prime(2);
  auto f4 = make_extension(f2, {f2->one(), f2->one(), f2->one()});
  Matrix M = Matrix::from_rows(f2, {{0, 1}, {1, 1}});
  auto A = fam(f2, {M});
  auto B = fam(f2, {Matrix::from_rows(f2, {{1, 1}, {1, 0}})});
  Matrix P = lift_matrix(Matrix::identity(f2, 2), f4);
  CHECK_THROWS_AS(descend_tower(P, A, B), CertificateError);
}

TEST_CASE("similarity decision, frozen verdicts") {
  auto f2 = Field::prime(2);
  Matrix M = Matrix::from_rows(f2, {{0, 1}, {1, 1}});
  SECTION("a family is similar to itself by the identity") {
    auto A = fam(f2, {M});
    auto cert = decide_similarity(A, A);
    REQUIRE(cert.has_value());
    CHECK(cert->P == Matrix::identity(f2, 2));
  }
  SECTION("rank obstruction gives a definitive none") {
    auto A = fam(f2, {Matrix::from_rows(f2, {{0, 1}, {0, 0}})});
    auto B = fam(f2, {Matrix(f2, 2, 2)});
    CHECK_FALSE(decide_similarity(A, B).has_value());
  }
  SECTION("the shift and its transpose are conjugate") {
    auto A = fam(f2, {Matrix::from_rows(f2, {{0, 1}, {0, 0}})});
    auto B = fam(f2, {Matrix::from_rows(f2, {{0, 0}, {1, 0}})});
    auto cert = decide_similarity(A, B);
    REQUIRE(cert.has_value());
    CHECK(verify_similarity(A, B, cert->P));
    CHECK(testing::brute_similar(A.mats, B.mats, f2, 2).has_value());
  }
  SECTION("empty index set yields the identity") {
    auto A = make_family(f2, 2, 2, {}, {});
    auto cert = decide_similarity(A, A);
    REQUIRE(cert.has_value());
    CHECK(cert->P == Matrix::identity(f2, 2));
  }
  SECTION("size zero is vacuously similar") {
    auto A = make_family(f2, 0, 0, {"m1"}, {Matrix(f2, 0, 0)});
    auto cert = decide_similarity(A, A);
    REQUIRE(cert.has_value());
    CHECK(cert->P.rows() == 0);
  }
}

TEST_CASE("similarity verdicts match brute force on sampled 2x2 pairs") {
  auto f2 = Field::prime(2);
  auto pool = testing::all_matrices(f2, 2, 2);
  Lcg rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t m = 1 + trial % 2;
    std::vector<Matrix> As, Bs;
    for (std::size_t i = 0; i < m; ++i) {
      As.push_back(pool[rng.next(pool.size())]);
      if (trial % 3 == 0) {
        Bs.push_back(pool[rng.next(pool.size())]);
      } else {
        Matrix S = rng.invertible(f2, 2);
        Bs.push_back(S * As.back() * *invert(S));
      }
    }
    auto got = decide_similarity(fam(f2, As), fam(f2, Bs));
    auto want = testing::brute_similar(As, Bs, f2, 2);
    CHECK(got.has_value() == want.has_value());
    if (got) CHECK(verify_similarity(fam(f2, As), fam(f2, Bs), got->P));
  }
}

TEST_CASE("similarity decision takes the lift road on a small field") {
  auto f5 = Field::prime(5);
  Matrix J(f5, 5, 5);
  J.at(1, 2) = f5->one();
  J.at(2, 3) = f5->one();
  J.at(3, 4) = f5->one();
  Matrix S = Matrix::from_rows(f5, {{1, 0, 0, 0, 0},
                                    {1, 1, 0, 0, 0},
                                    {0, 1, 1, 0, 0},
                                    {0, 0, 1, 1, 0},
                                    {0, 0, 0, 1, 1}});
  auto A = fam(f5, {J});
  auto B = fam(f5, {S * J * *invert(S)});
  auto W = intertwiner_basis(A, B);
  REQUIRE(W.dimension() == 7);
  REQUIRE_FALSE(exhaustive_feasible(f5, W.dimension()));
  REQUIRE_FALSE(cardinality_at_least(f5, 6));
  auto cert = decide_similarity(A, B);
  REQUIRE(cert.has_value());
  CHECK(same_field(cert->field, f5));
  CHECK(verify_similarity(A, B, cert->P));
}

TEST_CASE("end-to-end descent soundness on sampled instances") {
  auto f2 = Field::prime(2);
  auto f4 = make_extension(f2, {f2->one(), f2->one(), f2->one()});
  auto f3 = Field::prime(3);
  auto f9 = make_extension(f3, {f3->one(), f3->zero(), f3->one()});
  auto q = Field::rationals();
  auto qr2 = make_extension(q, {q->from_int(-2), q->zero(), q->one()});
  std::vector<std::pair<FieldPtr, FieldPtr>> pairs = {
      {f2, f4}, {f3, f9}, {q, qr2}};
  Lcg rng(2024);
  for (const auto& [K, L] : pairs) {
    for (int trial = 0; trial < 10; ++trial) {
      std::size_t n = 2 + trial % 3;
      std::vector<Matrix> As;
      for (int i = 0; i < 2; ++i) As.push_back(rng.mat(K, n, n));
      Matrix S = rng.invertible(K, n);
      std::vector<Matrix> Bs;
      for (const auto& Ai : As) Bs.push_back(S * Ai * *invert(S));
      auto A = fam(K, As);
      auto B = fam(K, Bs);
      Matrix P = certified_witness(rng, A, S, L);
      auto cert = descend_tower(P, A, B);
      CHECK(same_field(cert.field, K));
      CHECK(verify_similarity(A, B, cert.P));
    }
  }
}

TEST_CASE("base-field commutant of the twisted witness commutes with it") {
  auto f3 = Field::prime(3);
  auto f9 = make_extension(f3, {f3->one(), f3->zero(), f3->one()});
  auto f2 = Field::prime(2);
  auto f4 = make_extension(f2, {f2->one(), f2->one(), f2->one()});
  std::vector<std::pair<FieldPtr, FieldPtr>> pairs = {{f3, f9}, {f2, f4}};
  Lcg rng(777);
  for (const auto& [K, L] : pairs) {
    for (int trial = 0; trial < 15; ++trial) {
      std::size_t fin = 1 + rng.next(3);
      std::size_t nil = 1 + rng.next(2);
      std::size_t n = fin + nil;
      Matrix Qm(K, n, n);
      Matrix Rm(K, n, n);
      Matrix Ms = rng.mat(K, fin, fin);
      for (std::size_t i = 0; i < fin; ++i) {
        for (std::size_t j = 0; j < fin; ++j) Qm.at(i, j) = Ms.at(i, j);
        Rm.at(i, i) = K->one();
      }
      for (std::size_t i = 0; i < nil; ++i) {
        Qm.at(fin + i, fin + i) = K->one();
        if (i + 1 < nil && rng.next(2)) Rm.at(fin + i, fin + i + 1) = K->one();
      }
      Element eps = generator_of(L);
      Matrix P = lift_matrix(Qm, L);
      Matrix RL = lift_matrix(Rm, L);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          P.at(i, j) = P.at(i, j) + eps * RL.at(i, j);
      if (det(P).is_zero()) continue;
      Matrix Pc(L, n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          Pc.at(i, j) = quadratic_conjugate(P.at(i, j));
      Matrix T = *invert(Pc) * P;
      Matrix T0(K, n, n);
      Matrix T1(K, n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const auto& c = T.at(i, j).coeffs();
          T0.at(i, j) = c[0];
          T1.at(i, j) = c[1];
        }
      auto parts = make_family(K, n, n, {"c0", "c1"}, {T0, T1});
      auto W = intertwiner_basis(parts, parts);
      REQUIRE(W.dimension() >= 1);
      for (int draw = 0; draw < 3; ++draw) {
        Matrix C(K, n, n);
        for (const auto& Pk : W.basis) C = C + rng.elem(K) * Pk;
        Matrix CL = lift_matrix(C, L);
        CHECK(CL * P == P * CL);
      }
    }
  }
}

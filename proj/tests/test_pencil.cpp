#include "kron/pencil.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "support.hpp"

using namespace kron;

namespace {

Matrix rnd_matrix(const FieldPtr& f, std::size_t r, std::size_t c,
                  std::mt19937_64& rng) {
  Matrix m(f, r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      if (f->is_finite())
        m.at(i, j) = element_at(f, rng() % f->cardinality().value());
      else
        m.at(i, j) = f->from_rational(
            mpq_class(mpz_class(static_cast<long>(rng() % 9) - 4),
                      mpz_class(static_cast<long>(rng() % 4) + 1)));
    }
  return m;
}

Matrix rnd_invertible(const FieldPtr& f, std::size_t n,
                      std::mt19937_64& rng) {
  while (true) {
    Matrix m = rnd_matrix(f, n, n, rng);
    if (!det(m).is_zero()) return m;
  }
}

// Full validity of a reduction result against the input pencil.
void check_kronecker(const Pencil& p, const KroneckerForm& kf) {
  REQUIRE(kf.P1.rows() == p.rows());
  REQUIRE(kf.Q1.rows() == p.cols());
  REQUIRE(!det(kf.P1).is_zero());
  REQUIRE(!det(kf.Q1).is_zero());
  Pencil rendered = render_blocks(p.field(), kf.blocks);
  REQUIRE(kf.P1 * p.A * kf.Q1 == rendered.A);
  REQUIRE(kf.P1 * p.B * kf.Q1 == rendered.B);
  // canonical order and at most one zero block
  int zeros = 0;
  for (std::size_t i = 0; i < kf.blocks.size(); ++i) {
    if (kf.blocks[i].kind == BlockKind::Zero) ++zeros;
    if (i + 1 < kf.blocks.size()) {
      auto key = [](const PencilBlock& b) {
        return std::pair<int, long long>(block_rank(b.kind),
                                         -static_cast<long long>(b.size));
      };
      REQUIRE(key(kf.blocks[i]) <= key(kf.blocks[i + 1]));
    }
  }
  REQUIRE(zeros <= 1);
}

std::vector<std::pair<BlockKind, std::size_t>> shape_of(
    const std::vector<PencilBlock>& blocks) {
  std::vector<std::pair<BlockKind, std::size_t>> v;
  for (const auto& b : blocks) v.emplace_back(b.kind, b.size);
  return v;
}

}  // namespace

TEST_CASE("block rendering") {
  auto f2 = Field::prime(2);
  auto [lr, kr] = PencilBlock::singular_row(2).render(f2);
  CHECK(lr == Matrix::from_rows(f2, {{1, 0, 0}, {0, 1, 0}}));
  CHECK(kr == Matrix::from_rows(f2, {{0, 1, 0}, {0, 0, 1}}));
  auto [lc, kc] = PencilBlock::singular_col(1).render(f2);
  CHECK(lc == Matrix::from_rows(f2, {{1}, {0}}));
  CHECK(kc == Matrix::from_rows(f2, {{0}, {1}}));
  auto [ja, jb] = PencilBlock::jordan_one_x(2).render(f2);
  CHECK(ja == Matrix::identity(f2, 2));
  CHECK(jb == Matrix::from_rows(f2, {{0, 1}, {0, 0}}));
  auto [xa, xb] = PencilBlock::jordan_x_one(2).render(f2);
  CHECK(xa == Matrix::from_rows(f2, {{0, 1}, {0, 0}}));
  CHECK(xb == Matrix::identity(f2, 2));
}

TEST_CASE("deflation of common kernels") {
  auto Q = Field::rationals();
  SECTION("all-zero 1x1 pencil") {
    Pencil p(Matrix(Q, 1, 1), Matrix(Q, 1, 1));
    auto d = deflate_common_kernels(p);
    CHECK(d.reduced.rows() == 0);
    CHECK(d.reduced.cols() == 0);
    CHECK(d.zero_rows == 1);
    CHECK(d.zero_cols == 1);
  }
  SECTION("identity pencil unchanged") {
    Pencil p(Matrix::identity(Q, 2), Matrix::identity(Q, 2));
    auto d = deflate_common_kernels(p);
    CHECK(d.zero_rows == 0);
    CHECK(d.zero_cols == 0);
    CHECK(d.reduced.A == p.A);
  }
  SECTION("rank-one pair sheds a row and a column") {
    Matrix m = Matrix::from_rows(Q, {{1, 0}, {0, 0}});
    Pencil p(m, m);
    auto d = deflate_common_kernels(p);
    CHECK(d.zero_rows == 1);
    CHECK(d.zero_cols == 1);
    CHECK(d.reduced.rows() == 1);
    CHECK(d.reduced.A.at(0, 0).is_one());
  }
}

TEST_CASE("kernel towers") {
  auto Q = Field::rationals();
  SECTION("invertible B stabilizes immediately") {
    auto t = build_towers(Pencil(Matrix(Q, 2, 2), Matrix::identity(Q, 2)));
    CHECK(t.stable == 0);
    CHECK(t.E[0].cols() == 0);
  }
  SECTION("zero B gives the whole space at once") {
    auto t = build_towers(Pencil(Matrix::identity(Q, 2), Matrix(Q, 2, 2)));
    CHECK(t.stable == 1);
    CHECK(t.E[1].cols() == 2);
    CHECK(t.F[1].cols() == 2);
  }
  SECTION("L1 + X K1") {
    Pencil p(Matrix::from_rows(Q, {{1, 0}}), Matrix::from_rows(Q, {{0, 1}}));
    auto t = build_towers(p);
    REQUIRE(t.stable == 2);
    CHECK(t.E[1].cols() == 1);
    CHECK(t.E[1].at(0, 0).is_one());
    CHECK(t.E[1].at(1, 0).is_zero());
    CHECK(t.E[2].cols() == 2);
    CHECK(t.F[1].cols() == 1);
  }
}

TEST_CASE("complement splitting") {
  auto Q = Field::rationals();
  SECTION("trivial tower leaves everything") {
    Pencil p(Matrix(Q, 2, 2), Matrix::identity(Q, 2));
    auto t = build_towers(p);
    auto c = split_complements(p, t);
    CHECK(c.Eprime.cols() == 2);
    CHECK(c.Fprime.cols() == 2);
  }
  SECTION("full tower leaves nothing") {
    Pencil p(Matrix::identity(Q, 2), Matrix(Q, 2, 2));
    auto t = build_towers(p);
    auto c = split_complements(p, t);
    CHECK(c.Eprime.cols() == 0);
    CHECK(c.Fprime.cols() == 0);
  }
  SECTION("scrambled mixed pencil over F3") {
    auto f3 = Field::prime(3);
    Pencil bd = render_blocks(
        f3, {PencilBlock::singular_row(1), PencilBlock::regular(
                                               Matrix::identity(f3, 1))});
    std::mt19937_64 rng(5);
    Matrix S = rnd_invertible(f3, 2, rng), T = rnd_invertible(f3, 3, rng);
    Pencil p(S * bd.A * T, S * bd.B * T);
    auto t = build_towers(p);
    auto c = split_complements(p, t);
    CHECK(c.Eprime.cols() == 1);
    CHECK(c.Fprime.cols() == 1);
    CHECK(in_span(c.Fprime, p.A * c.Eprime));
    CHECK(in_span(c.Fprime, p.B * c.Eprime));
    CHECK(rank_of(hstack(t.E[t.stable], c.Eprime)) == 3);
    CHECK(rank_of(hstack(t.F[t.stable], c.Fprime)) == 2);
  }
}

TEST_CASE("singular chain bases") {
  auto Q = Field::rationals();
  SECTION("one-by-one isomorphism chain") {
    auto sb = singular_part_basis(Matrix::identity(Q, 1), Matrix(Q, 1, 1));
    REQUIRE(sb.blocks.size() == 1);
    CHECK(sb.blocks[0].kind == BlockKind::JordanOneX);
    CHECK(sb.blocks[0].size == 1);
  }
  SECTION("L1 K1 shape") {
    auto sb = singular_part_basis(Matrix::from_rows(Q, {{1, 0}}),
                                  Matrix::from_rows(Q, {{0, 1}}));
    REQUIRE(sb.blocks.size() == 1);
    CHECK(sb.blocks[0].kind == BlockKind::SingularRow);
    CHECK(sb.blocks[0].size == 1);
    CHECK(sb.Ebasis == Matrix::identity(Q, 2));
    CHECK(sb.Fbasis == Matrix::identity(Q, 1));
  }
  SECTION("length-two isomorphism chain") {
    auto sb = singular_part_basis(Matrix::identity(Q, 2),
                                  Matrix::from_rows(Q, {{0, 1}, {0, 0}}));
    REQUIRE(sb.blocks.size() == 1);
    CHECK(sb.blocks[0].kind == BlockKind::JordanOneX);
    CHECK(sb.blocks[0].size == 2);
  }
  SECTION("common kernel gives a zero column") {
    // f = g = 0 on a 1-dim space into a 0-dim space
    auto sb = singular_part_basis(Matrix(Q, 0, 1), Matrix(Q, 0, 1));
    REQUIRE(sb.blocks.size() == 1);
    CHECK(sb.blocks[0].kind == BlockKind::Zero);
    CHECK(sb.blocks[0].rows == 0);
    CHECK(sb.blocks[0].cols == 1);
  }
  SECTION("precondition violations are input errors") {
    // towers stabilize at a proper subspace for B = I
    CHECK_THROWS_AS(
        singular_part_basis(Matrix::identity(Q, 2), Matrix::identity(Q, 2)),
        InputError);
    // f not onto: zero map with a nonzero codomain
    CHECK_THROWS_AS(singular_part_basis(Matrix(Q, 1, 1), Matrix(Q, 1, 1)),
                    InputError);
  }
}

TEST_CASE("regular part reduction") {
  auto Q = Field::rationals();
  SECTION("pure X pencil") {
    auto rs = regular_reduce(Pencil(Matrix(Q, 2, 2), Matrix::identity(Q, 2)));
    auto s = shape_of(rs.blocks);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == std::pair{BlockKind::JordanXOne, std::size_t{1}});
    CHECK(s[1] == std::pair{BlockKind::JordanXOne, std::size_t{1}});
  }
  SECTION("identity pencil is one regular block") {
    auto rs = regular_reduce(
        Pencil(Matrix::identity(Q, 2), Matrix::identity(Q, 2)));
    REQUIRE(rs.blocks.size() == 1);
    CHECK(rs.blocks[0].kind == BlockKind::Regular);
    CHECK(rs.blocks[0].payload == Matrix::identity(Q, 2));
  }
  SECTION("nilpotent A gives one length-two block") {
    auto rs = regular_reduce(Pencil(Matrix::from_rows(Q, {{0, 1}, {0, 0}}),
                                    Matrix::identity(Q, 2)));
    REQUIRE(rs.blocks.size() == 1);
    CHECK(rs.blocks[0].kind == BlockKind::JordanXOne);
    CHECK(rs.blocks[0].size == 2);
  }
  SECTION("singular B rejected") {
    CHECK_THROWS_AS(
        regular_reduce(Pencil(Matrix::identity(Q, 2), Matrix(Q, 2, 2))),
        InputError);
  }
}

TEST_CASE("kronecker reduction frozen examples") {
  auto Q = Field::rationals();
  SECTION("L1 K1") {
    Pencil p(Matrix::from_rows(Q, {{1, 0}}), Matrix::from_rows(Q, {{0, 1}}));
    auto kf = kronecker_reduce(p);
    check_kronecker(p, kf);
    REQUIRE(kf.blocks.size() == 1);
    CHECK(kf.blocks[0].kind == BlockKind::SingularRow);
    CHECK(kf.blocks[0].size == 1);
    CHECK(kf.P1 == Matrix::identity(Q, 1));
    CHECK(kf.Q1 == Matrix::identity(Q, 2));
  }
  SECTION("identity against zero") {
    Pencil p(Matrix::identity(Q, 2), Matrix(Q, 2, 2));
    auto kf = kronecker_reduce(p);
    check_kronecker(p, kf);
    auto s = shape_of(kf.blocks);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == std::pair{BlockKind::JordanOneX, std::size_t{1}});
    CHECK(s[1] == std::pair{BlockKind::JordanOneX, std::size_t{1}});
  }
  SECTION("nilpotent against identity over F2") {
    auto f2 = Field::prime(2);
    Pencil p(Matrix::from_rows(f2, {{0, 1}, {0, 0}}),
             Matrix::identity(f2, 2));
    auto kf = kronecker_reduce(p);
    check_kronecker(p, kf);
    REQUIRE(kf.blocks.size() == 1);
    CHECK(kf.blocks[0].kind == BlockKind::JordanXOne);
    CHECK(kf.blocks[0].size == 2);
  }
  SECTION("all-zero pencil") {
    Pencil p(Matrix(Q, 2, 3), Matrix(Q, 2, 3));
    auto kf = kronecker_reduce(p);
    check_kronecker(p, kf);
    REQUIRE(kf.blocks.size() == 1);
    CHECK(kf.blocks[0].kind == BlockKind::Zero);
    CHECK(kf.blocks[0].rows == 2);
    CHECK(kf.blocks[0].cols == 3);
  }
  SECTION("empty pencil") {
    Pencil p(Matrix(Q, 0, 0), Matrix(Q, 0, 0));
    auto kf = kronecker_reduce(p);
    check_kronecker(p, kf);
    CHECK(kf.blocks.empty());
  }
}

TEST_CASE("kronecker reduction recovers scrambled block shapes") {
  std::mt19937_64 rng(2024);
  auto f3 = Field::prime(3);
  std::vector<std::vector<PencilBlock>> shapes = {
      {PencilBlock::singular_row(2), PencilBlock::jordan_one_x(1)},
      {PencilBlock::singular_col(1), PencilBlock::jordan_x_one(2)},
      {PencilBlock::zero(1, 1), PencilBlock::singular_row(1),
       PencilBlock::singular_col(1)},
      {PencilBlock::jordan_one_x(2), PencilBlock::jordan_x_one(1),
       PencilBlock::singular_row(1)},
  };
  for (const auto& bs : shapes) {
    Pencil bd = render_blocks(f3, bs);
    for (int it = 0; it < 5; ++it) {
      Matrix S = rnd_invertible(f3, bd.rows(), rng);
      Matrix T = rnd_invertible(f3, bd.cols(), rng);
      Pencil p(S * bd.A * T, S * bd.B * T);
      auto kf = kronecker_reduce(p);
      check_kronecker(p, kf);
      // the non-regular block multiset is an invariant; compare against the
      // canonical reduction of the unscrambled pencil
      auto reference = kronecker_reduce(bd);
      auto lhs = shape_of(kf.blocks), rhs = shape_of(reference.blocks);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("kronecker reduction on random pencils") {
  std::mt19937_64 rng(99);
  std::vector<FieldPtr> fields{Field::prime(2), Field::prime(5),
                               Field::rationals()};
  for (const auto& F : fields) {
    for (int it = 0; it < 60; ++it) {
      std::size_t r = rng() % 5, c = rng() % 5;
      Pencil p(rnd_matrix(F, r, c, rng), rnd_matrix(F, r, c, rng));
      auto kf = kronecker_reduce(p);
      check_kronecker(p, kf);
    }
  }
}

TEST_CASE("weierstrass normalization") {
  auto Q = Field::rationals();
  SECTION("pure polynomial part") {
    auto w = weierstrass_normalize(
        Pencil(Matrix::identity(Q, 2), Matrix(Q, 2, 2)));
    CHECK(w.q == 0);
    CHECK(w.N == Matrix(Q, 2, 2));
  }
  SECTION("pure invertible-X part") {
    auto w = weierstrass_normalize(
        Pencil(Matrix(Q, 2, 2), Matrix::identity(Q, 2)));
    CHECK(w.q == 2);
    CHECK(w.M == Matrix(Q, 2, 2));
    CHECK(w.N.rows() == 0);
  }
  SECTION("nilpotent leading part") {
    auto f2 = Field::prime(2);
    auto w = weierstrass_normalize(Pencil(
        Matrix::from_rows(f2, {{0, 1}, {0, 0}}), Matrix::identity(f2, 2)));
    CHECK(w.q == 2);
    CHECK(w.M == Matrix::from_rows(f2, {{0, 1}, {0, 0}}));
  }
  SECTION("identities hold on random regular pencils") {
    std::mt19937_64 rng(7);
    auto f5 = Field::prime(5);
    for (int it = 0; it < 40; ++it) {
      std::size_t n = 1 + rng() % 4;
      // build a regular pencil: random invertible B, arbitrary A
      Matrix B = rnd_invertible(f5, n, rng);
      Matrix A = rnd_matrix(f5, n, n, rng);
      Pencil p(A, B);
      auto w = weierstrass_normalize(p);
      auto P2inv = invert(w.P2);
      REQUIRE(P2inv.has_value());
      CHECK(w.P1 * A * *P2inv ==
            block_diag(f5, {w.M, Matrix::identity(f5, n - w.q)}));
      CHECK(w.P1 * B * *P2inv ==
            block_diag(f5, {Matrix::identity(f5, w.q), w.N}));
      // N nilpotent
      Matrix Np = Matrix::identity(f5, w.N.rows());
      for (std::size_t i = 0; i < w.N.rows(); ++i) Np = Np * w.N;
      CHECK(Np.is_zero());
    }
  }
  SECTION("singular pencils rejected") {
    CHECK_THROWS_AS(
        weierstrass_normalize(Pencil(Matrix(Q, 1, 1), Matrix(Q, 1, 1))),
        InputError);
  }
}

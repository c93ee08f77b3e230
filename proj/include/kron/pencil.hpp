#pragma once

// Reduction of matrix pencils A + X B to weak Kronecker canonical form over
// any exact field, with invertible change-of-basis witnesses P1 (rows) and
// Q1 (columns) such that P1 (A + X B) Q1 is the block diagonal of the
// returned blocks. The steps are also exposed on their own: common-kernel
// deflation, kernel towers, complement splitting, chain bases for the
// stabilized singular part, and the regular (invertible-B) part.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kron/matrices.hpp"

namespace kron {

struct Pencil {
  Matrix A, B;

  Pencil() = default;
  Pencil(Matrix a, Matrix b) : A(std::move(a)), B(std::move(b)) {
    require_input(same_field(A.field(), B.field()) && A.rows() == B.rows() &&
                      A.cols() == B.cols(),
                  "pencil needs two matrices of one shape over one field");
  }

  const FieldPtr& field() const { return A.field(); }
  std::size_t rows() const { return A.rows(); }
  std::size_t cols() const { return A.cols(); }
};

enum class BlockKind {
  Zero,         // zero pencil of some shape
  SingularRow,  // L_r + X K_r, r x (r+1)
  SingularCol,  // L_r^t + X K_r^t, (r+1) x r
  JordanOneX,   // I_r + X N_r
  JordanXOne,   // N_r + X I_r
  Regular,      // P + X I_r, P the payload
};

inline int block_rank(BlockKind k) { return static_cast<int>(k); }

inline std::string block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::Zero: return "zero";
    case BlockKind::SingularRow: return "singular_row";
    case BlockKind::SingularCol: return "singular_col";
    case BlockKind::JordanOneX: return "jordan_one_x";
    case BlockKind::JordanXOne: return "jordan_x_one";
    case BlockKind::Regular: return "regular";
  }
  return "?";
}

struct PencilBlock {
  BlockKind kind = BlockKind::Zero;
  std::size_t size = 0;  // r parameter; 0 for Zero blocks
  std::size_t rows = 0, cols = 0;
  Matrix payload;  // Regular only

  static PencilBlock zero(std::size_t r, std::size_t c) {
    return {BlockKind::Zero, 0, r, c, {}};
  }
  static PencilBlock singular_row(std::size_t r) {
    return {BlockKind::SingularRow, r, r, r + 1, {}};
  }
  static PencilBlock singular_col(std::size_t r) {
    return {BlockKind::SingularCol, r, r + 1, r, {}};
  }
  static PencilBlock jordan_one_x(std::size_t r) {
    return {BlockKind::JordanOneX, r, r, r, {}};
  }
  static PencilBlock jordan_x_one(std::size_t r) {
    return {BlockKind::JordanXOne, r, r, r, {}};
  }
  static PencilBlock regular(Matrix p) {
    std::size_t r = p.rows();
    return {BlockKind::Regular, r, r, r, std::move(p)};
  }

  // The pair (A-part, B-part) of the rendered pencil block.
  std::pair<Matrix, Matrix> render(const FieldPtr& f) const {
    auto ones_at = [&](std::size_t r, std::size_t c, std::size_t dj) {
      Matrix m(f, r, c);
      for (std::size_t i = 0; i < r && i + dj < c; ++i)
        m.at(i, i + dj) = f->one();
      return m;
    };
    switch (kind) {
      case BlockKind::Zero:
        return {Matrix(f, rows, cols), Matrix(f, rows, cols)};
      case BlockKind::SingularRow:
        return {ones_at(size, size + 1, 0), ones_at(size, size + 1, 1)};
      case BlockKind::SingularCol:
        return {ones_at(size, size + 1, 0).transpose(),
                ones_at(size, size + 1, 1).transpose()};
      case BlockKind::JordanOneX:
        return {Matrix::identity(f, size), ones_at(size, size, 1)};
      case BlockKind::JordanXOne:
        return {ones_at(size, size, 1), Matrix::identity(f, size)};
      case BlockKind::Regular:
        return {payload, Matrix::identity(f, size)};
    }
    throw InvariantError("bad block kind");
  }
};

// Renders the full block-diagonal pencil.
inline Pencil render_blocks(const FieldPtr& f,
                            const std::vector<PencilBlock>& blocks) {
  std::vector<Matrix> as, bs;
  as.reserve(blocks.size());
  bs.reserve(blocks.size());
  for (const auto& b : blocks) {
    auto [a, m] = b.render(f);
    as.push_back(std::move(a));
    bs.push_back(std::move(m));
  }
  return Pencil(block_diag(f, std::span<const Matrix>(as)),
                block_diag(f, std::span<const Matrix>(bs)));
}

// --- kernel towers ---

// E_1 = Ker B, E_{k+1} = B^{-1}(F_k), F_k = A(E_k); both ascend and the
// construction stops at the first k with dim E_{k+1} = dim E_k. E[0], F[0]
// are zero-dimensional.
struct KernelTowers {
  std::vector<Matrix> E, F;  // indices 0..stable
  std::size_t stable = 0;
};

inline KernelTowers build_towers(const Matrix& A, const Matrix& B) {
  require_input(A.rows() == B.rows() && A.cols() == B.cols(),
                "towers need matrices of one shape");
  KernelTowers t;
  t.E.push_back(Matrix(A.field(), A.cols(), 0));
  t.F.push_back(Matrix(A.field(), A.rows(), 0));
  for (std::size_t k = 0;; ++k) {
    require_invariant(k <= A.cols() + 1, "kernel towers failed to stabilize");
    Matrix En = preimage_basis(B, t.F[k]);
    if (En.cols() == t.E[k].cols()) {
      t.stable = k;
      return t;
    }
    require_invariant(in_span(En, t.E[k]), "kernel towers are not nested");
    t.E.push_back(En);
    t.F.push_back(image_basis(A * En));
  }
}

inline KernelTowers build_towers(const Pencil& p) {
  return build_towers(p.A, p.B);
}

// --- common-kernel deflation ---

// Splits off the Zero block carried by Ker A meet Ker B (columns) and by a
// complement of im A + im B (rows). row_inv * A * col_basis is block
// diagonal with the reduced pencil in the top-left corner and a zero block
// of shape zero_rows x zero_cols in the bottom-right.
struct Deflation {
  Matrix col_basis;  // invertible, trailing columns span Ker A meet Ker B
  Matrix row_basis;  // invertible, leading columns span im A + im B
  Matrix row_inv;
  std::size_t zero_rows = 0, zero_cols = 0;
  Pencil reduced;
};

inline Deflation deflate_common_kernels(const Pencil& p) {
  const FieldPtr& F = p.field();
  Matrix ker = kernel_basis(vstack(p.A, p.B));
  Matrix keep_cols = extend_basis(ker, Matrix::identity(F, p.cols()));
  Matrix col_basis = hstack(keep_cols, ker);
  Matrix img = image_basis(hstack(p.A, p.B));
  Matrix pad_rows = extend_basis(img, Matrix::identity(F, p.rows()));
  Matrix row_basis = hstack(img, pad_rows);
  auto row_inv = invert(row_basis);
  require_invariant(row_inv.has_value(), "deflation row basis not invertible");
  Matrix A0 = *row_inv * p.A * col_basis;
  Matrix B0 = *row_inv * p.B * col_basis;
  std::size_t n1 = img.cols(), p1 = keep_cols.cols();
  require_invariant(
      A0.slice(0, p.rows(), p1, p.cols()).is_zero() &&
          B0.slice(0, p.rows(), p1, p.cols()).is_zero() &&
          A0.slice(n1, p.rows(), 0, p.cols()).is_zero() &&
          B0.slice(n1, p.rows(), 0, p.cols()).is_zero(),
      "deflation did not isolate the zero block");
  Deflation d;
  d.col_basis = std::move(col_basis);
  d.row_basis = std::move(row_basis);
  d.row_inv = std::move(*row_inv);
  d.zero_rows = p.rows() - n1;
  d.zero_cols = p.cols() - p1;
  d.reduced = Pencil(A0.slice(0, n1, 0, p1), B0.slice(0, n1, 0, p1));
  return d;
}

// --- complements of the stabilized towers ---

// Complements E' of E_N and F' of F_N with A(E') and B(E') inside span F'.
// Built by walking k = N..1: replace F' with B(E') extended inside the old
// complement, then correct each E'-vector by a preimage in E_k so its
// A-image leaves F_k.
struct ComplementSplit {
  Matrix Eprime, Fprime;
};

inline ComplementSplit split_complements(const Pencil& p,
                                         const KernelTowers& t) {
  const FieldPtr& F = p.field();
  std::size_t N = t.stable;
  Matrix Ep = extend_basis(t.E[N], Matrix::identity(F, p.cols()));
  Matrix Fp = extend_basis(t.F[N], Matrix::identity(F, p.rows()));
  for (std::size_t k = N; k >= 1; --k) {
    Matrix BEp = p.B * Ep;
    Matrix base = hstack(t.F[k], BEp);
    require_invariant(rank_of(base) == t.F[k].cols() + BEp.cols(),
                      "B-image of the complement meets the tower");
    Matrix added = extend_basis(base, Fp);
    Matrix Fpp = hstack(BEp, added);
    require_invariant(Fpp.cols() == Fp.cols(),
                      "complement dimension drifted");
    require_invariant(
        rank_of(hstack(t.F[N], Fpp)) == t.F[N].cols() + Fpp.cols(),
        "new complement meets the stabilized tower");
    // A e' = (part in F'') + F_k z; replace e' by e' - g with A g = F_k z,
    // g in E_k. Then A e' lands in F'' and B e' stays in F'' + F_{k-1}.
    Matrix AEp = p.A * Ep;
    auto coords = solve_linear(hstack(Fpp, t.F[k]), AEp);
    require_invariant(coords.has_value(),
                      "A-image of the complement escapes F'' + F_k");
    Matrix z = coords->slice(Fpp.cols(), Fpp.cols() + t.F[k].cols(), 0,
                             coords->cols());
    auto g = solve_linear(p.A * t.E[k], t.F[k] * z);
    require_invariant(g.has_value(), "tower correction has no preimage");
    Ep = Ep - t.E[k] * *g;
    Fp = std::move(Fpp);
  }
  require_invariant(
      rank_of(hstack(t.E[N], Ep)) == t.E[N].cols() + Ep.cols() &&
          t.E[N].cols() + Ep.cols() == p.cols(),
      "E-complement is not complementary");
  require_invariant(in_span(Fp, p.A * Ep) && in_span(Fp, p.B * Ep),
                    "complement is not invariant");
  return ComplementSplit{std::move(Ep), std::move(Fp)};
}

// --- chain bases for a stabilized singular pair ---

// Bases turning a pair (f, g) whose towers stabilize at the full domain
// (with f onto) into a block diagonal of Zero(0,1), L_r + X K_r and
// I_r + X N_r blocks: f maps the level-j chain vector to the level-j image
// vector (or to zero at a chain top in Ker f), g shifts levels down by one.
struct SingularBasis {
  Matrix Ebasis, Fbasis;
  std::vector<PencilBlock> blocks;
};

inline SingularBasis singular_part_basis(const Matrix& f, const Matrix& g) {
  const FieldPtr& K = f.field();
  KernelTowers t = build_towers(f, g);
  std::size_t N = t.stable;
  require_input(t.E[N].cols() == f.cols(),
                "towers do not stabilize at the full domain");
  require_input(rank_of(f) == f.rows(), "first matrix is not onto");

  struct Chain {
    bool jordan;
    std::size_t birth;
    std::vector<Matrix> evecs;  // descending level: birth, birth-1, ..., 1
    std::vector<Matrix> fvecs;  // descending level
  };
  std::vector<Chain> chains;

  auto kernel_columns = [&](const Matrix& basis) {
    return basis * kernel_basis(f * basis);
  };

  for (std::size_t k = N; k >= 1; --k) {
    // g-images of every existing chain's level-(k+1) vector.
    Matrix W(K, f.rows(), 0);
    for (const auto& c : chains) W = hstack(W, g * c.evecs.back());
    Matrix withPrev = hstack(t.F[k - 1], W);
    require_invariant(rank_of(withPrev) == withPrev.cols(),
                      "chain images are dependent");
    // Unreached columns of F_k give birth to isomorphism chains.
    Matrix born = extend_basis(withPrev, t.F[k]);
    require_invariant(
        withPrev.cols() + born.cols() == t.F[k].cols(),
        "chain images and births do not fill the tower level");
    std::size_t first_new = chains.size();
    for (std::size_t j = 0; j < born.cols(); ++j)
      chains.push_back(Chain{true, k, {}, {}});
    // Level-k image vectors, then their f-preimages inside E_k.
    Matrix level_f(K, f.rows(), 0);
    for (std::size_t c = 0; c < chains.size(); ++c) {
      Matrix v = c < first_new ? g * chains[c].evecs.back()
                               : born.col(c - first_new);
      chains[c].fvecs.push_back(v);
      level_f = hstack(level_f, v);
    }
    auto pre = solve_linear(f * t.E[k], level_f);
    require_invariant(pre.has_value(), "chain image has no f-preimage");
    for (std::size_t c = 0; c < chains.size(); ++c)
      chains[c].evecs.push_back(t.E[k] * pre->col(c));
    // Kernel growth gives birth to chains whose top is killed by f.
    Matrix kerPrev = kernel_columns(t.E[k - 1]);
    Matrix kerHere = kernel_columns(t.E[k]);
    Matrix kborn = extend_basis(kerPrev, kerHere);
    for (std::size_t j = 0; j < kborn.cols(); ++j)
      chains.push_back(Chain{false, k, {kborn.col(j)}, {}});
    // All chains now hold a level-k vector; check independence over E_{k-1}.
    Matrix levels(K, f.cols(), 0);
    for (const auto& c : chains) levels = hstack(levels, c.evecs.back());
    require_invariant(
        t.E[k - 1].cols() + levels.cols() == t.E[k].cols() &&
            rank_of(hstack(t.E[k - 1], levels)) ==
                t.E[k - 1].cols() + levels.cols(),
        "chain vectors do not extend the tower level");
  }

  std::vector<std::size_t> order(chains.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    auto key = [&](const Chain& c) {
      BlockKind k = c.jordan ? BlockKind::JordanOneX
                   : c.birth >= 2
                       ? BlockKind::SingularRow
                       : BlockKind::Zero;
      return std::pair<int, long long>(block_rank(k),
                                       -static_cast<long long>(c.birth));
    };
    return key(chains[a]) < key(chains[b]);
  });

  SingularBasis out;
  out.Ebasis = Matrix(K, f.cols(), 0);
  out.Fbasis = Matrix(K, f.rows(), 0);
  for (std::size_t idx : order) {
    const Chain& c = chains[idx];
    for (std::size_t j = c.evecs.size(); j-- > 0;)
      out.Ebasis = hstack(out.Ebasis, c.evecs[j]);
    for (std::size_t j = c.fvecs.size(); j-- > 0;)
      out.Fbasis = hstack(out.Fbasis, c.fvecs[j]);
    if (c.jordan)
      out.blocks.push_back(PencilBlock::jordan_one_x(c.birth));
    else if (c.birth >= 2)
      out.blocks.push_back(PencilBlock::singular_row(c.birth - 1));
    else
      out.blocks.push_back(PencilBlock::zero(0, 1));
  }
  require_invariant(out.Ebasis.cols() == f.cols() &&
                        rank_of(out.Ebasis) == f.cols() &&
                        out.Fbasis.cols() == f.rows() &&
                        rank_of(out.Fbasis) == f.rows(),
                    "chain bases are not bases");
  return out;
}

// --- regular part ---

// For a square pencil with invertible B: splits T = B^{-1} A into nilpotent
// and invertible Fitting parts; the nilpotent part yields N_r + X I_r blocks
// through the chain construction applied to (id, T_nil), the invertible part
// one Regular block. P1 (A + X B) Q1 is the block diagonal.
struct RegularSplit {
  Matrix P1, Q1;
  std::vector<PencilBlock> blocks;
};

inline RegularSplit regular_reduce(const Pencil& p) {
  const FieldPtr& F = p.field();
  require_input(p.rows() == p.cols(), "regular part must be square");
  std::size_t n = p.rows();
  auto Binv = invert(p.B);
  require_input(Binv.has_value(), "X-coefficient is singular");
  RegularSplit out;
  if (n == 0) {
    out.P1 = out.Q1 = Matrix(F, 0, 0);
    return out;
  }
  Matrix T = *Binv * p.A;
  Matrix Tp = Matrix::identity(F, n);
  for (std::size_t i = 0; i < n; ++i) Tp = Tp * T;
  Matrix Kb = kernel_basis(Tp);
  Matrix Ib = image_basis(Tp);
  require_invariant(rank_of(hstack(Kb, Ib)) == n,
                    "Fitting decomposition failed");
  Matrix Q(F, n, 0);
  if (Kb.cols() > 0) {
    auto Tnil = solve_linear(Kb, T * Kb);
    require_invariant(Tnil.has_value(), "nilpotent part is not invariant");
    SingularBasis sb =
        singular_part_basis(Matrix::identity(F, Kb.cols()), *Tnil);
    for (auto& b : sb.blocks) {
      require_invariant(b.kind == BlockKind::JordanOneX,
                        "nilpotent part produced a singular chain");
      out.blocks.push_back(PencilBlock::jordan_x_one(b.size));
    }
    Q = hstack(Q, Kb * sb.Ebasis);
  }
  if (Ib.cols() > 0) {
    auto Tinv = solve_linear(Ib, T * Ib);
    require_invariant(Tinv.has_value(), "invertible part is not invariant");
    require_invariant(!det(*Tinv).is_zero(),
                      "invertible Fitting part is singular");
    out.blocks.push_back(PencilBlock::regular(*Tinv));
    Q = hstack(Q, Ib);
  }
  auto P = invert(p.B * Q);
  require_invariant(P.has_value(), "regular column basis not invertible");
  out.P1 = std::move(*P);
  out.Q1 = std::move(Q);
  return out;
}

// --- full reduction ---

struct KroneckerForm {
  FieldPtr field;
  std::vector<PencilBlock> blocks;
  Matrix P1, Q1;
};

namespace detail {

// Multiply a local transform into the global witnesses at a diagonal offset.
inline Matrix embed_block(const FieldPtr& f, std::size_t n, std::size_t off,
                          const Matrix& m) {
  Matrix e = Matrix::identity(f, n);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e.at(off + i, off + j) = m.at(i, j);
  return e;
}

inline Matrix reversal(const FieldPtr& f, std::size_t r) {
  Matrix m(f, r, r);
  for (std::size_t i = 0; i < r; ++i) m.at(i, r - 1 - i) = f->one();
  return m;
}

}  // namespace detail

inline KroneckerForm kronecker_reduce(const Pencil& p) {
  const FieldPtr& F = p.field();
  const std::size_t n = p.rows(), pc = p.cols();
  Matrix P1 = Matrix::identity(F, n);
  Matrix Q1 = Matrix::identity(F, pc);
  std::vector<PencilBlock> blocks;

  // Stage 0: deflate the common kernels; residual sits at the top left.
  Deflation d = deflate_common_kernels(p);
  P1 = d.row_inv;
  Q1 = d.col_basis;
  std::size_t rn = p.rows() - d.zero_rows, rc = p.cols() - d.zero_cols;

  auto current = [&]() {
    Matrix A = P1 * p.A * Q1;
    Matrix B = P1 * p.B * Q1;
    std::size_t r0 = 0, c0 = 0;
    for (const auto& b : blocks) {
      r0 += b.rows;
      c0 += b.cols;
    }
    return Pencil(A.slice(r0, r0 + rn, c0, c0 + rc),
                  B.slice(r0, r0 + rn, c0, c0 + rc));
  };
  auto offsets = [&]() {
    std::size_t r0 = 0, c0 = 0;
    for (const auto& b : blocks) {
      r0 += b.rows;
      c0 += b.cols;
    }
    return std::pair<std::size_t, std::size_t>(r0, c0);
  };

  // Stage 1: chains of the stabilized towers (row-singular part).
  {
    Pencil cur = current();
    KernelTowers t = build_towers(cur);
    if (t.E[t.stable].cols() > 0) {
      auto [r0, c0] = offsets();
      ComplementSplit comp = split_complements(cur, t);
      const Matrix& EN = t.E[t.stable];
      const Matrix& FN = t.F[t.stable];
      auto fmat = solve_linear(FN, cur.A * EN);
      auto gmat = solve_linear(FN, cur.B * EN);
      require_invariant(fmat.has_value() && gmat.has_value(),
                        "stabilized part is not invariant");
      SingularBasis sb = singular_part_basis(*fmat, *gmat);
      Matrix SE = hstack(EN * sb.Ebasis, comp.Eprime);
      Matrix SF = hstack(FN * sb.Fbasis, comp.Fprime);
      auto SFinv = invert(SF);
      require_invariant(SFinv.has_value(), "row basis not invertible");
      P1 = detail::embed_block(F, n, r0, *SFinv) * P1;
      Q1 = Q1 * detail::embed_block(F, pc, c0, SE);
      for (auto& b : sb.blocks) {
        require_invariant(b.kind != BlockKind::Zero,
                          "zero chain after deflation");
        rn -= b.rows;
        rc -= b.cols;
        blocks.push_back(b);
      }
    }
  }

  // Stage 2: the same on the transpose (column-singular part).
  {
    Pencil cur = current();
    Pencil curT(cur.A.transpose(), cur.B.transpose());
    KernelTowers t = build_towers(curT);
    if (t.E[t.stable].cols() > 0) {
      auto [r0, c0] = offsets();
      ComplementSplit comp = split_complements(curT, t);
      const Matrix& EN = t.E[t.stable];
      const Matrix& FN = t.F[t.stable];
      auto fmat = solve_linear(FN, curT.A * EN);
      auto gmat = solve_linear(FN, curT.B * EN);
      require_invariant(fmat.has_value() && gmat.has_value(),
                        "stabilized part is not invariant");
      SingularBasis sb = singular_part_basis(*fmat, *gmat);
      Matrix SE = hstack(EN * sb.Ebasis, comp.Eprime);  // rows of cur
      Matrix SF = hstack(FN * sb.Fbasis, comp.Fprime);  // cols of cur
      auto SFinv = invert(SF);
      require_invariant(SFinv.has_value(), "column basis not invertible");
      P1 = detail::embed_block(F, n, r0, SE.transpose()) * P1;
      Q1 = Q1 * detail::embed_block(F, pc, c0, SFinv->transpose());
      std::size_t br = r0, bc = c0;
      for (auto& b : sb.blocks) {
        require_invariant(b.kind != BlockKind::Zero,
                          "zero chain in the transpose pass");
        PencilBlock nb = b.kind == BlockKind::SingularRow
                             ? PencilBlock::singular_col(b.size)
                             : PencilBlock::jordan_one_x(b.size);
        if (nb.kind == BlockKind::JordanOneX) {
          // transposing N_r re-renders through the index reversal
          Matrix rev = detail::reversal(F, nb.size);
          P1 = detail::embed_block(F, n, br, rev) * P1;
          Q1 = Q1 * detail::embed_block(F, pc, bc, rev);
        }
        br += nb.rows;
        bc += nb.cols;
        rn -= nb.rows;
        rc -= nb.cols;
        blocks.push_back(nb);
      }
    }
  }

  // Stage 3: leftover is square with invertible B.
  {
    Pencil cur = current();
    require_invariant(cur.rows() == cur.cols(),
                      "leftover after singular passes is not square");
    if (cur.rows() > 0) {
      auto [r0, c0] = offsets();
      require_invariant(!det(cur.B).is_zero(),
                        "leftover X-coefficient is singular");
      RegularSplit rs = regular_reduce(cur);
      P1 = detail::embed_block(F, n, r0, rs.P1) * P1;
      Q1 = Q1 * detail::embed_block(F, pc, c0, rs.Q1);
      for (auto& b : rs.blocks) {
        rn -= b.rows;
        rc -= b.cols;
        blocks.push_back(b);
      }
    }
  }
  require_invariant(rn == 0 && rc == 0, "reduction left a residual pencil");

  if (d.zero_rows > 0 || d.zero_cols > 0)
    blocks.push_back(PencilBlock::zero(d.zero_rows, d.zero_cols));

  // Canonical order: by kind, then by decreasing size, stably.
  std::vector<std::size_t> order(blocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     auto key = [&](const PencilBlock& x) {
                       return std::pair<int, long long>(
                           block_rank(x.kind),
                           -static_cast<long long>(x.size));
                     };
                     return key(blocks[a]) < key(blocks[b]);
                   });
  std::vector<std::size_t> row_starts(blocks.size()), col_starts(blocks.size());
  {
    std::size_t r = 0, c = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      row_starts[i] = r;
      col_starts[i] = c;
      r += blocks[i].rows;
      c += blocks[i].cols;
    }
  }
  std::vector<std::size_t> row_order, col_order;
  std::vector<PencilBlock> sorted;
  for (std::size_t idx : order) {
    for (std::size_t i = 0; i < blocks[idx].rows; ++i)
      row_order.push_back(row_starts[idx] + i);
    for (std::size_t j = 0; j < blocks[idx].cols; ++j)
      col_order.push_back(col_starts[idx] + j);
    sorted.push_back(blocks[idx]);
  }
  P1 = row_selector(F, row_order, n) * P1;
  Q1 = Q1 * row_selector(F, col_order, pc).transpose();

  KroneckerForm kf{F, std::move(sorted), std::move(P1), std::move(Q1)};
  Pencil expect = render_blocks(F, kf.blocks);
  require_invariant(!det(kf.P1).is_zero() && !det(kf.Q1).is_zero(),
                    "witnesses are not invertible");
  require_invariant(kf.P1 * p.A * kf.Q1 == expect.A &&
                        kf.P1 * p.B * kf.Q1 == expect.B,
                    "reduction does not reproduce the pencil");
  return kf;
}

// --- regular pencil normalization ---

// For a regular square pencil Q + X R: invertible P1, P2 with
// P1 Q P2^{-1} = diag(M, I) and P1 R P2^{-1} = diag(I, N), N nilpotent;
// q is the size of the leading group.
struct WeierstrassForm {
  Matrix P1, P2;
  std::size_t q = 0;
  Matrix M, N;
};

inline WeierstrassForm weierstrass_normalize(const Pencil& p) {
  const FieldPtr& F = p.field();
  require_input(p.rows() == p.cols(),
                "normalization needs a square pencil");
  std::size_t n = p.rows();
  KroneckerForm kf = kronecker_reduce(p);
  for (const auto& b : kf.blocks)
    require_input(b.kind == BlockKind::JordanOneX ||
                      b.kind == BlockKind::JordanXOne ||
                      b.kind == BlockKind::Regular,
                  "pencil is singular");
  // Leading group: blocks with invertible X-coefficient rendered first.
  std::vector<std::size_t> order;
  std::vector<std::size_t> starts(kf.blocks.size());
  std::size_t off = 0;
  for (std::size_t i = 0; i < kf.blocks.size(); ++i) {
    starts[i] = off;
    off += kf.blocks[i].size;
  }
  std::vector<Matrix> mparts, nparts;
  for (std::size_t i = 0; i < kf.blocks.size(); ++i)
    if (kf.blocks[i].kind != BlockKind::JordanOneX) {
      for (std::size_t j = 0; j < kf.blocks[i].size; ++j)
        order.push_back(starts[i] + j);
      mparts.push_back(kf.blocks[i].render(F).first);
    }
  std::size_t q = order.size();
  for (std::size_t i = 0; i < kf.blocks.size(); ++i)
    if (kf.blocks[i].kind == BlockKind::JordanOneX) {
      for (std::size_t j = 0; j < kf.blocks[i].size; ++j)
        order.push_back(starts[i] + j);
      nparts.push_back(kf.blocks[i].render(F).second);
    }
  Matrix perm = row_selector(F, order, n);
  WeierstrassForm w;
  w.P1 = perm * kf.P1;
  Matrix G = kf.Q1 * perm.transpose();
  auto P2 = invert(G);
  require_invariant(P2.has_value(), "column witness not invertible");
  w.P2 = std::move(*P2);
  w.q = q;
  w.M = block_diag(F, std::span<const Matrix>(mparts));
  w.N = block_diag(F, std::span<const Matrix>(nparts));
  require_invariant(
      w.P1 * p.A * G ==
              block_diag(F, {w.M, Matrix::identity(F, n - q)}) &&
          w.P1 * p.B * G == block_diag(F, {Matrix::identity(F, q), w.N}),
      "normalization identities failed");
  return w;
}

}  // namespace kron

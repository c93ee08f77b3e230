#pragma once

// Dense exact matrices over a shared field, with reduced row echelon form,
// kernels, solving, determinants and basis utilities. Elimination over the
// rationals uses fraction-free (Bareiss) pivoting on integer-scaled rows;
// finite fields use plain Gauss-Jordan. Pivot choice is always the first
// nonzero entry in scan order, so every result is deterministic.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "kron/fields.hpp"

namespace kron {

class Matrix {
 public:
  Matrix() = default;
  Matrix(FieldPtr f, std::size_t rows, std::size_t cols)
      : f_(std::move(f)), rows_(rows), cols_(cols),
        e_(rows * cols, f_->zero()) {}

  static Matrix identity(const FieldPtr& f, std::size_t n) {
    Matrix m(f, n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = f->one();
    return m;
  }

  static Matrix from_rows(const FieldPtr& f,
                          std::initializer_list<std::initializer_list<int>> rows) {
    Matrix m(f, rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
      require_input(r.size() == m.cols_, "ragged row list");
      std::size_t j = 0;
      for (int v : r) m.at(i, j++) = f->from_int(v);
      ++i;
    }
    return m;
  }

  const FieldPtr& field() const { return f_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool valid() const { return f_ != nullptr; }

  Element& at(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const Element& at(std::size_t i, std::size_t j) const {
    return e_[i * cols_ + j];
  }

  bool is_zero() const {
    for (const auto& x : e_)
      if (!x.is_zero()) return false;
    return true;
  }

  bool is_square() const { return rows_ == cols_; }

  Matrix transpose() const {
    Matrix t(f_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  // Half-open row/column ranges.
  Matrix slice(std::size_t r0, std::size_t r1, std::size_t c0,
               std::size_t c1) const {
    require_input(r0 <= r1 && r1 <= rows_ && c0 <= c1 && c1 <= cols_,
                  "slice out of range");
    Matrix s(f_, r1 - r0, c1 - c0);
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = c0; j < c1; ++j) s.at(i - r0, j - c0) = at(i, j);
    return s;
  }

  Matrix col(std::size_t j) const { return slice(0, rows_, j, j + 1); }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    if (!same_field(a.f_, b.f_) || a.rows_ != b.rows_ || a.cols_ != b.cols_)
      return false;
    for (std::size_t k = 0; k < a.e_.size(); ++k)
      if (!(a.e_[k] == b.e_[k])) return false;
    return true;
  }
  friend bool operator!=(const Matrix& a, const Matrix& b) {
    return !(a == b);
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    require_input(same_field(a.f_, b.f_) && a.rows_ == b.rows_ &&
                      a.cols_ == b.cols_,
                  "shape or field mismatch in +");
    Matrix c = a;
    for (std::size_t k = 0; k < c.e_.size(); ++k) c.e_[k] = c.e_[k] + b.e_[k];
    return c;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    require_input(same_field(a.f_, b.f_) && a.rows_ == b.rows_ &&
                      a.cols_ == b.cols_,
                  "shape or field mismatch in -");
    Matrix c = a;
    for (std::size_t k = 0; k < c.e_.size(); ++k) c.e_[k] = c.e_[k] - b.e_[k];
    return c;
  }

  friend Matrix operator-(const Matrix& a) {
    Matrix c = a;
    for (auto& x : c.e_) x = -x;
    return c;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    require_input(same_field(a.f_, b.f_), "field mismatch in *");
    require_input(a.cols_ == b.rows_, "inner dimension mismatch in *");
    Matrix c(a.f_, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a.at(i, k).is_zero()) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          c.at(i, j) = c.at(i, j) + a.at(i, k) * b.at(k, j);
      }
    return c;
  }

  friend Matrix operator*(const Element& s, const Matrix& a) {
    Matrix c = a;
    for (auto& x : c.e_) x = s * x;
    return c;
  }

 private:
  FieldPtr f_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Element> e_;
};

inline Matrix hstack(const Matrix& a, const Matrix& b) {
  require_input(same_field(a.field(), b.field()) && a.rows() == b.rows(),
                "hstack mismatch");
  Matrix c(a.field(), a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c.at(i, j) = a.at(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j)
      c.at(i, a.cols() + j) = b.at(i, j);
  }
  return c;
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
  require_input(same_field(a.field(), b.field()) && a.cols() == b.cols(),
                "vstack mismatch");
  Matrix c(a.field(), a.rows() + b.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) c.at(i, j) = a.at(i, j);
    for (std::size_t i = 0; i < b.rows(); ++i)
      c.at(a.rows() + i, j) = b.at(i, j);
  }
  return c;
}

inline Matrix block_diag(const FieldPtr& f, std::span<const Matrix> blocks) {
  std::size_t r = 0, c = 0;
  for (const auto& b : blocks) {
    require_input(same_field(b.field(), f), "block field mismatch");
    r += b.rows();
    c += b.cols();
  }
  Matrix out(f, r, c);
  std::size_t ro = 0, co = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j)
        out.at(ro + i, co + j) = b.at(i, j);
    ro += b.rows();
    co += b.cols();
  }
  return out;
}

inline Matrix block_diag(const FieldPtr& f,
                         std::initializer_list<Matrix> blocks) {
  std::vector<Matrix> v(blocks);
  return block_diag(f, std::span<const Matrix>(v));
}

// Permutation matrix sending row/basis index k to position k of `order`:
// (P x)_k = x_{order[k]}.
inline Matrix row_selector(const FieldPtr& f,
                           const std::vector<std::size_t>& order,
                           std::size_t n) {
  Matrix m(f, order.size(), n);
  for (std::size_t k = 0; k < order.size(); ++k) {
    require_input(order[k] < n, "selector index out of range");
    m.at(k, order[k]) = f->one();
  }
  return m;
}

// Entry-wise application of a field embedding.
inline Matrix apply_embedding(const Matrix& m, const Embedding& emb) {
  Matrix out(emb.target, m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out.at(i, j) = emb.apply(m.at(i, j));
  return out;
}

inline Matrix lift_matrix(const Matrix& m, const FieldPtr& super) {
  Matrix out(super, m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out.at(i, j) = lift_into(m.at(i, j), super);
  return out;
}

struct RowReduced {
  Matrix R;                         // reduced row echelon form
  std::vector<std::size_t> pivots;  // pivot column per nonzero row
  std::size_t rank = 0;
};

namespace detail {

// Gauss-Jordan, first-nonzero pivoting; exact over any field.
inline RowReduced row_reduce_generic(Matrix W) {
  const FieldPtr& F = W.field();
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < W.cols() && row < W.rows(); ++col) {
    std::size_t pr = row;
    while (pr < W.rows() && W.at(pr, col).is_zero()) ++pr;
    if (pr == W.rows()) continue;
    if (pr != row)
      for (std::size_t j = 0; j < W.cols(); ++j)
        std::swap(W.at(pr, j), W.at(row, j));
    Element s = F->inv(W.at(row, col));
    for (std::size_t j = col; j < W.cols(); ++j)
      W.at(row, j) = s * W.at(row, j);
    for (std::size_t i = 0; i < W.rows(); ++i) {
      if (i == row || W.at(i, col).is_zero()) continue;
      Element m = W.at(i, col);
      for (std::size_t j = col; j < W.cols(); ++j)
        W.at(i, j) = W.at(i, j) - m * W.at(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return RowReduced{std::move(W), std::move(pivots), row};
}

// Scale each row by the lcm of its denominators; entries become integers.
inline void scale_rows_integral(Matrix& W) {
  const FieldPtr& F = W.field();
  for (std::size_t i = 0; i < W.rows(); ++i) {
    mpz_class l = 1;
    for (std::size_t j = 0; j < W.cols(); ++j)
      mpz_lcm(l.get_mpz_t(), l.get_mpz_t(),
              W.at(i, j).rational().get_den().get_mpz_t());
    if (l == 1) continue;
    Element s = F->from_rational(mpq_class(l));
    for (std::size_t j = 0; j < W.cols(); ++j)
      W.at(i, j) = s * W.at(i, j);
  }
}

// Fraction-free forward elimination (Bareiss) on integer entries, then a
// short rational back-substitution. Intermediate entries stay integral and
// polynomially sized.
inline RowReduced row_reduce_rational(Matrix W) {
  const FieldPtr& F = W.field();
  scale_rows_integral(W);
  std::vector<std::size_t> pivots;
  mpz_class prev = 1;
  std::size_t row = 0;
  for (std::size_t col = 0; col < W.cols() && row < W.rows(); ++col) {
    std::size_t pr = row;
    while (pr < W.rows() && W.at(pr, col).is_zero()) ++pr;
    if (pr == W.rows()) continue;
    if (pr != row)
      for (std::size_t j = 0; j < W.cols(); ++j)
        std::swap(W.at(pr, j), W.at(row, j));
    const mpz_class pv = W.at(row, col).rational().get_num();
    for (std::size_t i = row + 1; i < W.rows(); ++i) {
      const mpz_class m = W.at(i, col).rational().get_num();
      for (std::size_t j = col + 1; j < W.cols(); ++j) {
        mpz_class num = pv * W.at(i, j).rational().get_num() -
                        m * W.at(row, j).rational().get_num();
        mpz_class q;
        mpz_divexact(q.get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
        W.at(i, j) = F->from_rational(mpq_class(q));
      }
      W.at(i, col) = F->zero();
    }
    prev = pv;
    pivots.push_back(col);
    ++row;
  }
  // Normalize pivots to 1 and clear above, bottom-up; entry counts here are
  // small, so plain rational arithmetic is fine.
  for (std::size_t k = pivots.size(); k-- > 0;) {
    std::size_t col = pivots[k];
    Element s = F->inv(W.at(k, col));
    for (std::size_t j = col; j < W.cols(); ++j) W.at(k, j) = s * W.at(k, j);
    for (std::size_t i = 0; i < k; ++i) {
      if (W.at(i, col).is_zero()) continue;
      Element m = W.at(i, col);
      for (std::size_t j = col; j < W.cols(); ++j)
        W.at(i, j) = W.at(i, j) - m * W.at(k, j);
    }
  }
  return RowReduced{std::move(W), std::move(pivots), row};
}

}  // namespace detail

inline RowReduced row_reduce(const Matrix& m) {
  require_input(m.valid(), "row_reduce on an empty matrix value");
  if (m.field()->kind == FieldKind::Rationals)
    return detail::row_reduce_rational(m);
  return detail::row_reduce_generic(m);
}

inline std::size_t rank_of(const Matrix& m) { return row_reduce(m).rank; }

// Kernel basis as matrix columns, one per free column of the RREF, ordered
// by ascending free column; the free coordinate of each vector is 1.
inline Matrix kernel_basis(const Matrix& m) {
  RowReduced rr = row_reduce(m);
  const FieldPtr& F = m.field();
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : rr.pivots) is_pivot[c] = true;
  Matrix K(F, m.cols(), m.cols() - rr.rank);
  std::size_t out = 0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (is_pivot[c]) continue;
    K.at(c, out) = F->one();
    for (std::size_t r = 0; r < rr.rank; ++r)
      K.at(rr.pivots[r], out) = -rr.R.at(r, c);
    ++out;
  }
  return K;
}

// Solve M X = RHS column-wise; nullopt when inconsistent. Free variables
// are set to zero, so the solution is deterministic.
inline std::optional<Matrix> solve_linear(const Matrix& m,
                                          const Matrix& rhs) {
  require_input(m.rows() == rhs.rows(), "solve shape mismatch");
  RowReduced rr = row_reduce(hstack(m, rhs));
  for (auto c : rr.pivots)
    if (c >= m.cols()) return std::nullopt;
  Matrix X(m.field(), m.cols(), rhs.cols());
  for (std::size_t r = 0; r < rr.rank; ++r)
    for (std::size_t j = 0; j < rhs.cols(); ++j)
      X.at(rr.pivots[r], j) = rr.R.at(r, m.cols() + j);
  return X;
}

inline Element det(const Matrix& m) {
  require_input(m.is_square(), "determinant of a non-square matrix");
  const FieldPtr& F = m.field();
  std::size_t n = m.rows();
  if (n == 0) return F->one();
  Matrix W = m;
  bool negate = false;
  if (F->kind == FieldKind::Rationals) {
    // Track the row scaling used to reach integer entries, then run Bareiss;
    // the final pivot is det times the accumulated scale.
    mpq_class scale = 1;
    for (std::size_t i = 0; i < n; ++i) {
      mpz_class l = 1;
      for (std::size_t j = 0; j < n; ++j)
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(),
                W.at(i, j).rational().get_den().get_mpz_t());
      if (l != 1) {
        scale *= l;
        Element s = F->from_rational(mpq_class(l));
        for (std::size_t j = 0; j < n; ++j) W.at(i, j) = s * W.at(i, j);
      }
    }
    mpz_class prev = 1;
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pr = col;
      while (pr < n && W.at(pr, col).is_zero()) ++pr;
      if (pr == n) return F->zero();
      if (pr != col) {
        negate = !negate;
        for (std::size_t j = 0; j < n; ++j)
          std::swap(W.at(pr, j), W.at(col, j));
      }
      const mpz_class pv = W.at(col, col).rational().get_num();
      for (std::size_t i = col + 1; i < n; ++i) {
        const mpz_class mm = W.at(i, col).rational().get_num();
        for (std::size_t j = col + 1; j < n; ++j) {
          mpz_class num = pv * W.at(i, j).rational().get_num() -
                          mm * W.at(col, j).rational().get_num();
          mpz_class q;
          mpz_divexact(q.get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
          W.at(i, j) = F->from_rational(mpq_class(q));
        }
        W.at(i, col) = F->zero();
      }
      prev = pv;
    }
    mpq_class d = W.at(n - 1, n - 1).rational() / scale;
    if (negate) d = -d;
    return F->from_rational(d);
  }
  Element acc = F->one();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pr = col;
    while (pr < n && W.at(pr, col).is_zero()) ++pr;
    if (pr == n) return F->zero();
    if (pr != col) {
      negate = !negate;
      for (std::size_t j = 0; j < n; ++j)
        std::swap(W.at(pr, j), W.at(col, j));
    }
    acc = acc * W.at(col, col);
    Element s = F->inv(W.at(col, col));
    for (std::size_t i = col + 1; i < n; ++i) {
      if (W.at(i, col).is_zero()) continue;
      Element mlt = s * W.at(i, col);
      for (std::size_t j = col; j < n; ++j)
        W.at(i, j) = W.at(i, j) - mlt * W.at(col, j);
    }
  }
  return negate ? -acc : acc;
}

inline std::optional<Matrix> invert(const Matrix& m) {
  require_input(m.is_square(), "inverse of a non-square matrix");
  std::size_t n = m.rows();
  RowReduced rr = row_reduce(hstack(m, Matrix::identity(m.field(), n)));
  // m is invertible iff every pivot of [m | I] lands in the left block
  if (n == 0) return Matrix(m.field(), 0, 0);
  if (rr.pivots[n - 1] >= n) return std::nullopt;
  return rr.R.slice(0, n, n, 2 * n);
}

// Columns of m at the RREF pivot positions: a deterministic basis of the
// column space.
inline Matrix image_basis(const Matrix& m) {
  RowReduced rr = row_reduce(m);
  Matrix out(m.field(), m.rows(), rr.rank);
  for (std::size_t k = 0; k < rr.pivots.size(); ++k)
    for (std::size_t i = 0; i < m.rows(); ++i)
      out.at(i, k) = m.at(i, rr.pivots[k]);
  return out;
}

// True when every column of v lies in the span of the columns of basis.
inline bool in_span(const Matrix& basis, const Matrix& v) {
  return solve_linear(basis, v).has_value();
}

// Greedy extension: the columns of `pool`, scanned left to right, that grow
// the span of `indep`. Returns just the added columns.
inline Matrix extend_basis(const Matrix& indep, const Matrix& pool) {
  require_input(indep.rows() == pool.rows(), "extend_basis shape mismatch");
  Matrix cur = indep;
  Matrix added(indep.field(), indep.rows(), 0);
  for (std::size_t j = 0; j < pool.cols(); ++j) {
    Matrix c = pool.col(j);
    if (rank_of(hstack(cur, c)) > cur.cols()) {
      cur = hstack(cur, c);
      added = hstack(added, c);
    }
  }
  return added;
}

// Basis of the preimage B^{-1}(span S): x with B x in the span of S's
// columns. Includes Ker B.
inline Matrix preimage_basis(const Matrix& b, const Matrix& s) {
  require_input(b.rows() == s.rows(), "preimage shape mismatch");
  Matrix K = kernel_basis(hstack(b, -s));
  Matrix X = K.slice(0, b.cols(), 0, K.cols());
  return image_basis(X);
}

}  // namespace kron

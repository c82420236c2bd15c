#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cln/poly.hpp"

namespace cln {

class VecGF {
 public:
  VecGF() = default;
  VecGF(FieldPtr f, size_t n) : f_(std::move(f)), v_(n, 0) {}
  VecGF(FieldPtr f, std::vector<scalar> v) : f_(std::move(f)), v_(std::move(v)) {}

  const FieldPtr& field() const { return f_; }
  size_t size() const { return v_.size(); }
  scalar operator[](size_t i) const { return v_[i]; }
  scalar& operator[](size_t i) { return v_[i]; }
  const std::vector<scalar>& data() const { return v_; }
  std::vector<scalar>& data() { return v_; }

  bool is_zero() const;
  friend bool operator==(const VecGF& a, const VecGF& b) {
    return a.v_ == b.v_;
  }
  friend bool operator!=(const VecGF& a, const VecGF& b) {
    return a.v_ != b.v_;
  }

  VecGF operator+(const VecGF& o) const;
  VecGF operator-(const VecGF& o) const;
  VecGF operator*(scalar c) const;

  std::string to_text() const;
  static VecGF from_text(FieldPtr f, const std::string& text);

 private:
  FieldPtr f_;
  std::vector<scalar> v_;
};

/// Dense row-major matrix over F_q.
class MatGF {
 public:
  MatGF() = default;
  MatGF(FieldPtr f, unsigned rows, unsigned cols)
      : f_(std::move(f)), rows_(rows), cols_(cols), a_((size_t)rows * cols, 0) {}

  static MatGF identity(FieldPtr f, unsigned n);
  static MatGF zero(FieldPtr f, unsigned rows, unsigned cols) {
    return MatGF(std::move(f), rows, cols);
  }
  /// Companion matrix of a monic polynomial.
  static MatGF companion(const PolyGF& f);

  const FieldPtr& field() const { return f_; }
  unsigned rows() const { return rows_; }
  unsigned cols() const { return cols_; }
  scalar at(unsigned i, unsigned j) const { return a_[(size_t)i * cols_ + j]; }
  scalar& at(unsigned i, unsigned j) { return a_[(size_t)i * cols_ + j]; }
  const std::vector<scalar>& data() const { return a_; }

  friend bool operator==(const MatGF& a, const MatGF& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
  }
  friend bool operator!=(const MatGF& a, const MatGF& b) { return !(a == b); }

  MatGF operator+(const MatGF& o) const;
  MatGF operator-(const MatGF& o) const;
  MatGF operator*(const MatGF& o) const;
  VecGF operator*(const VecGF& v) const;
  MatGF transpose() const;
  /// Entrywise field automorphism theta.
  MatGF theta_entrywise() const;

  bool is_identity() const;
  VecGF row(unsigned i) const;
  VecGF col(unsigned j) const;
  void set_row(unsigned i, const VecGF& v);
  void set_col(unsigned j, const VecGF& v);
  /// Copies `b` into this matrix with top-left corner at (i0, j0).
  void paste(const MatGF& b, unsigned i0, unsigned j0);

  std::string to_text() const;
  static MatGF from_text(FieldPtr f, const std::string& text);

 private:
  FieldPtr f_;
  unsigned rows_ = 0, cols_ = 0;
  std::vector<scalar> a_;
};

unsigned rank(const MatGF& a);
MatGF mat_pow(const MatGF& a, u64 e);
std::optional<MatGF> try_inverse(const MatGF& a);
MatGF inverse(const MatGF& a);
scalar determinant(const MatGF& a);

struct AffineSolution {
  bool solvable = false;
  VecGF particular;
  std::vector<VecGF> kernel;  // basis of the homogeneous solution space
};

/// Exact solution set of A x = b.
AffineSolution solve_affine(const MatGF& a, const VecGF& b);

/// Monic characteristic polynomial via Hessenberg reduction.
PolyGF char_poly(const MatGF& a);

/// Evaluates a polynomial at a square matrix.
MatGF poly_at_matrix(const PolyGF& f, const MatGF& a);

/// rank(g - 1); input must be invertible.
unsigned degree_of(const MatGF& g);

/// min over eigenvalues (in the algebraic closure) of rank(g - lambda),
/// computed from the factored characteristic polynomial; input invertible.
unsigned support_of(const MatGF& g);

/// Exact multiplicative order; input must be invertible.
u64 element_order(const MatGF& g);

/// |C(g)| within an explicitly enumerated set of elements.
u64 centralizer_order_brute(const MatGF& g, const std::vector<MatGF>& group);

/// Row-space membership structure with incremental inserts. Rows are kept
/// in echelon form; optionally tracks expression coefficients in terms of
/// the inserted vectors.
class SpanGF {
 public:
  SpanGF(FieldPtr f, unsigned n, bool track_coords = false);

  unsigned dim() const { return (unsigned)rows_.size(); }
  unsigned ambient() const { return n_; }

  bool contains(const std::vector<scalar>& v) const;
  /// Inserts v; returns true if the dimension grew.
  bool insert(const std::vector<scalar>& v);
  /// Coordinates of v in terms of the vectors that strictly grew the span,
  /// in insertion order. Requires track_coords and containment.
  std::vector<scalar> coords(const std::vector<scalar>& v) const;

  /// Basis rows in echelon form.
  const std::vector<std::vector<scalar>>& rows() const { return rows_; }
  void reset();

 private:
  FieldPtr f_;
  unsigned n_ = 0;
  bool track_;
  std::vector<std::vector<scalar>> rows_;    // echelon rows
  std::vector<std::vector<scalar>> expr_;    // row i as combo of inserts
  std::vector<unsigned> pivots_;
  unsigned inserts_ = 0;
};

/// Row-packed matrix over F_2 (n <= 64 columns) for the hot paths.
class BitMat {
 public:
  BitMat() = default;
  BitMat(unsigned rows, unsigned cols);
  static BitMat identity(unsigned n);
  static BitMat from_mat(const MatGF& a);
  MatGF to_mat(const FieldPtr& f2) const;

  unsigned rows() const { return rows_; }
  unsigned cols() const { return cols_; }
  bool get(unsigned i, unsigned j) const { return (r_[i] >> j) & 1; }
  void set(unsigned i, unsigned j, bool v) {
    r_[i] = v ? (r_[i] | (1ULL << j)) : (r_[i] & ~(1ULL << j));
  }
  u64 row_bits(unsigned i) const { return r_[i]; }
  u64& row_bits(unsigned i) { return r_[i]; }

  friend bool operator==(const BitMat& a, const BitMat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.r_ == b.r_;
  }

  BitMat operator*(const BitMat& o) const;
  u64 apply(u64 v) const;  // v as column vector bitmask
  BitMat transpose() const;
  BitMat add(const BitMat& o) const;

  unsigned rank() const;
  std::optional<BitMat> try_inverse() const;
  BitMat pow(u64 e) const;
  bool is_identity() const;

 private:
  unsigned rows_ = 0, cols_ = 0;
  std::vector<u64> r_;
};

}  // namespace cln

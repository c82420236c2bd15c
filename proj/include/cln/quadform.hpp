#pragma once

#include <functional>
#include <optional>

#include "cln/matrix.hpp"
#include "cln/rng.hpp"

namespace cln {

/// Exact solution counting, uniform sampling, and enumeration for a
/// quadratic function
///
///   F(y) = sum_{i<=j} C[i][j] y_i y_j + sum_i L[i] y_i + c0
///
/// on K^m, any characteristic. The form is reduced once at construction to
/// an orthogonal sum of hyperbolic planes, an anisotropic plane, square and
/// Artin-Schreier pieces, a linear leftover, and free coordinates; counts
/// come from the per-block closed forms convolved over K, and sampling walks
/// the blocks with count-proportional choices, so it is exactly uniform.
class QuadSolver {
 public:
  QuadSolver(FieldPtr K, unsigned m, std::vector<scalar> upper_coeffs,
             std::vector<scalar> linear, scalar c0);

  unsigned vars() const { return m_; }

  u128 count(scalar target) const;
  /// Uniform over the solution set; nullopt iff empty.
  std::optional<std::vector<scalar>> sample(scalar target, Rng& rng) const;
  /// Streams solutions in a fixed canonical order; stop by returning false.
  void enumerate(scalar target,
                 const std::function<bool(const std::vector<scalar>&)>& cb) const;

  scalar eval(const std::vector<scalar>& y) const;

 private:
  struct Block {
    enum Type { Hyp, Aniso, OddSquare, EvenSquare, ArtinSchreier, Linear } type;
    // basis vectors in y-coordinates owned by this block (1 or 2)
    std::vector<std::vector<scalar>> basis;
    scalar a = 0, b = 0, c = 0;  // block form data
  };

  scalar qh(const std::vector<scalar>& v) const;
  scalar bform(const std::vector<scalar>& u, const std::vector<scalar>& v) const;
  scalar lin_at(const std::vector<scalar>& v) const;  // linear coeff at shift_
  u128 block_count(const Block& bl, scalar v) const;
  void block_values(const Block& bl, std::vector<scalar>& out) const;
  void block_solutions(const Block& bl, scalar v,
                       std::vector<std::vector<scalar>>& out) const;
  void canonicalize();

  FieldPtr K_;
  unsigned m_ = 0;
  std::vector<scalar> C_;  // m*m, upper-triangular storage
  std::vector<scalar> L_;
  scalar c0_ = 0;

  std::vector<Block> blocks_;
  std::vector<std::vector<scalar>> free_;  // free coordinates
  std::vector<scalar> shift_;
  scalar const_term_ = 0;  // constant after reduction
  // suffix_[k][v] = number of ways blocks k.. (plus free coords) sum to v
  std::vector<std::vector<u128>> suffix_;
};

}  // namespace cln

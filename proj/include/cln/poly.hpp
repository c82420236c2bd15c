#pragma once

#include <string>
#include <vector>

#include "cln/field.hpp"
#include "cln/rng.hpp"

namespace cln {

/// Dense polynomial over F_q, coefficients ascending, no trailing zeros.
/// The zero polynomial has an empty coefficient vector.
class PolyGF {
 public:
  PolyGF() = default;
  PolyGF(FieldPtr f, std::vector<scalar> coeffs);

  static PolyGF zero(FieldPtr f) { return PolyGF(std::move(f), {}); }
  static PolyGF constant(FieldPtr f, scalar c);
  static PolyGF x(FieldPtr f) { return PolyGF(std::move(f), {0, 1}); }

  const FieldPtr& field() const { return f_; }
  const std::vector<scalar>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  int degree() const { return (int)c_.size() - 1; }  // -1 for zero
  scalar coeff(size_t i) const { return i < c_.size() ? c_[i] : 0; }
  scalar leading() const { return c_.empty() ? 0 : c_.back(); }
  bool is_monic() const { return !c_.empty() && c_.back() == 1; }

  PolyGF monic() const;
  scalar eval(scalar x) const;

  friend PolyGF operator+(const PolyGF& a, const PolyGF& b);
  friend PolyGF operator-(const PolyGF& a, const PolyGF& b);
  friend PolyGF operator*(const PolyGF& a, const PolyGF& b);
  PolyGF operator*(scalar c) const;
  friend bool operator==(const PolyGF& a, const PolyGF& b) {
    return a.c_ == b.c_;
  }

  /// Quotient and remainder; divisor must be nonzero.
  static void divmod(const PolyGF& a, const PolyGF& b, PolyGF& quo, PolyGF& rem);
  PolyGF mod(const PolyGF& b) const;
  PolyGF divexact(const PolyGF& b) const;

  static PolyGF gcd(PolyGF a, PolyGF b);
  static PolyGF powmod(const PolyGF& base, u128 exp, const PolyGF& mod);

  /// Formal derivative.
  PolyGF derivative() const;

  /// "c0 c1 ... cd", ascending.
  std::string to_text() const;
  static PolyGF from_text(FieldPtr f, const std::string& text);

 private:
  FieldPtr f_;
  std::vector<scalar> c_;
  void trim();
};

struct PolyFactor {
  PolyGF factor;   // monic irreducible
  unsigned mult = 0;
};

/// Complete factorization of a nonzero polynomial into monic irreducibles
/// (distinct-degree then equal-degree splitting; deterministic root search
/// below degree 4). Factors are sorted by (degree, coefficient encoding).
/// The product of the factors times the leading unit reassembles the input.
std::vector<PolyFactor> factor_poly(const PolyGF& f);

bool is_irreducible_poly(const PolyGF& f);

/// All monic irreducibles of degree d over the field, sorted by encoding.
/// Size matches the necklace count (1/d) sum_{e|d} mu(e) q^{d/e}.
std::vector<PolyGF> irreducible_polys(const FieldPtr& f, unsigned d);

/// Necklace / Moebius count of monic irreducibles of degree d over F_q.
u64 count_irreducible_polys(u64 q, unsigned d);

}  // namespace cln

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cln/numutil.hpp"

namespace cln {

/// Field element, encoded canonically as an integer in [0, q). For an
/// extension field the encoding is the coefficient vector of the polynomial
/// representative read in base p, constant term in the lowest digit.
using scalar = std::uint32_t;

/// Immutable context for F_q, q = p^e <= 2^16, with log/antilog tables.
/// The defining modulus is the lexicographically least monic irreducible of
/// degree e over F_p, coefficients compared from the constant term up, so
/// element encodings are reproducible across runs. Instances are safe to
/// share freely between threads after construction.
class Field {
 public:
  static std::shared_ptr<const Field> make(u64 p, unsigned e);

  u64 p() const { return p_; }
  unsigned e() const { return e_; }
  u64 q() const { return q_; }
  /// Modulus coefficients c0..ce (ce = 1).
  const std::vector<scalar>& modulus() const { return modulus_; }
  std::string descriptor() const;  // "GF(p^e)"

  bool theta_defined() const { return e_ % 2 == 0; }
  /// sqrt(q); requires even e.
  u64 q0() const {
    if (!theta_defined()) throw ClnError("field: q0 undefined (odd degree)");
    return q0_;
  }

  scalar add(scalar a, scalar b) const {
    if (p_ == 2) return a ^ b;
    if (!add_table_.empty()) return add_table_[(size_t)a * q_ + b];
    return add_slow(a, b);
  }
  scalar neg(scalar a) const { return neg_table_[a]; }
  scalar sub(scalar a, scalar b) const { return add(a, neg_table_[b]); }
  scalar mul(scalar a, scalar b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[(size_t)log_[a] + log_[b]];
  }
  scalar inv(scalar a) const {
    if (a == 0) throw ClnError("field: inverse of zero");
    return exp_[qm1_ - log_[a]];
  }
  scalar div(scalar a, scalar b) const { return mul(a, inv(b)); }
  scalar pow(scalar a, u64 n) const {
    if (a == 0) return n == 0 ? 1 : 0;
    u64 r = ((u128)log_[a] * (n % qm1_)) % qm1_;
    return exp_[r];
  }

  /// The order-2 field automorphism x -> x^sqrt(q); requires even e.
  scalar theta(scalar a) const {
    if (!theta_defined()) throw ClnError("field: theta undefined (odd degree)");
    return theta_table_[a];
  }

  /// Trace x + theta(x) into the theta-fixed subfield.
  scalar theta_trace(scalar a) const { return add(a, theta(a)); }

  /// Some mu with mu + theta(mu) = v; v must be theta-fixed.
  scalar solve_theta_trace(scalar v) const {
    if (!theta_defined()) throw ClnError("field: theta undefined (odd degree)");
    scalar r = trace_solve_[v];
    if (r == (scalar)q_) throw ClnError("field: value not a theta-trace");
    return r;
  }

  /// Multiplicative generator (primitive element).
  scalar generator() const { return gen_; }
  u64 element_order(scalar a) const;
  /// Discrete log base generator(); input must be nonzero.
  u64 dlog(scalar a) const {
    if (a == 0) throw ClnError("field: dlog of zero");
    return log_[a];
  }

  bool is_square(scalar a) const {
    return a == 0 || (qm1_ % 2 == 1) || log_[a] % 2 == 0;
  }
  /// A square root; throws if the element is not a square.
  scalar sqrt(scalar a) const;
  /// Solves t^2 + t = a in even characteristic; false if no solution.
  bool artin_schreier_root(scalar a, scalar& t) const;

  /// For even e: canonical context for the theta-fixed subfield together
  /// with embedding tables between the two encodings.
  const std::shared_ptr<const Field>& subfield() const {
    if (!subfield_) throw ClnError("field: no subfield (odd degree)");
    return subfield_;
  }
  scalar embed_subfield(scalar sub_elt) const { return embed_[sub_elt]; }
  /// Inverse of embed_subfield; the input must be theta-fixed.
  scalar project_subfield(scalar elt) const;

 private:
  Field() = default;
  scalar add_slow(scalar a, scalar b) const;

  u64 p_ = 0, q_ = 0, qm1_ = 0, q0_ = 0;
  unsigned e_ = 0;
  std::vector<scalar> modulus_;
  scalar gen_ = 0;
  std::vector<scalar> exp_;   // size 2(q-1): powers of gen_, doubled
  std::vector<scalar> log_;   // log_[x] for x != 0
  std::vector<scalar> neg_table_;
  std::vector<scalar> add_table_;  // q*q, only for small non-binary q
  std::vector<scalar> theta_table_;
  std::vector<scalar> trace_solve_;  // even e: preimage under x + theta(x)
  std::vector<scalar> sqrt_table_;  // odd q: a root per square, else q
  std::vector<scalar> as2_table_;   // even q: t with t^2+t=a, else q
  std::shared_ptr<const Field> subfield_;
  std::vector<scalar> embed_;           // subfield encoding -> this encoding
  std::vector<scalar> project_;         // this encoding -> subfield, or q0
};

using FieldPtr = std::shared_ptr<const Field>;

/// Builds (and caches) the field with the canonical modulus.
FieldPtr make_field(u64 p, unsigned e);

/// Parses "GF(p^e)" / "GF(q)" descriptors.
FieldPtr parse_field(const std::string& descriptor);

}  // namespace cln

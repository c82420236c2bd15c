#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cln/matrix.hpp"
#include "cln/quadform.hpp"
#include "cln/rng.hpp"

namespace cln {

enum class SpaceKind {
  Linear,
  Symplectic,
  OrthogonalPlus,
  OrthogonalMinus,
  OrthogonalOdd,
  Unitary,
};

std::string kind_name(SpaceKind k);

/// Standard formed space on F_q^n: the zero form (linear), the alternating
/// form (symplectic), a quadratic form Q with its polar form (orthogonal
/// kinds), or a hermitian form (unitary). The standard model is an orthogonal
/// sum of hyperbolic planes on consecutive coordinate pairs followed by an
/// anisotropic tail:
///   Sp:   f(e_{2i}, e_{2i+1}) = 1
///   O+:   Q = sum x_{2i} x_{2i+1}
///   O-:   hyperbolic planes, then Q = x^2 + b xy + c y^2 on the last two
///         coordinates with t^2 + bt + c the canonical irreducible quadratic
///   O odd n: hyperbolic planes, then Q = x^2 on the last coordinate
///   GU:   f(e_{2i}, e_{2i+1}) = f(e_{2i+1}, e_{2i}) = 1, and f(e_n, e_n) = 1
///         for odd n; f is linear in the first slot, theta-semilinear in the
///         second
class FormedSpace {
 public:
  static std::shared_ptr<const FormedSpace> make(SpaceKind kind, unsigned n,
                                                 FieldPtr field);

  SpaceKind kind() const { return kind_; }
  unsigned dim() const { return n_; }
  const FieldPtr& field() const { return f_; }
  const MatGF& gram() const { return gram_; }
  /// Upper-triangular Q coefficients; orthogonal kinds only.
  const MatGF& quad_matrix() const;

  bool is_orthogonal() const {
    return kind_ == SpaceKind::OrthogonalPlus ||
           kind_ == SpaceKind::OrthogonalMinus ||
           kind_ == SpaceKind::OrthogonalOdd;
  }
  bool is_formed() const { return kind_ != SpaceKind::Linear; }
  bool is_unitary() const { return kind_ == SpaceKind::Unitary; }

  /// q_0 convention: 1 (linear, symplectic), q (orthogonal), sqrt(q) (unitary).
  u64 q0() const { return q0_; }
  /// Minimal degree of a nontrivial element of the derived group.
  unsigned minimal_degree() const { return is_orthogonal() ? 2 : 1; }
  /// 2 for orthogonal kinds in even characteristic, 1 otherwise.
  unsigned kappa() const {
    return (is_orthogonal() && f_->p() == 2) ? 2 : 1;
  }

  scalar form(const VecGF& u, const VecGF& v) const;
  /// Row r with f(v, b) = sum_i v_i r_i for all v (f linear in first slot).
  std::vector<scalar> form_row(const VecGF& b) const;
  scalar quad(const VecGF& v) const;
  /// The values Q can take: {0}, all of F_q, or the theta-fixed subfield.
  std::vector<scalar> q_value_space() const;

  bool is_isometry(const MatGF& g) const;

  VecGF basis_vector(unsigned i) const;

  std::string descriptor() const;  // "GL(n,q)", "Sp(n,q)", "GO+(n,q)", ...

  /// Orthogonal basis with all Q-values nonzero (odd-characteristic
  /// orthogonal kinds only; used by the reflection decomposition).
  const std::vector<VecGF>& orthogonal_basis() const;

 private:
  FormedSpace() = default;

  FieldPtr f_;
  SpaceKind kind_ = SpaceKind::Linear;
  unsigned n_ = 0;
  u64 q0_ = 1;
  MatGF gram_;
  MatGF quad_;
  std::vector<VecGF> obasis_;
};

using SpacePtr = std::shared_ptr<const FormedSpace>;

/// Standard space from a descriptor like "Sp(4,3)" or "GU(3,4)".
SpacePtr parse_space(const std::string& descriptor);

// --- quadric counting and sampling on affine cosets -------------------------

/// Exact |{v in v0 + span(W) : Q(v) = target}|. W entries must be
/// independent. For linear and symplectic kinds the only admissible target
/// is 0. For unitary spaces the target must be theta-fixed.
u128 count_quadric_points(const FormedSpace& sp, const VecGF& v0,
                          const std::vector<VecGF>& W, scalar target);

/// Exactly uniform over the same set; nullopt iff the set is empty.
std::optional<VecGF> sample_quadric_point(const FormedSpace& sp,
                                          const VecGF& v0,
                                          const std::vector<VecGF>& W,
                                          scalar target, Rng& rng);

/// Counts for every target in q_value_space() at once (one reduction).
std::vector<u128> count_quadric_points_all_targets(const FormedSpace& sp,
                                                   const VecGF& v0,
                                                   const std::vector<VecGF>& W);

struct QuadricBoundReport {
  u64 cosets = 0, checks = 0, violations = 0;
};

/// Exhaustively verifies the two-sided counting bound
/// |count - q^{n-s}/q0| <= q^{n/2} over every affine coset of codimension
/// <= max_codim and every admissible target value.
QuadricBoundReport verify_counting_bound(const FormedSpace& sp,
                                         unsigned max_codim);

/// Affine form conditions on a sought vector v: dot(v, rows[t]) = vals[t].
struct FormConditions {
  std::vector<std::vector<scalar>> rows;
  std::vector<scalar> vals;
  void add(std::vector<scalar> row, scalar val) {
    rows.push_back(std::move(row));
    vals.push_back(val);
  }
};

/// Uniform sample of v with the given affine conditions, Q(v) = qtarget, and
/// v outside the excluded span (when given). nullopt iff the set is empty.
/// This realizes the conditional law of a free choice.
std::optional<VecGF> sample_conditioned_vector(const FormedSpace& sp,
                                               const FormConditions& cond,
                                               scalar qtarget,
                                               const SpanGF* excluded,
                                               Rng& rng);

/// Count of the same set (exact; used for orbit sizes).
u128 count_conditioned_vectors(const FormedSpace& sp,
                               const FormConditions& cond, scalar qtarget,
                               const SpanGF* excluded);

// --- abelian invariants ------------------------------------------------------

/// Abelianization of the full isometry group GCl:
///   GL: cyclic of order q-1 (determinant);
///   Sp: trivial;
///   GO, q odd: Klein four group (determinant sign, spinor norm class);
///   GO, q even: order 2 (Dickson invariant);
///   GU: cyclic of order q0+1 (determinant, a norm-one element).
struct AbGroup {
  enum Structure { Trivial, Cyclic, Klein };
  Structure structure = Trivial;
  u32 order = 1;
  u32 op(u32 a, u32 b) const {
    return structure == Klein ? (a ^ b) : (u32)(((u64)a + b) % order);
  }
  u32 inv(u32 a) const {
    return structure == Klein ? a : (u32)((order - a) % order);
  }
};

AbGroup ab_group(const FormedSpace& sp);

/// Invariant code of an isometry within ab_group(sp). Throws if g is not an
/// isometry of sp.
u32 ab_invariant(const FormedSpace& sp, const MatGF& g);

/// A fixed coset representative with the given invariant code, supported on
/// the first one or two coordinates (identity elsewhere).
MatGF ab_rep(const FormedSpace& sp, u32 code);

// --- constructive Witt machinery --------------------------------------------

/// Extends the partial isometry u_i -> v_i to a full isometry g (g u_i = v_i
/// for all i). Preconditions per Witt's lemma: the u_i independent, the v_i
/// independent, all pairwise form values and Q-values match; throws
/// otherwise. With want_derived set (requires k <= n-2), the result
/// additionally has trivial abelian invariant.
MatGF extend_isometry(const FormedSpace& sp, const std::vector<VecGF>& us,
                      const std::vector<VecGF>& vs, bool want_derived,
                      Rng& rng);

struct WittDecomposition {
  // hyperbolic pairs (w, w') with Q(w) = Q(w') = 0, f(w, w') = 1
  std::vector<std::pair<VecGF, VecGF>> hyperbolic;
  std::vector<VecGF> anisotropic;  // dim <= 2
};

WittDecomposition witt_decompose(const FormedSpace& sp);

}  // namespace cln

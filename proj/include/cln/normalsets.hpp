#pragma once

#include <map>

#include "cln/trajectory.hpp"

namespace cln {

/// Star involution p*(t) = p(0)^{-1} t^d p(1/t), with theta acting on the
/// coefficients first in the unitary case. Requires p monic with p(0) != 0.
PolyGF star_poly(const PolyGF& p, bool unitary_twist);

/// Default block degree max(ceil(log_q(4n)), 2).
unsigned default_block_degree(unsigned n, u64 q);

/// Bookkeeping for the block-element construction: the space splits as
/// L | V_1 | ... | V_k | R | W with dim L = 2 (linear) or 2 kappa + 2,
/// dim V_i = d (linear) or 2d, dim R = 1 or 2, and W absorbing the
/// remainder plus the anisotropic part.
struct BlockSpec {
  GroupDesc desc;
  unsigned d = 0;
  u32 alpha = 0;  // target abelianization code; must lie in desc's level

  unsigned kappa = 1, k = 0, r = 0, dim_van = 0, delta = 0;

  static BlockSpec make(GroupDesc desc, unsigned d, u32 alpha);
};

/// Builds the block element for the chosen polynomials: a transvection-like
/// action on L, companion multiplication (extended form-preservingly to the
/// dual singular block) on each V_i, an invariant-correcting element on R,
/// and the identity on W. The power kappa (q^d - 1) of the result has
/// minimal degree in the derived group.
///
/// polys must be monic irreducibles of degree d, pairwise distinct; in the
/// formed kinds additionally p != p* and star-pairs pairwise disjoint.
MatGF build_block_element(const BlockSpec& spec,
                          const std::vector<PolyGF>& polys);

/// Membership in the minimal-degree normal set of the derived group:
/// a nontrivial derived-group element of degree exactly s (1, or 2 for the
/// orthogonal kinds).
bool is_minimal_degree_element(const FormedSpace& sp, const MatGF& g);

struct MinimalWordSearch {
  bool found = false;
  Word inner;      // word u over the inner generators
  u64 exponent = 0;  // kappa (q^d - 1)
  MatGF witness;   // (x0 * u(x1..xk))^exponent, re-verified
  u64 words_tested = 0;
};

/// Enumerates reduced words u over x_1..x_k in the pinned order (length,
/// then lexicographic) and returns the first u such that
/// (x0 * u(x1..xk))^(kappa (q^d - 1)) lands in the minimal-degree set.
/// xs = {x0, x1, ..., xk}.
MinimalWordSearch search_word_to_minimal_degree(const FormedSpace& sp,
                                                const std::vector<MatGF>& xs,
                                                unsigned max_len, unsigned d);

struct GenerationCertificate {
  bool found_cyclic = false;  // irreducible element of order d (p^n-1)/(p-1)
  Word cyclic_word;
  bool found_split = false;   // order p^(n-1)-1, splitting V as line + hyperplane
  Word split_word;
  u64 words_tested = 0;
};

/// Searches words x * u(y, z) for witnesses of the two generation classes
/// over GL_n(p), p prime. The tests are: irreducible characteristic
/// polynomial with (p^n-1)/(p-1) dividing the element order; and element
/// order exactly p^(n-1)-1 with characteristic polynomial splitting into
/// distinct irreducibles of degrees {1, n-1}.
GenerationCertificate generation_certificate(const MatGF& x, const MatGF& y,
                                             const MatGF& z, unsigned max_len);

/// True iff g matches the rational-canonical-form proxy pattern of the
/// block-element class: k distinct degree-d irreducible factors of
/// multiplicity one (star-paired in the formed kinds), all other factors of
/// degree at most two, and a single Jordan block of size two at eigenvalue
/// one. Exact for GL; an upper-compatible proxy for the formed kinds.
bool matches_block_pattern(const BlockSpec& spec, const MatGF& g);

/// Monte Carlo density of the proxy pattern among uniform samples of the
/// group, bucketed by abelianization fibre.
std::map<u32, FreqEstimate> estimate_block_density(const BlockSpec& spec,
                                                   u64 trials, Rng& rng);

}  // namespace cln

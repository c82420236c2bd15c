#include "cln/normalsets.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cln {

PolyGF star_poly(const PolyGF& p, bool unitary_twist) {
  const Field& F = *p.field();
  if (!p.is_monic() || p.degree() < 1)
    throw ClnError("star_poly: needs a monic polynomial of degree >= 1");
  if (p.coeff(0) == 0) throw ClnError("star_poly: p(0) must be nonzero");
  std::vector<scalar> c = p.coeffs();
  if (unitary_twist)
    for (auto& x : c) x = F.theta(x);
  std::reverse(c.begin(), c.end());  // t^d p(1/t); leading coeff is old p(0)
  scalar lead_inv = F.inv(c.back());
  for (auto& x : c) x = F.mul(x, lead_inv);
  return PolyGF(p.field(), std::move(c));
}

unsigned default_block_degree(unsigned n, u64 q) {
  unsigned d = 2;
  while (ipow128(q, d) <= (u128)4 * n) ++d;
  return d;
}

BlockSpec BlockSpec::make(GroupDesc desc, unsigned d, u32 alpha) {
  const FormedSpace& sp = *desc.space();
  unsigned n = sp.dim();
  if (d < 2 || d > n)
    throw ClnError("block spec: d must lie in [2, n]");
  if (!desc.level_contains(alpha))
    throw ClnError("block spec: alpha is outside the group's level");
  BlockSpec spec{std::move(desc), d, alpha};
  spec.kappa = sp.kappa();
  if (sp.kind() == SpaceKind::Linear) {
    if (n < 3) throw ClnError("block spec: linear kind needs n >= 3");
    spec.dim_van = 0;
    spec.delta = 3;
    spec.k = (n - 3) / d;
    spec.r = (n - 3) % d;
  } else {
    switch (sp.kind()) {
      case SpaceKind::OrthogonalMinus: spec.dim_van = 2; break;
      case SpaceKind::OrthogonalOdd: spec.dim_van = 1; break;
      case SpaceKind::Unitary: spec.dim_van = n % 2; break;
      default: spec.dim_van = 0;
    }
    spec.delta = spec.dim_van + 4 + 2 * spec.kappa;
    if (n < spec.delta)
      throw ClnError("block spec: dimension too small for the decomposition");
    unsigned D = 2 * d;
    spec.k = (n - spec.delta) / D;
    spec.r = (n - spec.delta) % D;
  }
  return spec;
}

namespace {

// local representative on one hyperbolic plane (or the leading coordinate
// for the linear kind) realizing the requested invariant code, identity
// elsewhere
MatGF plane_invariant_rep(const FormedSpace& sp, unsigned offset, u32 code) {
  const Field& F = *sp.field();
  const FieldPtr& f = sp.field();
  unsigned n = sp.dim();
  if (sp.kind() == SpaceKind::Linear) {
    MatGF m = MatGF::identity(f, n);
    m.at(offset, offset) = F.pow(F.generator(), code);
    return m;
  }
  if (sp.kind() == SpaceKind::Symplectic) {
    if (code != 0) throw ClnError("plane rep: symplectic has trivial abelianization");
    return MatGF::identity(f, n);
  }
  if (sp.is_unitary()) {
    u64 q0 = F.q0();
    u64 t = (q0 + 1 - code % (q0 + 1)) % (q0 + 1);
    scalar a = F.pow(F.generator(), t);
    MatGF m = MatGF::identity(f, n);
    m.at(offset, offset) = a;
    m.at(offset + 1, offset + 1) = F.inv(F.theta(a));
    return m;
  }
  // orthogonal: candidates on the plane at `offset`
  std::vector<MatGF> candidates;
  MatGF id = MatGF::identity(f, n);
  MatGF sw = id;
  sw.at(offset, offset) = 0;
  sw.at(offset + 1, offset + 1) = 0;
  sw.at(offset, offset + 1) = 1;
  sw.at(offset + 1, offset) = 1;
  candidates.push_back(id);
  candidates.push_back(sw);
  if (F.p() != 2) {
    MatGF rot = id;
    rot.at(offset, offset) = F.generator();
    rot.at(offset + 1, offset + 1) = F.inv(F.generator());
    candidates.push_back(rot);
    candidates.push_back(sw * rot);
  }
  for (const auto& c : candidates)
    if (sp.is_isometry(c) && ab_invariant(sp, c) == code) return c;
  throw ClnError("plane rep: no representative realizes the requested code");
}

}  // namespace

MatGF build_block_element(const BlockSpec& spec,
                          const std::vector<PolyGF>& polys) {
  const FormedSpace& sp = *spec.desc.space();
  const Field& F = *sp.field();
  const FieldPtr& f = sp.field();
  const unsigned n = sp.dim();
  const unsigned d = spec.d;
  const bool linear = sp.kind() == SpaceKind::Linear;
  const bool unitary = sp.is_unitary();

  if (polys.size() != spec.k)
    throw ClnError("block element: expected exactly k polynomials");
  for (const auto& p : polys) {
    if ((unsigned)p.degree() != d || !p.is_monic() || !is_irreducible_poly(p))
      throw ClnError("block element: polynomials must be monic irreducible of degree d");
    if (p.field() != sp.field())
      throw ClnError("block element: polynomial field mismatch");
  }
  for (size_t i = 0; i < polys.size(); ++i)
    for (size_t j = i + 1; j < polys.size(); ++j)
      if (polys[i] == polys[j])
        throw ClnError("block element: polynomials must be pairwise distinct");
  if (!linear) {
    for (size_t i = 0; i < polys.size(); ++i) {
      PolyGF s_i = star_poly(polys[i], unitary);
      if (s_i == polys[i])
        throw ClnError("block element: star-symmetric polynomial (p = p*)");
      for (size_t j = i + 1; j < polys.size(); ++j)
        if (s_i == polys[j])
          throw ClnError("block element: star-paired polynomials collide");
    }
  }

  MatGF g = MatGF::identity(f, n);

  if (linear) {
    // L: 2x2 transvection at the front
    g.at(0, 1) = 1;
    unsigned pos = 2;
    for (const auto& p : polys) {
      g.paste(MatGF::companion(p), pos, pos);
      pos += d;
    }
    // R at position pos (W = identity tail); corrected below
    unsigned rpos = pos;
    u32 beta = ab_invariant(sp, g);
    AbGroup ab = ab_group(sp);
    u32 need = ab.op(spec.alpha, ab.inv(beta));
    g.at(rpos, rpos) = F.pow(F.generator(), need);
    if (ab_invariant(sp, g) != spec.alpha)
      throw ClnError("block element: invariant correction failed (internal)");
    return g;
  }

  // formed kinds: plane-structured layout
  // plane p occupies coordinates (2p, 2p+1)
  unsigned plane = 0;
  auto vcoord = [&](unsigned plane_idx) { return 2 * plane_idx; };
  auto wcoord = [&](unsigned plane_idx) { return 2 * plane_idx + 1; };

  // L block: kappa+1 planes
  {
    unsigned m = spec.kappa + 1;
    if (sp.kind() == SpaceKind::Symplectic || unitary) {
      // transvection: w1 -> lambda v1 + w1, everything else fixed on L
      scalar lambda = 1;
      if (unitary) {
        // nonzero lambda with lambda + theta(lambda) = 0
        lambda = 0;
        for (u64 a = 1; a < F.q(); ++a)
          if (F.theta_trace((scalar)a) == 0) {
            lambda = (scalar)a;
            break;
          }
        if (lambda == 0)
          throw ClnError("block element: no trace-zero scalar (internal)");
      }
      g.at(vcoord(plane), wcoord(plane)) = lambda;
    } else {
      // orthogonal: unipotent A on the v's, A^{-T} on the w's
      MatGF A = MatGF::identity(f, m);
      for (unsigned i = 0; i + 1 < m; ++i) A.at(i, i + 1) = 1;
      MatGF Ainv_t = inverse(A).transpose();
      for (unsigned i = 0; i < m; ++i)
        for (unsigned j = 0; j < m; ++j) {
          g.at(vcoord(plane + i), vcoord(plane + j)) = A.at(i, j);
          g.at(wcoord(plane + i), wcoord(plane + j)) = Ainv_t.at(i, j);
        }
    }
    plane += m;
  }

  // V_i blocks: companion on the v's, form-preserving dual on the w's
  for (const auto& p : polys) {
    MatGF C = MatGF::companion(p);
    MatGF Dual = inverse(C).transpose();
    if (unitary) Dual = Dual.theta_entrywise();
    for (unsigned i = 0; i < d; ++i)
      for (unsigned j = 0; j < d; ++j) {
        g.at(vcoord(plane + i), vcoord(plane + j)) = C.at(i, j);
        g.at(wcoord(plane + i), wcoord(plane + j)) = Dual.at(i, j);
      }
    plane += d;
  }

  unsigned rplane = plane;  // R: one hyperbolic plane; W: the rest
  if (!sp.is_isometry(g))
    throw ClnError("block element: assembled non-isometry (internal)");
  u32 beta = ab_invariant(sp, g);
  AbGroup ab = ab_group(sp);
  u32 need = ab.op(spec.alpha, ab.inv(beta));
  if (need != 0) {
    MatGF rep = plane_invariant_rep(sp, vcoord(rplane), need);
    g = g * rep;  // rep acts only on the R plane, which g fixes
  }
  if (!sp.is_isometry(g) || ab_invariant(sp, g) != spec.alpha)
    throw ClnError("block element: invariant correction failed (internal)");

  // postcondition: the induced minimal polynomial on each V_i is p_i p_i*
  {
    unsigned pl = spec.kappa + 1;
    for (const auto& p : polys) {
      MatGF block(f, 2 * d, 2 * d);
      for (unsigned i = 0; i < 2 * d; ++i)
        for (unsigned j = 0; j < 2 * d; ++j) {
          unsigned gi = (i % 2 == 0) ? vcoord(pl + i / 2) : wcoord(pl + i / 2);
          unsigned gj = (j % 2 == 0) ? vcoord(pl + j / 2) : wcoord(pl + j / 2);
          block.at(i, j) = g.at(gi, gj);
        }
      PolyGF ps = star_poly(p, unitary);
      PolyGF prod = p * ps;
      MatGF zero = poly_at_matrix(prod, block);
      bool annihilates = true;
      for (unsigned i = 0; i < 2 * d && annihilates; ++i)
        for (unsigned j = 0; j < 2 * d && annihilates; ++j)
          if (zero.at(i, j) != 0) annihilates = false;
      if (!annihilates)
        throw ClnError("block element: V block minimal polynomial mismatch");
      if (rank(poly_at_matrix(p, block)) == 0 ||
          rank(poly_at_matrix(ps, block)) == 0)
        throw ClnError("block element: V block degenerates to one factor");
      pl += d;
    }
  }
  return g;
}

bool is_minimal_degree_element(const FormedSpace& sp, const MatGF& g) {
  if (g.rows() != sp.dim() || g.cols() != sp.dim()) return false;
  if (g.is_identity()) return false;
  if (!sp.is_isometry(g)) return false;
  if (ab_invariant(sp, g) != 0) return false;
  return degree_of(g) == sp.minimal_degree();
}

MinimalWordSearch search_word_to_minimal_degree(const FormedSpace& sp,
                                                const std::vector<MatGF>& xs,
                                                unsigned max_len, unsigned d) {
  if (xs.size() < 2)
    throw ClnError("minimal-degree search: need x0 plus at least one generator");
  const Field& F = *sp.field();
  unsigned k = (unsigned)xs.size() - 1;
  u64 m = (u64)sp.kappa() * ((u64)ipow128(F.q(), d) - 1);
  MinimalWordSearch out;
  out.exponent = m;

  const bool packed = F.q() == 2 && sp.dim() <= 64 &&
                      sp.kind() == SpaceKind::Linear;
  std::vector<MatGF> gens_pos(xs.begin() + 1, xs.end()), gens_neg;
  for (const auto& x : gens_pos) gens_neg.push_back(inverse(x));
  std::vector<BitMat> bpos, bneg;
  BitMat bx0;
  if (packed) {
    bx0 = BitMat::from_mat(xs[0]);
    for (const auto& x : gens_pos) bpos.push_back(BitMat::from_mat(x));
    for (const auto& x : gens_neg) bneg.push_back(BitMat::from_mat(x));
  }

  WordEnumerator en(k, max_len);
  Word u;
  while (en.next(u)) {
    out.words_tested++;
    bool hit = false;
    MatGF candidate;
    if (packed) {
      BitMat acc = BitMat::identity(sp.dim());
      for (int l : u.letters()) {
        unsigned i = (unsigned)(l > 0 ? l : -l) - 1;
        acc = (l > 0 ? bpos[i] : bneg[i]) * acc;
      }
      BitMat h = bx0 * acc;
      BitMat power = h.pow(m);
      if (!power.is_identity() &&
          power.add(BitMat::identity(sp.dim())).rank() == sp.minimal_degree()) {
        candidate = power.to_mat(sp.field());
        hit = true;
      }
    } else {
      MatGF acc = MatGF::identity(sp.field(), sp.dim());
      for (int l : u.letters()) {
        unsigned i = (unsigned)(l > 0 ? l : -l) - 1;
        acc = (l > 0 ? gens_pos[i] : gens_neg[i]) * acc;
      }
      MatGF power = mat_pow(xs[0] * acc, m);
      if (!power.is_identity() &&
          rank(power - MatGF::identity(sp.field(), sp.dim())) ==
              sp.minimal_degree()) {
        candidate = power;
        hit = true;
      }
    }
    if (hit && is_minimal_degree_element(sp, candidate)) {
      out.found = true;
      out.inner = u;
      out.witness = candidate;
      return out;
    }
  }
  return out;
}

GenerationCertificate generation_certificate(const MatGF& x, const MatGF& y,
                                             const MatGF& z,
                                             unsigned max_len) {
  const FieldPtr& f = x.field();
  const Field& F = *f;
  if (F.e() != 1)
    throw ClnError("generation certificate: defined over prime fields only");
  unsigned n = x.rows();
  u64 p = F.p();
  u128 pn = ipow128(p, n);
  if (pn > ((u128)1 << 62))
    throw ClnError("generation certificate: p^n too large for order tests");
  u64 cyclic_quot = (u64)((pn - 1) / (p - 1));
  u64 split_order = (u64)(ipow128(p, n - 1) - 1);

  auto is_cyclic_witness = [&](const MatGF& g) {
    if (rank(g) != n) return false;
    PolyGF cp = char_poly(g);
    if (!is_irreducible_poly(cp)) return false;
    u64 ord = element_order(g);
    return ord % cyclic_quot == 0;
  };
  auto is_split_witness = [&](const MatGF& g) {
    if (rank(g) != n) return false;
    auto factors = factor_poly(char_poly(g));
    if (factors.size() != 2) return false;
    unsigned d0 = (unsigned)factors[0].factor.degree();
    unsigned d1 = (unsigned)factors[1].factor.degree();
    if (factors[0].mult != 1 || factors[1].mult != 1) return false;
    if (!((d0 == 1 && d1 == n - 1) || (d0 == n - 1 && d1 == 1))) return false;
    return element_order(g) == split_order;
  };

  GenerationCertificate out;
  std::vector<MatGF> yz = {y, z};
  WordEnumerator en(2, max_len);
  Word u;
  while (en.next(u) && !(out.found_cyclic && out.found_split)) {
    out.words_tested++;
    MatGF h = x * evaluate_word(u, yz);
    if (!out.found_cyclic && is_cyclic_witness(h)) {
      out.found_cyclic = true;
      out.cyclic_word = u;
    }
    if (!out.found_split && is_split_witness(h)) {
      out.found_split = true;
      out.split_word = u;
    }
  }
  return out;
}

bool matches_block_pattern(const BlockSpec& spec, const MatGF& g) {
  const FormedSpace& sp = *spec.desc.space();
  const Field& F = *sp.field();
  unsigned n = sp.dim();
  if (rank(g) != n) return false;
  auto factors = factor_poly(char_poly(g));
  std::vector<PolyGF> deg_d;
  unsigned m1 = 0;  // multiplicity of (t - 1)
  for (const auto& pf : factors) {
    unsigned deg = (unsigned)pf.factor.degree();
    if (deg == spec.d) {
      if (pf.mult != 1) return false;
      deg_d.push_back(pf.factor);
    } else if (deg > 2) {
      return false;
    } else if (deg == 1 && pf.factor.coeff(0) == F.neg(1)) {
      m1 = pf.mult;
    }
  }
  unsigned expect = sp.kind() == SpaceKind::Linear ? spec.k : 2 * spec.k;
  if (deg_d.size() != expect) return false;
  if (sp.is_formed()) {
    // must split into k star-pairs with p != p*
    std::set<std::vector<scalar>> pool;
    for (const auto& p : deg_d) pool.insert(p.coeffs());
    for (const auto& p : deg_d) {
      PolyGF s = star_poly(p, sp.is_unitary());
      if (s == p) return false;
      if (!pool.count(s.coeffs())) return false;
    }
  }
  // unipotent structure at eigenvalue 1: for GL exactly one Jordan block of
  // size 2; for the formed kinds the L block gives two blocks of size
  // kappa+1 and the R correction may add one of size 2 (upper-compatible)
  if (m1 < 2) return false;
  MatGF gm1 = g - MatGF::identity(sp.field(), n);
  unsigned k1 = n - rank(gm1);
  if (sp.kind() == SpaceKind::Linear) {
    unsigned k2 = n - rank(gm1 * gm1);
    if (k1 != m1 - 1 || k2 != m1) return false;
  } else {
    unsigned kappa = sp.kappa();
    MatGF pw = gm1;
    for (unsigned i = 1; i < kappa + 1; ++i) pw = pw * gm1;
    if (n - rank(pw) != m1) return false;            // blocks of size <= kappa+1
    if (m1 - k1 > 2 * kappa + 1) return false;       // at most 3 nontrivial blocks
  }
  return ab_invariant(sp, g) == spec.alpha;
}

std::map<u32, FreqEstimate> estimate_block_density(const BlockSpec& spec,
                                                   u64 trials, Rng& rng) {
  const FormedSpace& sp = *spec.desc.space();
  std::map<u32, std::pair<u64, u64>> buckets;  // code -> (hits, draws)
  for (u64 it = 0; it < trials; ++it) {
    MatGF g = sample_uniform(spec.desc, rng);
    u32 code = ab_invariant(sp, g);
    auto& b = buckets[code];
    b.second++;
    BlockSpec probe = spec;
    probe.alpha = code;
    if (spec.desc.level_contains(code) && matches_block_pattern(probe, g))
      b.first++;
  }
  std::map<u32, FreqEstimate> out;
  for (auto& [code, hd] : buckets) {
    FreqEstimate est;
    est.hits = hd.first;
    est.trials = hd.second;
    est.wilson = wilson_interval(est.hits, std::max<u64>(est.trials, 1));
    out[code] = est;
  }
  return out;
}

}  // namespace cln

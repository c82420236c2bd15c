#include <cmath>
#include <set>

#include "cln/normalsets.hpp"
#include "doctest.h"

using namespace cln;

namespace {

// k pairwise-disjoint star-pair representatives of degree d, or empty if
// the inventory is too small
std::vector<PolyGF> pick_star_pairs(const FieldPtr& f, unsigned d,
                                    bool unitary, unsigned k) {
  auto all = irreducible_polys(f, d);
  std::vector<PolyGF> out;
  std::set<std::vector<scalar>> used;
  for (const auto& p : all) {
    if (out.size() == k) break;
    if (p.coeff(0) == 0) continue;
    if (used.count(p.coeffs())) continue;
    PolyGF s = star_poly(p, unitary);
    if (s == p) continue;
    out.push_back(p);
    used.insert(p.coeffs());
    used.insert(s.coeffs());
  }
  if (out.size() != k) out.clear();
  return out;
}

std::vector<PolyGF> pick_distinct(const FieldPtr& f, unsigned d, unsigned k) {
  auto all = irreducible_polys(f, d);
  if (all.size() < k) return {};
  return {all.begin(), all.begin() + k};
}

}  // namespace

TEST_CASE("star involution examples") {
  auto F3 = make_field(3, 1);
  CHECK(star_poly(PolyGF(F3, {2, 1, 1}), false) == PolyGF(F3, {2, 2, 1}));
  auto F2 = make_field(2, 1);
  CHECK(star_poly(PolyGF(F2, {1, 1, 1}), false) == PolyGF(F2, {1, 1, 1}));
  CHECK_THROWS_AS(star_poly(PolyGF(F2, {0, 1}), false), ClnError);

  Rng rng(4);
  for (auto [p, e, tw] : {std::tuple<u64, unsigned, bool>{3, 1, false},
                          {2, 2, true}, {5, 1, false}, {3, 2, true}}) {
    auto F = make_field(p, e);
    for (int it = 0; it < 400; ++it) {
      unsigned d = 1 + (unsigned)rng.below(5);
      std::vector<scalar> c(d + 1);
      for (auto& x : c) x = (scalar)rng.below(F->q());
      c[d] = 1;
      if (c[0] == 0) c[0] = 1;
      PolyGF f(F, c);
      CHECK(star_poly(star_poly(f, tw), tw) == f);
    }
  }
}

TEST_CASE("irreducible inventories for the constructions") {
  auto F2 = make_field(2, 1);
  CHECK(irreducible_polys(F2, 4).size() == 3);
  CHECK(irreducible_polys(make_field(3, 1), 2).size() == 3);
  // F_2 degree 3: the two irreducibles form one star pair
  auto pair = pick_star_pairs(F2, 3, false, 1);
  REQUIRE(pair.size() == 1);
  CHECK(star_poly(pair[0], false) != pair[0]);
}

TEST_CASE("block element: GL(7,3) with d = 2") {
  auto desc = parse_group("GL(7,3)");
  auto F3 = desc.field();
  for (u32 alpha : {0u, 1u}) {
    BlockSpec spec = BlockSpec::make(desc, 2, alpha);
    CHECK(spec.k == 2);
    CHECK(spec.r == 0);
    auto polys = pick_distinct(F3, 2, 2);
    REQUIRE(polys.size() == 2);
    MatGF g = build_block_element(spec, polys);
    CHECK(contains(desc, g));
    CHECK(ab_invariant(*desc.space(), g) == alpha);
    // characteristic polynomial contains (t-1)^2 and both chosen factors
    auto factors = factor_poly(char_poly(g));
    bool has_p0 = false, has_p1 = false;
    for (auto& pf : factors) {
      if (pf.factor == polys[0]) has_p0 = true;
      if (pf.factor == polys[1]) has_p1 = true;
    }
    CHECK(has_p0);
    CHECK(has_p1);
    // the q^d - 1 power is a transvection
    MatGF pw = mat_pow(g, 8);
    CHECK(is_minimal_degree_element(*desc.space(), pw));
    CHECK(degree_of(pw) == 1);
  }
  CHECK_THROWS_AS(BlockSpec::make(desc, 1, 0), ClnError);
  CHECK_THROWS_AS(BlockSpec::make(desc, 8, 0), ClnError);
}

TEST_CASE("block element across all five kinds, randomized") {
  Rng rng(2025);
  struct Case {
    const char* desc;
    unsigned d;
    bool unitary;
  };
  for (auto [dstr, d, uni] : {Case{"GL(9,3)", 2, false},
                              Case{"Sp(10,3)", 2, false},
                              Case{"GO+(12,3)", 2, false},
                              Case{"GO-(12,3)", 2, false},
                              Case{"GO(11,3)", 2, false},
                              Case{"GU(11,4)", 2, true},
                              Case{"GO+(14,2)", 3, false},
                              Case{"Sp(12,2)", 3, false}}) {
    auto desc = parse_group(dstr);
    const FormedSpace& sp = *desc.space();
    auto ab = ab_group(sp);
    CAPTURE(dstr);
    for (int iter = 0; iter < 12; ++iter) {
      u32 alpha = (u32)rng.below(ab.order);
      BlockSpec spec = BlockSpec::make(desc, d, alpha);
      std::vector<PolyGF> polys =
          sp.kind() == SpaceKind::Linear
              ? pick_distinct(desc.field(), d, spec.k)
              : pick_star_pairs(desc.field(), d, uni, spec.k);
      REQUIRE(polys.size() == spec.k);
      MatGF g = build_block_element(spec, polys);
      CHECK(contains(desc, g));
      CHECK(ab_invariant(sp, g) == alpha);
      u64 m = (u64)sp.kappa() * ((u64)ipow128(desc.field()->q(), d) - 1);
      MatGF pw = mat_pow(g, m);
      CHECK(is_minimal_degree_element(sp, pw));
      CHECK(degree_of(pw) == sp.minimal_degree());
      CHECK(matches_block_pattern(spec, g));
    }
  }
}

TEST_CASE("block element input validation") {
  auto desc = parse_group("Sp(10,3)");
  BlockSpec spec = BlockSpec::make(desc, 2, 0);
  auto F3 = desc.field();
  // self-starred polynomial rejected
  std::vector<PolyGF> bad = {PolyGF(F3, {1, 0, 1})};  // t^2+1 = its own star
  CHECK(star_poly(bad[0], false) == bad[0]);
  CHECK_THROWS_AS(build_block_element(spec, bad), ClnError);
  // wrong count
  CHECK_THROWS_AS(build_block_element(spec, {}), ClnError);
}

TEST_CASE("minimal degree set membership") {
  auto sp = parse_space("GL(5,3)");
  MatGF t = MatGF::identity(sp->field(), 5);
  t.at(0, 1) = 1;  // transvection
  CHECK(is_minimal_degree_element(*sp, t));
  CHECK_FALSE(is_minimal_degree_element(*sp, MatGF::identity(sp->field(), 5)));
  MatGF d2 = MatGF::identity(sp->field(), 5);
  d2.at(0, 0) = 2;  // det = 2: not in the derived group
  CHECK_FALSE(is_minimal_degree_element(*sp, d2));

  // a degree-2 element of the derived group of GO+(4,3)
  auto om = parse_group("GO+(4,3):S");
  Rng rng(6);
  bool found = false;
  for (int it = 0; it < 4000 && !found; ++it) {
    MatGF g = sample_uniform(om, rng);
    if (!g.is_identity() && degree_of(g) == 2) {
      CHECK(is_minimal_degree_element(*om.space(), g));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("planted minimal-degree word search") {
  Rng rng(11);
  auto desc = parse_group("GL(10,2)");
  const FormedSpace& sp = *desc.space();
  BlockSpec spec = BlockSpec::make(desc, 3, 0);  // n-3 = 7 = 2*3+1
  CHECK(spec.k == 2);
  auto polys = pick_distinct(desc.field(), 3, 2);
  MatGF c = build_block_element(spec, polys);
  MatGF x1 = sample_uniform(desc, rng), x2 = sample_uniform(desc, rng);
  MatGF x0 = c * inverse(x1);  // x0 * x1 = c
  auto res = search_word_to_minimal_degree(sp, {x0, x1, x2}, 3, 3);
  REQUIRE(res.found);
  CHECK(res.exponent == 7);
  CHECK(res.words_tested <= 4);  // e, x1 at the latest
  CHECK(is_minimal_degree_element(sp, res.witness));
}

TEST_CASE("minimal-degree search on random inputs finds witnesses") {
  // desk-scale version of the acceptance run; the event (x0 u)^15 being a
  // transvection has measured density ~2e-4 per word, so 13k words give a
  // ~95% hit rate per seed
  Rng rng(21);
  auto desc = parse_group("GL(14,2)");
  const FormedSpace& sp = *desc.space();
  unsigned hits = 0;
  for (int seed = 0; seed < 5; ++seed) {
    std::vector<MatGF> xs = {sample_uniform(desc, rng),
                             sample_uniform(desc, rng),
                             sample_uniform(desc, rng)};
    auto res = search_word_to_minimal_degree(sp, xs, 8, 4);
    if (res.found) {
      ++hits;
      CHECK(is_minimal_degree_element(sp, res.witness));
      CHECK(mat_pow(xs[0] * evaluate_word(res.inner,
                                          {xs.begin() + 1, xs.end()}),
                    res.exponent) == res.witness);
    }
  }
  CHECK(hits >= 3);
}

TEST_CASE("generation certificate: planted and random") {
  Rng rng(31);
  auto desc = parse_group("GL(6,2)");
  // planted: x the companion of a primitive polynomial -> order 63
  auto polys = irreducible_polys(desc.field(), 6);
  MatGF x;
  bool primitive_found = false;
  for (const auto& p : polys) {
    MatGF cand = MatGF::companion(p);
    if (element_order(cand) == 63) {
      x = cand;
      primitive_found = true;
      break;
    }
  }
  REQUIRE(primitive_found);
  MatGF y = sample_uniform(desc, rng), z = sample_uniform(desc, rng);
  auto cert = generation_certificate(x, y, z, 4);
  CHECK(cert.found_cyclic);
  CHECK(cert.cyclic_word.empty());  // x itself is a witness

  // random triples: both classes found within short words almost always
  unsigned both = 0;
  for (int seed = 0; seed < 5; ++seed) {
    MatGF a = sample_uniform(desc, rng), b = sample_uniform(desc, rng),
          c = sample_uniform(desc, rng);
    auto r = generation_certificate(a, b, c, 7);
    if (r.found_cyclic && r.found_split) ++both;
  }
  CHECK(both >= 4);
}

TEST_CASE("irreducible cyclic witness is genuinely irreducible") {
  // no proper invariant subspace iff char poly irreducible (n <= 4 brute)
  auto desc = parse_group("GL(4,2)");
  Rng rng(5);
  auto F2 = desc.field();
  for (int it = 0; it < 40; ++it) {
    MatGF g = sample_uniform(desc, rng);
    bool irr = is_irreducible_poly(char_poly(g));
    // brute force: search a proper nonzero invariant subspace via orbits of
    // lines under g
    bool has_invariant = false;
    for (u64 enc = 1; enc < 16 && !has_invariant; ++enc) {
      VecGF v(F2, 4);
      for (int i = 0; i < 4; ++i) v[i] = (enc >> i) & 1;
      SpanGF span(F2, 4);
      span.insert(v.data());
      VecGF cur = v;
      for (int step = 0; step < 4; ++step) {
        cur = g * cur;
        if (!span.contains(cur.data())) span.insert(cur.data());
      }
      if (span.dim() < 4) has_invariant = true;
    }
    CHECK(irr == !has_invariant);
  }
}

TEST_CASE("block density estimate per fibre") {
  Rng rng(7);
  auto desc = parse_group("GL(7,3)");
  BlockSpec spec = BlockSpec::make(desc, 2, 0);
  auto density = estimate_block_density(spec, 20000, rng);
  REQUIRE(density.size() == 2);  // two determinant fibres
  u64 total_hits = 0;
  for (auto& [code, est] : density) {
    total_hits += est.hits;
    CHECK(est.trials > 5000);
  }
  CHECK(total_hits > 10);
  // fibre frequencies within 5 sigma of each other
  auto it = density.begin();
  auto& a = it->second;
  auto& b = (++it)->second;
  double pa = (double)a.hits / a.trials, pb = (double)b.hits / b.trials;
  double sigma = std::sqrt(pa * (1 - pa) / a.trials + pb * (1 - pb) / b.trials);
  CHECK(std::abs(pa - pb) <= 5 * sigma + 1e-12);
}

TEST_CASE("default block degree rule") {
  CHECK(default_block_degree(20, 2) == 7);  // 2^6 = 64 <= 80 < 128
  CHECK(default_block_degree(7, 3) == 4);   // 3^3 = 27 <= 28 < 81
  CHECK(default_block_degree(4, 5) == 2);
}

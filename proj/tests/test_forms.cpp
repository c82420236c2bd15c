#include <cmath>
#include <map>
#include <set>

#include "cln/forms.hpp"
#include "doctest.h"

using namespace cln;

namespace {

std::vector<SpacePtr> small_spaces() {
  return {
      parse_space("GL(3,2)"),   parse_space("GL(2,3)"),
      parse_space("Sp(2,2)"),   parse_space("Sp(4,3)"),
      parse_space("GO+(2,3)"),  parse_space("GO+(4,2)"),
      parse_space("GO-(2,3)"),  parse_space("GO-(4,3)"),
      parse_space("GO(3,3)"),   parse_space("GU(2,4)"),
      parse_space("GU(3,4)"),   parse_space("GU(2,9)"),
  };
}

// all vectors of the space (q^n bounded)
std::vector<VecGF> all_vectors(const FormedSpace& sp) {
  const u64 q = sp.field()->q();
  u64 total = (u64)ipow128(q, sp.dim());
  std::vector<VecGF> out;
  out.reserve(total);
  for (u64 enc = 0; enc < total; ++enc) {
    VecGF v(sp.field(), sp.dim());
    u64 e = enc;
    for (unsigned i = 0; i < sp.dim(); ++i) {
      v[i] = (scalar)(e % q);
      e /= q;
    }
    out.push_back(std::move(v));
  }
  return out;
}

// brute-force isometry enumeration by column DFS
void enumerate_isometries_rec(const FormedSpace& sp,
                              std::vector<VecGF>& cols,
                              const std::vector<VecGF>& pool,
                              std::vector<MatGF>& out) {
  unsigned n = sp.dim();
  if (cols.size() == n) {
    MatGF g(sp.field(), n, n);
    for (unsigned j = 0; j < n; ++j) g.set_col(j, cols[j]);
    if (sp.is_isometry(g)) out.push_back(g);
    return;
  }
  unsigned j = (unsigned)cols.size();
  SpanGF span(sp.field(), n);
  for (const auto& c : cols) span.insert(c.data());
  for (const auto& v : pool) {
    if (span.contains(v.data())) continue;
    if (sp.is_formed()) {
      if (sp.quad(v) != sp.quad(sp.basis_vector(j))) continue;
      bool ok = true;
      for (unsigned t = 0; t < j && ok; ++t) {
        if (sp.form(cols[t], v) != sp.form(sp.basis_vector(t), sp.basis_vector(j)))
          ok = false;
        if (ok && sp.form(v, cols[t]) !=
                      sp.form(sp.basis_vector(j), sp.basis_vector(t)))
          ok = false;
      }
      if (!ok) continue;
    }
    cols.push_back(v);
    enumerate_isometries_rec(sp, cols, pool, out);
    cols.pop_back();
  }
}

std::vector<MatGF> enumerate_isometries(const FormedSpace& sp) {
  auto pool = all_vectors(sp);
  std::vector<VecGF> cols;
  std::vector<MatGF> out;
  enumerate_isometries_rec(sp, cols, pool, out);
  return out;
}

}  // namespace

TEST_CASE("standard space examples") {
  auto sp2 = parse_space("Sp(2,2)");
  CHECK(sp2->gram().at(0, 1) == 1);
  CHECK(sp2->gram().at(1, 0) == 1);  // -1 = 1 over GF(2)

  auto op = parse_space("GO+(2,3)");
  VecGF x(op->field(), {1, 0}), y(op->field(), {0, 1}), xy(op->field(), {1, 1});
  CHECK(op->quad(x) == 0);
  CHECK(op->quad(y) == 0);
  CHECK(op->quad(xy) == 1);  // Q = xy

  auto om = parse_space("GO-(2,3)");
  unsigned zeros = 0;
  for (const auto& v : all_vectors(*om))
    if (!v.is_zero() && om->quad(v) == 0) ++zeros;
  CHECK(zeros == 0);  // anisotropic plane

  CHECK_THROWS_AS(parse_space("Sp(3,2)"), ClnError);
  CHECK_THROWS_AS(parse_space("GO(4,3)"), ClnError);
  CHECK_THROWS_AS(parse_space("GO(3,2)"), ClnError);
  CHECK_THROWS_AS(parse_space("GU(2,3)"), ClnError);
  CHECK_THROWS_AS(parse_space("Spx(4,3)"), ClnError);
}

TEST_CASE("polarization identity Q(u+v) = Q(u) + Q(v) + f(u,v)") {
  for (const auto& sp : small_spaces()) {
    if (!sp->is_orthogonal()) continue;
    const Field& F = *sp->field();
    auto vecs = all_vectors(*sp);
    u64 step = vecs.size() > 200 ? 7 : 1;
    for (u64 i = 0; i < vecs.size(); i += step)
      for (u64 j = 0; j < vecs.size(); j += step) {
        scalar lhs = sp->quad(vecs[i] + vecs[j]);
        scalar rhs = F.add(F.add(sp->quad(vecs[i]), sp->quad(vecs[j])),
                           sp->form(vecs[i], vecs[j]));
        CHECK(lhs == rhs);
      }
  }
}

TEST_CASE("hermitian symmetry f(u,v) = theta(f(v,u))") {
  auto sp = parse_space("GU(3,4)");
  const Field& F = *sp->field();
  auto vecs = all_vectors(*sp);
  for (u64 i = 0; i < vecs.size(); i += 3)
    for (u64 j = 0; j < vecs.size(); j += 5)
      CHECK(sp->form(vecs[i], vecs[j]) == F.theta(sp->form(vecs[j], vecs[i])));
}

TEST_CASE("count_quadric_points exact vs enumeration and the two-sided bound") {
  for (const auto& sp : small_spaces()) {
    const Field& F = *sp->field();
    u64 qn = (u64)ipow128(F.q(), sp->dim());
    if (qn > 3000) continue;
    auto vecs = all_vectors(*sp);
    // full space, every admissible target
    std::vector<VecGF> W;
    for (unsigned i = 0; i < sp->dim(); ++i) W.push_back(sp->basis_vector(i));
    for (scalar target : sp->q_value_space()) {
      u64 brute = 0;
      for (const auto& v : vecs)
        if (sp->quad(v) == target) ++brute;
      CHECK(count_quadric_points(*sp, VecGF(sp->field(), sp->dim()), W, target) ==
            (u128)brute);
      // |count - q^n / q0| <= q^{n/2}  <=>  (count*q0 - q^n)^2 <= q^n * q0^2
      long double count = (long double)brute;
      long double expect = powl((long double)F.q(), sp->dim()) / sp->q0();
      long double window = powl((long double)F.q(), sp->dim() / 2.0L);
      CHECK(fabsl(count - expect) <= window + 1e-6L);
    }
  }
}

TEST_CASE("spec count examples") {
  // linear kind: codim s coset, target 0 -> exactly q^(n-s)
  auto gl = parse_space("GL(3,2)");
  VecGF v0(gl->field(), {1, 0, 1});
  std::vector<VecGF> W = {VecGF(gl->field(), {1, 1, 0})};
  CHECK(count_quadric_points(*gl, v0, W, 0) == 2);  // q^{n-s} = 2^1

  // orthogonal_plus n=2 over F_3, full space, target 0 -> 5
  auto op = parse_space("GO+(2,3)");
  std::vector<VecGF> W2 = {op->basis_vector(0), op->basis_vector(1)};
  CHECK(count_quadric_points(*op, VecGF(op->field(), 2), W2, 0) == 5);

  // unitary n=1 over F_4, full space, target 1 -> 3
  auto gu = parse_space("GU(1,4)");
  std::vector<VecGF> W3 = {gu->basis_vector(0)};
  CHECK(count_quadric_points(*gu, VecGF(gu->field(), 1), W3, 1) == 3);
}

TEST_CASE("sample_quadric_point is exactly uniform") {
  Rng rng(2024);
  auto op = parse_space("GO+(2,3)");
  std::vector<VecGF> W = {op->basis_vector(0), op->basis_vector(1)};
  std::map<std::vector<scalar>, u64> freq;
  const u64 draws = 100000;
  for (u64 i = 0; i < draws; ++i) {
    auto v = sample_quadric_point(*op, VecGF(op->field(), 2), W, 0, rng);
    REQUIRE(v.has_value());
    CHECK(op->quad(*v) == 0);
    freq[v->data()]++;
  }
  CHECK(freq.size() == 5);
  std::vector<u64> counts;
  for (auto& [k, v] : freq) counts.push_back(v);
  CHECK(chi_square_uniform_pvalue(counts, draws) > 1e-3);

  // empty set
  auto om = parse_space("GO-(2,3)");
  std::vector<VecGF> Wm = {om->basis_vector(0)};  // the line x: Q = x^2
  auto none = sample_quadric_point(*om, VecGF(om->field(), 2), Wm, 2, rng);
  // Q on the line takes values {0, 1}; target 2 is empty
  CHECK_FALSE(none.has_value());
}

TEST_CASE("abelian invariant is multiplicative on tiny groups") {
  for (const char* desc : {"Sp(2,3)", "GO+(2,3)", "GO-(2,3)", "GO(3,3)",
                           "GU(2,4)", "GO+(4,2)"}) {
    auto sp = parse_space(desc);
    auto iso = enumerate_isometries(*sp);
    auto ab = ab_group(*sp);
    REQUIRE(!iso.empty());
    // multiplicativity on a coarse grid of pairs
    u64 step = iso.size() > 60 ? 13 : 1;
    for (u64 i = 0; i < iso.size(); i += step)
      for (u64 j = 0; j < iso.size(); j += step) {
        u32 lhs = ab_invariant(*sp, iso[i] * iso[j]);
        u32 rhs = ab.op(ab_invariant(*sp, iso[i]), ab_invariant(*sp, iso[j]));
        CHECK(lhs == rhs);
      }
    // conjugation invariance
    for (u64 i = 0; i < iso.size(); i += step)
      for (u64 j = 0; j < iso.size(); j += step) {
        auto conj = iso[j] * iso[i] * inverse(iso[j]);
        CHECK(ab_invariant(*sp, conj) == ab_invariant(*sp, iso[i]));
      }
  }
}

TEST_CASE("dickson invariant example: hyperbolic swap") {
  auto sp = parse_space("GO+(2,2)");
  MatGF sw(sp->field(), 2, 2);
  sw.at(0, 1) = 1;
  sw.at(1, 0) = 1;
  CHECK(sp->is_isometry(sw));
  CHECK(ab_invariant(*sp, sw) == 1);
}

TEST_CASE("spinor norm splits SO with index-2 kernel on SO_3(3)") {
  auto sp = parse_space("GO(3,3)");
  auto iso = enumerate_isometries(*sp);
  CHECK(iso.size() == 48);  // |GO_3(3)|
  unsigned so = 0, kernel = 0;
  std::set<u32> codes;
  for (const auto& g : iso) {
    u32 code = ab_invariant(*sp, g);
    codes.insert(code);
    if ((code & 1) == 0) {
      ++so;
      if (code == 0) ++kernel;
    }
  }
  CHECK(so == 24);
  CHECK(kernel == 12);  // index 2 in SO
  CHECK(codes.size() == 4);
}

TEST_CASE("ab_rep realizes every invariant code") {
  for (const char* desc : {"GL(3,3)", "Sp(4,3)", "GO+(4,3)", "GO-(4,3)",
                           "GO(3,3)", "GU(2,4)", "GO+(4,2)", "GU(3,9)"}) {
    auto sp = parse_space(desc);
    auto ab = ab_group(*sp);
    for (u32 code = 0; code < ab.order; ++code) {
      MatGF rep = ab_rep(*sp, code);
      CHECK(sp->is_isometry(rep));
      CHECK(ab_invariant(*sp, rep) == code);
    }
  }
}

TEST_CASE("extend_isometry: identity on full standard basis") {
  Rng rng(5);
  auto sp = parse_space("Sp(4,3)");
  std::vector<VecGF> basis;
  for (unsigned i = 0; i < 4; ++i) basis.push_back(sp->basis_vector(i));
  MatGF g = extend_isometry(*sp, basis, basis, false, rng);
  CHECK(g.is_identity());
}

TEST_CASE("extend_isometry: GL case with derived constraint") {
  Rng rng(6);
  auto sp = parse_space("GL(4,3)");
  std::vector<VecGF> us = {sp->basis_vector(0)};
  std::vector<VecGF> vs = {sp->basis_vector(1)};
  MatGF g = extend_isometry(*sp, us, vs, true, rng);
  CHECK(determinant(g) == 1);
  CHECK((g * us[0]) == vs[0]);
}

TEST_CASE("extend_isometry: Sp(2,2) maps (1,0) to (0,1)") {
  Rng rng(7);
  auto sp = parse_space("Sp(2,2)");
  std::vector<VecGF> us = {VecGF(sp->field(), {1, 0})};
  std::vector<VecGF> vs = {VecGF(sp->field(), {0, 1})};
  MatGF g = extend_isometry(*sp, us, vs, false, rng);
  CHECK(sp->is_isometry(g));
  CHECK((g * us[0]) == vs[0]);
}

TEST_CASE("extend_isometry rejects invalid pairs") {
  Rng rng(8);
  auto sp = parse_space("GO+(4,3)");
  // Q mismatch: e1 (singular) cannot map to a nonsingular vector
  VecGF e1 = sp->basis_vector(0);
  VecGF bad(sp->field(), {1, 1, 0, 0});  // Q = 1
  CHECK(sp->quad(e1) != sp->quad(bad));
  CHECK_THROWS_AS(
      extend_isometry(*sp, {e1}, {bad}, false, rng), ClnError);
  // dependence
  CHECK_THROWS_AS(extend_isometry(*sp, {e1, e1}, {e1, e1}, false, rng),
                  ClnError);
  // derived correction out of range
  std::vector<VecGF> full, full2;
  for (unsigned i = 0; i < 4; ++i) {
    full.push_back(sp->basis_vector(i));
    full2.push_back(sp->basis_vector(i));
  }
  CHECK_THROWS_AS(extend_isometry(*sp, full, full2, true, rng), ClnError);
}

TEST_CASE("extend_isometry randomized postconditions per kind") {
  Rng rng(99);
  for (const char* desc :
       {"GL(5,3)", "Sp(6,3)", "GO+(6,3)", "GO-(6,2)", "GO(5,3)", "GU(4,4)"}) {
    auto sp = parse_space(desc);
    unsigned n = sp->dim();
    for (int iter = 0; iter < 60; ++iter) {
      // random valid pair set from a known isometry
      unsigned k = 1 + (unsigned)rng.below(n - 2);
      MatGF h = extend_isometry(*sp, {}, {}, false, rng);  // random isometry
      SpanGF span(sp->field(), n);
      std::vector<VecGF> us, vs;
      for (unsigned t = 0; t < k; ++t) {
        VecGF u(sp->field(), n);
        do {
          for (unsigned i = 0; i < n; ++i)
            u[i] = (scalar)rng.below(sp->field()->q());
        } while (span.contains(u.data()));
        span.insert(u.data());
        us.push_back(u);
        vs.push_back(h * u);
      }
      try {
        MatGF g = extend_isometry(*sp, us, vs, true, rng);
        CHECK(sp->is_isometry(g));
        CHECK(ab_invariant(*sp, g) == 0);
        for (unsigned t = 0; t < k; ++t) CHECK((g * us[t]) == vs[t]);
      } catch (const ClnError& e) {
        // boundary configurations (degenerate span, k near n-2) can admit
        // no derived-group extension at all; the error must be the specific
        // one, and a plain extension must still work
        CHECK(std::string(e.what()).find("no derived-group extension") !=
              std::string::npos);
        MatGF g = extend_isometry(*sp, us, vs, false, rng);
        CHECK(sp->is_isometry(g));
      }
    }
  }
}

TEST_CASE("derived extension always found when pairs come from the derived group") {
  Rng rng(1005);
  for (const char* desc :
       {"GL(5,3)", "Sp(6,3)", "GO+(6,3)", "GO-(6,2)", "GO(5,3)", "GU(4,4)"}) {
    auto sp = parse_space(desc);
    unsigned n = sp->dim();
    for (int iter = 0; iter < 40; ++iter) {
      unsigned k = 1 + (unsigned)rng.below(n - 2);
      MatGF h = extend_isometry(*sp, {}, {}, true, rng);  // h in SCl
      SpanGF span(sp->field(), n);
      std::vector<VecGF> us, vs;
      for (unsigned t = 0; t < k; ++t) {
        VecGF u(sp->field(), n);
        do {
          for (unsigned i = 0; i < n; ++i)
            u[i] = (scalar)rng.below(sp->field()->q());
        } while (span.contains(u.data()));
        span.insert(u.data());
        us.push_back(u);
        vs.push_back(h * u);
      }
      MatGF g = extend_isometry(*sp, us, vs, true, rng);
      CHECK(ab_invariant(*sp, g) == 0);
      for (unsigned t = 0; t < k; ++t) CHECK((g * us[t]) == vs[t]);
    }
  }
}

TEST_CASE("witt_decompose structure") {
  for (const char* desc : {"Sp(4,3)", "GO+(4,3)", "GO-(4,3)", "GO(3,3)",
                           "GU(3,4)", "GO-(2,3)", "GO+(6,2)", "GU(4,4)"}) {
    auto sp = parse_space(desc);
    auto wd = witt_decompose(*sp);
    const Field& F = *sp->field();
    // structure checks
    for (auto& [w, u] : wd.hyperbolic) {
      CHECK(sp->quad(w) == 0);
      CHECK(sp->quad(u) == 0);
      CHECK(sp->form(w, u) == 1);
    }
    CHECK(2 * wd.hyperbolic.size() + wd.anisotropic.size() == sp->dim());
    // anisotropic part has no nonzero singular vectors
    if (!wd.anisotropic.empty()) {
      u64 q = F.q();
      u64 total = (u64)ipow128(q, (unsigned)wd.anisotropic.size());
      for (u64 enc = 1; enc < total; ++enc) {
        VecGF v(sp->field(), sp->dim());
        u64 e = enc;
        for (auto& a : wd.anisotropic) {
          scalar c = (scalar)(e % q);
          e /= q;
          v = v + a * c;
        }
        CHECK(sp->quad(v) != 0);
      }
    }
    // expected counts
    if (sp->kind() == SpaceKind::Symplectic)
      CHECK(wd.anisotropic.empty());
    if (std::string(desc) == "GO-(2,3)") {
      CHECK(wd.hyperbolic.empty());
      CHECK(wd.anisotropic.size() == 2);
    }
    if (std::string(desc) == "GO-(4,3)") CHECK(wd.hyperbolic.size() == 1);
    if (std::string(desc) == "GO+(4,3)") CHECK(wd.hyperbolic.size() == 2);
  }
}

TEST_CASE("sample_conditioned_vector respects conditions and exclusion") {
  Rng rng(31);
  auto sp = parse_space("GO+(4,3)");
  const Field& F = *sp->field();
  VecGF b = sp->basis_vector(0);
  FormConditions cond;
  cond.add(sp->form_row(b), 1);  // f(v, e0) = 1
  SpanGF excl(sp->field(), 4);
  excl.insert(sp->basis_vector(1).data());
  std::map<std::vector<scalar>, u64> freq;
  for (int i = 0; i < 20000; ++i) {
    auto v = sample_conditioned_vector(*sp, cond, 1, &excl, rng);
    REQUIRE(v.has_value());
    CHECK(sp->form(*v, b) == 1);
    CHECK(sp->quad(*v) == 1);
    CHECK_FALSE(excl.contains(v->data()));
    freq[v->data()]++;
  }
  // uniformity + count match
  u128 expect = count_conditioned_vectors(*sp, cond, 1, &excl);
  CHECK((u128)freq.size() == expect);
  std::vector<u64> counts;
  for (auto& [k, c] : freq) counts.push_back(c);
  CHECK(chi_square_uniform_pvalue(counts, 20000) > 1e-3);
  (void)F;
}

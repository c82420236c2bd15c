#include "cln/poly.hpp"
#include "cln/rng.hpp"
#include "doctest.h"

using namespace cln;

TEST_CASE("polynomial arithmetic basics") {
  auto F3 = make_field(3, 1);
  PolyGF a(F3, {1, 2, 1});  // 1 + 2t + t^2
  PolyGF b(F3, {2, 1});     // 2 + t
  auto c = a * b;
  CHECK(c.degree() == 3);
  CHECK(c.eval(1) == F3->mul(a.eval(1), b.eval(1)));
  PolyGF q, r;
  PolyGF::divmod(c, b, q, r);
  CHECK(r.is_zero());
  CHECK(q == a);
}

TEST_CASE("factor_poly spec examples") {
  auto F2 = make_field(2, 1);
  auto F3 = make_field(3, 1);

  // t^2 + 1 over F_2 = (t+1)^2
  {
    auto fac = factor_poly(PolyGF(F2, {1, 0, 1}));
    REQUIRE(fac.size() == 1);
    CHECK(fac[0].factor == PolyGF(F2, {1, 1}));
    CHECK(fac[0].mult == 2);
  }
  // t^2 + 1 over F_3 irreducible
  {
    auto fac = factor_poly(PolyGF(F3, {1, 0, 1}));
    REQUIRE(fac.size() == 1);
    CHECK(fac[0].mult == 1);
    CHECK(fac[0].factor.degree() == 2);
    CHECK(is_irreducible_poly(PolyGF(F3, {1, 0, 1})));
  }
  // t^4 + t over F_2 = t (t+1) (t^2+t+1)
  {
    auto fac = factor_poly(PolyGF(F2, {0, 1, 0, 0, 1}));
    REQUIRE(fac.size() == 3);
    CHECK(fac[0].factor == PolyGF(F2, {0, 1}));
    CHECK(fac[1].factor == PolyGF(F2, {1, 1}));
    CHECK(fac[2].factor == PolyGF(F2, {1, 1, 1}));
    for (auto& pf : fac) CHECK(pf.mult == 1);
  }
}

TEST_CASE("factorization product reassembles the input") {
  Rng rng(42);
  for (auto [p, e] : {std::pair<u64, unsigned>{2, 1}, {3, 1}, {2, 2}, {5, 1}}) {
    auto F = make_field(p, e);
    for (int iter = 0; iter < 2500; ++iter) {
      unsigned deg = 1 + (unsigned)rng.below(8);
      std::vector<scalar> c(deg + 1);
      for (auto& x : c) x = (scalar)rng.below(F->q());
      if (c[deg] == 0) c[deg] = 1;
      PolyGF f(F, c);
      auto fac = factor_poly(f);
      PolyGF prod = PolyGF::constant(F, f.leading());
      for (auto& pf : fac) {
        CHECK(is_irreducible_poly(pf.factor));
        for (unsigned m = 0; m < pf.mult; ++m) prod = prod * pf.factor;
      }
      CHECK(prod == f);
    }
  }
}

TEST_CASE("irreducible inventory counts match the necklace formula") {
  auto F2 = make_field(2, 1);
  auto F3 = make_field(3, 1);
  CHECK(irreducible_polys(F2, 4).size() == 3);
  CHECK(irreducible_polys(F3, 2).size() == 3);
  auto lin = irreducible_polys(F2, 1);
  REQUIRE(lin.size() == 2);
  CHECK(lin[0] == PolyGF(F2, {0, 1}));
  CHECK(lin[1] == PolyGF(F2, {1, 1}));
  CHECK(count_irreducible_polys(2, 6) == 9);
  CHECK(irreducible_polys(make_field(2, 2), 3).size() ==
        count_irreducible_polys(4, 3));
}

TEST_CASE("gcd and powmod") {
  auto F5 = make_field(5, 1);
  PolyGF a(F5, {0, 1});  // t
  PolyGF m(F5, {3, 0, 1});  // t^2 + 3
  auto r = PolyGF::powmod(a, 24, m);  // t^24 mod m
  // multiplicative order of any root of m divides 24 = q^2-1
  CHECK(r == PolyGF::constant(F5, 1));
}

TEST_CASE("derivative in characteristic p") {
  auto F2 = make_field(2, 1);
  PolyGF f(F2, {1, 0, 1});  // 1 + t^2, derivative 0 in char 2
  CHECK(f.derivative().is_zero());
  auto F3 = make_field(3, 1);
  PolyGF g(F3, {0, 0, 0, 1});  // t^3, derivative 0 in char 3
  CHECK(g.derivative().is_zero());
  PolyGF h(F3, {1, 2, 1});
  CHECK(h.derivative() == PolyGF(F3, {2, 2}));
}

TEST_CASE("poly text round trip") {
  auto F7 = make_field(7, 1);
  PolyGF f(F7, {3, 0, 6, 1});
  CHECK(PolyGF::from_text(F7, f.to_text()) == f);
}

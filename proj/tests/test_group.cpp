#include <map>

#include "cln/group.hpp"
#include "doctest.h"

using namespace cln;

TEST_CASE("group descriptor grammar") {
  auto g1 = parse_group("GL(2,3):S");
  CHECK(g1.descriptor() == "GL(2,3):S");
  CHECK(g1.order() == 24);  // |SL_2(3)|
  auto g2 = parse_group("GL(2,3)");
  CHECK(g2.order() == 48);
  auto g3 = parse_group("Sp(4,2)");
  CHECK(g3.order() == 720);
  CHECK(parse_group("GU(2,4)").order() == 18);
  CHECK(parse_group("GU(2,4):S").order() == 6);
  CHECK(parse_group("GO+(4,3)").order() == 1152);
  CHECK(parse_group("GO+(4,3):S").order() == 288);
  CHECK(parse_group("GO(3,3)").order() == 48);
  CHECK(parse_group("GO(3,3):S").order() == 12);
  // explicit level: SO_3(3) = determinant-kernel = codes {0, 2}
  CHECK(parse_group("GO(3,3):2").order() == 24);
  CHECK_THROWS_AS(parse_group("Spx(4,3)"), ClnError);
  CHECK_THROWS_AS(parse_group("GL(2,3):X"), ClnError);
}

TEST_CASE("contains examples") {
  auto sl23 = parse_group("GL(2,3):S");
  CHECK(contains(sl23, MatGF::identity(sl23.field(), 2)));
  MatGF d(sl23.field(), 2, 2);
  d.at(0, 0) = 2;
  d.at(1, 1) = 1;
  CHECK_FALSE(contains(sl23, d));  // det = 2
  CHECK(contains(parse_group("GL(2,3)"), d));

  // hyperbolic swap has Dickson bit 1, not in the derived group
  auto om = parse_group("GO+(2,2):S");
  MatGF sw(om.field(), 2, 2);
  sw.at(0, 1) = 1;
  sw.at(1, 0) = 1;
  CHECK_FALSE(contains(om, sw));
  CHECK(contains(parse_group("GO+(2,2)"), sw));
}

TEST_CASE("enumerate_small counts") {
  CHECK(enumerate_small(parse_group("GL(2,2)")).size() == 6);  // SL_2(2)
  CHECK(enumerate_small(parse_group("GL(2,3)")).size() == 48);
  CHECK(enumerate_small(parse_group("Sp(4,2)")).size() == 720);
  CHECK(enumerate_small(parse_group("GO(3,3):S")).size() == 12);
  CHECK(enumerate_small(parse_group("GU(2,4)")).size() == 18);
  // every enumerated element passes contains; no duplicates
  auto desc = parse_group("Sp(2,3)");
  auto elems = enumerate_small(desc);
  CHECK(elems.size() == 24);
  for (const auto& g : elems) CHECK(contains(desc, g));
  std::map<std::string, int> seen;
  for (const auto& g : elems) seen[g.to_text()]++;
  CHECK(seen.size() == elems.size());
  CHECK_THROWS_AS(enumerate_small(parse_group("GL(4,3)")), ClnError);
}

TEST_CASE("enumerated order matches the closed-form order across kinds") {
  for (const char* d : {"GL(2,2)", "GL(2,3)", "Sp(2,3)", "Sp(4,2)", "GO+(2,3)",
                        "GO-(2,3)", "GO(3,3)", "GU(2,4)", "GO+(4,2)",
                        "GO-(4,2)", "GO+(4,3):S"}) {
    auto desc = parse_group(d);
    CAPTURE(d);
    CHECK((u128)enumerate_small(desc).size() == desc.order());
  }
}

TEST_CASE("sample_uniform is exactly uniform on small groups of each kind") {
  for (const char* d :
       {"Sp(2,2)", "GL(2,3):S", "GU(2,4)", "GO+(4,3):S", "GO(3,3):2"}) {
    auto desc = parse_group(d);
    auto elems = enumerate_small(desc);
    std::map<std::string, u64> index;
    for (const auto& g : elems) index[g.to_text()] = 0;
    Rng rng(271828 ^ elems.size());
    const u64 draws = elems.size() >= 100 ? 60000 : 30000;
    for (u64 i = 0; i < draws; ++i) {
      MatGF g = sample_uniform(desc, rng);
      auto it = index.find(g.to_text());
      REQUIRE(it != index.end());
      it->second++;
    }
    std::vector<u64> counts;
    for (auto& [k, v] : index) counts.push_back(v);
    CAPTURE(d);
    CHECK(chi_square_uniform_pvalue(counts, draws) > 1e-3);
  }
}

TEST_CASE("contains(sample_uniform) always true") {
  Rng rng(33);
  for (const char* d : {"GL(5,2)", "Sp(6,3)", "GO-(6,3):S", "GU(3,4):S",
                        "GO(5,3)", "GL(4,4)"}) {
    auto desc = parse_group(d);
    for (int i = 0; i < 200; ++i) CHECK(contains(desc, sample_uniform(desc, rng)));
  }
}

TEST_CASE("GL(1,q) sampler is uniform over nonzero scalars") {
  auto desc = parse_group("GL(1,7)");
  Rng rng(55);
  std::vector<u64> counts(7, 0);
  for (int i = 0; i < 30000; ++i) counts[sample_uniform(desc, rng).at(0, 0)]++;
  CHECK(counts[0] == 0);
  std::vector<u64> nz(counts.begin() + 1, counts.end());
  CHECK(chi_square_uniform_pvalue(nz, 30000) > 1e-3);
}

TEST_CASE("sampler prefix-conditional law matches the free-choice law") {
  // condition on the first basis image being a fixed vector; the second
  // image must be uniform over the admissible set
  auto desc = parse_group("Sp(4,3)");
  const FormedSpace& sp = *desc.space();
  Rng rng(99);
  VecGF target = sp.basis_vector(0);
  std::map<std::string, u64> freq;
  u64 kept = 0;
  for (int i = 0; i < 200000 && kept < 30000; ++i) {
    MatGF g = sample_uniform(desc, rng);
    if (g.col(0) == target) {
      freq[g.col(1).to_text()]++;
      ++kept;
    }
  }
  // admissible second images: f(v, e1-image) = f(e2, e1) = -1, independent
  FormConditions cond;
  cond.add(sp.form_row(target), sp.form(sp.basis_vector(1), sp.basis_vector(0)));
  SpanGF excl(desc.field(), 4);
  excl.insert(target.data());
  u128 admissible = count_conditioned_vectors(sp, cond, 0, &excl);
  CHECK((u128)freq.size() == admissible);
  std::vector<u64> counts;
  for (auto& [k, v] : freq) counts.push_back(v);
  CHECK(chi_square_uniform_pvalue(counts, kept) > 1e-3);
}

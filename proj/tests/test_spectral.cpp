#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "cln/spectral.hpp"
#include "doctest.h"

using namespace cln;

namespace {

std::vector<MatGF> random_gens(const GroupDesc& desc, unsigned k, Rng& rng) {
  std::vector<MatGF> gens;
  for (unsigned i = 0; i < k; ++i) gens.push_back(sample_uniform(desc, rng));
  return gens;
}

// dense eigensolve oracle: max(lambda_2, -lambda_N) on the complement
double dense_rho(const OrbitIndex& orbit) {
  const u64 n = orbit.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero((long)n, (long)n);
  for (unsigned gi = 0; gi < orbit.generators(); ++gi)
    for (u64 p = 0; p < n; ++p) {
      A((long)orbit.forward(gi)[p], (long)p) += 1.0;
      A((long)orbit.backward(gi)[p], (long)p) += 1.0;
    }
  A /= 2.0 * orbit.generators();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  auto ev = es.eigenvalues();
  return std::max(ev[(long)n - 2], -ev[0]);
}

}  // namespace

TEST_CASE("vector orbits match the point-count predictions") {
  Rng rng(5);
  // GL(10,2): transitive on the 1023 nonzero vectors
  {
    auto desc = parse_group("GL(10,2)");
    auto orbit = OrbitIndex::vectors_orbit(desc.space(), random_gens(desc, 3, rng),
                                           {desc.space()->basis_vector(0)});
    CHECK(orbit.size() == 1023);
  }
  // symplectic: N = q^n - 1
  {
    auto desc = parse_group("Sp(4,3)");
    auto orbit = OrbitIndex::vectors_orbit(desc.space(), random_gens(desc, 3, rng),
                                           {desc.space()->basis_vector(0)});
    CHECK(orbit.size() == 80);
    CHECK((u128)orbit.size() ==
          tuple_orbit_size(*desc.space(), {desc.space()->basis_vector(0)}));
  }
  // orthogonal: orbit of a singular vector vs the exact count
  {
    auto desc = parse_group("GO+(6,3)");
    auto base = desc.space()->basis_vector(0);
    auto orbit = OrbitIndex::vectors_orbit(desc.space(), random_gens(desc, 4, rng),
                                           {base});
    CHECK((u128)orbit.size() == tuple_orbit_size(*desc.space(), {base}));
  }
  // pair orbit cross-check
  {
    auto desc = parse_group("Sp(6,3)");
    std::vector<VecGF> base = {desc.space()->basis_vector(0),
                               desc.space()->basis_vector(2)};
    auto orbit =
        OrbitIndex::vectors_orbit(desc.space(), random_gens(desc, 4, rng), base);
    CHECK((u128)orbit.size() == tuple_orbit_size(*desc.space(), base));
  }
}

TEST_CASE("conjugation orbit equals the brute-force class") {
  Rng rng(9);
  auto desc = parse_group("GL(4,2)");
  // transvection
  MatGF t = MatGF::identity(desc.field(), 4);
  t.at(0, 1) = 1;
  auto orbit =
      OrbitIndex::conjugation_orbit(desc.space(), random_gens(desc, 3, rng), t);
  // count degree-1 elements of SL_4(2) by enumeration
  auto all = enumerate_small(desc);
  u64 transvections = 0;
  for (const auto& g : all)
    if (!g.is_identity() && degree_of(g) == 1) ++transvections;
  CHECK(orbit.size() == transvections);
  CHECK(orbit.size() == 105);
}

TEST_CASE("orbit save and load round trip") {
  Rng rng(11);
  auto desc = parse_group("GL(5,2)");
  auto orbit = OrbitIndex::vectors_orbit(desc.space(), random_gens(desc, 2, rng),
                                         {desc.space()->basis_vector(0)});
  std::stringstream ss;
  orbit.save(ss);
  auto back = OrbitIndex::load(ss);
  CHECK(back.size() == orbit.size());
  for (unsigned gi = 0; gi < orbit.generators(); ++gi)
    CHECK(back.forward(gi) == orbit.forward(gi));
}

TEST_CASE("lambda estimation: disconnected warning on the identity action") {
  // identity permutation on 2 points
  auto orbit = OrbitIndex::from_permutations({{0, 1}});
  Rng rng(3);
  auto rep = estimate_lambda_power(orbit, 1e-12, 10000, rng);
  CHECK(rep.lambda2 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.disconnected_warning);
}

TEST_CASE("lambda estimation: complete graph closed form and dense oracle") {
  const unsigned m = 60;
  std::vector<std::vector<u32>> perms;
  for (unsigned shift = 1; shift < m; ++shift) {
    std::vector<u32> p(m);
    for (unsigned i = 0; i < m; ++i) p[i] = (i + shift) % m;
    perms.push_back(std::move(p));
  }
  auto orbit = OrbitIndex::from_permutations(std::move(perms));
  Rng rng(17);
  auto rep = estimate_lambda_power(orbit, 1e-14, 100000, rng);
  CHECK(rep.converged);
  // K_m: nontrivial spectrum is -1/(m-1)
  CHECK(std::fabs(rep.rho - 1.0 / (m - 1)) < 1e-6);
  CHECK(std::fabs(rep.rho - dense_rho(orbit)) < 1e-6);
}

TEST_CASE("power iteration matches the dense oracle on small orbits") {
  Rng rng(23);
  struct Case {
    const char* desc;
    unsigned k;
  };
  for (auto [d, k] : {Case{"GL(4,2)", 3}, Case{"GL(8,2)", 4}, Case{"Sp(4,3)", 3},
                      Case{"GO+(4,3)", 4}, Case{"GU(2,9)", 3}}) {
    auto desc = parse_group(d);
    auto gens = random_gens(desc, k, rng);
    auto orbit = OrbitIndex::vectors_orbit(desc.space(), gens,
                                           {desc.space()->basis_vector(0)});
    REQUIRE(orbit.size() <= 500);
    auto rep = estimate_lambda_power(orbit, 1e-14, 200000, rng);
    CAPTURE(d);
    CHECK(rep.converged);
    CHECK(std::fabs(rep.rho - dense_rho(orbit)) < 1e-6);
  }
}

TEST_CASE("random generators expand the 1023-point action") {
  Rng rng(31);
  auto desc = parse_group("GL(10,2)");
  unsigned good = 0;
  for (int seed = 0; seed < 5; ++seed) {
    auto orbit = OrbitIndex::vectors_orbit(desc.space(), random_gens(desc, 8, rng),
                                           {desc.space()->basis_vector(0)});
    auto rep = estimate_lambda_power(orbit, 1e-10, 50000, rng);
    if (rep.converged && rep.rho < 0.9) ++good;
  }
  CHECK(good == 5);
}

TEST_CASE("trace moment basics and cross-validation") {
  Rng rng(41);
  auto desc = parse_group("GL(8,2)");
  auto gens = random_gens(desc, 4, rng);
  auto orbit = OrbitIndex::vectors_orbit(desc.space(), gens,
                                         {desc.space()->basis_vector(0)});
  REQUIRE(orbit.size() == 255);
  // len 0: exactly N
  auto rep0 = trace_moment(orbit, 0, 50, rng);
  CHECK(rep0.mean_fixed == doctest::Approx(255.0));
  // identity generators: every word fixes everything
  auto idorbit = OrbitIndex::from_permutations(
      {std::vector<u32>{0, 1, 2, 3, 4}, std::vector<u32>{0, 1, 2, 3, 4}});
  auto repid = trace_moment(idorbit, 4, 50, rng);
  CHECK(repid.mean_fixed == doctest::Approx(5.0));
  // lambda bound consistent with power iteration within 0.1
  auto power = estimate_lambda_power(orbit, 1e-12, 100000, rng);
  auto repm = trace_moment(orbit, 8, 4000, rng);
  CHECK(repm.lambda_bound >= power.rho - 0.1);
  CHECK_THROWS_AS(trace_moment(orbit, 3, 10, rng), ClnError);
}

TEST_CASE("return probability: unit-scale runs") {
  Rng rng(51);
  {
    auto desc = parse_group("GL(12,2)");
    auto rep = estimate_return_prob(desc, Word::from_text(2, "x1 x2"), 1,
                                    2000000, rng);
    CHECK(rep.orbit_size == (u128)4095);
    CHECK(rep.n_times_freq > 0.8);
    CHECK(rep.n_times_freq < 1.2);
  }
  {
    auto desc = parse_group("Sp(6,3)");
    auto rep = estimate_return_prob(desc, Word::from_text(2, "x1 x2"), 1,
                                    1000000, rng);
    CHECK(rep.orbit_size == (u128)728);
    CHECK(rep.n_times_freq > 0.85);
    CHECK(rep.n_times_freq < 1.15);
  }
  auto desc = parse_group("GL(12,2)");
  CHECK_THROWS_AS(
      estimate_return_prob(desc, Word::from_text(1, "x1 x1"), 1, 10, rng),
      ClnError);
  CHECK_THROWS_AS(estimate_return_prob(desc, Word(2, {}), 1, 10, rng), ClnError);
}

TEST_CASE("cayley diameter examples") {
  // cyclic group of order 5 inside GL(1,11): S = {g, g^-1} -> diameter 2
  auto f11 = make_field(11, 1);
  std::vector<MatGF> elems;
  MatGF g(f11, 1, 1);
  g.at(0, 0) = 3;  // order 5 mod 11
  MatGF cur = MatGF::identity(f11, 1);
  for (int i = 0; i < 5; ++i) {
    elems.push_back(cur);
    cur = cur * g;
  }
  auto rep = cayley_diameter_bfs(elems, {g});
  CHECK(rep.generates);
  CHECK(rep.reached == 5);
  CHECK(rep.diameter == 2);

  // non-generating set reports the reached subgroup
  auto desc = parse_group("GL(2,3)");
  MatGF z = MatGF::identity(desc.field(), 2);
  z.at(0, 0) = 2;
  z.at(1, 1) = 2;  // central, order 2
  auto rep2 = cayley_diameter_bfs(desc, {z});
  CHECK_FALSE(rep2.generates);
  CHECK(rep2.reached == 2);

  // SL_2(3) with a transvection and a companion element
  auto sl23 = parse_group("GL(2,3):S");
  MatGF t = MatGF::identity(sl23.field(), 2);
  t.at(0, 1) = 1;
  MatGF c = MatGF::companion(PolyGF(sl23.field(), {1, 2, 1}));  // det 1
  REQUIRE(contains(sl23, c));
  auto rep3 = cayley_diameter_bfs(sl23, {t, c});
  CHECK(rep3.generates);
  CHECK(rep3.reached == 24);
  CHECK(rep3.diameter >= 3);
  // stability: identical rerun
  auto rep4 = cayley_diameter_bfs(sl23, {t, c});
  CHECK(rep4.diameter == rep3.diameter);
}

TEST_CASE("schreier diameter: exact scan vs a reference BFS") {
  Rng rng(61);
  auto desc = parse_group("GL(4,2)");
  auto gens = random_gens(desc, 2, rng);
  auto orbit = OrbitIndex::vectors_orbit(desc.space(), gens,
                                         {desc.space()->basis_vector(0)});
  unsigned diam = schreier_diameter(orbit);
  // reference: max over sources of a simple BFS
  unsigned ref = 0;
  const u64 n = orbit.size();
  for (u64 src = 0; src < n; ++src) {
    std::vector<int> dist(n, -1);
    std::vector<u32> q = {(u32)src};
    dist[src] = 0;
    for (size_t h = 0; h < q.size(); ++h) {
      u32 cur = q[h];
      for (unsigned gi = 0; gi < orbit.generators(); ++gi)
        for (u32 nxt : {orbit.forward(gi)[cur], orbit.backward(gi)[cur]})
          if (dist[nxt] < 0) {
            dist[nxt] = dist[cur] + 1;
            q.push_back(nxt);
          }
    }
    for (int d : dist) ref = std::max(ref, (unsigned)d);
  }
  CHECK(diam == ref);
  // central element: orbit of size 1 has diameter 0
  auto one = OrbitIndex::from_permutations({{0}});
  CHECK(schreier_diameter(one) == 0);
}

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cln/experiments.hpp"
#include "doctest.h"

using namespace cln;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("seed streams are deterministic and distinct") {
  Rng a = seed_stream(42, 0), b = seed_stream(42, 0), c = seed_stream(42, 1),
      d = seed_stream(43, 0);
  bool all_equal = true, differs_c = false, differs_d = false;
  for (int i = 0; i < 64; ++i) {
    u64 va = a.next();
    if (va != b.next()) all_equal = false;
    if (va != c.next()) differs_c = true;
    if (va != d.next()) differs_d = true;
  }
  CHECK(all_equal);
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("rng equidistribution battery") {
  Rng rng(2718);
  // bytes uniform
  std::vector<u64> counts(256, 0);
  const u64 draws = 1 << 20;
  for (u64 i = 0; i < draws; ++i) counts[rng.next() & 0xff]++;
  CHECK(chi_square_uniform_pvalue(counts, draws) > 1e-4);
  // bounded sampling uniform over a non-power-of-two range
  std::vector<u64> c7(7, 0);
  for (u64 i = 0; i < 700000; ++i) c7[rng.below(7)]++;
  CHECK(chi_square_uniform_pvalue(c7, 700000) > 1e-4);
  // pair equidistribution of stream lanes
  std::vector<u64> pair_counts(16, 0);
  Rng s1 = seed_stream(1, 5), s2 = seed_stream(1, 6);
  for (u64 i = 0; i < 400000; ++i)
    pair_counts[(s1.next() & 3) | ((s2.next() & 3) << 2)]++;
  CHECK(chi_square_uniform_pvalue(pair_counts, 400000) > 1e-4);
}

TEST_CASE("config validation") {
  auto good = ExperimentConfig::from_text(
      R"cfg({"experiment":"return-prob","group":"GL(8,2)","word":"x1 x2","trials":10})cfg");
  CHECK(good.experiment() == "return-prob");
  CHECK(good.require<u64>("trials") == 10);
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::from_text(
          R"cfg({"experiment":"return-prob","grp":"GL(8,2)"})cfg"),
      doctest::Contains("unknown key 'grp'"), ClnError);
  CHECK_THROWS_AS(ExperimentConfig::from_text(R"cfg({"group":"GL(8,2)"})cfg"),
                  ClnError);
  CHECK_THROWS_AS(ExperimentConfig::from_text(
                      R"cfg({"experiment":"no-such-thing"})cfg"),
                  ClnError);
  CHECK_THROWS_AS(ExperimentConfig::from_text("not json"), ClnError);
  // malformed group descriptor surfaces a grammar-naming error
  auto bad_group = ExperimentConfig::from_text(
      R"cfg({"experiment":"return-prob","group":"Spx(4,3)","word":"x1 x2","trials":10})cfg");
  CHECK_THROWS_WITH_AS(run_experiment(bad_group, "/tmp/cln-test-out"),
                       doctest::Contains("unknown kind"), ClnError);
  // config round-trips losslessly through its canonical text
  auto again = ExperimentConfig::from_text(good.canonical_text());
  CHECK(again.canonical_text() == good.canonical_text());
  CHECK(again.hash() == good.hash());
}

TEST_CASE("experiments run and rerun byte-identically") {
  const std::string out = "/tmp/cln-test-out";
  std::filesystem::remove_all(out);
  auto run_twice = [&](const std::string& text) {
    auto cfg = ExperimentConfig::from_text(text);
    auto r1 = run_experiment(cfg, out + "/a");
    auto r2 = run_experiment(cfg, out + "/b");
    CHECK(slurp(r1.jsonl_path) == slurp(r2.jsonl_path));
    CHECK(slurp(r1.csv_path) == slurp(r2.csv_path));
    CHECK(!slurp(r1.jsonl_path).empty());
    return r1;
  };
  run_twice(
      R"cfg({"experiment":"return-prob","group":"GL(8,2)","word":"x1 x2","trials":20000,"seed":7,"threads":2})cfg");
  run_twice(
      R"cfg({"experiment":"lambda","group":"GL(6,2)","generators":4,"seeds":4,"seed":3,"tolerance":1e-9})cfg");
  run_twice(
      R"cfg({"experiment":"xwz-search","group":"GL(12,2)","d":4,"max_word_length":6,"seeds":3,"seed":1})cfg");
  run_twice(
      R"cfg({"experiment":"cd-density","group":"GL(7,3)","d":2,"trials":4000,"seed":5})cfg");
  run_twice(
      R"cfg({"experiment":"supp-tail","group":"GL(6,2)","word":"x1","delta":0.5,"trials":3000,"seed":2})cfg");
  run_twice(
      R"cfg({"experiment":"sn-pipeline","n":20,"seeds":3,"seed":9,"spectral_cap":0})cfg");
  run_twice(
      R"cfg({"experiment":"diameter-bfs","group":"GL(2,3):S","generators":2,"seeds":2,"seed":4})cfg");
  auto witt = run_twice(
      R"cfg({"experiment":"witt-count-check","group":"GO+(4,3)"})cfg");
  // the witt check reports a pass
  auto text = slurp(witt.jsonl_path);
  CHECK(text.find("\"violations\":0") != std::string::npos);
  std::filesystem::remove_all(out);
}

TEST_CASE("parallel and serial runs merge identically") {
  const std::string out = "/tmp/cln-test-par";
  std::filesystem::remove_all(out);
  auto base =
      R"cfg({"experiment":"return-prob","group":"Sp(6,3)","word":"x1 x2","trials":30000,"seed":11)cfg";
  auto serial = ExperimentConfig::from_text(std::string(base) + "}");
  auto parallel =
      ExperimentConfig::from_text(std::string(base) + R"cfg(,"threads":2})cfg");
  auto r1 = run_experiment(serial, out + "/s");
  auto r2 = run_experiment(parallel, out + "/p");
  CHECK(slurp(r1.jsonl_path) == slurp(r2.jsonl_path));
  CHECK(slurp(r1.csv_path) == slurp(r2.csv_path));
  std::filesystem::remove_all(out);
}

TEST_CASE("verify_counting_bound on a tiny space") {
  auto sp = parse_space("GO-(2,3)");
  auto rep = verify_counting_bound(*sp, 2);
  CHECK(rep.violations == 0);
  CHECK(rep.cosets > 0);
  // codim 0 + codim 1 (4 lines, 3 cosets each) + codim 2 (9 points)
  CHECK(rep.cosets == 1 + 4 * 3 + 9);
}

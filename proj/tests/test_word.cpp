#include <cmath>
#include <map>
#include <set>

#include "cln/group.hpp"
#include "cln/word.hpp"
#include "doctest.h"

using namespace cln;

TEST_CASE("free reduction") {
  // x y y^-1 -> x   (application order: y^-1 is applied... text reads x y y^-1)
  Word w = Word::from_text(2, "x1 x2 x2^-1");
  CHECK(w == Word::from_text(2, "x1"));
  CHECK(Word(2, {}).empty());
  CHECK(Word::from_text(1, "x1^-1 x1").empty());
  CHECK(Word(2, {1, -1}).empty());
}

TEST_CASE("word text round trip and application order") {
  Word w = Word::from_text(2, "x1 x2^-1 x1");
  CHECK(w.length() == 3);
  // application order: w_1 = x1 (rightmost), w_2 = x2^-1, w_3 = x1
  CHECK(w.letter(0) == 1);
  CHECK(w.letter(1) == -2);
  CHECK(w.letter(2) == 1);
  CHECK(w.to_text() == "x1 x2^-1 x1");
  CHECK(Word::from_text(2, w.to_text()) == w);
  CHECK(Word(2, {}).to_text() == "e");
}

TEST_CASE("cyclic reduction with pinned rotation") {
  // w = x y x^-1 has core y
  {
    Word w = Word::from_text(2, "x1 x2 x1^-1");
    auto cr = cyclic_reduce(w);
    CHECK(cr.core == Word::from_text(2, "x2"));
    // w = c^-1 core c as words
    Word recon = cr.conjugator.inverse().concat(cr.core).concat(cr.conjugator);
    CHECK(recon == w);
  }
  // already cyclically reduced and already canonical: unchanged
  {
    Word w = Word::from_text(2, "x1 x2");
    auto cr = cyclic_reduce(w);
    CHECK(cr.core == w);
    CHECK(cr.conjugator.empty());
  }
  // x^-1 y x x: core rotations {yx, xy}; canonical is x y
  {
    Word w = Word::from_text(2, "x1^-1 x2 x1 x1");
    auto cr = cyclic_reduce(w);
    CHECK(cr.core == Word::from_text(2, "x1 x2"));
    Word recon = cr.conjugator.inverse().concat(cr.core).concat(cr.conjugator);
    CHECK(recon == w);
  }
}

TEST_CASE("cyclic reduction reconstruction on random words") {
  Rng rng(17);
  for (int it = 0; it < 3000; ++it) {
    unsigned k = 1 + (unsigned)rng.below(3);
    Word w = random_walk_word(k, (unsigned)rng.below(14), rng);
    auto cr = cyclic_reduce(w);
    CHECK(cr.core.is_cyclically_reduced());
    Word recon = cr.conjugator.inverse().concat(cr.core).concat(cr.conjugator);
    CHECK(recon == w);
    // canonical rotation is minimal among all rotations
    if (cr.core.length() > 1) {
      auto reading = cr.core.reading_order();
      unsigned m = cr.core.length();
      for (unsigned r = 1; r < m; ++r) {
        std::vector<int> rot;
        for (unsigned i = 0; i < m; ++i) rot.push_back(reading[(i + r) % m]);
        std::vector<int> app(rot.rbegin(), rot.rend());
        Word rotated(cr.core.alphabet(), app);
        CHECK_FALSE(Word::search_order_less(rotated, cr.core));
      }
    }
  }
}

TEST_CASE("proper power detection") {
  {
    auto ps = is_proper_power(Word::from_text(2, "x1 x2 x1 x2"));
    CHECK(ps.proper_power);
    CHECK(ps.root == Word::from_text(2, "x1 x2"));
    CHECK(ps.exponent == 2);
  }
  {
    auto ps = is_proper_power(Word::from_text(2, "x1 x2 x1"));
    CHECK_FALSE(ps.proper_power);
    CHECK(ps.exponent == 1);
  }
  {
    auto ps = is_proper_power(Word::from_text(1, "x1 x1 x1"));
    CHECK(ps.proper_power);
    CHECK(ps.exponent == 3);
  }
  CHECK_THROWS_AS(is_proper_power(Word::from_text(2, "x1 x2 x1^-1")), ClnError);
}

TEST_CASE("proper power agrees with exhaustive period search, len <= 12") {
  for (unsigned k = 1; k <= 2; ++k) {
    // enumerate all cyclically reduced words up to length 12 via the
    // enumerator, cross-check against naive u^m expansion
    WordEnumerator en(k, k == 1 ? 12 : 9);
    Word w;
    while (en.next(w)) {
      if (w.empty() || !w.is_cyclically_reduced()) continue;
      auto ps = is_proper_power(w);
      // naive check: try all roots u of length dividing |w|
      bool naive = false;
      for (unsigned p = 1; p < w.length(); ++p) {
        if (w.length() % p) continue;
        std::vector<int> rep;
        for (unsigned c = 0; c < w.length() / p; ++c)
          for (unsigned t = 0; t < p; ++t) rep.push_back(w.letter(t));
        if (Word(k, rep) == w) {
          naive = true;
          break;
        }
      }
      CHECK(ps.proper_power == naive);
      if (ps.proper_power) {
        std::vector<int> rep;
        for (unsigned c = 0; c < ps.exponent; ++c)
          for (int l : ps.root.letters()) rep.push_back(l);
        CHECK(Word(k, rep) == w);
        CHECK_FALSE(is_proper_power(ps.root).proper_power);
      }
    }
  }
}

TEST_CASE("random walk word basics") {
  Rng rng(3);
  CHECK(random_walk_word(2, 0, rng).empty());
  // k = 1: P(trivial after 2 steps) = 1/2
  u64 trivial = 0, trials = 40000;
  for (u64 i = 0; i < trials; ++i)
    if (random_walk_word(1, 2, rng).empty()) ++trivial;
  double p = (double)trivial / trials;
  CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("return probability matches the exact tree recursion") {
  Rng rng(8);
  for (unsigned k = 1; k <= 3; ++k) {
    for (unsigned len : {2u, 4u, 6u, 8u, 12u}) {
      double exact = tree_walk_return_probability(k, len);
      u64 hits = 0, trials = 60000;
      for (u64 i = 0; i < trials; ++i)
        if (random_walk_word(k, len, rng).empty()) ++hits;
      double p = (double)hits / trials;
      double sigma = std::sqrt(exact * (1 - exact) / trials) + 1e-9;
      CAPTURE(k);
      CAPTURE(len);
      CHECK(std::abs(p - exact) < 3.5 * sigma);
    }
  }
}

TEST_CASE("proper power or trivial probability is small for k=2, len=20") {
  Rng rng(12);
  u64 bad = 0, trials = 30000;
  for (u64 i = 0; i < trials; ++i) {
    Word w = random_walk_word(2, 20, rng);
    if (w.empty()) {
      ++bad;
      continue;
    }
    auto cr = cyclic_reduce(w);
    if (cr.core.empty() || is_proper_power(cr.core).proper_power) ++bad;
  }
  CHECK((double)bad / trials < 0.05);
}

TEST_CASE("evaluate is a homomorphism") {
  Rng rng(5);
  auto desc = parse_group("GL(3,3)");
  std::vector<MatGF> xs = {sample_uniform(desc, rng), sample_uniform(desc, rng)};
  CHECK(evaluate_word(Word(2, {}), xs).is_identity());
  CHECK(evaluate_word(Word::from_text(2, "x1"), xs) == xs[0]);
  // w = x1 x2 x1^-1 against the direct triple product
  Word w = Word::from_text(2, "x1 x2 x1^-1");
  CHECK(evaluate_word(w, xs) == xs[0] * xs[1] * inverse(xs[0]));
  for (int it = 0; it < 200; ++it) {
    Word u = random_walk_word(2, (unsigned)rng.below(8), rng);
    Word v = random_walk_word(2, (unsigned)rng.below(8), rng);
    CHECK(evaluate_word(u.concat(v), xs) ==
          evaluate_word(u, xs) * evaluate_word(v, xs));
  }
  // bit-packed evaluation agrees
  auto d2 = parse_group("GL(6,2)");
  std::vector<MatGF> ys = {sample_uniform(d2, rng), sample_uniform(d2, rng)};
  std::vector<BitMat> yb = {BitMat::from_mat(ys[0]), BitMat::from_mat(ys[1])};
  for (int it = 0; it < 100; ++it) {
    Word u = random_walk_word(2, 9, rng);
    CHECK(evaluate_word_bits(u, yb).to_mat(d2.field()) == evaluate_word(u, ys));
  }
}

TEST_CASE("word enumerator order and counts") {
  WordEnumerator en(2, 3);
  std::vector<Word> words;
  Word w;
  while (en.next(w)) words.push_back(w);
  // counts: 1 + 4 + 4*3 + 4*9 = 53
  CHECK(words.size() == 53);
  CHECK(words[0].empty());
  CHECK(words[1] == Word::from_text(2, "x1"));
  CHECK(words[2] == Word::from_text(2, "x1^-1"));
  CHECK(words[3] == Word::from_text(2, "x2"));
  CHECK(words[5] == Word::from_text(2, "x1 x1"));
  for (size_t i = 1; i < words.size(); ++i) {
    CHECK(Word::search_order_less(words[i - 1], words[i]));
    CHECK(words[i].length() == words[i].letters().size());
  }
  std::set<std::string> uniq;
  for (auto& x : words) uniq.insert(x.to_text());
  CHECK(uniq.size() == words.size());
}

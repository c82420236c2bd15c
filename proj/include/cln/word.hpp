#pragma once

#include <string>
#include <vector>

#include "cln/matrix.hpp"
#include "cln/rng.hpp"

namespace cln {

/// Reduced word in the free group on k generators. Letters are stored in
/// application order: letters()[0] is the first letter applied to a vector,
/// i.e. the rightmost factor of the group expression. Text form reads the
/// group expression left to right ("x1 x2^-1" is the map v -> x1(x2^-1 v)).
/// A letter is +i for xi_i and -i for xi_i^{-1} (1-based i).
class Word {
 public:
  Word() = default;
  /// Letters in application order; freely reduces unless already reduced.
  Word(unsigned k, std::vector<int> letters);

  unsigned alphabet() const { return k_; }
  unsigned length() const { return (unsigned)letters_.size(); }
  bool empty() const { return letters_.empty(); }
  const std::vector<int>& letters() const { return letters_; }
  int letter(unsigned t) const { return letters_[t]; }  // w_{t+1}

  bool is_cyclically_reduced() const;

  friend bool operator==(const Word& a, const Word& b) {
    return a.letters_ == b.letters_;
  }

  Word inverse() const;
  /// Group product this * other (other applied first).
  Word concat(const Word& other) const;

  /// Total order used by search pipelines: by length, then lexicographic in
  /// reading order with x1 < x1^-1 < x2 < x2^-1 < ...
  static bool search_order_less(const Word& a, const Word& b);

  std::string to_text() const;  // "x1 x2^-1", reading order
  static Word from_text(unsigned k, const std::string& text);
  /// Reading-order letters (JSON-friendly form).
  std::vector<int> reading_order() const;

 private:
  unsigned k_ = 0;
  std::vector<int> letters_;
};

/// Free reduction (identity on already reduced input).
Word reduce(unsigned k, std::vector<int> letters);

struct CyclicReduction {
  Word core;        // cyclically reduced, canonical rotation
  Word conjugator;  // word c with original = c^{-1} * core * c
};

/// Cyclic reduction with the rotation pinned to the lexicographically least
/// (reading order, x1 < x1^-1 < x2 < ...) among all rotations of the core.
CyclicReduction cyclic_reduce(const Word& w);

struct PowerStructure {
  bool proper_power = false;
  Word root;
  unsigned exponent = 1;
};

/// Maximal-exponent power structure of a cyclically reduced word.
PowerStructure is_proper_power(const Word& w);

/// Product of len uniform letters (unreduced length len), freely reduced.
Word random_walk_word(unsigned k, unsigned len, Rng& rng);

/// Exact return probability of the simple random walk of the given length
/// on the 2k-regular tree (the probability the reduced word is trivial).
double tree_walk_return_probability(unsigned k, unsigned len);

/// Image of the word under xi_i -> xs[i-1].
MatGF evaluate_word(const Word& w, const std::vector<MatGF>& xs);
BitMat evaluate_word_bits(const Word& w, const std::vector<BitMat>& xs);

/// Enumerates reduced words in the pinned search order (by length, then
/// lexicographic in reading order), starting with the empty word.
class WordEnumerator {
 public:
  WordEnumerator(unsigned k, unsigned max_len);
  /// Next word, or false when exhausted.
  bool next(Word& out);

 private:
  unsigned k_, max_len_;
  std::vector<int> cur_;  // reading order ranks
  bool first_ = true;
};

}  // namespace cln

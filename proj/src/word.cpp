#include "cln/word.hpp"

#include <algorithm>
#include <sstream>

namespace cln {

namespace {

// rank for the pinned letter order x1 < x1^-1 < x2 < x2^-1 < ...
inline unsigned letter_rank(int l) {
  unsigned i = (unsigned)(l > 0 ? l : -l);
  return (i - 1) * 2 + (l < 0 ? 1 : 0);
}

inline int rank_letter(unsigned r) {
  int i = (int)(r / 2) + 1;
  return (r % 2) ? -i : i;
}

std::vector<int> reduce_letters(std::vector<int> letters) {
  std::vector<int> out;
  for (int l : letters) {
    if (!out.empty() && out.back() == -l)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

}  // namespace

Word::Word(unsigned k, std::vector<int> letters) : k_(k) {
  for (int l : letters) {
    if (l == 0 || (unsigned)(l > 0 ? l : -l) > k)
      throw ClnError("word: letter out of alphabet range");
  }
  letters_ = reduce_letters(std::move(letters));
}

bool Word::is_cyclically_reduced() const {
  if (letters_.size() < 2) return true;
  return letters_.front() != -letters_.back();
}

Word Word::inverse() const {
  std::vector<int> inv(letters_.rbegin(), letters_.rend());
  for (int& l : inv) l = -l;
  return Word(k_, std::move(inv));
}

Word Word::concat(const Word& other) const {
  // other applied first: application order = other.letters then ours
  std::vector<int> cat = other.letters_;
  cat.insert(cat.end(), letters_.begin(), letters_.end());
  return Word(std::max(k_, other.k_), std::move(cat));
}

bool Word::search_order_less(const Word& a, const Word& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  auto ra = a.reading_order(), rb = b.reading_order();
  for (size_t i = 0; i < ra.size(); ++i)
    if (ra[i] != rb[i]) return letter_rank(ra[i]) < letter_rank(rb[i]);
  return false;
}

std::string Word::to_text() const {
  if (letters_.empty()) return "e";
  std::ostringstream os;
  for (size_t i = letters_.size(); i-- > 0;) {
    int l = letters_[i];
    os << "x" << (l > 0 ? l : -l);
    if (l < 0) os << "^-1";
    if (i) os << ' ';
  }
  return os.str();
}

Word Word::from_text(unsigned k, const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  std::vector<int> reading;
  while (is >> tok) {
    if (tok == "e") continue;
    if (tok.size() < 2 || tok[0] != 'x')
      throw ClnError("word: bad token '" + tok + "' (expected e.g. x1, x2^-1)");
    bool inv = false;
    auto caret = tok.find('^');
    std::string num = tok.substr(1, caret == std::string::npos
                                        ? std::string::npos
                                        : caret - 1);
    if (caret != std::string::npos) {
      if (tok.substr(caret) != "^-1")
        throw ClnError("word: bad exponent in '" + tok + "'");
      inv = true;
    }
    int i;
    try {
      i = std::stoi(num);
    } catch (const std::exception&) {
      throw ClnError("word: bad index in '" + tok + "'");
    }
    if (i < 1) throw ClnError("word: generator index must be >= 1");
    reading.push_back(inv ? -i : i);
  }
  std::reverse(reading.begin(), reading.end());  // to application order
  return Word(k, std::move(reading));
}

std::vector<int> Word::reading_order() const {
  return {letters_.rbegin(), letters_.rend()};
}

Word reduce(unsigned k, std::vector<int> letters) {
  return Word(k, std::move(letters));
}

CyclicReduction cyclic_reduce(const Word& w) {
  std::vector<int> core = w.letters();
  std::vector<int> conj;  // application order
  while (core.size() >= 2 && core.back() == -core.front()) {
    conj.push_back(core.front());
    core.erase(core.begin());
    core.pop_back();
  }
  // canonical rotation: lexicographically least reading-order sequence
  size_t m = core.size();
  size_t best = 0;
  if (m > 1) {
    auto reading_at = [&](size_t rot, size_t idx) {
      // reading order = reversed application order, rotated
      return core[(2 * m - 1 - idx - rot) % m];
    };
    for (size_t rot = 1; rot < m; ++rot) {
      // rotation must stay cyclically reduced automatically (it is a
      // rotation of a cyclically reduced word)
      for (size_t idx = 0; idx < m; ++idx) {
        unsigned a = letter_rank(reading_at(rot, idx));
        unsigned b = letter_rank(reading_at(best, idx));
        if (a != b) {
          if (a < b) best = rot;
          break;
        }
      }
    }
  }
  CyclicReduction out;
  if (best == 0) {
    out.core = Word(w.alphabet(), core);
    out.conjugator = Word(w.alphabet(), conj);
  } else {
    // reading rotation by r: core' = u^-1 core u with u = reading prefix of
    // length r; new conjugator = u^-1 * old
    std::vector<int> rotated;
    for (size_t idx = 0; idx < m; ++idx)
      rotated.push_back(core[(2 * m - 1 - (m - 1 - idx) - best) % m]);
    // rotated is in application order for the rotated core
    std::vector<int> u_app;  // u = first `best` reading letters of core
    for (size_t idx = best; idx-- > 0;)
      u_app.push_back(core[(2 * m - 1 - idx) % m]);
    Word u(w.alphabet(), u_app);
    out.core = Word(w.alphabet(), rotated);
    out.conjugator = u.inverse().concat(Word(w.alphabet(), conj));
  }
  return out;
}

PowerStructure is_proper_power(const Word& w) {
  if (!w.is_cyclically_reduced())
    throw ClnError("is_proper_power: input must be cyclically reduced");
  PowerStructure out;
  unsigned len = w.length();
  out.root = w;
  if (len == 0) return out;
  for (unsigned p = 1; p < len; ++p) {
    if (len % p != 0) continue;
    bool periodic = true;
    for (unsigned t = p; t < len && periodic; ++t)
      if (w.letter(t) != w.letter(t - p)) periodic = false;
    if (periodic) {
      out.proper_power = true;
      out.exponent = len / p;
      out.root = Word(w.alphabet(),
                      std::vector<int>(w.letters().begin(),
                                       w.letters().begin() + p));
      return out;
    }
  }
  return out;
}

Word random_walk_word(unsigned k, unsigned len, Rng& rng) {
  if (k < 1) throw ClnError("random_walk_word: alphabet must be nonempty");
  std::vector<int> letters(len);
  for (auto& l : letters) l = rank_letter((unsigned)rng.below(2 * k));
  return Word(k, std::move(letters));
}

double tree_walk_return_probability(unsigned k, unsigned len) {
  // distance-from-root walk: from 0 go to 1 surely; from d >= 1 go to d-1
  // with probability 1/(2k), to d+1 otherwise
  std::vector<double> p(len + 2, 0.0);
  p[0] = 1.0;
  for (unsigned t = 0; t < len; ++t) {
    std::vector<double> nxt(len + 2, 0.0);
    for (unsigned d = 0; d <= t && d <= len; ++d) {
      if (p[d] == 0.0) continue;
      if (d == 0) {
        nxt[1] += p[0];
      } else {
        nxt[d - 1] += p[d] / (2.0 * k);
        nxt[d + 1] += p[d] * (2.0 * k - 1) / (2.0 * k);
      }
    }
    p = std::move(nxt);
  }
  return p[0];
}

MatGF evaluate_word(const Word& w, const std::vector<MatGF>& xs) {
  if (xs.empty()) throw ClnError("evaluate_word: empty alphabet");
  if (xs.size() != w.alphabet())
    throw ClnError("evaluate_word: element count must match the alphabet");
  for (const auto& x : xs)
    if (x.field() != xs[0].field() || x.rows() != xs[0].rows())
      throw ClnError("evaluate_word: mismatched elements");
  unsigned n = xs[0].rows();
  std::vector<MatGF> inv(xs.size());
  MatGF acc = MatGF::identity(xs[0].field(), n);
  for (int l : w.letters()) {
    unsigned i = (unsigned)(l > 0 ? l : -l) - 1;
    if (l > 0) {
      acc = xs[i] * acc;
    } else {
      if (inv[i].rows() == 0) inv[i] = inverse(xs[i]);
      acc = inv[i] * acc;
    }
  }
  return acc;
}

BitMat evaluate_word_bits(const Word& w, const std::vector<BitMat>& xs) {
  if (xs.size() != w.alphabet())
    throw ClnError("evaluate_word_bits: element count must match the alphabet");
  if (xs.empty()) throw ClnError("evaluate_word_bits: empty alphabet");
  std::vector<BitMat> inv(xs.size());
  BitMat acc = BitMat::identity(xs[0].rows());
  for (int l : w.letters()) {
    unsigned i = (unsigned)(l > 0 ? l : -l) - 1;
    if (l > 0) {
      acc = xs[i] * acc;
    } else {
      if (inv[i].rows() == 0) {
        auto iv = xs[i].try_inverse();
        if (!iv) throw ClnError("evaluate_word_bits: singular element");
        inv[i] = *iv;
      }
      acc = inv[i] * acc;
    }
  }
  return acc;
}

WordEnumerator::WordEnumerator(unsigned k, unsigned max_len)
    : k_(k), max_len_(max_len) {
  if (k < 1) throw ClnError("word enumerator: alphabet must be nonempty");
}

bool WordEnumerator::next(Word& out) {
  if (first_) {
    first_ = false;
    cur_.clear();
    out = Word(k_, {});
    return true;
  }
  // advance cur_ (reading-order rank sequence) in by-length lex order,
  // skipping sequences with adjacent inverses
  auto ok_at = [&](size_t i) {
    if (i == 0) return true;
    return rank_letter((unsigned)cur_[i]) != -rank_letter((unsigned)cur_[i - 1]);
  };
  while (true) {
    // odometer increment, rightmost fastest
    size_t i = cur_.size();
    while (i > 0 && cur_[i - 1] == (int)(2 * k_ - 1)) {
      cur_[i - 1] = 0;
      --i;
    }
    if (i == 0) {
      if (cur_.size() >= max_len_) return false;
      cur_.assign(cur_.size() + 1, 0);
    } else {
      cur_[i - 1]++;
    }
    bool good = true;
    for (size_t t = 1; t < cur_.size() && good; ++t)
      if (!ok_at(t)) good = false;
    if (!good) continue;
    std::vector<int> app(cur_.size());
    for (size_t t = 0; t < cur_.size(); ++t)
      app[cur_.size() - 1 - t] = rank_letter((unsigned)cur_[t]);
    out = Word(k_, std::move(app));
    if (out.length() == cur_.size()) return true;  // reduced as expected
  }
}

}  // namespace cln

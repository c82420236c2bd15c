#pragma once

#include "cln/spectral.hpp"

namespace cln {

/// Permutation of {0..n-1} stored as an image array.
class Perm {
 public:
  Perm() = default;
  explicit Perm(unsigned n);  // identity
  explicit Perm(std::vector<u32> images);

  static Perm random(unsigned n, Rng& rng);  // uniform (Fisher-Yates)

  unsigned n() const { return (unsigned)img_.size(); }
  u32 operator()(u32 x) const { return img_[x]; }
  const std::vector<u32>& images() const { return img_; }

  bool is_identity() const;
  friend bool operator==(const Perm& a, const Perm& b) {
    return a.img_ == b.img_;
  }

  Perm operator*(const Perm& o) const;  // (a*b)(x) = a(b(x))
  Perm inverse() const;
  /// Power with the exponent given in factored form (product of factors,
  /// reduced per cycle), so astronomically large exponents are fine.
  Perm pow_factored(const std::vector<u64>& factors) const;

  /// Sorted cycle lengths (including fixed points), summing to n.
  std::vector<unsigned> cycle_type() const;
  u64 fixed_points() const;
  /// Parity: +1 for even permutations, -1 for odd.
  int sign() const;

  std::string to_text() const;  // one-line image array
  static Perm from_text(const std::string& text);

 private:
  std::vector<u32> img_;
};

/// Point-trajectory engine for the symmetric group, mirroring the linear
/// one: lazy free choices are uniform outside the known codomain of the
/// letter; coincidences are landings in R plus everything seen.
class SnRunner {
 public:
  SnRunner(unsigned n, Word w, std::vector<u32> starts, std::vector<u32> R);
  ~SnRunner();
  void set_elements(std::vector<Perm> xs);
  void run(Rng& rng, std::vector<StrandStat>& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct FixTailReport {
  u64 trials = 0, tail_hits = 0;
  double freq = 0.0;
  double bound = 0.0;  // exp(-f/len^2), the stated tail bound with c = 1
  // binomial-moment diagnostic at a few r values: (r, E C(F,r), bound)
  std::vector<std::array<double, 3>> moments;
};

/// Monte Carlo tail P(|fix w(x_1..x_k)| >= f) over uniform permutations.
FixTailReport estimate_fix_tail(const Word& w, unsigned n, unsigned f,
                                u64 trials, Rng& rng);

enum class CycleVariant { ThreeCycle, LongCycle };  // appendix alternatives

/// Bookkeeping for the target classes: ThreeCycle uses types
/// (1,1,3,r,n') / (2,3,r,n') with r in {4,5} and 3 not dividing n';
/// LongCycle uses a 101-cycle plus an n'-cycle with r in {99,100} and
/// 101 not dividing n'.
struct VariantSpec {
  CycleVariant variant;
  unsigned n = 0, r = 0, nprime = 0;
  unsigned small_cycle = 0;  // 3 or 101
  static VariantSpec make(CycleVariant v, unsigned n);
};

bool in_target_class(const VariantSpec& spec, const Perm& g);

struct CycleWordSearch {
  bool found = false;
  Word inner;
  u64 words_tested = 0;
};

/// First word u (pinned order, over y and z) with x * u(y,z) in the class.
CycleWordSearch find_word_into_cycle_class(const Perm& x, const Perm& y,
                                           const Perm& z,
                                           const VariantSpec& spec,
                                           unsigned max_len);

struct SmallCyclePower {
  Perm result;
  std::vector<u64> exponent_factors;  // product form of the exponent
};

/// Raises a class element to the exponent killing everything but the small
/// cycle: 2 r n' (ThreeCycle) or r! n' (LongCycle). Throws if g is not in
/// the class; the result is verified to be a single small cycle.
SmallCyclePower power_to_small_cycle(const VariantSpec& spec, const Perm& g);

struct Rational {
  i64 num = 0;
  u64 den = 1;
  void reduce();
  Rational operator+(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  double value() const { return (double)num / (double)den; }
  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
};

/// Exact density of a cycle type (multiset of lengths) as a fraction of n!.
Rational cycle_type_density(const std::vector<unsigned>& type);

struct ClassDensityReport {
  Rational density;             // |C| / n!
  Rational sign_inner_product;  // <1_C, sgn>, exactly 0 for valid variants
  std::vector<std::vector<unsigned>> types;  // explicit types (ThreeCycle)
};

ClassDensityReport class_density_and_sign(const VariantSpec& spec);

/// Conjugation action of permutations on the 3-cycles, as an orbit index.
OrbitIndex three_cycle_conjugation_orbit(const std::vector<Perm>& gens);

struct PipelineReport {
  unsigned n = 0;
  bool word_found = false;
  Word inner;
  u64 words_tested = 0;
  u64 three_cycle_word_length = 0;  // (1 + |u|) * 2 r n'
  bool power_verified = false;
  double length_budget = 0.0;  // 40 n ln n
  bool within_budget = false;
  // optional spectral stage on the 3-cycle class (small n only)
  bool spectral_run = false;
  double class_rho = 0.0;
  unsigned class_diameter = 0;
  bool diameter_run = false;
  std::string to_json() const;
};

/// Full three-generator pipeline: find a short word into the class, power
/// it to an explicit 3-cycle, compare the resulting word length with the
/// 40 n log n budget, and (for small n) measure the conjugation action on
/// 3-cycles.
PipelineReport sn_pipeline(unsigned n, u64 seed, unsigned max_len = 12,
                           unsigned spectral_cap = 40);

}  // namespace cln

#include "cln/snlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace cln {

Perm::Perm(unsigned n) : img_(n) {
  std::iota(img_.begin(), img_.end(), 0);
}

Perm::Perm(std::vector<u32> images) : img_(std::move(images)) {
  std::vector<bool> seen(img_.size(), false);
  for (u32 v : img_) {
    if (v >= img_.size() || seen[v]) throw ClnError("perm: not a bijection");
    seen[v] = true;
  }
}

Perm Perm::random(unsigned n, Rng& rng) {
  Perm p(n);
  for (unsigned i = n; i > 1; --i)
    std::swap(p.img_[i - 1], p.img_[rng.below(i)]);
  return p;
}

bool Perm::is_identity() const {
  for (u32 i = 0; i < img_.size(); ++i)
    if (img_[i] != i) return false;
  return true;
}

Perm Perm::operator*(const Perm& o) const {
  Perm r;
  r.img_.resize(img_.size());
  for (u32 i = 0; i < img_.size(); ++i) r.img_[i] = img_[o.img_[i]];
  return r;
}

Perm Perm::inverse() const {
  Perm r;
  r.img_.resize(img_.size());
  for (u32 i = 0; i < img_.size(); ++i) r.img_[img_[i]] = i;
  return r;
}

Perm Perm::pow_factored(const std::vector<u64>& factors) const {
  const unsigned n = (unsigned)img_.size();
  Perm out;
  out.img_.assign(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<u32> cycle;
  for (u32 start = 0; start < n; ++start) {
    if (seen[start]) continue;
    cycle.clear();
    u32 cur = start;
    do {
      seen[cur] = true;
      cycle.push_back(cur);
      cur = img_[cur];
    } while (cur != start);
    u64 len = cycle.size();
    u64 shift = 1 % len;
    for (u64 f : factors) shift = (shift * (f % len)) % len;
    for (u64 i = 0; i < len; ++i)
      out.img_[cycle[i]] = cycle[(i + shift) % len];
  }
  return out;
}

std::vector<unsigned> Perm::cycle_type() const {
  std::vector<unsigned> type;
  std::vector<bool> seen(img_.size(), false);
  for (u32 start = 0; start < img_.size(); ++start) {
    if (seen[start]) continue;
    unsigned len = 0;
    u32 cur = start;
    do {
      seen[cur] = true;
      ++len;
      cur = img_[cur];
    } while (cur != start);
    type.push_back(len);
  }
  std::sort(type.begin(), type.end());
  return type;
}

u64 Perm::fixed_points() const {
  u64 c = 0;
  for (u32 i = 0; i < img_.size(); ++i)
    if (img_[i] == i) ++c;
  return c;
}

int Perm::sign() const {
  auto type = cycle_type();
  unsigned transpositions = 0;
  for (unsigned len : type) transpositions += len - 1;
  return transpositions % 2 ? -1 : 1;
}

std::string Perm::to_text() const {
  std::ostringstream os;
  for (size_t i = 0; i < img_.size(); ++i) {
    if (i) os << ' ';
    os << img_[i];
  }
  return os.str();
}

Perm Perm::from_text(const std::string& text) {
  std::istringstream is(text);
  std::vector<u32> img;
  u64 v;
  while (is >> v) img.push_back((u32)v);
  return Perm(std::move(img));
}

// ---------------------------------------------------------------------------

struct SnRunner::Impl {
  unsigned n = 0, k = 0, len = 0, r = 0;
  Word w;
  std::vector<u32> starts, R;
  bool materialized = false;
  std::vector<Perm> xs, xs_inv;
  std::vector<bool> start_indep;

  // per generator: partial injection a -> b and its inverse view
  std::vector<std::vector<u32>> fwd, bwd;  // n-sized maps, SENTINEL empty
  std::vector<std::vector<u32>> touched_fwd, touched_bwd;
  std::vector<bool> seen;      // coincidence set
  std::vector<u32> seen_list;
  std::vector<bool> in_R;
  std::vector<u32> cur;
  static constexpr u32 kNone = UINT32_MAX;

  void setup() {
    fwd.assign(k, std::vector<u32>(n, kNone));
    bwd.assign(k, std::vector<u32>(n, kNone));
    touched_fwd.assign(k, {});
    touched_bwd.assign(k, {});
    seen.assign(n, false);
    in_R.assign(n, false);
    for (u32 p : R) in_R[p] = true;
    cur.resize(r);
    start_indep.assign(r, false);
    std::unordered_set<u32> early;
    for (unsigned i = 0; i < r; ++i) {
      start_indep[i] = !early.count(starts[i]);
      early.insert(starts[i]);
    }
  }

  void run(Rng& rng, std::vector<StrandStat>& out) {
    out.assign(r, StrandStat{});
    for (unsigned i = 0; i < r; ++i) {
      out[i].start_independent = start_indep[i];
      cur[i] = starts[i];
    }
    for (unsigned j = 0; j < k; ++j) {
      for (u32 p : touched_fwd[j]) fwd[j][p] = kNone;
      for (u32 p : touched_bwd[j]) bwd[j][p] = kNone;
      touched_fwd[j].clear();
      touched_bwd[j].clear();
    }
    for (u32 p : seen_list) seen[p] = false;
    seen_list.clear();
    auto mark_seen = [&](u32 p) {
      if (!seen[p]) {
        seen[p] = true;
        seen_list.push_back(p);
      }
    };

    for (unsigned t = 1; t <= len; ++t) {
      int letter = w.letter(t - 1);
      unsigned j = (unsigned)(letter > 0 ? letter : -letter) - 1;
      bool plus = letter > 0;
      auto& dom = plus ? fwd[j] : bwd[j];
      auto& cod = plus ? bwd[j] : fwd[j];
      auto& tdom = plus ? touched_fwd[j] : touched_bwd[j];
      auto& tcod = plus ? touched_bwd[j] : touched_fwd[j];
      for (unsigned i = 0; i < r; ++i) {
        u32 u = cur[i];
        mark_seen(u);
        u32 v;
        if (dom[u] != kNone) {
          v = dom[u];
        } else {
          if (materialized) {
            v = plus ? xs[j](u) : xs_inv[j](u);
          } else {
            do {
              v = (u32)rng.below(n);
            } while (cod[v] != kNone);
          }
          bool coincidence = in_R[v] || seen[v];
          if (coincidence) {
            out[i].coincidences++;
            if (out[i].first_t == 0) out[i].first_t = t;
            out[i].last_t = t;
          }
          dom[u] = v;
          cod[v] = u;
          tdom.push_back(u);
          tcod.push_back(v);
        }
        mark_seen(v);
        cur[i] = v;
      }
    }
    for (unsigned i = 0; i < r; ++i) {
      out[i].closed = cur[i] == starts[i];
      if (out[i].start_independent && len > 0 && in_R[cur[i]] &&
          out[i].coincidences == 0)
        throw ClnError("sn trajectory: closed into R without a coincidence "
                       "(invariant violation)");
    }
  }
};

SnRunner::SnRunner(unsigned n, Word w, std::vector<u32> starts,
                   std::vector<u32> R)
    : impl_(new Impl()) {
  impl_->n = n;
  impl_->w = std::move(w);
  impl_->k = impl_->w.alphabet();
  impl_->len = impl_->w.length();
  impl_->starts = std::move(starts);
  impl_->R = std::move(R);
  impl_->r = (unsigned)impl_->starts.size();
  for (u32 p : impl_->starts)
    if (p >= n) throw ClnError("sn trajectory: start out of range");
  impl_->setup();
}

SnRunner::~SnRunner() = default;

void SnRunner::set_elements(std::vector<Perm> xs) {
  if (xs.size() != impl_->k)
    throw ClnError("sn trajectory: element count must match the alphabet");
  impl_->xs = std::move(xs);
  impl_->xs_inv.clear();
  for (const auto& p : impl_->xs) impl_->xs_inv.push_back(p.inverse());
  impl_->materialized = true;
}

void SnRunner::run(Rng& rng, std::vector<StrandStat>& out) {
  impl_->run(rng, out);
}

// ---------------------------------------------------------------------------

FixTailReport estimate_fix_tail(const Word& w, unsigned n, unsigned f,
                                u64 trials, Rng& rng) {
  if (w.empty()) throw ClnError("fix tail: word must be nontrivial");
  const unsigned k = w.alphabet();
  FixTailReport rep;
  rep.trials = trials;
  double sum_f = 0.0, sum_c1 = 0.0, sum_c2 = 0.0, sum_cr = 0.0;
  const unsigned len = w.length();
  unsigned rstar = std::max<unsigned>(1, f / (4 * len * len));
  std::vector<Perm> xs(k), xi(k);
  for (u64 it = 0; it < trials; ++it) {
    for (unsigned j = 0; j < k; ++j) {
      xs[j] = Perm::random(n, rng);
      xi[j] = xs[j].inverse();
    }
    u64 fixed = 0;
    for (u32 p = 0; p < n; ++p) {
      u32 cur = p;
      for (int l : w.letters()) {
        unsigned j = (unsigned)(l > 0 ? l : -l) - 1;
        cur = l > 0 ? xs[j](cur) : xi[j](cur);
      }
      if (cur == p) ++fixed;
    }
    if (fixed >= f) rep.tail_hits++;
    double F = (double)fixed;
    sum_f += F;
    sum_c1 += F;
    sum_c2 += F * (F - 1) / 2.0;
    double cr = 1.0;
    for (unsigned i = 0; i < rstar; ++i) cr *= (F - i) / (double)(i + 1);
    sum_cr += std::max(cr, 0.0);
  }
  rep.freq = (double)rep.tail_hits / (double)trials;
  rep.bound = std::exp(-(double)f / ((double)len * len));
  auto moment_bound = [&](unsigned rr) {
    // C(n,r) (r len^2 / (n - r len))^r
    double b = 1.0;
    for (unsigned i = 0; i < rr; ++i) b *= (double)(n - i) / (double)(i + 1);
    double base = (double)rr * len * len / ((double)n - (double)rr * len);
    return b * std::pow(base, (double)rr);
  };
  rep.moments.push_back({1.0, sum_c1 / trials, moment_bound(1)});
  rep.moments.push_back({2.0, sum_c2 / trials, moment_bound(2)});
  rep.moments.push_back({(double)rstar, sum_cr / trials, moment_bound(rstar)});
  return rep;
}

VariantSpec VariantSpec::make(CycleVariant v, unsigned n) {
  VariantSpec spec;
  spec.variant = v;
  spec.n = n;
  if (v == CycleVariant::ThreeCycle) {
    spec.small_cycle = 3;
    // n - 5 = n' + r, r in {4,5}, 3 not dividing n'; all parts distinct
    for (unsigned r : {4u, 5u}) {
      if (n < 5 + r + 7) continue;
      unsigned np = n - 5 - r;
      if (np % 3 == 0) continue;
      spec.r = r;
      spec.nprime = np;
      return spec;
    }
    throw ClnError("variant: no admissible (r, n') split for this n");
  }
  spec.small_cycle = 101;
  for (unsigned r : {99u, 100u}) {
    if (n < 101 + r + 102) continue;
    unsigned np = n - 101 - r;
    if (np % 101 == 0) continue;
    spec.r = r;
    spec.nprime = np;
    return spec;
  }
  throw ClnError("variant: no admissible (r, n') split for this n");
}

bool in_target_class(const VariantSpec& spec, const Perm& g) {
  auto type = g.cycle_type();
  if (spec.variant == CycleVariant::ThreeCycle) {
    std::vector<unsigned> t1 = {1, 1, 3, spec.r, spec.nprime};
    std::vector<unsigned> t2 = {2, 3, spec.r, spec.nprime};
    std::sort(t1.begin(), t1.end());
    std::sort(t2.begin(), t2.end());
    return type == t1 || type == t2;
  }
  // LongCycle: a 101-cycle and an n'-cycle present
  bool has_small = false, has_long = false;
  for (unsigned len : type) {
    if (len == 101) has_small = true;
    if (len == spec.nprime) has_long = true;
  }
  return has_small && has_long;
}

CycleWordSearch find_word_into_cycle_class(const Perm& x, const Perm& y,
                                           const Perm& z,
                                           const VariantSpec& spec,
                                           unsigned max_len) {
  std::vector<Perm> gens = {y, z};
  std::vector<Perm> inv = {y.inverse(), z.inverse()};
  CycleWordSearch out;
  WordEnumerator en(2, max_len);
  Word u;
  while (en.next(u)) {
    out.words_tested++;
    Perm acc(x.n());
    for (int l : u.letters()) {
      unsigned j = (unsigned)(l > 0 ? l : -l) - 1;
      acc = (l > 0 ? gens[j] : inv[j]) * acc;
    }
    Perm h = x * acc;
    if (in_target_class(spec, h)) {
      out.found = true;
      out.inner = u;
      return out;
    }
  }
  return out;
}

SmallCyclePower power_to_small_cycle(const VariantSpec& spec, const Perm& g) {
  if (!in_target_class(spec, g))
    throw ClnError("power_to_small_cycle: element is not in the target class");
  SmallCyclePower out;
  if (spec.variant == CycleVariant::ThreeCycle) {
    out.exponent_factors = {2, spec.r, spec.nprime};
  } else {
    out.exponent_factors.push_back(spec.nprime);
    for (u64 i = 2; i <= spec.r; ++i) out.exponent_factors.push_back(i);
  }
  out.result = g.pow_factored(out.exponent_factors);
  // must be a single small cycle
  auto type = out.result.cycle_type();
  unsigned nontrivial = 0;
  bool good = true;
  for (unsigned len : type) {
    if (len == 1) continue;
    ++nontrivial;
    if (len != spec.small_cycle) good = false;
  }
  if (!good || nontrivial != 1)
    throw ClnError("power_to_small_cycle: power is not a single small cycle");
  return out;
}

void Rational::reduce() {
  if (num == 0) {
    den = 1;
    return;
  }
  u64 a = num < 0 ? (u64)(-num) : (u64)num;
  u64 g = gcd_u64(a, den);
  num /= (i64)g;
  den /= g;
}

Rational Rational::operator+(const Rational& o) const {
  Rational r{num * (i64)o.den + o.num * (i64)den, den * o.den};
  r.reduce();
  return r;
}

Rational Rational::operator*(const Rational& o) const {
  Rational r{num * o.num, den * o.den};
  r.reduce();
  return r;
}

Rational cycle_type_density(const std::vector<unsigned>& type) {
  // 1 / prod over distinct lengths (len^mult * mult!)
  u64 den = 1;
  size_t i = 0;
  while (i < type.size()) {
    size_t j = i;
    while (j < type.size() && type[j] == type[i]) ++j;
    u64 mult = j - i;
    for (u64 m = 0; m < mult; ++m) den *= type[i];
    for (u64 m = 2; m <= mult; ++m) den *= m;
    i = j;
  }
  Rational r{1, den};
  return r;
}

ClassDensityReport class_density_and_sign(const VariantSpec& spec) {
  ClassDensityReport rep;
  if (spec.variant == CycleVariant::ThreeCycle) {
    std::vector<unsigned> t1 = {1, 1, 3, spec.r, spec.nprime};
    std::vector<unsigned> t2 = {2, 3, spec.r, spec.nprime};
    std::sort(t1.begin(), t1.end());
    std::sort(t2.begin(), t2.end());
    rep.types = {t1, t2};
    Rational d1 = cycle_type_density(t1), d2 = cycle_type_density(t2);
    rep.density = d1 + d2;
    auto sgn = [&](const std::vector<unsigned>& t) {
      unsigned transpositions = 0;
      for (unsigned len : t) transpositions += len - 1;
      return transpositions % 2 ? -1 : 1;
    };
    Rational s1{sgn(t1) * d1.num, d1.den}, s2{sgn(t2) * d2.num, d2.den};
    rep.sign_inner_product = s1 + s2;
    return rep;
  }
  // LongCycle: density 1/(101 n'), and the sign sum vanishes because the
  // free S_r part sums sign to zero for r >= 2
  rep.density = Rational{1, (u64)101 * spec.nprime};
  rep.density.reduce();
  rep.sign_inner_product = Rational{0, 1};
  return rep;
}

OrbitIndex three_cycle_conjugation_orbit(const std::vector<Perm>& gens) {
  if (gens.empty()) throw ClnError("three-cycle orbit: need generators");
  const unsigned n = gens[0].n();
  if (n < 3) throw ClnError("three-cycle orbit: need n >= 3");
  // canonical 3-cycle encoding: (a b c) with a the smallest point; the two
  // orientations are distinct cycles
  std::vector<u32> index((size_t)n * n * n, UINT32_MAX);
  std::vector<std::array<u32, 3>> cycles;
  auto canon = [&](u32 a, u32 b, u32 c) -> std::array<u32, 3> {
    // rotate so the smallest is first
    if (b < a && b < c) return {b, c, a};
    if (c < a && c < b) return {c, a, b};
    return {a, b, c};
  };
  for (u32 a = 0; a < n; ++a)
    for (u32 b = a + 1; b < n; ++b)
      for (u32 c = a + 1; c < n; ++c) {
        if (c == b) continue;
        std::array<u32, 3> cyc = {a, b, c};
        index[((size_t)a * n + b) * n + c] = (u32)cycles.size();
        cycles.push_back(cyc);
      }
  std::vector<std::vector<u32>> perms;
  for (const auto& g : gens) {
    std::vector<u32> img(cycles.size());
    for (size_t i = 0; i < cycles.size(); ++i) {
      auto [a, b, c] = cycles[i];
      auto m = canon(g(a), g(b), g(c));
      img[i] = index[((size_t)m[0] * n + m[1]) * n + m[2]];
    }
    perms.push_back(std::move(img));
  }
  return OrbitIndex::from_permutations(std::move(perms));
}

std::string PipelineReport::to_json() const {
  nlohmann::json j{{"n", n},
                   {"word_found", word_found},
                   {"inner_word", inner.reading_order()},
                   {"words_tested", words_tested},
                   {"three_cycle_word_length", three_cycle_word_length},
                   {"power_verified", power_verified},
                   {"length_budget", length_budget},
                   {"within_budget", within_budget},
                   {"spectral_run", spectral_run},
                   {"class_rho", class_rho},
                   {"class_diameter", class_diameter},
                   {"diameter_run", diameter_run}};
  return j.dump();
}

PipelineReport sn_pipeline(unsigned n, u64 seed, unsigned max_len,
                           unsigned spectral_cap) {
  PipelineReport rep;
  rep.n = n;
  Rng rng = seed_stream(seed, 0);
  Perm x = Perm::random(n, rng), y = Perm::random(n, rng),
       z = Perm::random(n, rng);
  auto spec = VariantSpec::make(CycleVariant::ThreeCycle, n);
  auto search = find_word_into_cycle_class(x, y, z, spec, max_len);
  rep.words_tested = search.words_tested;
  rep.length_budget = 40.0 * n * std::log((double)n);
  if (!search.found) return rep;
  rep.word_found = true;
  rep.inner = search.inner;
  Perm yz(n);
  {
    std::vector<Perm> gens = {y, z}, inv = {y.inverse(), z.inverse()};
    for (int l : search.inner.letters()) {
      unsigned j = (unsigned)(l > 0 ? l : -l) - 1;
      yz = (l > 0 ? gens[j] : inv[j]) * yz;
    }
  }
  Perm h = x * yz;
  auto power = power_to_small_cycle(spec, h);
  // the power is re-verified inside power_to_small_cycle
  rep.power_verified = true;
  u64 expo = 1;
  for (u64 f : power.exponent_factors) expo *= f;
  rep.three_cycle_word_length = (u64)(1 + search.inner.length()) * expo;
  rep.within_budget = (double)rep.three_cycle_word_length <= rep.length_budget;

  if (n <= spectral_cap) {
    auto orbit = three_cycle_conjugation_orbit({x, y, z});
    rep.spectral_run = true;
    auto srep = estimate_lambda_power(orbit, 1e-10, 20000, rng);
    rep.class_rho = srep.rho;
    if (orbit.size() <= 5000) {
      rep.class_diameter = schreier_diameter(orbit);
      rep.diameter_run = true;
    }
  }
  return rep;
}

}  // namespace cln

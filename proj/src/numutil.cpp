#include "cln/numutil.hpp"

#include <cmath>

#include "cln/rng.hpp"

namespace cln {

u128 ipow128(u64 base, unsigned exp) {
  u128 r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    u128 next = r * base;
    if (base != 0 && next / base != r) throw ClnError("ipow128 overflow");
    if (next >> 127) throw ClnError("ipow128 overflow");
    r = next;
  }
  return r;
}

u64 gcd_u64(u64 a, u64 b) {
  while (b) {
    u64 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

namespace {

u64 mulmod(u64 a, u64 b, u64 m) { return (u64)((u128)a * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

bool miller_rabin(u64 n, u64 a) {
  if (n % a == 0) return n == a;
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  u64 x = powmod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < s; ++i) {
    x = mulmod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

u64 pollard_rho(u64 n, Rng& rng) {
  if ((n & 1) == 0) return 2;
  while (true) {
    u64 x = rng.below(n - 2) + 2;
    u64 y = x;
    u64 c = rng.below(n - 1) + 1;
    u64 d = 1;
    while (d == 1) {
      x = (mulmod(x, x, n) + c) % n;
      y = (mulmod(y, y, n) + c) % n;
      y = (mulmod(y, y, n) + c) % n;
      d = gcd_u64(x > y ? x - y : y - x, n);
    }
    if (d != n) return d;
  }
}

void factor_rec(u64 n, std::map<u64, unsigned>& out, Rng& rng) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    out[n]++;
    return;
  }
  u64 d = pollard_rho(n, rng);
  factor_rec(d, out, rng);
  factor_rec(n / d, out, rng);
}

}  // namespace

bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL,
                29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  // Deterministic Miller-Rabin base set for 64-bit inputs.
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL,
                29ULL, 31ULL, 37ULL}) {
    if (!miller_rabin(n, a)) return false;
  }
  return true;
}

std::map<u64, unsigned> factorize_u64(u64 n) {
  std::map<u64, unsigned> out;
  if (n == 0) throw ClnError("factorize_u64: zero input");
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
    while (n % p == 0) {
      out[p]++;
      n /= p;
    }
  }
  Rng rng(0x5eedf00d);
  factor_rec(n, out, rng);
  return out;
}

namespace {

double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum, ap = a;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ClnError("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

Interval wilson_interval(u64 hits, u64 trials, double z) {
  if (trials == 0) throw ClnError("wilson_interval: no trials");
  double n = (double)trials, p = (double)hits / n, z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {center - half, center + half, p};
}

double chi_square_uniform_pvalue(const std::vector<u64>& counts, u64 total) {
  const double expected = (double)total / counts.size();
  double stat = 0.0;
  for (u64 c : counts) {
    double d = (double)c - expected;
    stat += d * d / expected;
  }
  return chi_square_pvalue(stat, (double)counts.size() - 1.0);
}

double chi_square_two_sample_pvalue(const std::vector<u64>& a,
                                    const std::vector<u64>& b) {
  if (a.size() != b.size()) throw ClnError("two-sample: size mismatch");
  double na = 0, nb = 0;
  for (u64 x : a) na += (double)x;
  for (u64 x : b) nb += (double)x;
  if (na == 0 || nb == 0) throw ClnError("two-sample: empty sample");
  double k1 = std::sqrt(nb / na), k2 = std::sqrt(na / nb);
  double stat = 0.0;
  int dof = -1;
  for (size_t i = 0; i < a.size(); ++i) {
    double s = (double)a[i] + (double)b[i];
    if (s == 0) continue;
    double d = k1 * (double)a[i] - k2 * (double)b[i];
    stat += d * d / s;
    ++dof;
  }
  if (dof <= 0) return 1.0;
  return chi_square_pvalue(stat, (double)dof);
}

}  // namespace cln

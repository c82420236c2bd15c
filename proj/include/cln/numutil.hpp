#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cln {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i64 = std::int64_t;

struct ClnError : std::runtime_error {
  explicit ClnError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string to_string_u128(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), char('0' + int(v % 10)));
    v /= 10;
  }
  return s;
}

/// p^k with overflow guard (throws past 2^127).
u128 ipow128(u64 base, unsigned exp);

bool is_prime_u64(u64 n);

/// Full factorization of a 64-bit integer (trial division + Pollard rho).
std::map<u64, unsigned> factorize_u64(u64 n);

u64 gcd_u64(u64 a, u64 b);

/// Upper regularized incomplete gamma Q(a, x); used for chi-square p-values.
double gamma_q(double a, double x);

/// p-value of a chi-square statistic with the given degrees of freedom.
inline double chi_square_pvalue(double stat, double dof) {
  return gamma_q(dof / 2.0, stat / 2.0);
}

struct Interval {
  double lo = 0.0, hi = 0.0, center = 0.0;
};

/// Wilson score interval for a binomial proportion at z standard errors.
Interval wilson_interval(u64 hits, u64 trials, double z = 3.0);

/// Exact chi-square goodness-of-fit test against uniform expected counts.
/// Returns the p-value.
double chi_square_uniform_pvalue(const std::vector<u64>& counts, u64 total);

/// Two-sample chi-square homogeneity test over matched count vectors.
double chi_square_two_sample_pvalue(const std::vector<u64>& a,
                                    const std::vector<u64>& b);

}  // namespace cln

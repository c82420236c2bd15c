#include "cln/field.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace cln {

namespace {

// Polynomial helpers over F_p used only during field construction.
// Polynomials are coefficient vectors, ascending degree, no trailing zeros.
using Poly = std::vector<u64>;

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& mod, u64 p) {
  Poly r(a.size() + b.size(), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; j < b.size(); ++j)
      r[i + j] = (r[i + j] + a[i] * b[j]) % p;
  }
  // reduce by the monic modulus
  size_t d = mod.size() - 1;
  for (size_t i = r.size(); i-- > d;) {
    u64 c = r[i];
    if (c == 0) continue;
    r[i] = 0;
    for (size_t j = 0; j < d; ++j)
      r[i - d + j] = (r[i - d + j] + (p - mod[j] % p) * c) % p;
  }
  r.resize(d);
  trim(r);
  return r;
}

Poly poly_powmod(Poly base, u64 exp, const Poly& mod, u64 p) {
  Poly r{1};
  while (exp) {
    if (exp & 1) r = poly_mulmod(r, base, mod, p);
    base = poly_mulmod(base, base, mod, p);
    exp >>= 1;
  }
  return r;
}

Poly poly_mod(Poly a, const Poly& b, u64 p) {
  trim(a);
  size_t db = b.size() - 1;
  u64 lead_inv = 1;
  {  // b monic in our usage, but keep it general
    u64 lead = b.back() % p;
    for (u64 t = 1; t < p; ++t)
      if (lead * t % p == 1) lead_inv = t;
  }
  while (a.size() > db) {
    u64 c = a.back() * lead_inv % p;
    size_t shift = a.size() - 1 - db;
    if (c != 0)
      for (size_t j = 0; j < b.size(); ++j)
        a[shift + j] = (a[shift + j] + (p - b[j] % p) * c) % p;
    a.pop_back();
    trim(a);
    if (a.size() <= db) break;
  }
  trim(a);
  return a;
}

Poly poly_gcd(Poly a, Poly b, u64 p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = b;
    b = r;
  }
  return a;
}

// x^(p^k) mod f by repeated powering.
Poly frobenius_power(const Poly& f, u64 p, unsigned k) {
  Poly x{0, 1};
  Poly r = x;
  for (unsigned i = 0; i < k; ++i) r = poly_powmod(r, p, f, p);
  return r;
}

bool is_irreducible(const Poly& f, u64 p) {
  unsigned e = (unsigned)f.size() - 1;
  if (e == 0) return false;
  // x^(p^e) == x mod f, and gcd(x^(p^(e/l)) - x, f) = 1 for prime l | e.
  Poly xq = frobenius_power(f, p, e);
  Poly x{0, 1};
  Poly diff = xq;
  diff.resize(std::max(diff.size(), x.size()), 0);
  diff[1] = (diff[1] + p - 1) % p;
  trim(diff);
  if (!diff.empty()) return false;
  for (unsigned l = 2; l <= e; ++l) {
    if (e % l != 0) continue;
    bool prime = true;
    for (unsigned d = 2; d * d <= l; ++d)
      if (l % d == 0) prime = false;
    if (!prime) continue;
    Poly xe = frobenius_power(f, p, e / l);
    Poly g = xe;
    g.resize(std::max(g.size(), x.size()), 0);
    g[1] = (g[1] + p - 1) % p;
    trim(g);
    Poly gg = poly_gcd(f, g, p);
    if (gg.size() != 1) return false;
  }
  return true;
}

scalar encode(const Poly& a, u64 p) {
  scalar v = 0;
  for (size_t i = a.size(); i-- > 0;) v = scalar(v * p + a[i]);
  return v;
}

Poly decode(scalar v, u64 p, unsigned e) {
  Poly a(e, 0);
  for (unsigned i = 0; i < e; ++i) {
    a[i] = v % p;
    v = scalar(v / p);
  }
  trim(a);
  return a;
}

std::recursive_mutex g_cache_mutex;
std::map<std::pair<u64, unsigned>, FieldPtr> g_cache;

}  // namespace

std::shared_ptr<const Field> Field::make(u64 p, unsigned e) {
  if (!is_prime_u64(p)) throw ClnError("make_field: p is not prime");
  if (e < 1) throw ClnError("make_field: degree must be >= 1");
  u128 q128 = ipow128(p, e);
  if (q128 > (u128)1 << 16) throw ClnError("make_field: p^e exceeds 2^16");
  u64 q = (u64)q128;

  auto fld = std::shared_ptr<Field>(new Field());
  Field& F = *fld;
  F.p_ = p;
  F.e_ = e;
  F.q_ = q;
  F.qm1_ = q - 1;

  // Canonical modulus: least (c0, c1, ..., c_{e-1}) in lexicographic order
  // (constant term compared first) with t^e + ... irreducible.
  Poly mod;
  if (e == 1) {
    mod = {0, 1};  // t; arithmetic is plain mod p
  } else {
    std::vector<u64> c(e, 0);
    bool found = false;
    while (!found) {
      Poly f(c.begin(), c.end());
      f.push_back(1);
      if (is_irreducible(f, p)) {
        mod = f;
        found = true;
        break;
      }
      // increment most-significant-last so that c0 varies slowest:
      // lexicographic order on (c0, c1, ...) means c_{e-1} is the fastest.
      int i = (int)e - 1;
      while (i >= 0 && ++c[i] == p) c[i--] = 0;
      if (i < 0) throw ClnError("make_field: no irreducible found");
    }
  }
  F.modulus_.assign(mod.begin(), mod.end());
  if (e == 1) F.modulus_ = {scalar(p % p), 1};  // t - 0 placeholder for e=1

  // Multiplication table scaffolding: find a primitive element, then build
  // exp/log by repeated polynomial multiplication.
  auto raw_mul = [&](scalar a, scalar b) -> scalar {
    if (e == 1) return scalar((u64)a * b % p);
    Poly pa = decode(a, p, e), pb = decode(b, p, e);
    return encode(poly_mulmod(pa, pb, mod, p), p);
  };
  auto raw_pow = [&](scalar a, u64 n) -> scalar {
    scalar r = 1;
    while (n) {
      if (n & 1) r = raw_mul(r, a);
      a = raw_mul(a, a);
      n >>= 1;
    }
    return r;
  };

  auto fac = factorize_u64(q - 1);
  scalar gen = 0;
  for (scalar cand = 1; cand < q; ++cand) {
    bool ok = true;
    for (auto& [pr, _] : fac) {
      if (raw_pow(cand, (q - 1) / pr) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) {
      gen = cand;
      break;
    }
  }
  if (gen == 0 && q > 2) throw ClnError("make_field: no generator");
  if (q == 2) gen = 1;
  F.gen_ = gen;

  F.exp_.resize(2 * (q - 1));
  F.log_.assign(q, 0);
  scalar cur = 1;
  for (u64 i = 0; i < q - 1; ++i) {
    F.exp_[i] = cur;
    F.exp_[i + (q - 1)] = cur;
    F.log_[cur] = (scalar)i;
    cur = raw_mul(cur, gen);
  }
  if (cur != 1) throw ClnError("make_field: generator order mismatch");

  // Additive structure.
  F.neg_table_.resize(q);
  if (p == 2) {
    for (u64 a = 0; a < q; ++a) F.neg_table_[a] = (scalar)a;
  } else if (e == 1) {
    for (u64 a = 0; a < q; ++a) F.neg_table_[a] = scalar((p - a) % p);
  } else {
    for (u64 a = 0; a < q; ++a) {
      Poly pa = decode((scalar)a, p, e);
      for (auto& ci : pa) ci = (p - ci) % p;
      F.neg_table_[a] = encode(pa, p);
    }
  }
  if (p != 2 && q <= 2048) {
    F.add_table_.resize((size_t)q * q);
    for (u64 a = 0; a < q; ++a) {
      for (u64 b = 0; b < q; ++b) {
        if (e == 1) {
          F.add_table_[a * q + b] = scalar((a + b) % p);
        } else {
          Poly pa = decode((scalar)a, p, e), pb = decode((scalar)b, p, e);
          pa.resize(e, 0);
          pb.resize(e, 0);
          for (unsigned i = 0; i < e; ++i) pa[i] = (pa[i] + pb[i]) % p;
          trim(pa);
          F.add_table_[a * q + b] = encode(pa, p);
        }
      }
    }
  }

  if (e % 2 == 0) {
    F.q0_ = (u64)ipow128(p, e / 2);
    F.theta_table_.resize(q);
    for (u64 a = 0; a < q; ++a) F.theta_table_[a] = F.pow((scalar)a, F.q0_);
    F.trace_solve_.assign(q, (scalar)q);
    for (u64 a = 0; a < q; ++a) {
      scalar v = F.add((scalar)a, F.theta_table_[a]);
      if (F.trace_solve_[v] == (scalar)q) F.trace_solve_[v] = (scalar)a;
    }
  }

  if (q % 2 == 1) {
    F.sqrt_table_.assign(q, (scalar)q);
    for (u64 a = 0; a < q; ++a) {
      scalar sq = F.mul((scalar)a, (scalar)a);
      if (F.sqrt_table_[sq] == (scalar)q) F.sqrt_table_[sq] = (scalar)a;
    }
  } else {
    F.sqrt_table_.assign(q, (scalar)q);
    for (u64 a = 0; a < q; ++a) {
      scalar sq = F.mul((scalar)a, (scalar)a);
      F.sqrt_table_[sq] = (scalar)a;  // squaring is a bijection
    }
    F.as2_table_.assign(q, (scalar)q);
    for (u64 t = 0; t < q; ++t) {
      scalar v = F.add(F.mul((scalar)t, (scalar)t), (scalar)t);
      if (F.as2_table_[v] == (scalar)q) F.as2_table_[v] = (scalar)t;
    }
  }

  if (e % 2 == 0) {
    // Canonical subfield and the embedding determined by a root of the
    // subfield modulus among theta-fixed elements.
    auto sub = make_field(p, e / 2);
    F.subfield_ = sub;
    F.embed_.assign(sub->q(), 0);
    F.project_.assign(q, (scalar)F.q0_);
    if (e / 2 == 1) {
      // Prime subfield: 1 + 1 + ... gives the canonical image.
      scalar one = 1, acc = 0;
      for (u64 i = 0; i < p; ++i) {
        F.embed_[i] = acc;
        acc = F.add(acc, one);
      }
    } else {
      const auto& smod = sub->modulus();
      scalar root = (scalar)q;
      for (u64 a = 0; a < q; ++a) {
        if (F.theta_table_[a] != a) continue;
        // evaluate subfield modulus at a, coefficients embedded via prime field
        scalar acc = 0, pw = 1;
        for (size_t i = 0; i < smod.size(); ++i) {
          // smod coefficients are subfield encodings; embed recursively.
          // Subfield coefficients of its own modulus are in the prime field.
          scalar c = smod[i];
          scalar cf = 0, one = 1;
          for (scalar t = 0; t < c; ++t) cf = F.add(cf, one);
          if (c >= sub->p()) throw ClnError("field: nested modulus coeff");
          acc = F.add(acc, F.mul(cf, pw));
          pw = F.mul(pw, (scalar)a);
        }
        if (acc == 0) {
          root = (scalar)a;
          break;
        }
      }
      if (root == (scalar)q) throw ClnError("field: no subfield root");
      for (u64 s = 0; s < sub->q(); ++s) {
        Poly ps = decode((scalar)s, p, e / 2);
        scalar acc = 0, pw = 1, one = 1;
        for (size_t i = 0; i < ps.size(); ++i) {
          scalar cf = 0;
          for (u64 t = 0; t < ps[i]; ++t) cf = F.add(cf, one);
          acc = F.add(acc, F.mul(cf, pw));
          pw = F.mul(pw, root);
        }
        F.embed_[s] = acc;
      }
    }
    for (u64 s = 0; s < sub->q(); ++s) F.project_[F.embed_[s]] = (scalar)s;
  }

  return fld;
}

scalar Field::add_slow(scalar a, scalar b) const {
  u64 r = 0, mul = 1;
  for (unsigned i = 0; i < e_; ++i) {
    u64 da = a % p_, db = b % p_;
    a = scalar(a / p_);
    b = scalar(b / p_);
    r += mul * ((da + db) % p_);
    mul *= p_;
  }
  return (scalar)r;
}

u64 Field::element_order(scalar a) const {
  if (a == 0) throw ClnError("field: order of zero");
  u64 ord = qm1_;
  for (auto& [pr, _] : factorize_u64(qm1_)) {
    while (ord % pr == 0 && pow(a, ord / pr) == 1) ord /= pr;
  }
  return ord;
}

scalar Field::sqrt(scalar a) const {
  scalar r = sqrt_table_[a];
  if (r == (scalar)q_) throw ClnError("field: not a square");
  return r;
}

bool Field::artin_schreier_root(scalar a, scalar& t) const {
  if (p_ != 2) throw ClnError("field: artin_schreier_root needs char 2");
  scalar r = as2_table_[a];
  if (r == (scalar)q_) return false;
  t = r;
  return true;
}

scalar Field::project_subfield(scalar elt) const {
  if (!subfield_) throw ClnError("field: no subfield");
  scalar r = project_[elt];
  if (r == (scalar)q0_) throw ClnError("field: element not in subfield");
  return r;
}

std::string Field::descriptor() const {
  std::ostringstream os;
  if (e_ == 1)
    os << "GF(" << p_ << ")";
  else
    os << "GF(" << p_ << "^" << e_ << ")";
  return os.str();
}

FieldPtr make_field(u64 p, unsigned e) {
  // Field::make recurses into make_field for its subfield chain, hence the
  // recursive mutex.
  std::lock_guard<std::recursive_mutex> lock(g_cache_mutex);
  auto key = std::make_pair(p, e);
  auto it = g_cache.find(key);
  if (it != g_cache.end()) return it->second;
  FieldPtr f = Field::make(p, e);
  auto [pos, _] = g_cache.emplace(key, f);
  return pos->second;
}

FieldPtr parse_field(const std::string& s) {
  if (s.size() < 5 || s.substr(0, 3) != "GF(" || s.back() != ')')
    throw ClnError("parse_field: expected GF(p^e) or GF(q): " + s);
  std::string body = s.substr(3, s.size() - 4);
  u64 p = 0;
  unsigned e = 1;
  auto caret = body.find('^');
  try {
    if (caret == std::string::npos) {
      u64 q = std::stoull(body);
      // decompose q = p^e
      if (q < 2) throw ClnError("parse_field: bad size");
      auto fac = factorize_u64(q);
      if (fac.size() != 1) throw ClnError("parse_field: not a prime power");
      p = fac.begin()->first;
      e = fac.begin()->second;
    } else {
      p = std::stoull(body.substr(0, caret));
      e = (unsigned)std::stoul(body.substr(caret + 1));
    }
  } catch (const std::exception&) {
    throw ClnError("parse_field: malformed descriptor: " + s);
  }
  return make_field(p, e);
}

}  // namespace cln

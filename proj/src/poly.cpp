#include "cln/poly.hpp"

#include <algorithm>
#include <sstream>

namespace cln {

PolyGF::PolyGF(FieldPtr f, std::vector<scalar> coeffs)
    : f_(std::move(f)), c_(std::move(coeffs)) {
  trim();
}

void PolyGF::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

PolyGF PolyGF::constant(FieldPtr f, scalar c) {
  std::vector<scalar> v;
  if (c != 0) v.push_back(c);
  return PolyGF(std::move(f), std::move(v));
}

PolyGF PolyGF::monic() const {
  if (is_zero()) throw ClnError("poly: monic of zero");
  if (c_.back() == 1) return *this;
  return *this * f_->inv(c_.back());
}

scalar PolyGF::eval(scalar x) const {
  const Field& F = *f_;
  scalar acc = 0;
  for (size_t i = c_.size(); i-- > 0;) acc = F.add(F.mul(acc, x), c_[i]);
  return acc;
}

PolyGF operator+(const PolyGF& a, const PolyGF& b) {
  const Field& F = *a.f_;
  std::vector<scalar> c(std::max(a.c_.size(), b.c_.size()), 0);
  for (size_t i = 0; i < c.size(); ++i)
    c[i] = F.add(i < a.c_.size() ? a.c_[i] : 0, i < b.c_.size() ? b.c_[i] : 0);
  return PolyGF(a.f_, std::move(c));
}

PolyGF operator-(const PolyGF& a, const PolyGF& b) {
  const Field& F = *a.f_;
  std::vector<scalar> c(std::max(a.c_.size(), b.c_.size()), 0);
  for (size_t i = 0; i < c.size(); ++i)
    c[i] = F.sub(i < a.c_.size() ? a.c_[i] : 0, i < b.c_.size() ? b.c_[i] : 0);
  return PolyGF(a.f_, std::move(c));
}

PolyGF operator*(const PolyGF& a, const PolyGF& b) {
  if (a.is_zero() || b.is_zero()) return PolyGF::zero(a.f_ ? a.f_ : b.f_);
  const Field& F = *a.f_;
  std::vector<scalar> c(a.c_.size() + b.c_.size() - 1, 0);
  for (size_t i = 0; i < a.c_.size(); ++i) {
    if (a.c_[i] == 0) continue;
    for (size_t j = 0; j < b.c_.size(); ++j)
      c[i + j] = F.add(c[i + j], F.mul(a.c_[i], b.c_[j]));
  }
  return PolyGF(a.f_, std::move(c));
}

PolyGF PolyGF::operator*(scalar s) const {
  const Field& F = *f_;
  std::vector<scalar> c(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) c[i] = F.mul(c_[i], s);
  return PolyGF(f_, std::move(c));
}

void PolyGF::divmod(const PolyGF& a, const PolyGF& b, PolyGF& quo,
                    PolyGF& rem) {
  if (b.is_zero()) throw ClnError("poly: division by zero");
  const Field& F = *a.f_;
  std::vector<scalar> r = a.c_;
  int db = b.degree();
  scalar lead_inv = F.inv(b.c_.back());
  std::vector<scalar> q(r.size() > (size_t)db ? r.size() - db : 0, 0);
  for (int i = (int)r.size() - 1; i >= db; --i) {
    scalar c = F.mul(r[i], lead_inv);
    if (c == 0) continue;
    q[i - db] = c;
    for (int j = 0; j <= db; ++j)
      r[i - db + j] = F.sub(r[i - db + j], F.mul(c, b.c_[j]));
  }
  quo = PolyGF(a.f_, std::move(q));
  rem = PolyGF(a.f_, std::move(r));
}

PolyGF PolyGF::mod(const PolyGF& b) const {
  PolyGF q, r;
  divmod(*this, b, q, r);
  return r;
}

PolyGF PolyGF::divexact(const PolyGF& b) const {
  PolyGF q, r;
  divmod(*this, b, q, r);
  if (!r.is_zero()) throw ClnError("poly: inexact division");
  return q;
}

PolyGF PolyGF::gcd(PolyGF a, PolyGF b) {
  while (!b.is_zero()) {
    PolyGF r = a.mod(b);
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  return a.monic();
}

PolyGF PolyGF::powmod(const PolyGF& base, u128 exp, const PolyGF& mod) {
  PolyGF r = PolyGF::constant(base.f_, 1);
  PolyGF b = base.mod(mod);
  while (exp) {
    if (exp & 1) r = (r * b).mod(mod);
    b = (b * b).mod(mod);
    exp >>= 1;
  }
  return r;
}

PolyGF PolyGF::derivative() const {
  const Field& F = *f_;
  if (c_.size() <= 1) return PolyGF::zero(f_);
  std::vector<scalar> d(c_.size() - 1, 0);
  for (size_t i = 1; i < c_.size(); ++i) {
    // integers embed into the prime subfield as encodings 0..p-1
    d[i - 1] = F.mul(c_[i], scalar(i % F.p()));
  }
  return PolyGF(f_, std::move(d));
}

std::string PolyGF::to_text() const {
  std::ostringstream os;
  if (is_zero()) return "0";
  for (size_t i = 0; i < c_.size(); ++i) {
    if (i) os << ' ';
    os << c_[i];
  }
  return os.str();
}

PolyGF PolyGF::from_text(FieldPtr f, const std::string& text) {
  std::istringstream is(text);
  std::vector<scalar> c;
  u64 v;
  while (is >> v) {
    if (v >= f->q()) throw ClnError("poly: coefficient out of range");
    c.push_back((scalar)v);
  }
  return PolyGF(std::move(f), std::move(c));
}

namespace {

// p-th root coefficientwise: f = g(t^p) with g coefficients a^(p^(e-1)).
PolyGF pth_root_decompose(const PolyGF& f) {
  const Field& F = *f.field();
  u64 p = F.p();
  std::vector<scalar> g((f.coeffs().size() + p - 1) / p, 0);
  u64 root_exp = 1;
  for (unsigned i = 0; i + 1 < F.e(); ++i) root_exp *= p;
  for (size_t i = 0; i < f.coeffs().size(); ++i) {
    scalar c = f.coeffs()[i];
    if (c == 0) continue;
    if (i % p != 0) throw ClnError("poly: not a p-th power form");
    g[i / p] = F.pow(c, root_exp);
  }
  return PolyGF(f.field(), std::move(g));
}

void factor_squarefree_monic(const PolyGF& f, unsigned mult,
                             std::vector<PolyFactor>& out, Rng& rng);

// Cantor-Zassenhaus equal-degree split of a squarefree product of
// irreducibles all of degree d.
void equal_degree_split(const PolyGF& f, unsigned d, unsigned mult,
                        std::vector<PolyFactor>& out, Rng& rng) {
  const Field& F = *f.field();
  if ((unsigned)f.degree() == d) {
    out.push_back({f.monic(), mult});
    return;
  }
  // Deterministic root search for tiny degree keeps small cases stable.
  if (d == 1) {
    PolyGF rest = f.monic();
    for (u64 a = 0; a < F.q() && rest.degree() > 0; ++a) {
      if (rest.eval((scalar)a) == 0) {
        PolyGF lin(f.field(), {F.neg((scalar)a), 1});
        unsigned m = 0;
        while (rest.degree() > 0 && rest.mod(lin).is_zero()) {
          rest = rest.divexact(lin);
          ++m;
        }
        out.push_back({lin, mult * m});
      }
    }
    if (rest.degree() != 0) throw ClnError("poly: linear split failed");
    return;
  }
  const u64 q = F.q();
  while (true) {
    // random polynomial of degree < deg f
    std::vector<scalar> rc(f.degree());
    for (auto& c : rc) c = (scalar)rng.below(q);
    PolyGF a(f.field(), std::move(rc));
    if (a.is_zero()) continue;
    PolyGF g = PolyGF::gcd(a, f);
    if (g.degree() > 0 && g.degree() < f.degree()) {
      // lucky split
    } else if (q % 2 == 1) {
      u128 exp = (ipow128(q, d) - 1) / 2;
      PolyGF b = PolyGF::powmod(a, exp, f);
      g = PolyGF::gcd(b - PolyGF::constant(f.field(), 1), f);
    } else {
      // char 2: additive trace map over F_2
      unsigned bits = F.e() * d;
      PolyGF tr = a.mod(f), term = a.mod(f);
      for (unsigned i = 1; i < bits; ++i) {
        term = (term * term).mod(f);
        tr = tr + term;
      }
      g = PolyGF::gcd(tr, f);
    }
    if (g.degree() > 0 && g.degree() < f.degree()) {
      equal_degree_split(g.monic(), d, mult, out, rng);
      equal_degree_split(f.divexact(g).monic(), d, mult, out, rng);
      return;
    }
  }
}

void distinct_degree_then_equal(const PolyGF& f, unsigned mult,
                                std::vector<PolyFactor>& out, Rng& rng) {
  const Field& F = *f.field();
  PolyGF rest = f.monic();
  PolyGF x = PolyGF::x(f.field());
  PolyGF xq = x;
  for (unsigned d = 1; rest.degree() > 0; ++d) {
    if ((int)(2 * d) > rest.degree()) {
      // remainder is irreducible
      out.push_back({rest, mult});
      return;
    }
    xq = PolyGF::powmod(xq, F.q(), rest);
    PolyGF g = PolyGF::gcd(xq - x, rest);
    if (g.degree() > 0) {
      equal_degree_split(g, d, mult, out, rng);
      rest = rest.divexact(g);
      xq = xq.mod(rest);
    }
  }
}

void factor_squarefree_monic(const PolyGF& f, unsigned mult,
                             std::vector<PolyFactor>& out, Rng& rng) {
  if (f.degree() == 0) return;
  distinct_degree_then_equal(f, mult, out, rng);
}

}  // namespace

std::vector<PolyFactor> factor_poly(const PolyGF& f) {
  if (f.is_zero()) throw ClnError("factor_poly: zero polynomial");
  const Field& F = *f.field();
  Rng rng(0xfac70e ^ (u64)f.degree() << 8 ^ F.q());
  std::vector<PolyFactor> out;

  // Yun-style squarefree decomposition adapted to characteristic p.
  PolyGF g = f.monic();
  unsigned pmult = 1;
  while (g.degree() > 0) {
    PolyGF d = g.derivative();
    if (d.is_zero()) {
      g = pth_root_decompose(g);
      pmult *= (unsigned)F.p();
      continue;
    }
    PolyGF c = PolyGF::gcd(g, d);
    PolyGF w = g.divexact(c);  // product of factors with mult not div by p
    unsigned i = 1;
    while (w.degree() > 0) {
      PolyGF y = PolyGF::gcd(w, c);
      PolyGF fac_i = w.divexact(y);  // factors of multiplicity exactly i
      if (fac_i.degree() > 0) {
        std::vector<PolyFactor> part;
        factor_squarefree_monic(fac_i, 1, part, rng);
        for (auto& pf : part) out.push_back({pf.factor, pf.mult * i * pmult});
      }
      if (!y.is_zero() && y.degree() >= 0) c = c.divexact(y);
      w = y;
      ++i;
    }
    // c now holds factors with multiplicity divisible by p
    g = c;
  }

  // merge duplicates and sort canonically
  std::sort(out.begin(), out.end(), [](const PolyFactor& a, const PolyFactor& b) {
    if (a.factor.degree() != b.factor.degree())
      return a.factor.degree() < b.factor.degree();
    return a.factor.coeffs() < b.factor.coeffs();
  });
  std::vector<PolyFactor> merged;
  for (auto& pf : out) {
    if (!merged.empty() && merged.back().factor == pf.factor)
      merged.back().mult += pf.mult;
    else
      merged.push_back(pf);
  }
  return merged;
}

bool is_irreducible_poly(const PolyGF& f) {
  if (f.degree() <= 0) return false;
  auto fac = factor_poly(f);
  return fac.size() == 1 && fac[0].mult == 1;
}

u64 count_irreducible_polys(u64 q, unsigned d) {
  // (1/d) sum_{e | d} mu(e) q^(d/e)
  i64 total = 0;
  for (unsigned e = 1; e <= d; ++e) {
    if (d % e != 0) continue;
    // Moebius mu(e)
    int mu = 1;
    unsigned m = e;
    for (unsigned p = 2; p * p <= m; ++p) {
      if (m % p == 0) {
        m /= p;
        if (m % p == 0) {
          mu = 0;
          break;
        }
        mu = -mu;
      }
    }
    if (mu != 0 && m > 1) mu = -mu;
    if (mu == 0) continue;
    total += mu * (i64)ipow128(q, d / e);
  }
  return (u64)(total / d);
}

std::vector<PolyGF> irreducible_polys(const FieldPtr& f, unsigned d) {
  if (d < 1) throw ClnError("irreducible_polys: degree must be >= 1");
  u128 count = ipow128(f->q(), d);
  if (count > 4000000) throw ClnError("irreducible_polys: q^d too large");
  std::vector<PolyGF> out;
  const u64 q = f->q();
  std::vector<scalar> c(d + 1, 0);
  c[d] = 1;
  while (true) {
    PolyGF cand(f, c);
    if (is_irreducible_poly(cand)) out.push_back(cand);
    unsigned i = 0;
    while (i < d && ++c[i] == q) c[i++] = 0;
    if (i == d) break;
  }
  u64 expect = count_irreducible_polys(q, d);
  if ((u64)out.size() != expect)
    throw ClnError("irreducible_polys: count mismatch vs necklace formula");
  return out;
}

}  // namespace cln

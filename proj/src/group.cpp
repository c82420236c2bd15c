#include "cln/group.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cln {

namespace {

std::vector<u32> close_subgroup(const AbGroup& ab, std::vector<u32> gens) {
  std::set<u32> elems = {0};
  for (u32 g : gens)
    if (g >= ab.order) throw ClnError("group: invariant code out of range");
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<u32> cur(elems.begin(), elems.end());
    for (u32 a : cur)
      for (u32 g : gens) {
        u32 x = ab.op(a, g);
        if (elems.insert(x).second) grew = true;
      }
  }
  return {elems.begin(), elems.end()};
}

}  // namespace

GroupDesc::GroupDesc(SpacePtr space, std::vector<u32> level_gens)
    : space_(std::move(space)), ab_(ab_group(*space_)) {
  level_ = close_subgroup(ab_, std::move(level_gens));
}

GroupDesc GroupDesc::full(SpacePtr space) {
  AbGroup ab = ab_group(*space);
  std::vector<u32> gens;
  if (ab.structure == AbGroup::Cyclic && ab.order > 1) gens = {1};
  if (ab.structure == AbGroup::Klein) gens = {1, 2};
  return GroupDesc(std::move(space), gens);
}

GroupDesc GroupDesc::derived(SpacePtr space) {
  return GroupDesc(std::move(space), {});
}

bool GroupDesc::level_contains(u32 code) const {
  return std::binary_search(level_.begin(), level_.end(), code);
}

u128 GroupDesc::order() const {
  const Field& F = *field();
  const unsigned n = dim();
  const u64 q = F.q();
  u128 gcl = 1;
  switch (space_->kind()) {
    case SpaceKind::Linear: {
      u128 qn = ipow128(q, n);
      for (unsigned i = 0; i < n; ++i) gcl *= qn - ipow128(q, i);
      break;
    }
    case SpaceKind::Symplectic: {
      unsigned m = n / 2;
      gcl = ipow128(q, m * m);
      for (unsigned i = 1; i <= m; ++i) gcl *= ipow128(q, 2 * i) - 1;
      break;
    }
    case SpaceKind::OrthogonalPlus:
    case SpaceKind::OrthogonalMinus: {
      unsigned m = n / 2;
      bool plus = space_->kind() == SpaceKind::OrthogonalPlus;
      gcl = 2 * ipow128(q, m * (m - 1));
      gcl *= plus ? (ipow128(q, m) - 1) : (ipow128(q, m) + 1);
      for (unsigned i = 1; i + 1 <= m; ++i) gcl *= ipow128(q, 2 * i) - 1;
      break;
    }
    case SpaceKind::OrthogonalOdd: {
      unsigned m = (n - 1) / 2;
      gcl = 2 * ipow128(q, m * m);
      for (unsigned i = 1; i <= m; ++i) gcl *= ipow128(q, 2 * i) - 1;
      break;
    }
    case SpaceKind::Unitary: {
      u64 q0 = F.q0();
      gcl = ipow128(q0, n * (n - 1) / 2);
      for (unsigned i = 1; i <= n; ++i) {
        u128 term = ipow128(q0, i);
        gcl *= (i % 2) ? term + 1 : term - 1;
      }
      break;
    }
  }
  return gcl / ab_.order * level_.size();
}

std::string GroupDesc::descriptor() const {
  std::ostringstream os;
  os << space_->descriptor();
  if (is_derived_level())
    os << ":S";
  else if (!is_full_level()) {
    os << ":";
    bool first = true;
    for (u32 c : level_) {
      if (c == 0) continue;
      if (!first) os << "+";
      os << c;
      first = false;
    }
  }
  return os.str();
}

GroupDesc parse_group(const std::string& s) {
  auto colon = s.find(':');
  SpacePtr sp = parse_space(colon == std::string::npos ? s : s.substr(0, colon));
  if (colon == std::string::npos) return GroupDesc::full(sp);
  std::string level = s.substr(colon + 1);
  if (level == "G") return GroupDesc::full(sp);
  if (level == "S") return GroupDesc::derived(sp);
  std::vector<u32> gens;
  std::istringstream is(level);
  std::string tok;
  while (std::getline(is, tok, '+')) {
    try {
      gens.push_back((u32)std::stoul(tok));
    } catch (const std::exception&) {
      throw ClnError("parse_group: bad level token '" + tok +
                     "' (expected S, G, or codes like 1+2)");
    }
  }
  return GroupDesc(sp, gens);
}

bool contains(const GroupDesc& desc, const MatGF& g) {
  if (g.rows() != desc.dim() || g.cols() != desc.dim()) return false;
  if (!desc.space()->is_isometry(g)) return false;
  return desc.level_contains(ab_invariant(*desc.space(), g));
}

MatGF sample_uniform(const GroupDesc& desc, Rng& rng) {
  const FormedSpace& sp = *desc.space();
  const FieldPtr& f = desc.field();
  const unsigned n = desc.dim();
  std::vector<VecGF> cols;
  SpanGF span(f, n);
  for (unsigned i = 0; i < n; ++i) {
    FormConditions cond;
    VecGF ei = sp.basis_vector(i);
    if (sp.is_formed()) {
      for (unsigned t = 0; t < i; ++t)
        cond.add(sp.form_row(cols[t]), sp.form(ei, sp.basis_vector(t)));
    }
    auto v = sample_conditioned_vector(sp, cond, sp.quad(ei), &span, rng);
    if (!v) throw ClnError("sample_uniform: no admissible image (internal)");
    span.insert(v->data());
    cols.push_back(std::move(*v));
  }
  MatGF g(f, n, n);
  for (unsigned j = 0; j < n; ++j) g.set_col(j, cols[j]);
  if (desc.is_full_level()) return g;
  u32 beta = ab_invariant(sp, g);
  MatGF g0 = inverse(ab_rep(sp, beta)) * g;
  u32 lambda = desc.level()[(size_t)rng.below(desc.level().size())];
  if (lambda == 0) return g0;
  return ab_rep(sp, lambda) * g0;
}

std::vector<MatGF> enumerate_small(const GroupDesc& desc, u64 budget) {
  const FormedSpace& sp = *desc.space();
  const FieldPtr& f = desc.field();
  const unsigned n = desc.dim();
  const u64 q = f->q();
  if (desc.order() > budget) throw ClnError("enumerate_small: group too large");
  u128 pool_size = ipow128(q, n);
  if (pool_size > 2000000) throw ClnError("enumerate_small: space too large");

  std::vector<VecGF> pool;
  pool.reserve((size_t)pool_size);
  for (u64 enc = 0; enc < (u64)pool_size; ++enc) {
    VecGF v(f, n);
    u64 e = enc;
    for (unsigned i = 0; i < n; ++i) {
      v[i] = (scalar)(e % q);
      e /= q;
    }
    pool.push_back(std::move(v));
  }
  // precompute Q of basis vectors and pool vectors for pruning
  std::vector<scalar> poolq(pool.size());
  if (sp.is_formed())
    for (size_t i = 0; i < pool.size(); ++i) poolq[i] = sp.quad(pool[i]);

  std::vector<MatGF> out;
  std::vector<VecGF> cols;
  std::vector<std::vector<scalar>> col_rows;  // form rows of chosen columns

  std::function<void(SpanGF&)> rec = [&](SpanGF& span) {
    unsigned j = (unsigned)cols.size();
    if (j == n) {
      MatGF g(f, n, n);
      for (unsigned t = 0; t < n; ++t) g.set_col(t, cols[t]);
      if (!sp.is_formed() || sp.is_isometry(g)) {
        if (desc.level_contains(ab_invariant(sp, g))) out.push_back(g);
      }
      return;
    }
    VecGF ej = sp.basis_vector(j);
    for (size_t pi = 0; pi < pool.size(); ++pi) {
      const VecGF& v = pool[pi];
      if (sp.is_formed()) {
        if (poolq[pi] != sp.quad(ej)) continue;
        bool ok = true;
        const Field& F = *f;
        for (unsigned t = 0; t < j && ok; ++t) {
          // f(v, col_t) must match f(e_j, e_t)
          scalar acc = 0;
          for (unsigned x = 0; x < n; ++x)
            acc = F.add(acc, F.mul(v[x], col_rows[t][x]));
          if (acc != sp.form(ej, sp.basis_vector(t))) ok = false;
        }
        if (!ok) continue;
      }
      if (span.contains(v.data())) continue;
      SpanGF next = span;
      next.insert(v.data());
      cols.push_back(v);
      col_rows.push_back(sp.form_row(v));
      rec(next);
      cols.pop_back();
      col_rows.pop_back();
    }
  };
  SpanGF span(f, n);
  rec(span);
  return out;
}

bool is_quasisimple_range(const GroupDesc& desc) {
  unsigned n = desc.dim();
  u64 q = desc.field()->q();
  switch (desc.space()->kind()) {
    case SpaceKind::Linear:
      return n >= 2 && !(n == 2 && q <= 3);
    case SpaceKind::Symplectic:
      return (n >= 4 && !(n == 4 && q == 2)) || (n == 2 && q >= 4);
    case SpaceKind::Unitary:
      return n >= 3 && !(n == 3 && q == 4);
    case SpaceKind::OrthogonalOdd:
      return n >= 5;
    default:
      return n >= 6;
  }
}

}  // namespace cln

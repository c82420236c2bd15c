#include "cln/forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cln {

std::string kind_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::Linear: return "GL";
    case SpaceKind::Symplectic: return "Sp";
    case SpaceKind::OrthogonalPlus: return "GO+";
    case SpaceKind::OrthogonalMinus: return "GO-";
    case SpaceKind::OrthogonalOdd: return "GO";
    case SpaceKind::Unitary: return "GU";
  }
  return "?";
}

namespace {

// canonical irreducible monic quadratic t^2 + bt + c (least (c, b) pair)
std::pair<scalar, scalar> canonical_irreducible_quadratic(const Field& F) {
  for (u64 c = 0; c < F.q(); ++c) {
    for (u64 b = 0; b < F.q(); ++b) {
      bool irreducible;
      if (F.p() == 2) {
        if (b == 0) {
          irreducible = false;  // t^2 + c = (t + sqrt c)^2
        } else {
          scalar t;
          scalar rhs = F.div((scalar)c, F.mul((scalar)b, (scalar)b));
          irreducible = !F.artin_schreier_root(rhs, t);
        }
      } else {
        scalar disc = F.sub(F.mul((scalar)b, (scalar)b),
                            F.mul(F.mul(2, 2), (scalar)c));
        irreducible = (disc != 0) && !F.is_square(disc);
      }
      if (irreducible) return {(scalar)b, (scalar)c};
    }
  }
  throw ClnError("no irreducible quadratic found");
}

}  // namespace

std::shared_ptr<const FormedSpace> FormedSpace::make(SpaceKind kind, unsigned n,
                                                     FieldPtr field) {
  const Field& F = *field;
  switch (kind) {
    case SpaceKind::Linear:
      if (n < 1) throw ClnError("space: dimension must be >= 1");
      break;
    case SpaceKind::Symplectic:
      if (n < 2 || n % 2) throw ClnError("space: symplectic needs even n >= 2");
      break;
    case SpaceKind::OrthogonalPlus:
    case SpaceKind::OrthogonalMinus:
      if (n < 2 || n % 2)
        throw ClnError("space: even-dimensional orthogonal needs even n >= 2");
      break;
    case SpaceKind::OrthogonalOdd:
      if (n % 2 == 0) throw ClnError("space: GO(n,q) needs odd n");
      if (F.p() == 2) throw ClnError("space: odd-dimensional orthogonal needs odd q");
      break;
    case SpaceKind::Unitary:
      if (n < 1) throw ClnError("space: dimension must be >= 1");
      if (!F.theta_defined()) throw ClnError("space: unitary needs square q");
      break;
  }

  auto sp = std::shared_ptr<FormedSpace>(new FormedSpace());
  sp->f_ = field;
  sp->kind_ = kind;
  sp->n_ = n;
  sp->gram_ = MatGF::zero(field, n, n);
  switch (kind) {
    case SpaceKind::Linear:
      sp->q0_ = 1;
      break;
    case SpaceKind::Symplectic:
      sp->q0_ = 1;
      for (unsigned i = 0; i + 1 < n; i += 2) {
        sp->gram_.at(i, i + 1) = 1;
        sp->gram_.at(i + 1, i) = F.neg(1);
      }
      break;
    case SpaceKind::OrthogonalPlus:
    case SpaceKind::OrthogonalMinus:
    case SpaceKind::OrthogonalOdd: {
      sp->q0_ = F.q();
      sp->quad_ = MatGF::zero(field, n, n);
      unsigned planes = n / 2;
      if (kind == SpaceKind::OrthogonalMinus) planes = n / 2 - 1;
      for (unsigned i = 0; i < planes; ++i) sp->quad_.at(2 * i, 2 * i + 1) = 1;
      if (kind == SpaceKind::OrthogonalMinus) {
        auto [b, c] = canonical_irreducible_quadratic(F);
        sp->quad_.at(n - 2, n - 2) = 1;
        sp->quad_.at(n - 2, n - 1) = b;
        sp->quad_.at(n - 1, n - 1) = c;
      } else if (kind == SpaceKind::OrthogonalOdd) {
        sp->quad_.at(n - 1, n - 1) = 1;
      }
      sp->gram_ = sp->quad_ + sp->quad_.transpose();
      break;
    }
    case SpaceKind::Unitary: {
      sp->q0_ = F.q0();
      for (unsigned i = 0; i + 1 < n; i += 2) {
        sp->gram_.at(i, i + 1) = 1;
        sp->gram_.at(i + 1, i) = 1;
      }
      if (n % 2) sp->gram_.at(n - 1, n - 1) = 1;
      break;
    }
  }

  // orthogonal basis with nonzero Q-values (odd characteristic orthogonal)
  if (sp->is_orthogonal() && F.p() != 2) {
    std::vector<VecGF> work;
    for (unsigned i = 0; i < n; ++i) work.push_back(sp->basis_vector(i));
    while (!work.empty()) {
      size_t pick = work.size();
      for (size_t i = 0; i < work.size(); ++i)
        if (sp->quad(work[i]) != 0) {
          pick = i;
          break;
        }
      if (pick == work.size()) {
        // all basis Q-values zero; some pair sum works by nondegeneracy
        bool found = false;
        for (size_t i = 0; i < work.size() && !found; ++i)
          for (size_t j = i + 1; j < work.size() && !found; ++j) {
            VecGF s = work[i] + work[j];
            if (sp->quad(s) != 0) {
              work[i] = s;
              pick = i;
              found = true;
            }
          }
        if (!found) throw ClnError("space: degenerate quadratic form");
      }
      VecGF v = work[pick];
      work.erase(work.begin() + pick);
      scalar qv2 = F.add(sp->quad(v), sp->quad(v));  // f(v,v) = 2Q(v)
      for (auto& w : work) {
        scalar c = F.div(sp->form(w, v), qv2);
        w = w - v * c;
      }
      sp->obasis_.push_back(std::move(v));
    }
  }
  return sp;
}

const MatGF& FormedSpace::quad_matrix() const {
  if (!is_orthogonal()) throw ClnError("space: no quadratic coefficient matrix");
  return quad_;
}

scalar FormedSpace::form(const VecGF& u, const VecGF& v) const {
  const Field& F = *f_;
  scalar acc = 0;
  for (unsigned i = 0; i < n_; ++i) {
    if (u[i] == 0) continue;
    scalar row = 0;
    for (unsigned j = 0; j < n_; ++j) {
      scalar g = gram_.at(i, j);
      if (g == 0 || v[j] == 0) continue;
      scalar vj = is_unitary() ? F.theta(v[j]) : v[j];
      row = F.add(row, F.mul(g, vj));
    }
    acc = F.add(acc, F.mul(u[i], row));
  }
  return acc;
}

std::vector<scalar> FormedSpace::form_row(const VecGF& b) const {
  const Field& F = *f_;
  std::vector<scalar> r(n_, 0);
  for (unsigned i = 0; i < n_; ++i) {
    scalar acc = 0;
    for (unsigned j = 0; j < n_; ++j) {
      scalar g = gram_.at(i, j);
      if (g == 0 || b[j] == 0) continue;
      scalar bj = is_unitary() ? F.theta(b[j]) : b[j];
      acc = F.add(acc, F.mul(g, bj));
    }
    r[i] = acc;
  }
  return r;
}

scalar FormedSpace::quad(const VecGF& v) const {
  const Field& F = *f_;
  if (is_orthogonal()) {
    scalar acc = 0;
    for (unsigned i = 0; i < n_; ++i) {
      if (v[i] == 0) continue;
      for (unsigned j = i; j < n_; ++j) {
        scalar c = quad_.at(i, j);
        if (c == 0 || v[j] == 0) continue;
        acc = F.add(acc, F.mul(c, F.mul(v[i], v[j])));
      }
    }
    return acc;
  }
  if (is_unitary()) return form(v, v);
  return 0;
}

std::vector<scalar> FormedSpace::q_value_space() const {
  const Field& F = *f_;
  if (is_orthogonal()) {
    std::vector<scalar> all(F.q());
    for (u64 i = 0; i < F.q(); ++i) all[i] = (scalar)i;
    return all;
  }
  if (is_unitary()) {
    std::vector<scalar> vals;
    for (u64 s = 0; s < F.q0(); ++s) vals.push_back(F.embed_subfield((scalar)s));
    return vals;
  }
  return {0};
}

bool FormedSpace::is_isometry(const MatGF& g) const {
  if (g.rows() != n_ || g.cols() != n_) return false;
  if (kind_ == SpaceKind::Linear) return rank(g) == n_;
  MatGF rhs = is_unitary() ? g.theta_entrywise() : g;
  if (g.transpose() * gram_ * rhs != gram_) return false;
  if (is_orthogonal()) {
    for (unsigned j = 0; j < n_; ++j)
      if (quad(g.col(j)) != quad(basis_vector(j))) return false;
  }
  return true;
}

VecGF FormedSpace::basis_vector(unsigned i) const {
  VecGF v(f_, n_);
  v[i] = 1;
  return v;
}

std::string FormedSpace::descriptor() const {
  std::ostringstream os;
  os << kind_name(kind_) << "(" << n_ << "," << f_->q() << ")";
  return os.str();
}

const std::vector<VecGF>& FormedSpace::orthogonal_basis() const {
  if (obasis_.empty())
    throw ClnError("space: orthogonal basis only for odd-characteristic orthogonal kinds");
  return obasis_;
}

SpacePtr parse_space(const std::string& s) {
  size_t open = s.find('(');
  size_t comma = s.find(',', open);
  size_t close = s.find(')', comma);
  if (open == std::string::npos || comma == std::string::npos ||
      close == std::string::npos)
    throw ClnError("parse_space: expected KIND(n,q), got: " + s +
                   " (kinds: GL, Sp, GO+, GO-, GO, GU)");
  std::string kind_str = s.substr(0, open);
  SpaceKind kind;
  if (kind_str == "GL") kind = SpaceKind::Linear;
  else if (kind_str == "Sp") kind = SpaceKind::Symplectic;
  else if (kind_str == "GO+") kind = SpaceKind::OrthogonalPlus;
  else if (kind_str == "GO-") kind = SpaceKind::OrthogonalMinus;
  else if (kind_str == "GO") kind = SpaceKind::OrthogonalOdd;
  else if (kind_str == "GU") kind = SpaceKind::Unitary;
  else
    throw ClnError("parse_space: unknown kind '" + kind_str +
                   "' (expected GL, Sp, GO+, GO-, GO, GU)");
  unsigned n;
  u64 q;
  try {
    n = (unsigned)std::stoul(s.substr(open + 1, comma - open - 1));
    q = std::stoull(s.substr(comma + 1, close - comma - 1));
  } catch (const std::exception&) {
    throw ClnError("parse_space: malformed parameters in: " + s);
  }
  auto fac = factorize_u64(q);
  if (fac.size() != 1) throw ClnError("parse_space: q is not a prime power");
  return FormedSpace::make(kind, n,
                           make_field(fac.begin()->first, fac.begin()->second));
}

// --- quadrics on affine cosets ----------------------------------------------

namespace {

// Quadric machinery for {v in v0 + span(W) : Q(v) = target}, dispatching on
// the kind: trivial Q, plain quadratic over F_q, or (unitary) a quadratic
// over the fixed subfield after restriction of scalars.
class CosetQuadric {
 public:
  CosetQuadric(const FormedSpace& sp, VecGF v0, std::vector<VecGF> W)
      : sp_(sp), v0_(std::move(v0)), W_(std::move(W)) {
    const Field& F = *sp_.field();
    unsigned m = (unsigned)W_.size();
    if (!sp_.is_formed() || sp_.kind() == SpaceKind::Symplectic) {
      mode_ = TrivialQ;
      return;
    }
    if (sp_.is_orthogonal()) {
      mode_ = Plain;
      std::vector<scalar> C((size_t)m * m, 0), L(m, 0);
      for (unsigned i = 0; i < m; ++i) {
        C[(size_t)i * m + i] = sp_.quad(W_[i]);
        for (unsigned j = i + 1; j < m; ++j)
          C[(size_t)i * m + j] = sp_.form(W_[i], W_[j]);
        L[i] = sp_.form(v0_, W_[i]);
      }
      qs_.emplace(sp_.field(), m, std::move(C), std::move(L), sp_.quad(v0_));
      return;
    }
    // unitary: restrict scalars to the theta-fixed subfield K0 with basis
    // {1, mu} of F_q over K0
    mode_ = Subfield;
    K0_ = sp_.field()->subfield();
    mu_ = F.generator();
    unsigned m2 = 2 * m;
    beta_.clear();
    for (unsigned j = 0; j < m; ++j) {
      beta_.push_back(W_[j]);
      beta_.push_back(W_[j] * mu_);
    }
    std::vector<scalar> C((size_t)m2 * m2, 0), L(m2, 0);
    for (unsigned i = 0; i < m2; ++i) {
      C[(size_t)i * m2 + i] = F.project_subfield(sp_.quad(beta_[i]));
      for (unsigned j = i + 1; j < m2; ++j)
        C[(size_t)i * m2 + j] =
            F.project_subfield(F.theta_trace(sp_.form(beta_[i], beta_[j])));
      L[i] = F.project_subfield(F.theta_trace(sp_.form(v0_, beta_[i])));
    }
    qs_.emplace(K0_, m2, std::move(C), std::move(L),
                F.project_subfield(sp_.quad(v0_)));
  }

  u128 count(scalar target) const {
    const Field& F = *sp_.field();
    switch (mode_) {
      case TrivialQ:
        return target == 0 ? ipow128(F.q(), (unsigned)W_.size()) : 0;
      case Plain:
        return qs_->count(target);
      case Subfield:
        return qs_->count(F.project_subfield(target));
    }
    return 0;
  }

  std::optional<VecGF> sample(scalar target, Rng& rng) const {
    const Field& F = *sp_.field();
    switch (mode_) {
      case TrivialQ: {
        if (target != 0) return std::nullopt;
        VecGF v = v0_;
        for (const auto& w : W_) v = v + w * (scalar)rng.below(F.q());
        return v;
      }
      case Plain: {
        auto y = qs_->sample(target, rng);
        if (!y) return std::nullopt;
        return from_plain(*y);
      }
      case Subfield: {
        auto y = qs_->sample(F.project_subfield(target), rng);
        if (!y) return std::nullopt;
        return from_subfield(*y);
      }
    }
    return std::nullopt;
  }

  void enumerate(scalar target,
                 const std::function<bool(const VecGF&)>& cb) const {
    const Field& F = *sp_.field();
    switch (mode_) {
      case TrivialQ: {
        if (target != 0) return;
        // odometer over coefficients
        std::vector<scalar> y(W_.size(), 0);
        while (true) {
          VecGF v = v0_;
          for (size_t j = 0; j < W_.size(); ++j) v = v + W_[j] * y[j];
          if (!cb(v)) return;
          size_t i = 0;
          while (i < y.size() && ++y[i] == F.q()) y[i++] = 0;
          if (i == y.size()) break;
          if (y.empty()) break;
        }
        return;
      }
      case Plain:
        qs_->enumerate(target, [&](const std::vector<scalar>& y) {
          return cb(from_plain(y));
        });
        return;
      case Subfield:
        qs_->enumerate(F.project_subfield(target),
                       [&](const std::vector<scalar>& y) {
                         return cb(from_subfield(y));
                       });
        return;
    }
  }

 private:
  VecGF from_plain(const std::vector<scalar>& y) const {
    VecGF v = v0_;
    for (size_t j = 0; j < W_.size(); ++j) v = v + W_[j] * y[j];
    return v;
  }
  VecGF from_subfield(const std::vector<scalar>& y) const {
    const Field& F = *sp_.field();
    VecGF v = v0_;
    for (size_t j = 0; j < W_.size(); ++j) {
      scalar c = F.add(F.embed_subfield(y[2 * j]),
                       F.mul(mu_, F.embed_subfield(y[2 * j + 1])));
      v = v + W_[j] * c;
    }
    return v;
  }

  enum Mode { TrivialQ, Plain, Subfield };
  const FormedSpace& sp_;
  VecGF v0_;
  std::vector<VecGF> W_;
  Mode mode_ = TrivialQ;
  std::optional<QuadSolver> qs_;
  FieldPtr K0_;
  scalar mu_ = 0;
  std::vector<VecGF> beta_;
};

void check_target_value(const FormedSpace& sp, scalar target) {
  if (!sp.is_formed() || sp.kind() == SpaceKind::Symplectic) {
    if (target != 0)
      throw ClnError("quadric: only target 0 is meaningful for this kind");
  } else if (sp.is_unitary()) {
    if (sp.field()->theta(target) != target)
      throw ClnError("quadric: unitary target must be theta-fixed");
  }
}

void check_independent(const FormedSpace& sp, const std::vector<VecGF>& W) {
  SpanGF span(sp.field(), sp.dim());
  for (const auto& w : W)
    if (!span.insert(w.data()))
      throw ClnError("quadric: subspace basis not independent");
}

}  // namespace

u128 count_quadric_points(const FormedSpace& sp, const VecGF& v0,
                          const std::vector<VecGF>& W, scalar target) {
  check_target_value(sp, target);
  check_independent(sp, W);
  return CosetQuadric(sp, v0, W).count(target);
}

std::optional<VecGF> sample_quadric_point(const FormedSpace& sp,
                                          const VecGF& v0,
                                          const std::vector<VecGF>& W,
                                          scalar target, Rng& rng) {
  check_target_value(sp, target);
  check_independent(sp, W);
  return CosetQuadric(sp, v0, W).sample(target, rng);
}

std::vector<u128> count_quadric_points_all_targets(const FormedSpace& sp,
                                                   const VecGF& v0,
                                                   const std::vector<VecGF>& W) {
  check_independent(sp, W);
  CosetQuadric quadric(sp, v0, W);
  std::vector<u128> out;
  for (scalar t : sp.q_value_space()) out.push_back(quadric.count(t));
  return out;
}

QuadricBoundReport verify_counting_bound(const FormedSpace& sp,
                                         unsigned max_codim) {
  const Field& F = *sp.field();
  const FieldPtr& f = sp.field();
  const unsigned n = sp.dim();
  QuadricBoundReport rep;
  const auto targets = sp.q_value_space();

  // enumerate reduced-echelon s x n matrices of rank s (unique per row
  // space), walk every coset of the kernel, compare all target counts
  for (unsigned s = 0; s <= max_codim && s <= n; ++s) {
    std::vector<unsigned> pivots(s);
    std::function<void(unsigned, unsigned)> pick = [&](unsigned idx,
                                                       unsigned from) {
      if (idx == s) {
        // free positions: row i, column j with j > pivots[i], j not a pivot
        std::vector<std::pair<unsigned, unsigned>> free_pos;
        std::vector<bool> is_piv(n, false);
        for (unsigned p : pivots) is_piv[p] = true;
        for (unsigned i = 0; i < s; ++i)
          for (unsigned j = pivots[i] + 1; j < n; ++j)
            if (!is_piv[j]) free_pos.emplace_back(i, j);
        std::vector<scalar> assign(free_pos.size(), 0);
        while (true) {
          MatGF M(f, s, n);
          for (unsigned i = 0; i < s; ++i) M.at(i, pivots[i]) = 1;
          for (size_t t = 0; t < free_pos.size(); ++t)
            M.at(free_pos[t].first, free_pos[t].second) = assign[t];
          AffineSolution hom = solve_affine(M, VecGF(f, s));
          // one representative per coset: all right-hand sides
          u64 reps = (u64)ipow128(F.q(), s);
          for (u64 be = 0; be < reps; ++be) {
            VecGF b(f, s);
            u64 e = be;
            for (unsigned i = 0; i < s; ++i) {
              b[i] = (scalar)(e % F.q());
              e /= F.q();
            }
            auto sol = solve_affine(M, b);
            if (!sol.solvable)
              throw ClnError("verify_counting_bound: infeasible coset (internal)");
            ++rep.cosets;
            auto counts =
                count_quadric_points_all_targets(sp, sol.particular, hom.kernel);
            long double expect =
                powl((long double)F.q(), (long double)(n - s)) / sp.q0();
            long double window = powl((long double)F.q(), n / 2.0L);
            for (size_t ti = 0; ti < targets.size(); ++ti) {
              ++rep.checks;
              if (fabsl((long double)counts[ti] - expect) > window + 1e-9L)
                ++rep.violations;
            }
          }
          // advance free assignment
          size_t t = 0;
          while (t < assign.size() && ++assign[t] == F.q()) assign[t++] = 0;
          if (t == assign.size()) break;
          if (assign.empty()) break;
        }
        return;
      }
      for (unsigned j = from; j < n; ++j) {
        pivots[idx] = j;
        pick(idx + 1, j + 1);
      }
    };
    pick(0, 0);
  }
  return rep;
}

namespace {

// coset of the affine condition system as (particular, kernel basis)
std::optional<std::pair<VecGF, std::vector<VecGF>>> condition_coset(
    const FormedSpace& sp, const FormConditions& cond) {
  const FieldPtr& f = sp.field();
  unsigned n = sp.dim();
  MatGF M(f, (unsigned)cond.rows.size(), n);
  VecGF b(f, cond.rows.size());
  for (unsigned t = 0; t < cond.rows.size(); ++t) {
    for (unsigned j = 0; j < n; ++j) M.at(t, j) = cond.rows[t][j];
    b[t] = cond.vals[t];
  }
  auto sol = solve_affine(M, b);
  if (!sol.solvable) return std::nullopt;
  return std::make_pair(sol.particular, sol.kernel);
}

}  // namespace

std::optional<VecGF> sample_conditioned_vector(const FormedSpace& sp,
                                               const FormConditions& cond,
                                               scalar qtarget,
                                               const SpanGF* excluded,
                                               Rng& rng) {
  auto coset = condition_coset(sp, cond);
  if (!coset) return std::nullopt;
  CosetQuadric quadric(sp, coset->first, coset->second);
  for (int tries = 0; tries < 64; ++tries) {
    auto v = quadric.sample(qtarget, rng);
    if (!v) return std::nullopt;  // empty quadric
    if (!excluded || !excluded->contains(v->data())) return v;
  }
  // the admissible set is mostly covered by the excluded span: enumerate
  std::vector<VecGF> pool;
  u128 total = quadric.count(qtarget);
  if (total > 2000000)
    throw ClnError("sample_conditioned_vector: rejection failed on a huge set");
  quadric.enumerate(qtarget, [&](const VecGF& v) {
    if (!excluded || !excluded->contains(v.data())) pool.push_back(v);
    return true;
  });
  if (pool.empty()) return std::nullopt;
  return pool[(size_t)rng.below(pool.size())];
}

u128 count_conditioned_vectors(const FormedSpace& sp,
                               const FormConditions& cond, scalar qtarget,
                               const SpanGF* excluded) {
  auto coset = condition_coset(sp, cond);
  if (!coset) return 0;
  CosetQuadric quadric(sp, coset->first, coset->second);
  u128 total = quadric.count(qtarget);
  if (!excluded) return total;
  // subtract points of the excluded span satisfying all constraints
  u128 span_size = ipow128(sp.field()->q(), excluded->dim());
  if (span_size > 2000000)
    throw ClnError("count_conditioned_vectors: excluded span too large");
  const Field& F = *sp.field();
  u128 overlap = 0;
  std::vector<scalar> coeff(excluded->dim(), 0);
  std::vector<scalar> v(sp.dim());
  while (true) {
    std::fill(v.begin(), v.end(), 0);
    for (size_t r = 0; r < excluded->rows().size(); ++r) {
      if (coeff[r] == 0) continue;
      const auto& row = excluded->rows()[r];
      for (unsigned j = 0; j < sp.dim(); ++j)
        v[j] = F.add(v[j], F.mul(coeff[r], row[j]));
    }
    bool ok = true;
    for (size_t t = 0; t < cond.rows.size() && ok; ++t) {
      scalar acc = 0;
      for (unsigned j = 0; j < sp.dim(); ++j)
        acc = F.add(acc, F.mul(v[j], cond.rows[t][j]));
      ok = (acc == cond.vals[t]);
    }
    if (ok) {
      VecGF vv(sp.field(), v);
      if (sp.quad(vv) == qtarget) ++overlap;
    }
    size_t i = 0;
    while (i < coeff.size() && ++coeff[i] == F.q()) coeff[i++] = 0;
    if (i == coeff.size()) break;
    if (coeff.empty()) break;
  }
  return total - overlap;
}

// --- abelian invariants ------------------------------------------------------

AbGroup ab_group(const FormedSpace& sp) {
  const Field& F = *sp.field();
  switch (sp.kind()) {
    case SpaceKind::Linear:
      return {AbGroup::Cyclic, (u32)(F.q() - 1)};
    case SpaceKind::Symplectic:
      return {AbGroup::Trivial, 1};
    case SpaceKind::Unitary:
      return {AbGroup::Cyclic, (u32)(F.q0() + 1)};
    default:
      return F.p() == 2 ? AbGroup{AbGroup::Cyclic, 2}
                        : AbGroup{AbGroup::Klein, 4};
  }
}

namespace {

// h <- sigma_w * h, where sigma_w(x) = x - f(x,w)/Q(w) w
void apply_reflection_left(const FormedSpace& sp, MatGF& h, const VecGF& w) {
  const Field& F = *sp.field();
  unsigned n = sp.dim();
  scalar qw = sp.quad(w);
  auto r = sp.form_row(w);  // f(x, w) = dot(x, r)
  // (sigma_w h) col_j = h col_j - (f(h col_j, w)/Q(w)) w
  for (unsigned j = 0; j < n; ++j) {
    scalar fj = 0;
    for (unsigned i = 0; i < n; ++i) fj = F.add(fj, F.mul(h.at(i, j), r[i]));
    scalar c = F.div(fj, qw);
    if (c == 0) continue;
    for (unsigned i = 0; i < n; ++i)
      h.at(i, j) = F.sub(h.at(i, j), F.mul(c, w[i]));
  }
}

// spinor norm square-class bit via reflection decomposition along an
// orthogonal basis; odd characteristic orthogonal kinds only
u32 spinor_norm_bit(const FormedSpace& sp, const MatGF& g) {
  const Field& F = *sp.field();
  MatGF h = g;
  scalar acc = 1;
  for (const VecGF& v : sp.orthogonal_basis()) {
    VecGF hv = h * v;
    if (hv == v) continue;
    VecGF w = hv - v;
    if (sp.quad(w) != 0) {
      acc = F.mul(acc, sp.quad(w));
      apply_reflection_left(sp, h, w);
    } else {
      // Q(hv + v) = 4 Q(v) != 0: reflect to -v, then to v
      VecGF u = hv + v;
      acc = F.mul(acc, F.mul(sp.quad(u), sp.quad(v)));
      apply_reflection_left(sp, h, u);
      apply_reflection_left(sp, h, v);
    }
  }
  if (!h.is_identity())
    throw ClnError("spinor: reflection decomposition failed");
  return F.is_square(acc) ? 0u : 1u;
}

}  // namespace

u32 ab_invariant(const FormedSpace& sp, const MatGF& g) {
  const Field& F = *sp.field();
  if (!sp.is_isometry(g)) throw ClnError("ab_invariant: not an isometry");
  switch (sp.kind()) {
    case SpaceKind::Linear:
      return (u32)F.dlog(determinant(g));
    case SpaceKind::Symplectic:
      return 0;
    case SpaceKind::Unitary: {
      u64 d = F.dlog(determinant(g));
      u64 step = F.q0() - 1;
      if (step == 0) return 0;
      if (d % step != 0)
        throw ClnError("ab_invariant: unitary determinant not norm-one");
      return (u32)((d / step) % (F.q0() + 1));
    }
    default: {
      if (F.p() == 2)
        return rank(g - MatGF::identity(sp.field(), sp.dim())) % 2;
      u32 det_bit = determinant(g) == 1 ? 0u : 1u;  // det is +-1
      return det_bit | (spinor_norm_bit(sp, g) << 1);
    }
  }
}

MatGF ab_rep(const FormedSpace& sp, u32 code) {
  const Field& F = *sp.field();
  const FieldPtr& f = sp.field();
  unsigned n = sp.dim();
  switch (sp.kind()) {
    case SpaceKind::Linear: {
      MatGF m = MatGF::identity(f, n);
      m.at(0, 0) = F.pow(F.generator(), code);
      return m;
    }
    case SpaceKind::Symplectic:
      return MatGF::identity(f, n);
    case SpaceKind::Unitary: {
      // det must be gamma^code for gamma = gen^(q0-1); a = gen^t with
      // t = -code mod (q0+1) gives det = a / theta(a) = gen^{t(1-q0)}
      if (n < 2) {
        // 1-dimensional: g = (a) with a theta-norm one; a = gamma^code
        MatGF m = MatGF::identity(f, 1);
        m.at(0, 0) = F.pow(F.generator(), (u64)(F.q0() - 1) * code % (F.q() - 1));
        return m;
      }
      u64 q0 = F.q0();
      u64 t = (q0 + 1 - code % (q0 + 1)) % (q0 + 1);
      scalar a = F.pow(F.generator(), t);
      MatGF m = MatGF::identity(f, n);
      m.at(0, 0) = a;
      m.at(1, 1) = F.inv(F.theta(a));
      return m;
    }
    default: {
      // orthogonal kinds: representatives on the leading hyperbolic plane,
      // or by direct enumeration when the space is an anisotropic plane
      // or a single line
      bool has_plane =
          (sp.kind() == SpaceKind::OrthogonalPlus && n >= 2) ||
          (sp.kind() == SpaceKind::OrthogonalOdd && n >= 3) ||
          (sp.kind() == SpaceKind::OrthogonalMinus && n >= 4);
      std::vector<MatGF> candidates;
      if (has_plane) {
        MatGF id = MatGF::identity(f, n);
        MatGF sw = id;
        sw.at(0, 0) = 0;
        sw.at(1, 1) = 0;
        sw.at(0, 1) = 1;
        sw.at(1, 0) = 1;
        candidates.push_back(id);
        candidates.push_back(sw);
        if (F.p() != 2) {
          MatGF rot = id;
          rot.at(0, 0) = F.generator();  // a non-square when q is odd
          rot.at(1, 1) = F.inv(F.generator());
          candidates.push_back(rot);
          candidates.push_back(sw * rot);
        }
      } else {
        // tiny space: scan all isometries (n <= 2)
        u64 total = ipow128(F.q(), n * n) > 100000000
                        ? 0
                        : (u64)ipow128(F.q(), n * n);
        if (total == 0) throw ClnError("ab_rep: space too large to scan");
        for (u64 enc = 0; enc < total; ++enc) {
          MatGF m(f, n, n);
          u64 e = enc;
          for (unsigned i = 0; i < n; ++i)
            for (unsigned j = 0; j < n; ++j) {
              m.at(i, j) = (scalar)(e % F.q());
              e /= F.q();
            }
          if (sp.is_isometry(m)) candidates.push_back(m);
        }
      }
      for (const auto& c : candidates)
        if (sp.is_isometry(c) && ab_invariant(sp, c) == code) return c;
      throw ClnError("ab_rep: no representative realizes the requested code");
    }
  }
}

// --- constructive Witt machinery --------------------------------------------

MatGF extend_isometry(const FormedSpace& sp, const std::vector<VecGF>& us,
                      const std::vector<VecGF>& vs, bool want_derived,
                      Rng& rng) {
  const Field& F = *sp.field();
  const FieldPtr& f = sp.field();
  unsigned n = sp.dim();
  size_t k = us.size();
  if (vs.size() != k) throw ClnError("extend_isometry: pair count mismatch");
  {
    SpanGF su(f, n), sv(f, n);
    for (size_t i = 0; i < k; ++i) {
      if (!su.insert(us[i].data()))
        throw ClnError("extend_isometry: source vectors not independent");
      if (!sv.insert(vs[i].data()))
        throw ClnError("extend_isometry: image vectors not independent");
    }
  }
  for (size_t i = 0; i < k; ++i) {
    if (sp.quad(us[i]) != sp.quad(vs[i]))
      throw ClnError("extend_isometry: Q-values do not match");
    for (size_t j = 0; j < k; ++j)
      if (sp.form(us[i], us[j]) != sp.form(vs[i], vs[j]))
        throw ClnError("extend_isometry: form values do not match");
  }
  if (want_derived && k > n - 2)
    throw ClnError("extend_isometry: derived-group correction needs k <= n-2");

  const unsigned max_tries = want_derived ? 64 * (unsigned)ab_group(sp).order : 1;
  for (unsigned attempt = 0; attempt < max_tries; ++attempt) {
    std::vector<VecGF> ub = us, vb = vs;
    SpanGF su(f, n), sv(f, n);
    for (size_t i = 0; i < k; ++i) {
      su.insert(us[i].data());
      sv.insert(vs[i].data());
    }
    bool ok = true;
    for (unsigned j = (unsigned)k; j < n && ok; ++j) {
      unsigned t = 0;
      while (t < n && su.contains(sp.basis_vector(t).data())) ++t;
      VecGF u = sp.basis_vector(t);
      su.insert(u.data());
      FormConditions cond;
      for (const auto& vprev : vb) {
        // f(v_new, v_prev) must match f(u_new, u_prev); also the transposed
        // pairing, which is determined by (skew/hermitian) symmetry
        size_t idx = &vprev - &vb[0];
        cond.add(sp.form_row(vprev), sp.form(u, ub[idx]));
      }
      auto v = sample_conditioned_vector(sp, cond, sp.quad(u), &sv, rng);
      if (!v) {
        ok = false;
        break;
      }
      ub.push_back(u);
      vb.push_back(*v);
      sv.insert(v->data());
    }
    if (!ok) throw ClnError("extend_isometry: completion failed (internal)");
    MatGF U(f, n, n), V(f, n, n);
    for (unsigned j = 0; j < n; ++j) {
      U.set_col(j, ub[j]);
      V.set_col(j, vb[j]);
    }
    MatGF g = V * inverse(U);
    if (!sp.is_isometry(g))
      throw ClnError("extend_isometry: produced non-isometry (internal)");
    if (!want_derived || ab_invariant(sp, g) == 0) return g;
  }
  throw ClnError(
      "extend_isometry: no derived-group extension exists for this pair set "
      "(boundary configuration)");
}

WittDecomposition witt_decompose(const FormedSpace& sp) {
  const Field& F = *sp.field();
  const FieldPtr& f = sp.field();
  WittDecomposition out;
  if (!sp.is_formed())
    throw ClnError("witt_decompose: linear spaces carry no form");
  std::vector<VecGF> sub;
  for (unsigned i = 0; i < sp.dim(); ++i) sub.push_back(sp.basis_vector(i));
  while (!sub.empty()) {
    CosetQuadric quadric(sp, VecGF(f, sp.dim()), sub);
    VecGF w(f, 0);
    bool found = false;
    quadric.enumerate(0, [&](const VecGF& v) {
      if (v.is_zero()) return true;
      w = v;
      found = true;
      return false;
    });
    if (!found) break;  // anisotropic remainder
    // partner u with f(w, u) != 0
    size_t pick = sub.size();
    for (size_t i = 0; i < sub.size(); ++i)
      if (sp.form(w, sub[i]) != 0) {
        pick = i;
        break;
      }
    if (pick == sub.size())
      throw ClnError("witt_decompose: degenerate form (internal)");
    VecGF u = sub[pick];
    scalar c = sp.form(w, u);
    // normalize f(w, u1) = 1 (theta-twist for the hermitian case)
    VecGF u1 = sp.is_unitary() ? u * F.inv(F.theta(c)) : u * F.inv(c);
    // make the partner singular
    VecGF u2 = u1;
    if (sp.is_orthogonal()) {
      u2 = u1 - w * sp.quad(u1);
    } else if (sp.is_unitary()) {
      u2 = u1 - w * F.solve_theta_trace(sp.quad(u1));
    }
    // restrict to the perp of the plane inside span(sub)
    unsigned m = (unsigned)sub.size();
    MatGF M(f, 2, sp.dim());
    auto rw = sp.form_row(w), ru = sp.form_row(u2);
    for (unsigned j = 0; j < sp.dim(); ++j) {
      M.at(0, j) = rw[j];
      M.at(1, j) = ru[j];
    }
    // solve in coordinates y over the sub basis: rows * (sum y_i sub_i) = 0
    MatGF My(f, 2, m);
    for (unsigned i = 0; i < m; ++i) {
      scalar a0 = 0, a1 = 0;
      for (unsigned j = 0; j < sp.dim(); ++j) {
        a0 = F.add(a0, F.mul(rw[j], sub[i][j]));
        a1 = F.add(a1, F.mul(ru[j], sub[i][j]));
      }
      My.at(0, i) = a0;
      My.at(1, i) = a1;
    }
    auto sol = solve_affine(My, VecGF(f, 2));
    if (!sol.solvable)
      throw ClnError("witt_decompose: perp computation failed (internal)");
    std::vector<VecGF> next;
    for (const auto& y : sol.kernel) {
      VecGF x(f, sp.dim());
      for (unsigned i = 0; i < m; ++i) x = x + sub[i] * y[i];
      next.push_back(std::move(x));
    }
    if (next.size() != sub.size() - 2)
      throw ClnError("witt_decompose: unexpected perp dimension (internal)");
    out.hyperbolic.emplace_back(w, u2);
    sub = std::move(next);
  }
  out.anisotropic = sub;
  unsigned max_aniso = sp.is_unitary() ? 1 : 2;
  if (out.anisotropic.size() > max_aniso)
    throw ClnError("witt_decompose: anisotropic part too large (internal)");
  return out;
}

}  // namespace cln

#include "cln/quadform.hpp"

#include <algorithm>

namespace cln {

namespace {
constexpr u64 kMaxQ = 4096;  // desk-scale guard for the convolution tables
}

QuadSolver::QuadSolver(FieldPtr K, unsigned m, std::vector<scalar> upper,
                       std::vector<scalar> linear, scalar c0)
    : K_(std::move(K)), m_(m), C_(std::move(upper)), L_(std::move(linear)),
      c0_(c0) {
  if (K_->q() > kMaxQ) throw ClnError("quadform: field too large");
  if (C_.size() != (size_t)m_ * m_ || L_.size() != m_)
    throw ClnError("quadform: bad coefficient shapes");
  canonicalize();
}

scalar QuadSolver::qh(const std::vector<scalar>& v) const {
  const Field& F = *K_;
  scalar acc = 0;
  for (unsigned i = 0; i < m_; ++i) {
    if (v[i] == 0) continue;
    for (unsigned j = i; j < m_; ++j) {
      scalar c = C_[(size_t)i * m_ + j];
      if (c == 0 || v[j] == 0) continue;
      acc = F.add(acc, F.mul(c, F.mul(v[i], v[j])));
    }
  }
  return acc;
}

scalar QuadSolver::bform(const std::vector<scalar>& u,
                         const std::vector<scalar>& v) const {
  const Field& F = *K_;
  std::vector<scalar> s(m_);
  for (unsigned i = 0; i < m_; ++i) s[i] = F.add(u[i], v[i]);
  return F.sub(F.sub(qh(s), qh(u)), qh(v));
}

scalar QuadSolver::lin_at(const std::vector<scalar>& v) const {
  const Field& F = *K_;
  scalar acc = bform(shift_, v);
  for (unsigned i = 0; i < m_; ++i)
    if (v[i] != 0) acc = F.add(acc, F.mul(L_[i], v[i]));
  return acc;
}

scalar QuadSolver::eval(const std::vector<scalar>& y) const {
  const Field& F = *K_;
  scalar acc = F.add(qh(y), c0_);
  for (unsigned i = 0; i < m_; ++i)
    if (y[i] != 0) acc = F.add(acc, F.mul(L_[i], y[i]));
  return acc;
}

void QuadSolver::canonicalize() {
  const Field& F = *K_;
  const bool even_char = F.p() == 2;
  shift_.assign(m_, 0);
  std::vector<std::vector<scalar>> active;
  for (unsigned i = 0; i < m_; ++i) {
    std::vector<scalar> e(m_, 0);
    e[i] = 1;
    active.push_back(std::move(e));
  }

  auto add_scaled = [&](std::vector<scalar>& dst, const std::vector<scalar>& src,
                        scalar c) {
    if (c == 0) return;
    for (unsigned i = 0; i < m_; ++i) dst[i] = F.add(dst[i], F.mul(c, src[i]));
  };

  while (true) {
    // Odd characteristic: split a coordinate with a nonzero diagonal first;
    // planes encountered later then have zero diagonal and are hyperbolic.
    if (!even_char) {
      size_t pick = active.size();
      for (size_t i = 0; i < active.size(); ++i)
        if (qh(active[i]) != 0) {
          pick = i;
          break;
        }
      if (pick != active.size()) {
        std::vector<scalar> w = active[pick];
        active.erase(active.begin() + pick);
        scalar a = qh(w);
        // absorb the linear term by translation: t0 = -l / 2a
        scalar l = lin_at(w);
        scalar two_a = F.add(a, a);
        scalar t0 = F.neg(F.div(l, two_a));
        add_scaled(shift_, w, t0);
        // B-orthogonalize the rest: beta -= B(beta, w)/(2a) * w
        for (auto& beta : active) {
          scalar c = F.div(bform(beta, w), two_a);
          add_scaled(beta, w, F.neg(c));
        }
        Block bl;
        bl.type = Block::OddSquare;
        bl.a = a;
        bl.basis.push_back(std::move(w));
        blocks_.push_back(std::move(bl));
        continue;
      }
    }

    // find a pair with nonzero polar form
    size_t pi = active.size(), pj = active.size();
    for (size_t i = 0; i < active.size() && pi == active.size(); ++i)
      for (size_t j = i + 1; j < active.size(); ++j)
        if (bform(active[i], active[j]) != 0) {
          pi = i;
          pj = j;
          break;
        }
    if (pi == active.size()) break;  // no quadratic coupling left

    std::vector<scalar> bi = active[pi], bj = active[pj];
    active.erase(active.begin() + pj);
    active.erase(active.begin() + pi);
    scalar a = qh(bi), b = bform(bi, bj), c = qh(bj);

    // zero vector of a x^2 + b xy + c y^2 if one exists
    bool have_zero = false;
    std::vector<scalar> w(m_, 0);
    if (a == 0) {
      w = bi;
      have_zero = true;
    } else if (c == 0) {
      w = bj;
      have_zero = true;
    } else if (even_char) {
      scalar u0;
      scalar rhs = F.div(F.mul(a, c), F.mul(b, b));
      if (F.artin_schreier_root(rhs, u0)) {
        // t = u0 * b / a gives a zero (t, 1)
        scalar t = F.div(F.mul(u0, b), a);
        w = bj;
        add_scaled(w, bi, t);
        have_zero = true;
      }
    }
    if (!even_char && !have_zero) {
      // odd char reaches the pair branch only with all diagonals zero
      throw ClnError("quadform: unexpected odd-char plane");
    }

    if (have_zero) {
      // hyperbolic normalization: w' with B(w, w') = 1 and Q(w') = 0
      std::vector<scalar> wp;
      scalar bw_i = bform(w, bi);
      wp = (bw_i != 0) ? bi : bj;
      scalar s = bform(w, wp);
      // scale wp by 1/s
      for (auto& x : wp) x = F.div(x, s);
      // wp -= Q(wp) * w
      add_scaled(wp, w, F.neg(qh(wp)));
      // absorb linear terms: shift -= l_w * w' + l_w' * w
      scalar lw = lin_at(w), lwp = lin_at(wp);
      add_scaled(shift_, wp, F.neg(lw));
      add_scaled(shift_, w, F.neg(lwp));
      // orthogonalize the rest against the plane
      for (auto& beta : active) {
        scalar cw = bform(beta, w), cwp = bform(beta, wp);
        add_scaled(beta, wp, F.neg(cw));
        add_scaled(beta, w, F.neg(cwp));
      }
      Block bl;
      bl.type = Block::Hyp;
      bl.basis.push_back(std::move(w));
      bl.basis.push_back(std::move(wp));
      blocks_.push_back(std::move(bl));
    } else {
      // anisotropic plane (char 2 on this path): absorb linear terms by a
      // translation s = x bi + y bj with B(bi,s) = l_i, B(bj,s) = l_j
      scalar li = lin_at(bi), lj = lin_at(bj);
      scalar y0 = F.div(li, b), x0 = F.div(lj, b);
      add_scaled(shift_, bi, x0);
      add_scaled(shift_, bj, y0);
      for (auto& beta : active) {
        scalar cbj = F.div(bform(beta, bj), b);
        scalar cbi = F.div(bform(beta, bi), b);
        add_scaled(beta, bi, F.neg(cbj));
        add_scaled(beta, bj, F.neg(cbi));
      }
      Block bl;
      bl.type = Block::Aniso;
      bl.a = qh(bi);
      bl.b = bform(bi, bj);
      bl.c = qh(bj);
      bl.basis.push_back(std::move(bi));
      bl.basis.push_back(std::move(bj));
      blocks_.push_back(std::move(bl));
    }
  }

  // Endgame: no polar coupling among the remaining coordinates.
  if (F.p() == 2) {
    // quasilinear part: collapse all z^2 terms into one coordinate
    size_t i0 = active.size();
    for (size_t i = 0; i < active.size(); ++i)
      if (qh(active[i]) != 0) {
        i0 = i;
        break;
      }
    if (i0 != active.size()) {
      std::vector<scalar> w = active[i0];
      active.erase(active.begin() + i0);
      // normalize Q(w) = 1
      scalar root = F.sqrt(qh(w));
      for (auto& x : w) x = F.div(x, root);
      for (auto& beta : active) {
        scalar qb = qh(beta);
        if (qb != 0) add_scaled(beta, w, F.sqrt(qb));  // char 2: minus = plus
      }
      // linear leftover on the other coordinates?
      size_t lin_idx = active.size();
      for (size_t i = 0; i < active.size(); ++i)
        if (lin_at(active[i]) != 0) {
          lin_idx = i;
          break;
        }
      if (lin_idx != active.size()) {
        std::vector<scalar> z = active[lin_idx];
        active.erase(active.begin() + lin_idx);
        scalar lz = lin_at(z);
        for (auto& x : z) x = F.div(x, lz);
        for (auto& beta : active) add_scaled(beta, z, F.neg(lin_at(beta)));
        add_scaled(w, z, F.neg(lin_at(w)));  // clears the w linear term too
        Block bl;
        bl.type = Block::Linear;
        bl.basis.push_back(std::move(z));
        blocks_.push_back(std::move(bl));
        Block sq;
        sq.type = Block::EvenSquare;
        sq.basis.push_back(std::move(w));
        blocks_.push_back(std::move(sq));
      } else {
        scalar lw = lin_at(w);
        Block bl;
        if (lw == 0) {
          bl.type = Block::EvenSquare;
        } else {
          bl.type = Block::ArtinSchreier;
          bl.a = lw;
        }
        bl.basis.push_back(std::move(w));
        blocks_.push_back(std::move(bl));
      }
    }
  }
  // pure linear leftover (both characteristics)
  {
    size_t lin_idx = active.size();
    for (size_t i = 0; i < active.size(); ++i)
      if (qh(active[i]) == 0 && lin_at(active[i]) != 0) {
        lin_idx = i;
        break;
      }
    if (lin_idx != active.size()) {
      std::vector<scalar> z = active[lin_idx];
      active.erase(active.begin() + lin_idx);
      scalar lz = lin_at(z);
      for (auto& x : z) x = F.div(x, lz);
      for (auto& beta : active) add_scaled(beta, z, F.neg(lin_at(beta)));
      Block bl;
      bl.type = Block::Linear;
      bl.basis.push_back(std::move(z));
      blocks_.push_back(std::move(bl));
    }
  }
  free_ = std::move(active);

  // constant after all translations
  const_term_ = eval(shift_);

  // suffix distributions over K for counting and sampling
  const u64 q = F.q();
  size_t nb = blocks_.size();
  suffix_.assign(nb + 1, std::vector<u128>(q, 0));
  u128 freew = 1;
  for (size_t i = 0; i < free_.size(); ++i) freew *= q;
  suffix_[nb][0] = freew;
  std::vector<scalar> vals;
  for (size_t k = nb; k-- > 0;) {
    const auto& prev = suffix_[k + 1];
    auto& cur = suffix_[k];
    const Block& bl = blocks_[k];
    if (bl.type == Block::Hyp) {
      u128 S = 0;
      for (u64 v = 0; v < q; ++v) S += prev[v];
      for (u64 t = 0; t < q; ++t) cur[t] = (u128)(q - 1) * S + (u128)q * prev[t];
      // derived from N(0) = 2q-1, N(x != 0) = q-1
    } else if (bl.type == Block::Aniso) {
      u128 S = 0;
      for (u64 v = 0; v < q; ++v) S += prev[v];
      for (u64 t = 0; t < q; ++t) cur[t] = (u128)(q + 1) * S - (u128)q * prev[t];
    } else if (bl.type == Block::Linear) {
      u128 S = 0;
      for (u64 v = 0; v < q; ++v) S += prev[v];
      for (u64 t = 0; t < q; ++t) cur[t] = S;
    } else {
      block_values(bl, vals);
      for (u64 t = 0; t < q; ++t) {
        u128 acc = 0;
        for (scalar v : vals) acc += prev[F.sub((scalar)t, v)];
        cur[t] = acc;
      }
    }
  }
}

// multiset of values taken by one coordinate of the block (with multiplicity)
void QuadSolver::block_values(const Block& bl, std::vector<scalar>& out) const {
  const Field& F = *K_;
  out.clear();
  switch (bl.type) {
    case Block::OddSquare:
      for (u64 z = 0; z < F.q(); ++z)
        out.push_back(F.mul(bl.a, F.mul((scalar)z, (scalar)z)));
      break;
    case Block::EvenSquare:
      for (u64 z = 0; z < F.q(); ++z) out.push_back(F.mul((scalar)z, (scalar)z));
      break;
    case Block::ArtinSchreier:
      for (u64 z = 0; z < F.q(); ++z)
        out.push_back(F.add(F.mul((scalar)z, (scalar)z), F.mul(bl.a, (scalar)z)));
      break;
    default:
      throw ClnError("quadform: block_values on table block");
  }
}

u128 QuadSolver::block_count(const Block& bl, scalar v) const {
  const Field& F = *K_;
  const u64 q = F.q();
  switch (bl.type) {
    case Block::Hyp:
      return v == 0 ? 2 * q - 1 : q - 1;
    case Block::Aniso:
      return v == 0 ? 1 : q + 1;
    case Block::Linear:
      return 1;
    case Block::OddSquare: {
      if (v == 0) return 1;
      return F.is_square(F.div(v, bl.a)) ? 2 : 0;
    }
    case Block::EvenSquare:
      return 1;
    case Block::ArtinSchreier: {
      scalar t;
      scalar rhs = F.div(v, F.mul(bl.a, bl.a));
      return F.artin_schreier_root(rhs, t) ? 2 : 0;
    }
  }
  return 0;
}

void QuadSolver::block_solutions(const Block& bl, scalar v,
                                 std::vector<std::vector<scalar>>& out) const {
  const Field& F = *K_;
  const u64 q = F.q();
  out.clear();
  switch (bl.type) {
    case Block::Hyp: {
      if (v == 0) {
        for (u64 x = 0; x < q; ++x) out.push_back({(scalar)x, 0});
        for (u64 y = 1; y < q; ++y) out.push_back({0, (scalar)y});
      } else {
        for (u64 x = 1; x < q; ++x)
          out.push_back({(scalar)x, F.div(v, (scalar)x)});
      }
      break;
    }
    case Block::Aniso: {
      for (u64 x = 0; x < q; ++x)
        for (u64 y = 0; y < q; ++y) {
          scalar val = F.add(
              F.add(F.mul(bl.a, F.mul((scalar)x, (scalar)x)),
                    F.mul(bl.b, F.mul((scalar)x, (scalar)y))),
              F.mul(bl.c, F.mul((scalar)y, (scalar)y)));
          if (val == v) out.push_back({(scalar)x, (scalar)y});
        }
      break;
    }
    case Block::Linear:
      out.push_back({v});
      break;
    case Block::OddSquare: {
      scalar r = F.div(v, bl.a);
      if (v == 0) {
        out.push_back({0});
      } else if (F.is_square(r)) {
        scalar s = F.sqrt(r);
        out.push_back({s});
        out.push_back({F.neg(s)});
      }
      break;
    }
    case Block::EvenSquare:
      out.push_back({F.sqrt(v)});
      break;
    case Block::ArtinSchreier: {
      scalar u0;
      scalar rhs = F.div(v, F.mul(bl.a, bl.a));
      if (F.artin_schreier_root(rhs, u0)) {
        out.push_back({F.mul(bl.a, u0)});
        out.push_back({F.mul(bl.a, F.add(u0, 1))});
      }
      break;
    }
  }
}

u128 QuadSolver::count(scalar target) const {
  const Field& F = *K_;
  return suffix_[0][F.sub(target, const_term_)];
}

std::optional<std::vector<scalar>> QuadSolver::sample(scalar target,
                                                      Rng& rng) const {
  const Field& F = *K_;
  const u64 q = F.q();
  scalar want = F.sub(target, const_term_);
  if (suffix_[0][want] == 0) return std::nullopt;
  std::vector<scalar> y = shift_;
  std::vector<std::vector<scalar>> sols;
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& bl = blocks_[k];
    // choose the block value proportionally to N_block(v) * suffix_{k+1}(want - v)
    u128 total = suffix_[k][want];
    u128 pick;
    {
      // draw uniform u128 below total
      u64 hi = (u64)(total >> 64), lo = (u64)total;
      if (hi == 0) {
        pick = rng.below(lo);
      } else {
        // rejection on the high word
        do {
          u128 cand = ((u128)rng.below(hi + 1) << 64) | rng.next();
          if (cand < total) {
            pick = cand;
            break;
          }
        } while (true);
      }
    }
    scalar chosen = 0;
    for (u64 v = 0; v < q; ++v) {
      u128 w = block_count(bl, (scalar)v) * suffix_[k + 1][F.sub(want, (scalar)v)];
      if (pick < w) {
        chosen = (scalar)v;
        break;
      }
      pick -= w;
    }
    block_solutions(bl, chosen, sols);
    size_t si = (size_t)rng.below(sols.size());
    const auto& sol = sols[si];
    for (size_t t = 0; t < bl.basis.size(); ++t)
      for (unsigned i = 0; i < m_; ++i)
        y[i] = F.add(y[i], F.mul(sol[t], bl.basis[t][i]));
    want = F.sub(want, chosen);
  }
  // free coordinates: uniform; they always contribute 0
  for (const auto& beta : free_) {
    scalar c = (scalar)rng.below(q);
    for (unsigned i = 0; i < m_; ++i) y[i] = F.add(y[i], F.mul(c, beta[i]));
  }
  return y;
}

void QuadSolver::enumerate(
    scalar target,
    const std::function<bool(const std::vector<scalar>&)>& cb) const {
  const Field& F = *K_;
  const u64 q = F.q();
  std::function<bool(size_t, scalar, std::vector<scalar>&)> rec =
      [&](size_t k, scalar want, std::vector<scalar>& acc) -> bool {
    if (k == blocks_.size()) {
      if (want != 0) return true;
      // spin over free coordinates
      std::function<bool(size_t, std::vector<scalar>&)> rec_free =
          [&](size_t fi, std::vector<scalar>& acc2) -> bool {
        if (fi == free_.size()) return cb(acc2);
        for (u64 c = 0; c < q; ++c) {
          std::vector<scalar> nxt = acc2;
          for (unsigned i = 0; i < m_; ++i)
            nxt[i] = F.add(nxt[i], F.mul((scalar)c, free_[fi][i]));
          if (!rec_free(fi + 1, nxt)) return false;
        }
        return true;
      };
      return rec_free(0, acc);
    }
    const Block& bl = blocks_[k];
    for (u64 v = 0; v < q; ++v) {
      if (block_count(bl, (scalar)v) == 0) continue;
      if (suffix_[k + 1][F.sub(want, (scalar)v)] == 0) continue;
      std::vector<std::vector<scalar>> sols;
      block_solutions(bl, (scalar)v, sols);
      for (const auto& sol : sols) {
        std::vector<scalar> nxt = acc;
        for (size_t t = 0; t < bl.basis.size(); ++t)
          for (unsigned i = 0; i < m_; ++i)
            nxt[i] = F.add(nxt[i], F.mul(sol[t], bl.basis[t][i]));
        if (!rec(k + 1, F.sub(want, (scalar)v), nxt)) return false;
      }
    }
    return true;
  };
  scalar want = F.sub(target, const_term_);
  if (suffix_[0][want] == 0) return;
  std::vector<scalar> acc = shift_;
  rec(0, want, acc);
}

}  // namespace cln

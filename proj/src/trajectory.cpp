#include "cln/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace cln {

unsigned TrajectoryRecord::coincidences_in_strand(unsigned i) const {
  unsigned c = 0;
  for (auto& [t, s] : coincidences)
    if (s == i) ++c;
  return c;
}

std::string TrajectoryRecord::to_jsonl() const {
  nlohmann::json j;
  j["word"] = word.reading_order();
  j["closed"] = closed;
  nlohmann::json lat = nlohmann::json::array();
  for (const auto& strand : lattice) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& v : strand) row.push_back(v.data());
    lat.push_back(row);
  }
  j["lattice"] = lat;
  nlohmann::json ref = nlohmann::json::array();
  for (const auto& v : reference) ref.push_back(v.data());
  j["reference"] = ref;
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& q : queries) {
    qs.push_back({{"t", q.t},
                  {"strand", q.strand},
                  {"letter", q.letter},
                  {"input", q.input.data()},
                  {"result", q.result.data()},
                  {"flag", q.free ? "free" : "forced"},
                  {"coincidence", q.coincidence}});
  }
  j["queries"] = qs;
  return j.dump();
}

namespace {

// Fixed-capacity echelon span over raw scalar vectors; optionally tracks the
// expression of each pivot row over the inserted vectors (all inserts must
// be independent when tracking; pair-list inserts always are).
class FlatSpan {
 public:
  void init(const Field* F, unsigned n, unsigned cap, bool track) {
    F_ = F;
    n_ = n;
    cap_ = cap;
    track_ = track;
    rows_.assign((size_t)cap * n, 0);
    if (track) expr_.assign((size_t)cap * cap, 0);
    pivots_.assign(cap, 0);
    dim_ = 0;
    inserts_ = 0;
    red_.assign(n, 0);
    exprred_.assign(cap, 0);
  }
  void reset() {
    dim_ = 0;
    inserts_ = 0;
  }
  unsigned dim() const { return dim_; }

  bool contains(const scalar* v) {
    reduce(v);
    for (unsigned j = 0; j < n_; ++j)
      if (red_[j] != 0) return false;
    return true;
  }

  // returns true if the span grew
  bool insert(const scalar* v) {
    reduce(v);
    unsigned piv = n_;
    for (unsigned j = 0; j < n_; ++j)
      if (red_[j] != 0) {
        piv = j;
        break;
      }
    unsigned idx = inserts_++;
    if (piv == n_) return false;
    const Field& F = *F_;
    scalar ci = F.inv(red_[piv]);
    scalar* row = &rows_[(size_t)dim_ * n_];
    for (unsigned j = 0; j < n_; ++j) row[j] = F.mul(red_[j], ci);
    if (track_) {
      scalar* ex = &expr_[(size_t)dim_ * cap_];
      std::fill(ex, ex + cap_, 0);
      for (unsigned t = 0; t < idx; ++t) ex[t] = F.mul(exprred_[t], ci);
      ex[idx] = ci;
    }
    pivots_[dim_] = piv;
    ++dim_;
    return true;
  }

  // coordinates over the inserted vectors (requires tracking + containment)
  void coords(const scalar* v, scalar* out) {
    const Field& F = *F_;
    std::fill(out, out + inserts_, 0);
    std::copy(v, v + n_, red_.begin());
    for (unsigned r = 0; r < dim_; ++r) {
      scalar c = red_[pivots_[r]];
      if (c == 0) continue;
      const scalar* row = &rows_[(size_t)r * n_];
      for (unsigned j = 0; j < n_; ++j)
        red_[j] = F.sub(red_[j], F.mul(c, row[j]));
      const scalar* ex = &expr_[(size_t)r * cap_];
      for (unsigned t = 0; t < inserts_; ++t)
        out[t] = F.add(out[t], F.mul(c, ex[t]));
    }
  }

 private:
  void reduce(const scalar* v) {
    const Field& F = *F_;
    std::copy(v, v + n_, red_.begin());
    if (track_) std::fill(exprred_.begin(), exprred_.begin() + cap_, 0);
    for (unsigned r = 0; r < dim_; ++r) {
      scalar c = red_[pivots_[r]];
      if (c == 0) continue;
      const scalar* row = &rows_[(size_t)r * n_];
      for (unsigned j = 0; j < n_; ++j)
        red_[j] = F.sub(red_[j], F.mul(c, row[j]));
      if (track_) {
        const scalar* ex = &expr_[(size_t)r * cap_];
        for (unsigned t = 0; t < inserts_; ++t)
          exprred_[t] = F.sub(exprred_[t], F.mul(c, ex[t]));
      }
    }
    // invariant: reduced remainder = v + sum_t exprred_[t] * insert_t
  }

  const Field* F_ = nullptr;
  unsigned n_ = 0, cap_ = 0, dim_ = 0, inserts_ = 0;
  bool track_ = false;
  std::vector<scalar> rows_, expr_, red_, exprred_;
  std::vector<unsigned> pivots_;
};

// 64-bit packed span over GF(2) with expression tracking
class BitSpan {
 public:
  void init(unsigned n, unsigned cap) {
    n_ = n;
    cap_ = cap;
    rows_.assign(cap, 0);
    expr_.assign(cap, 0);
    pivs_.assign(cap, 0);
    dim_ = 0;
    inserts_ = 0;
  }
  void reset() {
    dim_ = 0;
    inserts_ = 0;
  }
  unsigned dim() const { return dim_; }

  bool contains(u64 v) const {
    for (unsigned r = 0; r < dim_; ++r)
      if (v & (1ULL << pivs_[r])) v ^= rows_[r];
    return v == 0;
  }

  bool insert(u64 v) {
    u64 ex = 0;
    for (unsigned r = 0; r < dim_; ++r)
      if (v & (1ULL << pivs_[r])) {
        v ^= rows_[r];
        ex ^= expr_[r];
      }
    unsigned idx = inserts_++;
    if (v == 0) return false;
    unsigned piv = (unsigned)__builtin_ctzll(v);
    rows_[dim_] = v;
    expr_[dim_] = ex | (1ULL << idx);
    pivs_[dim_] = piv;
    ++dim_;
    return true;
  }

  u64 coords(u64 v) const {
    u64 ex = 0;
    for (unsigned r = 0; r < dim_; ++r)
      if (v & (1ULL << pivs_[r])) {
        v ^= rows_[r];
        ex ^= expr_[r];
      }
    return ex;  // caller guarantees containment
  }

 private:
  unsigned n_ = 0, cap_ = 0, dim_ = 0, inserts_ = 0;
  std::vector<u64> rows_, expr_;
  std::vector<unsigned> pivs_;
};

}  // namespace

struct JointRunner::Impl {
  SpacePtr space;
  Word w;
  std::vector<VecGF> starts, R;
  unsigned n = 0, r = 0, k = 0, len = 0;
  bool materialized = false;
  std::vector<MatGF> xs, xs_inv;
  bool packed = false;
  bool trivial_q = false;  // linear or symplectic: no quadratic machinery
  std::vector<bool> start_indep;

  // generic workspace
  struct PairState {
    unsigned count = 0;
    std::vector<scalar> a, b;              // count x n
    std::vector<scalar> cond_plus, val_plus;    // rows for + queries
    std::vector<scalar> cond_minus, val_minus;  // rows for - queries
    FlatSpan spanA, spanB;
  };
  std::vector<PairState> gens;
  FlatSpan cspan, rspan, sspan;
  std::vector<scalar> cur;       // r x n
  std::vector<scalar> tmp, tmp2, coords_buf;
  std::vector<scalar> gauss;     // (maxpairs) x (n+1)
  std::vector<unsigned> gpiv;
  unsigned maxpairs = 0;

  // packed workspace
  std::vector<BitSpan> bspanA, bspanB;
  std::vector<std::vector<u64>> ba, bb;
  std::vector<unsigned> bcount;
  BitSpan bcspan, brspan;
  std::vector<u64> bcur, bstart;
  u64 mask = 0;
  std::vector<u64> bR;

  void setup();
  void run_generic(Rng& rng, std::vector<StrandStat>& out,
                   TrajectoryRecord* rec);
  void run_packed(Rng& rng, std::vector<StrandStat>& out);
  void sample_free_generic(int letter, const scalar* u, Rng& rng, scalar* out);
};

JointRunner::JointRunner(SpacePtr space, Word w, std::vector<VecGF> starts,
                         std::vector<VecGF> reference)
    : impl_(new Impl()) {
  impl_->space = std::move(space);
  impl_->w = std::move(w);
  impl_->starts = std::move(starts);
  impl_->R = std::move(reference);
  impl_->setup();
}

JointRunner::~JointRunner() = default;

const Word& JointRunner::word() const { return impl_->w; }

void JointRunner::Impl::setup() {
  const FormedSpace& sp = *space;
  n = sp.dim();
  r = (unsigned)starts.size();
  k = w.alphabet();
  len = w.length();
  if (r == 0) throw ClnError("trajectory: need at least one start vector");
  for (const auto& v : starts)
    if (v.size() != n) throw ClnError("trajectory: start dimension mismatch");
  trivial_q =
      !sp.is_formed() || sp.kind() == SpaceKind::Symplectic;
  maxpairs = len * r + 2;
  unsigned total_inserts = (unsigned)R.size() + 2 * len * r + r + 2;

  packed = sp.kind() == SpaceKind::Linear && sp.field()->q() == 2 && n <= 64 &&
           maxpairs <= 60 && total_inserts <= 62;

  // start independence of earlier starts (both engines)
  start_indep.assign(r, false);
  {
    SpanGF s(sp.field(), n);
    for (unsigned i = 0; i < r; ++i) {
      start_indep[i] = !s.contains(starts[i].data());
      s.insert(starts[i].data());
    }
  }

  const Field* F = sp.field().get();
  gens.resize(k);
  for (auto& g : gens) {
    g.a.resize((size_t)maxpairs * n);
    g.b.resize((size_t)maxpairs * n);
    g.cond_plus.resize((size_t)maxpairs * n);
    g.val_plus.resize((size_t)maxpairs * n);
    g.cond_minus.resize((size_t)maxpairs * n);
    g.val_minus.resize((size_t)maxpairs * n);
    g.spanA.init(F, n, maxpairs, true);
    g.spanB.init(F, n, maxpairs, true);
  }
  cspan.init(F, n, total_inserts, false);
  rspan.init(F, n, (unsigned)R.size() + 1, false);
  sspan.init(F, n, r + 1, false);
  for (const auto& v : R) rspan.insert(v.data().data());
  cur.resize((size_t)r * n);
  tmp.resize(n);
  tmp2.resize(n);
  coords_buf.resize(maxpairs);
  gauss.resize((size_t)maxpairs * (n + 1));
  gpiv.resize(maxpairs);

  if (packed) {
    mask = n == 64 ? ~0ULL : ((1ULL << n) - 1);
    bspanA.resize(k);
    bspanB.resize(k);
    ba.assign(k, std::vector<u64>(maxpairs));
    bb.assign(k, std::vector<u64>(maxpairs));
    bcount.assign(k, 0);
    for (unsigned j = 0; j < k; ++j) {
      bspanA[j].init(n, maxpairs);
      bspanB[j].init(n, maxpairs);
    }
    bcspan.init(n, total_inserts);
    brspan.init(n, (unsigned)R.size() + 1);
    auto pack = [&](const VecGF& v) {
      u64 x = 0;
      for (unsigned i = 0; i < n; ++i)
        if (v[i]) x |= 1ULL << i;
      return x;
    };
    for (const auto& v : R) {
      bR.push_back(pack(v));
      brspan.insert(bR.back());
    }
    bstart.clear();
    for (const auto& v : starts) bstart.push_back(pack(v));
    bcur.resize(r);
  }
}

void JointRunner::set_elements(std::vector<MatGF> xs) {
  Impl& im = *impl_;
  if (xs.size() != im.k)
    throw ClnError("trajectory: element count must match the word alphabet");
  for (const auto& x : xs)
    if (!im.space->is_isometry(x))
      throw ClnError("trajectory: materialized element is not an isometry");
  im.xs = std::move(xs);
  im.xs_inv.clear();
  for (const auto& x : im.xs) im.xs_inv.push_back(inverse(x));
  im.materialized = true;
  im.packed = false;
}

// draws the free-choice result for trivial-Q kinds with a workspace
// Gaussian solve; orthogonal/unitary kinds delegate to the exact sampler
void JointRunner::Impl::sample_free_generic(int letter, const scalar* u,
                                            Rng& rng, scalar* out) {
  const FormedSpace& sp = *space;
  const Field& F = *sp.field();
  unsigned j = (unsigned)(letter > 0 ? letter : -letter) - 1;
  PairState& P = gens[j];
  bool plus = letter > 0;
  FlatSpan& cod = plus ? P.spanB : P.spanA;
  const scalar* conds = plus ? P.cond_plus.data() : P.cond_minus.data();
  const scalar* vals = plus ? P.val_plus.data() : P.val_minus.data();

  unsigned s = P.count;
  if (!trivial_q) {
    // exact conditioned sampler (allocating; fine off the hot path)
    FormConditions fc;
    for (unsigned t = 0; t < s; ++t) {
      std::vector<scalar> row(conds + (size_t)t * n, conds + (size_t)(t + 1) * n);
      scalar val = 0;
      const scalar* vr = vals + (size_t)t * n;
      for (unsigned x = 0; x < n; ++x) val = F.add(val, F.mul(u[x], vr[x]));
      fc.add(std::move(row), val);
    }
    VecGF uu(sp.field(), std::vector<scalar>(u, u + n));
    SpanGF excl(sp.field(), n);
    // rebuild the small excluded span from the codomain vectors
    const scalar* codv = plus ? P.b.data() : P.a.data();
    for (unsigned t = 0; t < s; ++t)
      excl.insert(std::vector<scalar>(codv + (size_t)t * n,
                                      codv + (size_t)(t + 1) * n));
    auto v = sample_conditioned_vector(sp, fc, sp.quad(uu), &excl, rng);
    if (!v)
      throw ClnError("trajectory: infeasible free choice (internal)");
    std::copy(v->data().begin(), v->data().end(), out);
    return;
  }

  // build the augmented system in the workspace
  const u64 q = F.q();
  scalar* M = gauss.data();
  unsigned cols = n + 1;
  for (unsigned t = 0; t < s; ++t) {
    std::copy(conds + (size_t)t * n, conds + (size_t)(t + 1) * n,
              M + (size_t)t * cols);
    scalar val = 0;
    const scalar* vr = vals + (size_t)t * n;
    for (unsigned x = 0; x < n; ++x) val = F.add(val, F.mul(u[x], vr[x]));
    M[(size_t)t * cols + n] = val;
  }
  // reduced echelon
  unsigned rank = 0;
  for (unsigned col = 0; col < n && rank < s; ++col) {
    unsigned piv = s;
    for (unsigned i = rank; i < s; ++i)
      if (M[(size_t)i * cols + col] != 0) {
        piv = i;
        break;
      }
    if (piv == s) continue;
    if (piv != rank)
      for (unsigned x = 0; x < cols; ++x)
        std::swap(M[(size_t)piv * cols + x], M[(size_t)rank * cols + x]);
    scalar ci = F.inv(M[(size_t)rank * cols + col]);
    if (ci != 1)
      for (unsigned x = col; x < cols; ++x)
        M[(size_t)rank * cols + x] = F.mul(M[(size_t)rank * cols + x], ci);
    for (unsigned i = 0; i < s; ++i) {
      if (i == rank) continue;
      scalar c = M[(size_t)i * cols + col];
      if (c == 0) continue;
      for (unsigned x = col; x < cols; ++x)
        M[(size_t)i * cols + x] =
            F.sub(M[(size_t)i * cols + x], F.mul(c, M[(size_t)rank * cols + x]));
    }
    gpiv[rank] = col;
    ++rank;
  }
  for (unsigned i = rank; i < s; ++i)
    if (M[(size_t)i * cols + n] != 0)
      throw ClnError("trajectory: inconsistent free-choice system (internal)");

  std::vector<bool> is_piv(n, false);
  for (unsigned t = 0; t < rank; ++t) is_piv[gpiv[t]] = true;
  for (int tries = 0; tries < 64; ++tries) {
    for (unsigned x = 0; x < n; ++x)
      if (!is_piv[x]) out[x] = (scalar)rng.below(q);
    for (unsigned t = 0; t < rank; ++t) {
      scalar acc = M[(size_t)t * cols + n];
      const scalar* row = M + (size_t)t * cols;
      for (unsigned x = 0; x < n; ++x)
        if (!is_piv[x] && row[x] != 0 && out[x] != 0)
          acc = F.sub(acc, F.mul(row[x], out[x]));
      out[gpiv[t]] = acc;
    }
    if (!cod.contains(out)) return;
  }
  // tiny admissible set: fall back to the exact enumerating sampler
  FormConditions fc;
  for (unsigned t = 0; t < s; ++t) {
    std::vector<scalar> row(conds + (size_t)t * n, conds + (size_t)(t + 1) * n);
    scalar val = 0;
    const scalar* vr = vals + (size_t)t * n;
    for (unsigned x = 0; x < n; ++x) val = F.add(val, F.mul(u[x], vr[x]));
    fc.add(std::move(row), val);
  }
  SpanGF excl(sp.field(), n);
  const scalar* codv = plus ? P.b.data() : P.a.data();
  for (unsigned t = 0; t < s; ++t)
    excl.insert(
        std::vector<scalar>(codv + (size_t)t * n, codv + (size_t)(t + 1) * n));
  auto v = sample_conditioned_vector(sp, fc, 0, &excl, rng);
  if (!v) throw ClnError("trajectory: infeasible free choice (internal)");
  std::copy(v->data().begin(), v->data().end(), out);
}

void JointRunner::Impl::run_generic(Rng& rng, std::vector<StrandStat>& out,
                                    TrajectoryRecord* rec) {
  const FormedSpace& sp = *space;
  const Field& F = *sp.field();
  out.assign(r, StrandStat{});
  for (unsigned i = 0; i < r; ++i) out[i].start_independent = start_indep[i];
  for (auto& g : gens) {
    g.count = 0;
    g.spanA.reset();
    g.spanB.reset();
  }
  cspan.reset();
  for (const auto& v : R) cspan.insert(v.data().data());
  for (unsigned i = 0; i < r; ++i)
    std::copy(starts[i].data().begin(), starts[i].data().end(),
              cur.data() + (size_t)i * n);

  if (rec) {
    rec->word = w;
    rec->reference = R;
    rec->lattice.assign(r, {});
    for (unsigned i = 0; i < r; ++i) rec->lattice[i].push_back(starts[i]);
    rec->queries.clear();
    rec->coincidences.clear();
    rec->closed.assign(r, false);
  }

  for (unsigned t = 1; t <= len; ++t) {
    int letter = w.letter(t - 1);
    unsigned j = (unsigned)(letter > 0 ? letter : -letter) - 1;
    bool plus = letter > 0;
    for (unsigned i = 0; i < r; ++i) {
      scalar* u = cur.data() + (size_t)i * n;
      cspan.insert(u);
      PairState& P = gens[j];
      FlatSpan& dom = plus ? P.spanA : P.spanB;
      FlatSpan& cod = plus ? P.spanB : P.spanA;
      bool forced = dom.contains(u);
      scalar* v = tmp.data();
      if (forced) {
        dom.coords(u, coords_buf.data());
        const scalar* codv = plus ? P.b.data() : P.a.data();
        std::fill(v, v + n, 0);
        for (unsigned s = 0; s < P.count; ++s) {
          scalar c = coords_buf[s];
          if (c == 0) continue;
          const scalar* bv = codv + (size_t)s * n;
          for (unsigned x = 0; x < n; ++x) v[x] = F.add(v[x], F.mul(c, bv[x]));
        }
      } else if (materialized) {
        const MatGF& m = plus ? xs[j] : xs_inv[j];
        for (unsigned x = 0; x < n; ++x) {
          scalar acc = 0;
          for (unsigned y = 0; y < n; ++y)
            acc = F.add(acc, F.mul(m.at(x, y), u[y]));
          v[x] = acc;
        }
      } else {
        sample_free_generic(letter, u, rng, v);
      }

      bool coincidence = false;
      if (!forced) {
        coincidence = cspan.contains(v);
        if (coincidence) {
          out[i].coincidences++;
          if (out[i].first_t == 0) out[i].first_t = t;
          out[i].last_t = t;
          if (rec) rec->coincidences.emplace_back(t, i);
        }
        // record the new pair and refresh the cached condition rows
        PairState& P2 = gens[j];
        unsigned idx = P2.count++;
        scalar* pa = P2.a.data() + (size_t)idx * n;
        scalar* pb = P2.b.data() + (size_t)idx * n;
        if (plus) {
          std::copy(u, u + n, pa);
          std::copy(v, v + n, pb);
        } else {
          std::copy(v, v + n, pa);
          std::copy(u, u + n, pb);
        }
        P2.spanA.insert(pa);
        P2.spanB.insert(pb);
        if (sp.is_formed()) {
          // f(x, b) row and the transposed-value row for both orientations
          VecGF av(sp.field(), std::vector<scalar>(pa, pa + n));
          VecGF bv(sp.field(), std::vector<scalar>(pb, pb + n));
          auto rb = sp.form_row(bv);
          auto ra = sp.form_row(av);
          std::copy(rb.begin(), rb.end(),
                    P2.cond_plus.begin() + (size_t)idx * n);
          std::copy(ra.begin(), ra.end(),
                    P2.cond_minus.begin() + (size_t)idx * n);
          // value rows: dot(u, valrow) = transpose_val(f(dom, u))
          auto gta = [&](const VecGF& w0) {
            std::vector<scalar> out_row(n, 0);
            for (unsigned col = 0; col < n; ++col) {
              scalar acc = 0;
              for (unsigned row2 = 0; row2 < n; ++row2) {
                scalar g = sp.gram().at(row2, col);
                if (g != 0 && w0[row2] != 0)
                  acc = F.add(acc, F.mul(g, w0[row2]));
              }
              out_row[col] = acc;
            }
            return out_row;  // (G^T w)_col
          };
          auto adjust = [&](std::vector<scalar> row) {
            if (sp.is_unitary())
              for (auto& c : row) c = F.theta(c);
            else if (sp.kind() == SpaceKind::Symplectic)
              for (auto& c : row) c = F.neg(c);
            return row;
          };
          auto va = adjust(gta(av));
          auto vb = adjust(gta(bv));
          std::copy(va.begin(), va.end(),
                    P2.val_plus.begin() + (size_t)idx * n);
          std::copy(vb.begin(), vb.end(),
                    P2.val_minus.begin() + (size_t)idx * n);
        }
      }
      cspan.insert(v);
      if (rec) {
        QueryLog ql;
        ql.t = t;
        ql.strand = i;
        ql.letter = letter;
        ql.input = VecGF(sp.field(), std::vector<scalar>(u, u + n));
        ql.result = VecGF(sp.field(), std::vector<scalar>(v, v + n));
        ql.free = !forced;
        ql.coincidence = coincidence;
        rec->lattice[i].push_back(ql.result);
        rec->queries.push_back(std::move(ql));
      }
      std::copy(v, v + n, u);
    }
  }
  for (unsigned i = 0; i < r; ++i) {
    bool closed = std::equal(starts[i].data().begin(), starts[i].data().end(),
                             cur.data() + (size_t)i * n);
    out[i].closed = closed;
    if (rec) rec->closed[i] = closed;
    // at-least-one-coincidence invariant
    if (out[i].start_independent && len > 0 &&
        rspan.contains(cur.data() + (size_t)i * n) &&
        out[i].coincidences == 0)
      throw ClnError("trajectory: closed into span R without a coincidence "
                     "(invariant violation)");
  }
}

void JointRunner::Impl::run_packed(Rng& rng, std::vector<StrandStat>& out) {
  out.assign(r, StrandStat{});
  for (unsigned i = 0; i < r; ++i) {
    out[i].start_independent = start_indep[i];
    bcur[i] = bstart[i];
  }
  for (unsigned j = 0; j < k; ++j) {
    bspanA[j].reset();
    bspanB[j].reset();
    bcount[j] = 0;
  }
  bcspan.reset();
  for (u64 v : bR) bcspan.insert(v);

  for (unsigned t = 1; t <= len; ++t) {
    int letter = w.letter(t - 1);
    unsigned j = (unsigned)(letter > 0 ? letter : -letter) - 1;
    bool plus = letter > 0;
    BitSpan& dom = plus ? bspanA[j] : bspanB[j];
    BitSpan& cod = plus ? bspanB[j] : bspanA[j];
    auto& av = ba[j];
    auto& bv = bb[j];
    for (unsigned i = 0; i < r; ++i) {
      u64 u = bcur[i];
      bcspan.insert(u);
      u64 v;
      if (dom.contains(u)) {
        u64 ex = dom.coords(u);
        const u64* codv = plus ? bv.data() : av.data();
        v = 0;
        while (ex) {
          unsigned s = (unsigned)__builtin_ctzll(ex);
          ex &= ex - 1;
          v ^= codv[s];
        }
      } else {
        do {
          v = rng.next() & mask;
        } while (cod.contains(v));
        if (bcspan.contains(v)) {
          out[i].coincidences++;
          if (out[i].first_t == 0) out[i].first_t = t;
          out[i].last_t = t;
        }
        unsigned idx = bcount[j]++;
        if (plus) {
          av[idx] = u;
          bv[idx] = v;
        } else {
          av[idx] = v;
          bv[idx] = u;
        }
        bspanA[j].insert(av[idx]);
        bspanB[j].insert(bv[idx]);
      }
      bcspan.insert(v);
      bcur[i] = v;
    }
  }
  for (unsigned i = 0; i < r; ++i) {
    out[i].closed = bcur[i] == bstart[i];
    if (out[i].start_independent && len > 0 && brspan.contains(bcur[i]) &&
        out[i].coincidences == 0)
      throw ClnError("trajectory: closed into span R without a coincidence "
                     "(invariant violation)");
  }
}

void JointRunner::run(Rng& rng, std::vector<StrandStat>& out) {
  if (impl_->packed)
    impl_->run_packed(rng, out);
  else
    impl_->run_generic(rng, out, nullptr);
}

TrajectoryRecord JointRunner::run_record(Rng& rng) {
  TrajectoryRecord rec;
  std::vector<StrandStat> stats;
  impl_->run_generic(rng, stats, &rec);
  return rec;
}

TrajectoryRecord run_joint_trajectory(SpacePtr space, const Word& w,
                                      const std::vector<VecGF>& starts,
                                      const std::vector<VecGF>& reference,
                                      Rng& rng) {
  JointRunner runner(std::move(space), w, starts, reference);
  return runner.run_record(rng);
}

TrajectoryRecord run_joint_trajectory(SpacePtr space, const Word& w,
                                      const std::vector<VecGF>& starts,
                                      const std::vector<VecGF>& reference,
                                      const std::vector<MatGF>& xs, Rng& rng) {
  JointRunner runner(std::move(space), w, starts, reference);
  runner.set_elements(xs);
  return runner.run_record(rng);
}

OneCoincidenceVerdict classify_one_coincidence(const SpacePtr& space,
                                               const TrajectoryRecord& rec) {
  const Word& w = rec.word;
  unsigned len = w.length();
  if (len == 0 || !w.is_cyclically_reduced())
    throw ClnError("classify: word must be nontrivial and cyclically reduced");
  unsigned r = rec.strands();
  for (unsigned i = 0; i < r; ++i) {
    if (!rec.closed[i])
      throw ClnError("classify: record is not closed");
    if (rec.coincidences_in_strand(i) != 1)
      throw ClnError("classify: need exactly one coincidence per strand");
  }
  OneCoincidenceVerdict out;
  unsigned d = len;
  for (auto& [t, i] : rec.coincidences) d = (unsigned)gcd_u64(d, t);
  out.period = d;
  out.consistent = true;
  for (unsigned t = d; t < len; ++t)
    if (w.letter(t) != w.letter(t - d)) out.consistent = false;

  if (r == 1) {
    unsigned t0 = rec.coincidences[0].first;
    const auto& lat = rec.lattice[0];
    // v^0..v^(t0-1) independent; express v^(t0) over them
    SpanGF span(space->field(), space->dim(), true);
    for (unsigned t = 0; t < t0; ++t)
      if (!span.insert(lat[t].data()))
        throw ClnError("classify: pre-coincidence vectors not independent");
    auto coeff = span.coords(lat[t0].data());
    const Field& F = *space->field();
    std::vector<scalar> pc(t0 + 1, 0);
    for (unsigned t = 0; t < t0; ++t) pc[t] = F.neg(coeff[t]);
    pc[t0] = 1;
    PolyGF f(space->field(), pc);
    out.relation_poly = f;
    // X^len - 1 mod f == 0
    std::vector<scalar> xl(len + 1, 0);
    xl[len] = 1;
    xl[0] = F.neg(1);
    PolyGF big(space->field(), xl);
    out.poly_divides = big.mod(f).is_zero();
  }
  return out;
}

FreqEstimate estimate_invariant_subspace_prob(const GroupDesc& desc,
                                              const Word& w,
                                              const std::vector<VecGF>& U,
                                              u64 trials, Rng& rng) {
  if (w.empty())
    throw ClnError("invariant-subspace experiment: word must be nontrivial");
  const unsigned n = desc.dim();
  const unsigned r = (unsigned)U.size();
  const u64 q = desc.field()->q();
  if (r == 0 || r + 2 > n)
    throw ClnError("invariant-subspace experiment: need 1 <= dim U <= n-2");
  if ((int)(w.length() * r) > (int)(n / 2) - 2)
    throw ClnError(
        "invariant-subspace experiment: len * dim U out of the bound's range");
  SpanGF uspan(desc.field(), n);
  for (const auto& u : U)
    if (!uspan.insert(u.data()))
      throw ClnError("invariant-subspace experiment: U basis not independent");

  FreqEstimate est;
  est.trials = trials;
  std::vector<MatGF> xs(w.alphabet());
  for (u64 it = 0; it < trials; ++it) {
    for (auto& x : xs) x = sample_uniform(desc, rng);
    MatGF wbar = evaluate_word(w, xs);
    bool invariant = true;
    for (const auto& u : U) {
      VecGF img = wbar * u;
      if (!uspan.contains(img.data())) {
        invariant = false;
        break;
      }
    }
    if (invariant) est.hits++;
  }
  est.wilson = wilson_interval(est.hits, trials);
  const double dq = (double)q;
  double cqr = 1.0 + 1.0 / (1.0 - std::pow(dq, -(double)r));
  double lr = (double)w.length() * r;
  double denom = std::pow(dq, (double)n - lr - 1.0) - std::pow(dq, lr) -
                 std::pow(dq, n / 2.0);
  est.bound = std::pow(cqr * std::pow(dq, lr) / denom, (double)r);
  return est;
}

FreqEstimate estimate_small_support_prob(const GroupDesc& desc, const Word& w,
                                         double delta, u64 trials, Rng& rng) {
  if (w.empty())
    throw ClnError("support experiment: word must be nontrivial");
  const unsigned n = desc.dim();
  FreqEstimate est;
  est.trials = trials;
  std::vector<MatGF> xs(w.alphabet());
  double threshold = (1.0 - delta) * n;
  for (u64 it = 0; it < trials; ++it) {
    for (auto& x : xs) x = sample_uniform(desc, rng);
    MatGF wbar = evaluate_word(w, xs);
    if ((double)support_of(wbar) <= threshold) est.hits++;
  }
  est.wilson = wilson_interval(est.hits, trials);
  // |G|^{-c delta^2 / len} with the constant not pinned by the theory;
  // reported with c = 1 as a reference scale
  double logG = (double)n * n * std::log((double)desc.field()->q());
  est.bound = std::exp(-delta * delta / (double)w.length() * logG);
  return est;
}

u128 q_binomial(unsigned x, unsigned r, u64 q) {
  if (q < 2) throw ClnError("q_binomial: q must be >= 2");
  if (r == 0) return 1;
  if (x < r) return 0;
  // q-Pascal: [x r] = [x-1 r-1] + q^r [x-1 r]
  std::vector<u128> row(r + 1, 0);
  row[0] = 1;
  for (unsigned xx = 1; xx <= x; ++xx) {
    for (unsigned rr = std::min(xx, r); rr >= 1; --rr) {
      u128 qr = ipow128(q, rr);
      u128 a = row[rr - 1];
      u128 b = row[rr];
      u128 prod = b * qr;
      if (b != 0 && prod / b != qr) throw ClnError("q_binomial: overflow");
      u128 sum = a + prod;
      if (sum < a) throw ClnError("q_binomial: overflow");
      row[rr] = sum;
    }
  }
  return row[r];
}

}  // namespace cln

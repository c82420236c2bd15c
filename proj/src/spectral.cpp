#include "cln/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "json.hpp"

namespace cln {

namespace {

std::string key_of(const std::vector<scalar>& v) {
  std::string s((const char*)v.data(), v.size() * sizeof(scalar));
  return s;
}

}  // namespace

OrbitIndex OrbitIndex::vectors_orbit(SpacePtr sp,
                                     const std::vector<MatGF>& gens,
                                     const std::vector<VecGF>& base,
                                     u64 budget) {
  const FormedSpace& space = *sp;
  const Field& F = *space.field();
  unsigned n = space.dim();
  unsigned r = (unsigned)base.size();
  std::vector<MatGF> inv;
  for (const auto& g : gens) {
    if (!space.is_isometry(g))
      throw ClnError("orbit: generator is not an isometry of the space");
    inv.push_back(inverse(g));
  }
  OrbitIndex orbit;
  unsigned k = (unsigned)gens.size();
  orbit.fwd_.assign(k, {});

  std::unordered_map<std::string, u32> index;
  std::vector<std::vector<scalar>> points;
  auto intern = [&](const std::vector<scalar>& p) -> u32 {
    auto [it, inserted] = index.emplace(key_of(p), (u32)points.size());
    if (inserted) {
      if (points.size() >= budget) throw ClnError("orbit: budget exceeded");
      points.push_back(p);
    }
    return it->second;
  };
  std::vector<scalar> start((size_t)r * n);
  for (unsigned i = 0; i < r; ++i)
    std::copy(base[i].data().begin(), base[i].data().end(),
              start.begin() + (size_t)i * n);
  intern(start);
  std::vector<scalar> img((size_t)r * n);
  for (u64 head = 0; head < points.size(); ++head) {
    std::vector<scalar> cur = points[head];  // copy: points may reallocate
    for (unsigned gi = 0; gi < k; ++gi) {
      const MatGF& m = gens[gi];
      for (unsigned i = 0; i < r; ++i) {
        const scalar* src = cur.data() + (size_t)i * n;
        scalar* dst = img.data() + (size_t)i * n;
        for (unsigned x = 0; x < n; ++x) {
          scalar acc = 0;
          for (unsigned y = 0; y < n; ++y)
            acc = F.add(acc, F.mul(m.at(x, y), src[y]));
          dst[x] = acc;
        }
      }
      u32 idx = intern(img);
      if (orbit.fwd_[gi].size() <= head)
        orbit.fwd_[gi].resize(head + 1, UINT32_MAX);
      orbit.fwd_[gi][head] = idx;
    }
  }
  orbit.n_ = points.size();
  for (auto& f : orbit.fwd_) f.resize(orbit.n_, UINT32_MAX);
  // fill any unvisited images (possible when a point was interned after its
  // row was sized); recompute misses
  for (unsigned gi = 0; gi < k; ++gi) {
    for (u64 p = 0; p < orbit.n_; ++p) {
      if (orbit.fwd_[gi][p] != UINT32_MAX) continue;
      const auto& cur = points[p];
      for (unsigned i = 0; i < r; ++i) {
        const scalar* src = cur.data() + (size_t)i * n;
        scalar* dst = img.data() + (size_t)i * n;
        for (unsigned x = 0; x < n; ++x) {
          scalar acc = 0;
          for (unsigned y = 0; y < n; ++y)
            acc = F.add(acc, F.mul(gens[gi].at(x, y), src[y]));
          dst[x] = acc;
        }
      }
      orbit.fwd_[gi][p] = index.at(key_of(img));
    }
  }
  orbit.finalize();
  return orbit;
}

OrbitIndex OrbitIndex::conjugation_orbit(SpacePtr sp,
                                         const std::vector<MatGF>& gens,
                                         const MatGF& base, u64 budget) {
  const FormedSpace& space = *sp;
  std::vector<MatGF> inv;
  for (const auto& g : gens) {
    if (!space.is_isometry(g))
      throw ClnError("orbit: generator is not an isometry of the space");
    inv.push_back(inverse(g));
  }
  OrbitIndex orbit;
  unsigned k = (unsigned)gens.size();
  orbit.fwd_.assign(k, {});
  std::unordered_map<std::string, u32> index;
  std::vector<MatGF> points;
  auto intern = [&](const MatGF& m) -> u32 {
    auto [it, inserted] = index.emplace(key_of(m.data()), (u32)points.size());
    if (inserted) {
      if (points.size() >= budget) throw ClnError("orbit: budget exceeded");
      points.push_back(m);
    }
    return it->second;
  };
  intern(base);
  for (u64 head = 0; head < points.size(); ++head) {
    MatGF cur = points[head];
    for (unsigned gi = 0; gi < k; ++gi) {
      MatGF img = gens[gi] * cur * inv[gi];
      u32 idx = intern(img);
      if (orbit.fwd_[gi].size() <= head) orbit.fwd_[gi].resize(head + 1, UINT32_MAX);
      orbit.fwd_[gi][head] = idx;
    }
  }
  orbit.n_ = points.size();
  for (auto& f : orbit.fwd_) f.resize(orbit.n_, UINT32_MAX);
  for (unsigned gi = 0; gi < k; ++gi)
    for (u64 p = 0; p < orbit.n_; ++p)
      if (orbit.fwd_[gi][p] == UINT32_MAX)
        orbit.fwd_[gi][p] =
            index.at(key_of((gens[gi] * points[p] * inv[gi]).data()));
  orbit.finalize();
  return orbit;
}

OrbitIndex OrbitIndex::from_permutations(std::vector<std::vector<u32>> perms) {
  if (perms.empty()) throw ClnError("orbit: need at least one permutation");
  OrbitIndex orbit;
  orbit.n_ = perms[0].size();
  orbit.fwd_ = std::move(perms);
  orbit.finalize();
  return orbit;
}

void OrbitIndex::finalize() {
  bwd_.assign(fwd_.size(), std::vector<u32>(n_, UINT32_MAX));
  for (size_t gi = 0; gi < fwd_.size(); ++gi) {
    if (fwd_[gi].size() != n_) throw ClnError("orbit: ragged image array");
    for (u64 p = 0; p < n_; ++p) {
      u32 q = fwd_[gi][p];
      if (q >= n_ || bwd_[gi][q] != UINT32_MAX)
        throw ClnError("orbit: generator image is not a permutation");
      bwd_[gi][q] = (u32)p;
    }
  }
}

void OrbitIndex::save(std::ostream& os) const {
  const char magic[8] = {'C', 'L', 'N', 'O', 'R', 'B', '1', 0};
  os.write(magic, 8);
  auto put32 = [&](u32 v) {
    unsigned char b[4] = {(unsigned char)(v & 0xff),
                          (unsigned char)((v >> 8) & 0xff),
                          (unsigned char)((v >> 16) & 0xff),
                          (unsigned char)((v >> 24) & 0xff)};
    os.write((const char*)b, 4);
  };
  put32((u32)n_);
  put32((u32)fwd_.size());
  for (const auto& f : fwd_)
    for (u32 v : f) put32(v);
}

OrbitIndex OrbitIndex::load(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "CLNORB1", 7) != 0)
    throw ClnError("orbit load: bad magic");
  auto get32 = [&]() -> u32 {
    unsigned char b[4];
    is.read((char*)b, 4);
    if (!is) throw ClnError("orbit load: truncated");
    return (u32)b[0] | ((u32)b[1] << 8) | ((u32)b[2] << 16) | ((u32)b[3] << 24);
  };
  u32 n = get32(), k = get32();
  OrbitIndex orbit;
  orbit.n_ = n;
  orbit.fwd_.assign(k, std::vector<u32>(n));
  for (auto& f : orbit.fwd_)
    for (auto& v : f) v = get32();
  orbit.finalize();
  return orbit;
}

std::string SpectralReport::to_json() const {
  nlohmann::json j{{"orbit_size", orbit_size}, {"lambda2", lambda2},
                   {"lambda_n", lambda_n},     {"rho", rho},
                   {"iterations", iterations}, {"converged", converged},
                   {"disconnected_warning", disconnected_warning},
                   {"tol", tol},               {"method", "power-iteration"}};
  return j.dump();
}

namespace {

// apply the normalized adjacency operator: out = A x
void apply_adjacency(const OrbitIndex& orbit, const std::vector<double>& x,
                     std::vector<double>& out) {
  const u64 n = orbit.size();
  const unsigned k = orbit.generators();
  out.assign(n, 0.0);
  for (unsigned gi = 0; gi < k; ++gi) {
    const auto& f = orbit.forward(gi);
    const auto& b = orbit.backward(gi);
    for (u64 p = 0; p < n; ++p) out[p] += x[f[p]] + x[b[p]];
  }
  const double scale = 1.0 / (2.0 * k);
  for (auto& v : out) v *= scale;
}

// top eigenvalue of (I + sign*A)/2 on the complement of constants
double edge_power_iteration(const OrbitIndex& orbit, double sign, double tol,
                            unsigned max_iters, Rng& rng, unsigned& iters,
                            bool& converged) {
  const u64 n = orbit.size();
  std::vector<double> x(n), ax(n);
  for (auto& v : x) v = rng.uniform() - 0.5;
  auto deflate_normalize = [&](std::vector<double>& v) {
    double mean = 0.0;
    for (double c : v) mean += c;
    mean /= (double)n;
    double norm = 0.0;
    for (auto& c : v) {
      c -= mean;
      norm += c * c;
    }
    norm = std::sqrt(norm);
    if (norm > 0)
      for (auto& c : v) c /= norm;
    return norm;
  };
  deflate_normalize(x);
  double ray = 0.0, prev = 2.0;
  converged = false;
  for (iters = 0; iters < max_iters; ++iters) {
    apply_adjacency(orbit, x, ax);
    // y = (x + sign * A x) / 2
    for (u64 p = 0; p < n; ++p) ax[p] = 0.5 * (x[p] + sign * ax[p]);
    ray = 0.0;
    for (u64 p = 0; p < n; ++p) ray += x[p] * ax[p];
    if (std::fabs(ray - prev) < tol) {
      converged = true;
      break;
    }
    prev = ray;
    x.swap(ax);
    if (deflate_normalize(x) == 0.0) return 0.0;  // complement is trivial
  }
  return ray;
}

}  // namespace

SpectralReport estimate_lambda_power(const OrbitIndex& orbit, double tol,
                                     unsigned max_iters, Rng& rng) {
  SpectralReport rep;
  rep.orbit_size = orbit.size();
  rep.tol = tol;
  if (orbit.size() <= 1) {
    rep.converged = true;
    rep.rho = 0.0;
    return rep;
  }
  unsigned it1 = 0, it2 = 0;
  bool c1 = false, c2 = false;
  double top = edge_power_iteration(orbit, +1.0, tol, max_iters, rng, it1, c1);
  double bot = edge_power_iteration(orbit, -1.0, tol, max_iters, rng, it2, c2);
  rep.lambda2 = 2.0 * top - 1.0;
  rep.lambda_n = 1.0 - 2.0 * bot;
  rep.rho = std::max(rep.lambda2, -rep.lambda_n);
  rep.iterations = it1 + it2;
  rep.converged = c1 && c2;
  rep.disconnected_warning = rep.lambda2 > 1.0 - 64.0 * tol;
  return rep;
}

TraceMomentReport trace_moment(const OrbitIndex& orbit, unsigned len,
                               u64 samples, Rng& rng) {
  if (len % 2 != 0) throw ClnError("trace_moment: length must be even");
  TraceMomentReport rep;
  rep.len = len;
  rep.samples = samples;
  const u64 n = orbit.size();
  const unsigned k = orbit.generators();
  double sum = 0.0, sumsq = 0.0;
  for (u64 s = 0; s < samples; ++s) {
    Word w = random_walk_word(k, len, rng);
    u64 fixed = 0;
    for (u64 p = 0; p < n; ++p) {
      u64 cur = p;
      for (int l : w.letters()) {
        unsigned gi = (unsigned)(l > 0 ? l : -l) - 1;
        cur = l > 0 ? orbit.forward(gi)[cur] : orbit.backward(gi)[cur];
      }
      if (cur == p) ++fixed;
    }
    sum += (double)fixed;
    sumsq += (double)fixed * fixed;
  }
  rep.mean_fixed = sum / (double)samples;
  double var = sumsq / (double)samples - rep.mean_fixed * rep.mean_fixed;
  rep.std_error = std::sqrt(std::max(var, 0.0) / (double)samples);
  if (len == 0)
    rep.lambda_bound = 1.0;
  else
    rep.lambda_bound =
        std::pow(std::max(rep.mean_fixed - 1.0, 0.0), 1.0 / (double)len);
  return rep;
}

u128 tuple_orbit_size(const FormedSpace& sp, const std::vector<VecGF>& base) {
  const FieldPtr& f = sp.field();
  unsigned n = sp.dim();
  u128 total = 1;
  SpanGF span(f, n);
  std::vector<VecGF> prefix;
  for (const auto& v : base) {
    FormConditions cond;
    if (sp.is_formed()) {
      for (const auto& p : prefix) {
        size_t idx = &p - &prefix[0];
        (void)idx;
        cond.add(sp.form_row(p), sp.form(v, p));
      }
    }
    total *= count_conditioned_vectors(sp, cond, sp.quad(v), &span);
    if (!span.insert(v.data()))
      throw ClnError("tuple_orbit_size: base tuple not independent");
    prefix.push_back(v);
  }
  return total;
}

std::string ReturnProbReport::to_json() const {
  nlohmann::json j{{"trials", trials},
                   {"closures", closures},
                   {"orbit_size", to_string_u128(orbit_size)},
                   {"n_times_freq", n_times_freq},
                   {"n_freq_lo", n_freq_lo},
                   {"n_freq_hi", n_freq_hi}};
  return j.dump();
}

ReturnProbReport estimate_return_prob(const GroupDesc& desc, const Word& w,
                                      unsigned r, u64 trials, Rng& rng) {
  auto cr = cyclic_reduce(w);
  if (cr.core.empty())
    throw ClnError("return-prob: word must be nontrivial");
  auto ps = is_proper_power(cr.core);
  if (ps.proper_power)
    throw ClnError("return-prob: proper powers are excluded");
  const FormedSpace& sp = *desc.space();
  if (r == 0 || r >= sp.dim())
    throw ClnError("return-prob: need 1 <= r < n");
  std::vector<VecGF> starts;
  for (unsigned i = 0; i < r; ++i) starts.push_back(sp.basis_vector(i));

  ReturnProbReport rep;
  rep.trials = trials;
  rep.orbit_size = tuple_orbit_size(sp, starts);
  JointRunner runner(desc.space(), cr.core, starts, starts);
  std::vector<StrandStat> st;
  for (u64 it = 0; it < trials; ++it) {
    runner.run(rng, st);
    bool all = true;
    for (auto& s : st)
      if (!s.closed) {
        all = false;
        break;
      }
    if (all) rep.closures++;
  }
  auto wil = wilson_interval(rep.closures, trials);
  double N = (double)rep.orbit_size;
  rep.n_times_freq = N * (double)rep.closures / (double)trials;
  rep.n_freq_lo = N * wil.lo;
  rep.n_freq_hi = N * wil.hi;
  return rep;
}

namespace {

DiameterReport cayley_bfs_impl(const std::vector<MatGF>& gens, u128 expect,
                               u64 budget) {
  if (gens.empty()) throw ClnError("diameter: need generators");
  const FieldPtr& f = gens[0].field();
  unsigned n = gens[0].rows();
  std::vector<MatGF> sym = gens;
  for (const auto& g : gens) {
    MatGF gi = inverse(g);
    bool dup = false;
    for (const auto& h : sym)
      if (h == gi) dup = true;
    if (!dup) sym.push_back(gi);
  }
  std::unordered_map<std::string, u32> index;
  std::vector<MatGF> elems;
  std::vector<unsigned> dist;
  auto intern = [&](const MatGF& m, unsigned d, bool& fresh) -> u32 {
    auto [it, inserted] = index.emplace(key_of(m.data()), (u32)elems.size());
    fresh = inserted;
    if (inserted) {
      if (elems.size() >= budget) throw ClnError("diameter: budget exceeded");
      elems.push_back(m);
      dist.push_back(d);
    }
    return it->second;
  };
  bool fresh;
  intern(MatGF::identity(f, n), 0, fresh);
  unsigned diameter = 0;
  for (u64 head = 0; head < elems.size(); ++head) {
    MatGF cur = elems[head];
    unsigned d = dist[head];
    for (const auto& s : sym) {
      intern(s * cur, d + 1, fresh);
      if (fresh) diameter = std::max(diameter, d + 1);
    }
  }
  DiameterReport rep;
  rep.reached = elems.size();
  rep.generates = expect == 0 || (u128)elems.size() == expect;
  rep.diameter = diameter;
  return rep;
}

}  // namespace

DiameterReport cayley_diameter_bfs(const GroupDesc& desc,
                                   const std::vector<MatGF>& gens,
                                   u64 budget) {
  for (const auto& g : gens)
    if (!contains(desc, g))
      throw ClnError("diameter: generator is outside the group");
  if (desc.order() > budget) throw ClnError("diameter: group exceeds budget");
  return cayley_bfs_impl(gens, desc.order(), budget);
}

DiameterReport cayley_diameter_bfs(const std::vector<MatGF>& elements,
                                   const std::vector<MatGF>& gens) {
  return cayley_bfs_impl(gens, (u128)elements.size(), elements.size() + 1);
}

unsigned schreier_diameter(const OrbitIndex& orbit, u64 op_budget) {
  const u64 n = orbit.size();
  const unsigned k = orbit.generators();
  if (n * n * (2 * k + 1) > op_budget)
    throw ClnError("schreier_diameter: orbit too large for the exact scan");
  unsigned diameter = 0;
  std::vector<int> dist(n);
  std::vector<u32> queue(n);
  for (u64 src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    size_t qh = 0, qt = 0;
    queue[qt++] = (u32)src;
    dist[src] = 0;
    while (qh < qt) {
      u32 cur = queue[qh++];
      for (unsigned gi = 0; gi < k; ++gi) {
        u32 a = orbit.forward(gi)[cur], b = orbit.backward(gi)[cur];
        if (dist[a] < 0) {
          dist[a] = dist[cur] + 1;
          queue[qt++] = a;
        }
        if (dist[b] < 0) {
          dist[b] = dist[cur] + 1;
          queue[qt++] = b;
        }
      }
    }
    if (qt < n) throw ClnError("schreier_diameter: graph is disconnected");
    diameter = std::max(diameter, (unsigned)*std::max_element(dist.begin(), dist.end()));
  }
  return diameter;
}

}  // namespace cln

#pragma once

#include <iosfwd>

#include "cln/trajectory.hpp"

namespace cln {

/// An enumerated orbit of a group action with the generator images stored
/// as index permutations (one forward and one backward array per
/// generator). Built once, then shared read-only between estimators.
class OrbitIndex {
 public:
  /// Orbit of an r-tuple of vectors under simultaneous action.
  static OrbitIndex vectors_orbit(SpacePtr sp, const std::vector<MatGF>& gens,
                                  const std::vector<VecGF>& base,
                                  u64 budget = 10000000);
  /// Conjugation orbit of a matrix.
  static OrbitIndex conjugation_orbit(SpacePtr sp,
                                      const std::vector<MatGF>& gens,
                                      const MatGF& base, u64 budget = 10000000);
  /// Toy constructor from explicit permutations (image arrays).
  static OrbitIndex from_permutations(std::vector<std::vector<u32>> perms);

  u64 size() const { return n_; }
  unsigned generators() const { return (unsigned)fwd_.size(); }
  const std::vector<u32>& forward(unsigned i) const { return fwd_[i]; }
  const std::vector<u32>& backward(unsigned i) const { return bwd_[i]; }

  /// Binary dump, magic "CLNORB1", little-endian u32 indices.
  void save(std::ostream& os) const;
  static OrbitIndex load(std::istream& is);

 private:
  void finalize();  // derive backward arrays, verify bijectivity
  u64 n_ = 0;
  std::vector<std::vector<u32>> fwd_, bwd_;
};

struct SpectralReport {
  u64 orbit_size = 0;
  double lambda2 = 0.0, lambda_n = 0.0;
  double rho = 0.0;  // max(lambda2, -lambda_n)
  unsigned iterations = 0;
  bool converged = false;
  bool disconnected_warning = false;
  double tol = 0.0;
  std::string to_json() const;
};

/// Spectral radius on the complement of constants by power iteration with
/// mean deflation, run on (I + A)/2 for the top edge and (I - A)/2 for the
/// bottom edge.
SpectralReport estimate_lambda_power(const OrbitIndex& orbit, double tol,
                                     unsigned max_iters, Rng& rng);

struct TraceMomentReport {
  unsigned len = 0;
  u64 samples = 0;
  double mean_fixed = 0.0;  // estimate of E_w #fixed points = E tr A^len
  double std_error = 0.0;
  double lambda_bound = 0.0;  // (mean - 1)^(1/len), clamped at 0
};

/// Samples random-walk words of the given even length and counts fixed
/// points of their permutation images.
TraceMomentReport trace_moment(const OrbitIndex& orbit, unsigned len,
                               u64 samples, Rng& rng);

/// Exact size of the isometry-group orbit of an independent tuple, by
/// sequential admissible-image counting.
u128 tuple_orbit_size(const FormedSpace& sp, const std::vector<VecGF>& base);

struct ReturnProbReport {
  u64 trials = 0, closures = 0;
  u128 orbit_size = 0;
  double n_times_freq = 0.0;
  double n_freq_lo = 0.0, n_freq_hi = 0.0;  // 3-sigma Wilson, scaled by N
  std::string to_json() const;
};

/// Monte Carlo closure frequency of lazy joint trajectories of the first r
/// standard basis vectors, reported as N * frequency with N the exact orbit
/// size. The word must not be trivial or a proper power (after cyclic
/// reduction, which does not change the closure probability).
ReturnProbReport estimate_return_prob(const GroupDesc& desc, const Word& w,
                                      unsigned r, u64 trials, Rng& rng);

struct DiameterReport {
  bool generates = false;
  u64 reached = 0;      // size of the generated subgroup or orbit
  unsigned diameter = 0;  // valid when generates (or for Schreier graphs)
};

/// Exact Cayley diameter by breadth-first search from the identity over the
/// symmetrized generating set; if the set does not generate, reports the
/// reached subgroup size instead.
DiameterReport cayley_diameter_bfs(const GroupDesc& desc,
                                   const std::vector<MatGF>& gens,
                                   u64 budget = 10000000);
/// Same on an explicitly listed group.
DiameterReport cayley_diameter_bfs(const std::vector<MatGF>& elements,
                                   const std::vector<MatGF>& gens);

/// Exact diameter of the Schreier graph by an all-sources eccentricity
/// scan (budget-guarded).
unsigned schreier_diameter(const OrbitIndex& orbit, u64 op_budget = 2000000000);

}  // namespace cln

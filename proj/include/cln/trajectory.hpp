#pragma once

#include <memory>
#include <optional>

#include "cln/group.hpp"
#include "cln/word.hpp"

namespace cln {

/// One query in a (joint) trajectory, in lexicographic (t, i) order.
struct QueryLog {
  unsigned t = 0;       // 1-based step
  unsigned strand = 0;  // 0-based
  int letter = 0;
  VecGF input, result;
  bool free = false;
  bool coincidence = false;
};

/// Full audit log of a joint trajectory run.
struct TrajectoryRecord {
  Word word;
  std::vector<std::vector<VecGF>> lattice;  // lattice[i][t] = v_i^t
  std::vector<VecGF> reference;             // the set R
  std::vector<QueryLog> queries;
  std::vector<std::pair<unsigned, unsigned>> coincidences;  // (t, strand)
  std::vector<bool> closed;

  unsigned strands() const { return (unsigned)lattice.size(); }
  unsigned coincidences_in_strand(unsigned i) const;
  std::string to_jsonl() const;  // single line
};

/// Cheap per-strand summary for Monte Carlo runs.
struct StrandStat {
  u32 coincidences = 0;
  u32 first_t = 0;  // 1-based step of first/last coincidence (0 = none)
  u32 last_t = 0;
  bool closed = false;
  bool start_independent = false;  // of earlier starts
};

/// Joint trajectory engine. In lazy mode each free choice is drawn from the
/// exact conditional law of uniformly random elements of the full isometry
/// group (form-matching conditions against the known pairs of the letter,
/// the Q condition, and exclusion of the known codomain). In materialized
/// mode the supplied elements answer the queries. The two modes produce
/// identically distributed flag patterns.
class JointRunner {
 public:
  JointRunner(SpacePtr space, Word w, std::vector<VecGF> starts,
              std::vector<VecGF> reference);
  ~JointRunner();

  /// Switches to materialized mode.
  void set_elements(std::vector<MatGF> xs);

  /// Fast run: per-strand stats only, no allocation after the first call.
  /// Throws ClnError on an internal invariant violation (a strand that
  /// closes into span R from an independent start without a coincidence).
  void run(Rng& rng, std::vector<StrandStat>& out);

  /// Full audit run.
  TrajectoryRecord run_record(Rng& rng);

  const Word& word() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Lazy-mode record run (convenience wrapper).
TrajectoryRecord run_joint_trajectory(SpacePtr space, const Word& w,
                                      const std::vector<VecGF>& starts,
                                      const std::vector<VecGF>& reference,
                                      Rng& rng);
/// Materialized-mode record run.
TrajectoryRecord run_joint_trajectory(SpacePtr space, const Word& w,
                                      const std::vector<VecGF>& starts,
                                      const std::vector<VecGF>& reference,
                                      const std::vector<MatGF>& xs, Rng& rng);

/// Verdict of the closed one-coincidence structure check: the word must be
/// (w_d ... w_1)^(len/d) for d = gcd of the coincidence steps and len. For
/// single trajectories the companion polynomial of the coincidence relation
/// is extracted and must divide X^len - 1.
struct OneCoincidenceVerdict {
  bool consistent = false;
  unsigned period = 0;
  std::optional<PolyGF> relation_poly;  // r = 1 only
  bool poly_divides = false;            // r = 1 only
};

OneCoincidenceVerdict classify_one_coincidence(const SpacePtr& space,
                                               const TrajectoryRecord& rec);

struct FreqEstimate {
  u64 hits = 0, trials = 0;
  Interval wilson;     // 3-sigma Wilson interval for the frequency
  double bound = 0.0;  // reference bound reported alongside
};

/// Monte Carlo frequency of w(x_1..x_k) U = U over uniform elements of the
/// group, reported with the invariant-subspace probability bound.
FreqEstimate estimate_invariant_subspace_prob(const GroupDesc& desc,
                                              const Word& w,
                                              const std::vector<VecGF>& U,
                                              u64 trials, Rng& rng);

/// Monte Carlo frequency of supp(w(x_1..x_k)) <= (1-delta) n.
FreqEstimate estimate_small_support_prob(const GroupDesc& desc, const Word& w,
                                         double delta, u64 trials, Rng& rng);

/// Exact Gaussian binomial coefficient (number of r-dimensional subspaces
/// of F_q^x for integer x >= r >= 0).
u128 q_binomial(unsigned x, unsigned r, u64 q);

}  // namespace cln

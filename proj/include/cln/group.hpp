#pragma once

#include <string>
#include <vector>

#include "cln/forms.hpp"

namespace cln {

/// A classical group between the derived group SCl and the full isometry
/// group GCl, keyed by a subgroup of the abelianization of GCl.
class GroupDesc {
 public:
  /// level: generating codes for the abelianization subgroup; empty means
  /// the trivial subgroup (the derived group).
  GroupDesc(SpacePtr space, std::vector<u32> level_gens);
  static GroupDesc full(SpacePtr space);
  static GroupDesc derived(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  const FieldPtr& field() const { return space_->field(); }
  unsigned dim() const { return space_->dim(); }
  const AbGroup& ab() const { return ab_; }
  /// Sorted invariant codes forming the level subgroup.
  const std::vector<u32>& level() const { return level_; }
  bool is_full_level() const { return level_.size() == ab_.order; }
  bool is_derived_level() const { return level_.size() == 1; }
  bool level_contains(u32 code) const;

  /// Exact order (formula-based), for budgets and cross-checks.
  u128 order() const;

  std::string descriptor() const;

 private:
  SpacePtr space_;
  AbGroup ab_;
  std::vector<u32> level_;
};

/// Grammar: "<KIND>(<n>,<q>)[:level]", level one of "S" (derived group),
/// "G" (full group, the default), or explicit invariant codes "c1+c2+...".
GroupDesc parse_group(const std::string& descriptor);

/// True iff g preserves the forms and its abelian invariant lies in the
/// level subgroup.
bool contains(const GroupDesc& desc, const MatGF& g);

/// Exactly uniform element. Basis images are drawn one at a time, each
/// exactly uniform over the admissible set, which yields a uniform element
/// of the full isometry group; a fixed-transversal correction then lands it
/// uniformly on the requested level.
MatGF sample_uniform(const GroupDesc& desc, Rng& rng);

/// Complete duplicate-free enumeration by constraint-pruned column search.
/// Throws if the order exceeds the budget.
std::vector<MatGF> enumerate_small(const GroupDesc& desc,
                                   u64 budget = 10000000);

/// Whether the parameters fall below the quasisimple range (reports flag
/// such groups).
bool is_quasisimple_range(const GroupDesc& desc);

}  // namespace cln

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "coseq/residue.hpp"

namespace coseq {

// Finite abelian p-group presented by generator orders p^{e_i}, with an
// optional action of a companion group given as one endomorphism matrix per
// acting-group element id. The `free` flag marks an exact free Z_p-lattice
// truncated at p^{trunc_k}; such modules never back a finite extension.
struct TruncModule {
  i64 p = 0;
  VecZ orders;
  bool free = false;
  int trunc_k = 0;
  std::vector<MatZ> action;

  i64 rank() const { return orders.size(); }
  i64 size() const;
  i64 size_log_p() const;
  VecZ reduce(VecZ v) const;
  VecZ zero() const { return VecZ::Zero(rank()); }
  VecZ add(const VecZ& a, const VecZ& b) const;
  VecZ sub(const VecZ& a, const VecZ& b) const;
  VecZ neg(const VecZ& a) const;
  VecZ scale(i64 s, const VecZ& a) const;
  VecZ act(i64 g, const VecZ& v) const;
  i64 index_of(const VecZ& v) const;
  VecZ vector_of(i64 idx) const;
};

TruncModule make_trivial_action_module(i64 p, VecZ orders);

class FiniteGroup;
struct ExtensionData;
struct GroupImpl;

class FiniteGroup {
public:
  FiniteGroup() = default;

  // Dense multiplication table; order capped at 3^8.
  static FiniteGroup from_table(const MatZ& table);

  // Extension of data.base by data.module via data.tau, elements encoded as
  // (module index)·|base| + base id.
  static FiniteGroup from_extension(ExtensionData data);

  // Arbitrary multiplication law evaluated on demand.
  static FiniteGroup from_law(i64 order, i64 p, i64 identity,
                              std::function<i64(i64, i64)> mul,
                              std::function<i64(i64)> inv);

  i64 order() const;
  i64 prime() const;
  i64 log_order() const; // k with |G| = p^k
  i64 identity() const;
  i64 mul(i64 a, i64 b) const;
  i64 inv(i64 a) const;
  i64 conj(i64 g, i64 x) const; // g·x·g⁻¹

  bool is_extension() const;
  const ExtensionData& extension() const;
  VecZ module_part(i64 id) const;
  i64 base_part(i64 id) const;
  i64 encode(const VecZ& t, i64 g) const;

  // Dense-table copy of this group (order ≤ 3^8).
  FiniteGroup materialized() const;

  bool same(const FiniteGroup& o) const { return impl_ == o.impl_; }
  bool valid() const { return impl_ != nullptr; }

private:
  explicit FiniteGroup(std::shared_ptr<const GroupImpl> impl)
      : impl_(std::move(impl)) {}

  std::shared_ptr<const GroupImpl> impl_;
};

// 2-cocycle presentation of an extension of `base` by `module`. The cocycle
// table is indexed by g1·|base| + g2 and verified at construction: values
// normalized (zero when an argument is the identity) and the cocycle identity
// holds on base triples.
struct ExtensionData {
  FiniteGroup base;
  TruncModule module;
  std::vector<VecZ> tau;

  ExtensionData(FiniteGroup base_group, TruncModule mod,
                std::vector<VecZ> cocycle);

  const VecZ& tau_at(i64 g1, i64 g2) const {
    return tau[g1 * base.order() + g2];
  }
};

// Verifies that the module's action matrices define automorphisms compatible
// with the group law of G.
void validate_module_action(const FiniteGroup& G, const TruncModule& M);

struct Subgroup {
  FiniteGroup parent;
  std::vector<i64> elems; // sorted ascending, contains the identity

  i64 order() const { return static_cast<i64>(elems.size()); }
  bool contains(i64 id) const;
};

Subgroup make_subgroup(const FiniteGroup& G, std::vector<i64> elems);

Subgroup subgroup_generate(const FiniteGroup& G, const std::vector<i64>& gens);
bool is_subgroup(const FiniteGroup& G, const std::vector<i64>& sorted_elems);

Subgroup centralizer(const FiniteGroup& G, const std::vector<i64>& S);
std::vector<i64> centralizer_in(const FiniteGroup& G,
                                const std::vector<i64>& domain,
                                const std::vector<i64>& S);
Subgroup normalizer(const FiniteGroup& G, const Subgroup& S);
i64 element_order(const FiniteGroup& G, i64 x);
std::vector<i64> find_generators(const FiniteGroup& G);

// Lift of a base subgroup Q into the extension group G along a 1-cochain f on
// Q (one value per element of Q.elems, zero at the identity): the subgroup
// {(−f(q), q)}. Requires Δf = τ restricted to Q.
Subgroup lift_subgroup(const FiniteGroup& G, const Subgroup& Q,
                       const std::vector<VecZ>& f_values);

// All elementary abelian p-subgroups of G, each exactly once, sorted by
// (order, element list). The trivial subgroup is included only when flagged.
std::vector<Subgroup> enumerate_elementary_abelians(const FiniteGroup& G,
                                                    bool include_trivial,
                                                    i64 max_order = 59049);

// Only the maximal elementary abelian p-subgroups: the spans of the maximal
// cliques of the commutation graph on the order-p elements. Sorted by
// (order, element list); for the trivial group, the trivial subgroup.
std::vector<Subgroup> enumerate_maximal_elementary_abelians(
    const FiniteGroup& G, i64 max_order = 59049);

// Partition of the given subgroups by conjugacy. Each class is sorted with
// the lexicographically least element list first; classes sorted by their
// representative. The input list must be closed under conjugation.
std::vector<std::vector<Subgroup>> conjugacy_classes_of_subgroups(
    const FiniteGroup& G, const std::vector<Subgroup>& subs);

std::string group_to_text(const FiniteGroup& G);
FiniteGroup group_from_text(const std::string& text);

} // namespace coseq

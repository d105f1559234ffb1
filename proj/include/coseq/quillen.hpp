#pragma once

// The category of elementary abelian p-subgroups of a finite p-group, with
// morphisms the conjugation-induced injective homomorphisms; skeletons and
// exact isomorphism witnesses between such categories; and the triple
// parametrization (U, f, W) of the elementary abelians of the members of an
// extension tower, with the obstruction tower comparing two lifts along a
// conjugation.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coseq/sequence.hpp"

namespace coseq {

// One object per conjugacy class (the lexicographically least member as the
// representative, listed in sorted order), morphisms between representatives
// only.  hom(a, b) is stored at hom[a * objects.size() + b] as a lex-sorted
// list of image vectors aligned with objects[a].elems; every image vector is
// an injective homomorphism x ↦ gxg⁻¹ for some g, landing inside
// objects[b].elems.  Composition is closed on the stored sets by
// construction and resolved by lookup.
struct QuillenCategory {
  FiniteGroup group;
  std::vector<Subgroup> objects;
  std::vector<i64> class_sizes;
  std::vector<std::vector<std::vector<i64>>> hom;

  i64 object_count() const { return static_cast<i64>(objects.size()); }
  const std::vector<std::vector<i64>>& hom_of(i64 a, i64 b) const;
  i64 morphism_count() const;

  // Position of the identity map in hom(a, a).
  i64 identity_index(i64 a) const;
  // Index in hom(a, c) of the composite hom(b, c)[j] ∘ hom(a, b)[i].
  i64 compose(i64 a, i64 b, i64 c, i64 i, i64 j) const;
};

struct QuillenOptions {
  bool include_trivial = true;
  i64 max_order = 59049;  // guard on |G| for subgroup enumeration
  i64 max_objects = 512;  // guard on the number of conjugacy classes
};

// The category on all elementary abelian subgroups of G.
QuillenCategory build_category(const FiniteGroup& g,
                               const QuillenOptions& opt = {});

// The full subcategory on the conjugacy classes of the given subgroups.  The
// list must contain each subgroup once and be closed under conjugation;
// morphisms are all conjugation maps between the class representatives.
QuillenCategory build_category_on(const FiniteGroup& g,
                                  std::vector<Subgroup> subs,
                                  const QuillenOptions& opt = {});

// True when no two distinct objects are isomorphic in the category (a pair
// of morphisms composing to the two identities).
bool is_skeletal(const QuillenCategory& cat);

// The full subcategory on the first object of each isomorphism class.
// Idempotent.  Categories built here are already skeletal — two conjugacy
// classes of the same order admit mutual embeddings only if equal — so this
// returns its input's classes unchanged.
QuillenCategory skeleton(const QuillenCategory& cat);

// An exact isomorphism of categories: a bijection of objects and one
// bijection per hom set (hom_map is flat (a, b)-indexed like hom, and
// hom_map[a·n+b][i] is the index in hom(F a, F b) of the image of
// hom(a, b)[i]), preserving identities and all composites.
struct FunctorWitness {
  std::vector<i64> object_map;
  std::vector<std::vector<i64>> hom_map;
};

// Exhaustive check of the functor laws for a claimed witness.
bool witness_valid(const QuillenCategory& a, const QuillenCategory& b,
                   const FunctorWitness& w);

// Searches for an isomorphism between two skeletal categories (inputs are
// required to be skeletal).  Objects are partitioned by iterated structural
// invariants (poset height, automorphism count, hom-cardinality profiles to
// and from each refined class); a backtracking search then fixes the object
// bijection inside the refined classes and extends it to hom-set bijections
// under identity and composition constraints.  The returned witness has been
// verified exhaustively; absent exactly when no isomorphism exists (the
// search is complete).  Deterministic.
std::optional<FunctorWitness> categories_isomorphic(const QuillenCategory& a,
                                                    const QuillenCategory& b);

// Serialization: objects with their element lists, generators and ranks; hom
// sets as image lists; the full composition index table.
std::string category_to_json(const QuillenCategory& cat);

// Graphviz export: one node per object, one edge per morphism between
// distinct objects; automorphisms appear as self-loops only when requested.
std::string category_to_dot(const QuillenCategory& cat, bool show_auts);

std::string witness_to_json(const QuillenCategory& a, const QuillenCategory& b,
                            const FunctorWitness& w);

// ---------------------------------------------------------------------------
// Extension towers and the triple parametrization of their elementary
// abelians.

// The family r ↦ member(r): the extension of `base` by the layer M/p^{r+1}M
// glued via the degree-2 cocycle tower tau evaluated at r.  The pair's
// sublattice is required to be p·M, so the layer at r is M/p^r N = M/p^{r+1}M
// and the socle M/pM embeds in every layer as the p^r-multiples.  `socle`
// presents (M/pM, +) as a standalone group (element ids are the mixed-radix
// digit encodings of the coordinate vectors); W-spaces live inside it.
struct TowerFamily {
  FiniteGroup base;
  LatticePair pair;
  CochainSeq tau;
  FiniteGroup socle;

  // The member at index r, cached so that repeated calls share one group
  // instance (subgroups of different calls stay mutually compatible).
  // Requires tau.r0 <= r and r + m + 1 <= pair.work_k.
  const FiniteGroup& member(i64 r) const;

  std::shared_ptr<std::map<i64, FiniteGroup>> cache;
};

// Validates the sublattice shape, that tau is a normalized degree-2 cocycle
// tower over (base, pair), and the level bound level(tau) <= 2·log_p|base|.
TowerFamily make_tower_family(FiniteGroup base, LatticePair pair,
                              CochainSeq tau);

// The lattice pair with the action restricted to a subgroup q of its group;
// `qgroup` must be subgroup_as_group(q).
LatticePair restrict_pair(const LatticePair& pair, const Subgroup& q,
                          const FiniteGroup& qgroup);

// Restriction of a tower to a subgroup of its group, certificate-wise.
CochainSeq restrict_seq(const CochainSeq& s, const Subgroup& q,
                        const FiniteGroup& qgroup);

// A triple (U, f, W): U an elementary abelian subgroup of the family base;
// f a degree-1 tower over U (with the restricted pair) whose coboundary is
// the restriction of the family's tau, of level at most 2·log_p|base|; and
// W a subgroup of the socle fixed pointwise by U.
struct ElabTriple {
  Subgroup u;
  CochainSeq f;
  Subgroup w;
};

// The subgroup {(p^r w − f_r(u), u) | u ∈ U, w ∈ W} of member(r): an
// elementary abelian of order |W|·|U|.  Validates the triple (the coboundary
// identity Δf = tau|_U, the level bound, W's parent and U-fixedness) and the
// stated order.  Requires r >= max(tau.r0, f.r0).
Subgroup elab_from_triple(const TowerFamily& fam, const ElabTriple& t, i64 r);

// For every elementary abelian subgroup of member(r) (trivial included), a
// triple reproducing it exactly via elab_from_triple, built by splitting the
// subgroup over its socle part and interpolating the section through the
// coboundary witness of tau's restriction.  `exceptions` lists the indices
// of subgroups where reproduction failed and is expected to stay empty.
struct CoverReport {
  i64 r = 0;
  std::vector<Subgroup> elabs;
  std::vector<ElabTriple> triples; // aligned with elabs
  std::vector<i64> exceptions;
};
CoverReport triples_cover(const TowerFamily& fam, i64 r);

// The obstruction tower over ᵍU comparing the conjugate of one lift with
// another lift: χ_r(v) = (ᵍf)_r(v) − tau_r(g, vᵍ) + tau_r(v, g) − f′_r(v),
// where (ᵍc)(v) = g·c(vᵍ) and vᵍ = g⁻¹vg.  Requires ᵍ(t.u) = tprime.u and
// equal r0; the result is a cocycle tower over the restricted pair of ᵍU.
CochainSeq chi_seq(const TowerFamily& fam, i64 g, const ElabTriple& t,
                   const ElabTriple& tprime);

} // namespace coseq

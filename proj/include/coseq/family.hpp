#pragma once

// Concrete group families: main-line quotients (O/alpha^s O) ⋊ C_p over the
// p-th cyclotomic integers, twisted filtration-quotient groups over the
// ninth cyclotomic integers extended by C_9, generalized quaternion groups,
// and generic coclass-family members glued from a splitting tower.
//
// The cyclotomic constructions share one coordinate scheme: the T-part is a
// quotient of an ideal power by a deeper one in a uniserial chain, elements
// are addressed by mixed-radix indices over the invariant factors of that
// quotient, and the group law is evaluated on demand through small integer
// matrices precomputed from exact ideal bases.  Groups of order well beyond
// the dense-table bound therefore stay cheap to multiply in.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coseq/cyclotomic.hpp"
#include "coseq/group.hpp"
#include "coseq/sequence.hpp"

namespace coseq {

namespace detail {
struct UniserialCtx;
}

// ---------------------------------------------------------------------------
// Main-line quotients (O/alpha^s O) ⋊ C_p

struct MainLineSpec {
  i64 p = 3; // odd prime
  int s = 1; // quotient exponent: the T-part is O/alpha^s O, alpha = theta-1
};

// The quotient group together with its coordinate context.  Element ids
// encode (t, r) as t*p + r where t indexes the T-part and r is the exponent
// of the acting generator tau (which multiplies the T-part by theta).
struct MainLineGroup {
  MainLineSpec spec;
  FiniteGroup group;
  std::shared_ptr<const detail::UniserialCtx> ctx; // internal

  // Id of the element (v + alpha^s O) tau^r; v in exact power-basis
  // coordinates of the ambient ring.
  i64 element(const VecB& v, i64 r) const;
  i64 tau_exponent(i64 id) const;
  VecB t_part(i64 id) const; // canonical exact representative of the coset
  const CycRing& ring() const;
};

MainLineGroup make_mainline(const MainLineSpec& spec);
FiniteGroup mainline_group(const MainLineSpec& spec);

// ---------------------------------------------------------------------------
// Twisted filtration quotients over the ninth cyclotomic integers

struct SkeletonSpec {
  int j = 7;  // filtration offset: T = p-ideal^{j-3}
  CycInt c;   // twisting unit, power-basis coefficients (one to six entries)
  int m = 7;  // quotient length: j <= m <= skeleton_max_m(j)
};

// Largest admissible quotient length: 2j when 3 divides j, else 2j - 1.
int skeleton_max_m(int j);

// The group (T/T_m, *) ⋊ C_9 of order 3^{m+2}, where T_l is the (j-3+l)-th
// power of the maximal ideal, x * y = x + y + (1/2) c gamma0(x ^ y), and the
// C_9 generator tau acts as multiplication by theta.  Element ids encode
// (t, r) as t*9 + r.
struct SkeletonGroup {
  SkeletonSpec spec;
  FiniteGroup group;
  std::shared_ptr<const detail::UniserialCtx> ctx; // internal

  // Id of (v + T_m) tau^r; v must lie in T (exact power-basis coordinates).
  i64 element(const VecB& v, i64 r) const;
  i64 tau_exponent(i64 id) const;
  VecB t_part(i64 id) const; // canonical exact representative of the coset
  const CycRing& ring() const;
};

SkeletonGroup make_skeleton(const SkeletonSpec& spec);
FiniteGroup skeleton_group(const SkeletonSpec& spec);

// Number of orbits of multiplication by theta on T/T_3 (27 classes) in the
// ninth cyclotomic chain with T = p-ideal^{j-3}.
i64 count_orbits_T_mod_T3(i64 j);

// One deterministic representative per orbit: among each orbit's canonical
// coset representatives the one with the lexicographically least coefficient
// vector, the list sorted the same way.  Contains zero.
std::vector<CycInt> orbit_representatives_v(i64 j);

// ---------------------------------------------------------------------------
// Generalized quaternion groups

// Q_{2^n}: the extension of C_2 by the cyclic group of order 2^{n-1} with
// inverting action and the 2-cocycle concentrated at (tau, tau).
FiniteGroup quaternion_group(int n);

// ---------------------------------------------------------------------------
// Generic coclass-family members

struct FamilySpec {
  FiniteGroup base;   // the quotient S being extended
  LatticePair module; // free lattice over the base; sublattice = full lattice
  Cochain rho;        // degree-2 cocycle with values in the ambient lattice
  Cochain eta;        // degree-3 cocycle with values in the sublattice
  i64 j = 0;          // member index, at least 3 log_p|S| + 1
};

// The extension of the base by lattice/p^j lattice via the tower member
// pro_j(rho + p^{j-m} sigma), where sigma solves the splitting equation
// Delta sigma = p^m eta.
FiniteGroup family_member(const FamilySpec& spec);

// ---------------------------------------------------------------------------
// Key = value configuration text

struct FamilyConfig {
  std::optional<i64> p;
  std::optional<i64> s;
  std::optional<i64> j;
  std::optional<i64> m;
  std::optional<VecZ> c; // comma-separated coefficient list
};

// Parses lines of the form "key = value" with keys p, s, j, m, c; '#' starts
// a comment.  Unknown, duplicate, or malformed entries are errors.
FamilyConfig parse_family_config(const std::string& text);

} // namespace coseq

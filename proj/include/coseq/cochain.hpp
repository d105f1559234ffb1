#pragma once

// Normalized cochains on a finite p-group with coefficients in either a
// truncated module or a free p-adic lattice, together with the coboundary
// operator, cohomology invariants, coboundary testing, restriction, the
// connecting homomorphism of the sequence 0 -> N -> M -> M/p^r N -> 0, and
// the splitting decomposition H^n(G, M/p^r N) = H^n(G, M) + H^{n+1}(G, N).
//
// A degree-n cochain stores one coefficient vector per tuple of non-identity
// group elements; any tuple containing the identity evaluates to zero.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "coseq/group.hpp"
#include "coseq/residue.hpp"

namespace coseq {

// Free Z_p-lattice coefficients of finite rank.  Values are exact integers;
// `work_k` is the default precision guard for operations that must pass
// through residue arithmetic.
struct FreeCoeff {
  i64 p = 0;
  i64 rank = 0;
  std::vector<MatZ> action; // one matrix per group element id; empty = trivial
  int work_k = 24;

  VecZ zero() const { return VecZ::Zero(rank); }
};

using CoeffModule = std::variant<TruncModule, FreeCoeff>;

i64 coeff_rank(const CoeffModule& c);
i64 coeff_prime(const CoeffModule& c);
bool coeff_is_free(const CoeffModule& c);
VecZ coeff_reduce(const CoeffModule& c, const VecZ& v);
VecZ coeff_act(const CoeffModule& c, i64 g, const VecZ& v);
// True when the two coefficient descriptions have equal shape (kind, prime,
// rank, and orders); the action is not compared.
bool coeff_same_shape(const CoeffModule& a, const CoeffModule& b);

struct GroupLogOrder {
  i64 m = 0;    // log_p |G|
  i64 order = 1;
};
GroupLogOrder group_log_order(const FiniteGroup& g);

class Cochain {
public:
  Cochain(FiniteGroup g, CoeffModule coeff, int degree);

  int degree() const { return degree_; }
  const FiniteGroup& group() const { return group_; }
  const CoeffModule& coeff() const { return coeff_; }
  i64 rank() const { return coeff_rank(coeff_); }

  // Number of stored tuples, (|G|-1)^degree.
  i64 entries() const { return static_cast<i64>(values_.size()); }

  // Value on an arbitrary tuple; tuples containing the identity give zero.
  VecZ value(std::span<const i64> tuple) const;
  void set_value(std::span<const i64> tuple, const VecZ& v);

  // Storage-order access over non-identity tuples.
  const VecZ& raw(i64 index) const { return values_[index]; }
  void set_raw(i64 index, const VecZ& v);
  std::vector<i64> tuple_of(i64 index) const;

  bool is_zero() const;
  Cochain& operator+=(const Cochain& o);
  Cochain& operator-=(const Cochain& o);
  friend Cochain operator+(Cochain a, const Cochain& b) { return a += b; }
  friend Cochain operator-(Cochain a, const Cochain& b) { return a -= b; }
  Cochain scaled(i64 c) const;

private:
  i64 tuple_index(std::span<const i64> tuple) const; // -1 if identity inside

  FiniteGroup group_;
  CoeffModule coeff_;
  int degree_;
  std::vector<VecZ> values_;
};

// The inhomogeneous coboundary operator C^n -> C^{n+1}.
Cochain coboundary(const Cochain& f);

// Streamed cocycle test; on failure the offending tuple is written to
// `bad_tuple` when provided.
bool is_cocycle(const Cochain& f, std::vector<i64>* bad_tuple = nullptr);

// The contraction s with Delta(s f) + s(Delta f) = |G| f on normalized
// cochains; for a degree-(n+1) cocycle f this solves Delta(sigma) = |G| f
// exactly over the integers.
Cochain transfer_contraction(const Cochain& f);

// Cohomology of G with the given coefficients as a list of cyclic orders
// (0 denotes a free summand).  Supported: degree 0 for any group held here,
// degree <= 2 for |G| <= 81, degree 3 for |G| <= 27; free coefficients are
// computed by exact integer Smith reduction and are limited to |G| <= 27,
// degree <= 2.
AbelianInvariants cohomology(const FiniteGroup& g, const CoeffModule& coeff,
                             int degree);

// If z = Delta(x) for some cochain x, returns such an x; otherwise an empty
// optional.  Rejects inputs that are not cocycles, naming a failing tuple.
std::optional<Cochain> is_coboundary(const Cochain& z);

struct CohomologyClass {
  Cochain rep; // a cocycle

  int degree() const { return rep.degree(); }
};

bool class_is_zero(const CohomologyClass& c);
bool class_equal(const CohomologyClass& a, const CohomologyClass& b);

// Dense group on the positions of Q.elems (sorted parent ids).
FiniteGroup subgroup_as_group(const Subgroup& q);
CoeffModule restrict_coeff(const CoeffModule& c, const Subgroup& q);
// Restriction along Q <= G; `qgroup` must be subgroup_as_group(q) (layout is
// verified).  Values on position tuples are the parent values.
Cochain restrict_cochain(const Cochain& f, const Subgroup& q,
                         const FiniteGroup& qgroup);

// A free lattice M = Z_p^rank with G-action together with a finite-index
// G-stable sublattice N (columns of n_basis).  The derived fields give the
// action rewritten in N-coordinates and exact division by the sublattice.
struct LatticePair {
  i64 p = 0;
  i64 rank = 0;
  std::vector<MatZ> action; // on M-coordinates; empty = trivial
  MatZ n_basis;
  int work_k = 24;

  std::vector<MatZ> n_action; // action on N-coordinates
  i64 n_colog = 0;            // log_p [M : N]

  FreeCoeff ambient_coeff() const; // M with its action
  FreeCoeff sub_coeff() const;     // N with the rewritten action

  // Solve n_basis * y = v exactly; fails if v is outside N.
  VecZ n_coordinates(const VecB& v) const;

  SmithForm n_smith; // of n_basis
};

LatticePair make_lattice_pair(const FiniteGroup& g, i64 p, MatZ n_basis,
                              std::vector<MatZ> action, int work_k);

// M/p^r N in Smith coordinates, as a truncated module with induced action.
struct QuotientView {
  i64 r = 0;
  TruncModule module;
  LatticeQuotient lq;

  // Quotient coordinates of an ambient M-vector.
  VecZ project(const VecZ& m_coords) const;
  // The canonical integer preimage of quotient coordinates (least
  // non-negative in Smith coordinates).
  VecZ lift(const VecZ& q_coords) const;
};

QuotientView quotient_view(const LatticePair& pair, const FiniteGroup& g,
                           i64 r);

// Apply the projection / canonical lift valuewise to whole cochains.
Cochain project_cochain(const QuotientView& view, const Cochain& m_valued);
Cochain lift_cochain(const QuotientView& view, const LatticePair& pair,
                     const Cochain& q_valued);

// Connecting homomorphism H^n(G, M/p^r N) -> H^{n+1}(G, N): lift the cocycle
// to M, take its coboundary, and divide by p^r into N-coordinates.  Fails,
// naming a tuple, when the division is impossible (the input was not a
// cocycle).
CohomologyClass connecting_hom(const Cochain& z, const LatticePair& pair,
                               i64 r);

// The two components of the splitting: a free cocycle over M representing
// the image under reduction, and the connecting image over N.  Requires
// r >= 2 * log_p |G|.
struct SplitDecomposition {
  CohomologyClass over_m;
  CohomologyClass over_n;
};
SplitDecomposition split_decompose(const Cochain& z, const LatticePair& pair,
                                   i64 r);

// Text serialization: degree, coefficient shape, and the nonzero values.
std::string cochain_to_text(const Cochain& f);
Cochain cochain_from_text(const std::string& text, const FiniteGroup& g,
                          const CoeffModule& coeff);

} // namespace coseq

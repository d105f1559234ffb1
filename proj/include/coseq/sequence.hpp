#pragma once

// Infinite towers of cochains over the quotients M/p^r N, represented by a
// finite certificate: a pair (rho over M, sigma over N) together with a
// starting index r0 and a shift omega, the tower being
//
//     alpha_r = pro_r(rho + p^{r-omega} sigma)   for r >= r0.
//
// The representation is closed under addition, scaling, and the coboundary,
// admits a finite zero test (no evaluation loop), and supports a coboundary
// test, a splitting lift, interpolation through a prescribed value, and a
// change-of-module decomposition across an intermediate lattice L with
// p L <= N <= L <= M.

#include <optional>
#include <string>

#include "coseq/cochain.hpp"

namespace coseq {

// A represented tower.  Immutable after construction; all operations are
// pure.  `rho` takes values in M (ambient coordinates), `sigma` in N
// (sublattice coordinates); both share one group and degree.
struct CochainSeq {
  LatticePair pair;
  Cochain rho;   // over pair.ambient_coeff()
  Cochain sigma; // over pair.sub_coeff()
  i64 r0 = 0;
  i64 omega = 0; // 0 <= omega <= r0

  // Validates coefficient shapes, the omega range, and the precision guard
  // (r0 + m + 2 <= pair.work_k so that internal rechecks at r0 and r0 + 1
  // always have headroom).
  CochainSeq(LatticePair pair_, Cochain rho_, Cochain sigma_, i64 r0_,
             i64 omega_);

  i64 degree() const { return rho.degree(); }
  const FiniteGroup& group() const { return rho.group(); }
};

// The member alpha_r as a cochain over M/p^r N.  Requires r >= r0 and
// r + m + 1 <= pair.work_k.
Cochain seq_eval(const CochainSeq& s, i64 r);

// Pointwise sum; inputs must share group, pair, degree, and r0.  The result
// carries omega = max of the inputs, with sigma parts rescaled to match.
CochainSeq seq_add(const CochainSeq& s, const CochainSeq& t);

// Pointwise scalar multiple (componentwise, omega unchanged).
CochainSeq seq_scale(i64 x, const CochainSeq& s);

// True iff alpha_r = 0 for every r: equivalently rho = 0 and sigma lies in
// p^omega C^n(G, N).  Decided from the certificate alone.
bool seq_is_zero(const CochainSeq& s);

// Pointwise equality of towers (difference is zero).  Requires equal r0.
bool seq_equal(const CochainSeq& s, const CochainSeq& t);

// The smallest omega' admitting a representation (rho', sigma'; r0, omega')
// of the same tower, computed by the divisibility normal form: sigma is
// reduced mod p^omega, a wholly absorbable sigma part gives level 0, and
// otherwise common p-powers of sigma are stripped.  The normal form is
// rechecked pointwise at r0 and r0 + 1.
i64 seq_level(const CochainSeq& s);

// An equal tower realized at omega = seq_level(s) with sigma reduced.
CochainSeq seq_normal_form(const CochainSeq& s);

// The tower of coboundaries (Delta rho, Delta sigma; r0, omega); evaluation
// commutes with the coboundary.
CochainSeq seq_delta(const CochainSeq& s);

// True iff every member is a cocycle: Delta rho = 0 and p^omega divides
// Delta sigma.
bool seq_is_cocycle(const CochainSeq& s);

// For a cocycle tower of level at most r0 - m: if any single member is a
// coboundary then all are, and a preimage tower beta with
// seq_delta(beta) = s and level(beta) <= level(s) + m is returned; if no
// member is a coboundary, absent.  Degrees >= 1 only; the operation refuses
// towers whose level exceeds r0 - m.
std::optional<CochainSeq> is_coboundary_seq(const CochainSeq& s);

// The tower pro_r(rho + p^{r-m} sigma) where sigma solves
// Delta sigma = p^m eta (least non-negative solution of the linear system
// at working truncation).  `rho` must be a cocycle over M, `eta` a cocycle
// over N of one degree higher, and r0 >= 2m.  The result has level <= m and
// split_decompose(seq_eval(s, r)) = (class of rho, class of eta) for all r.
CochainSeq split_lift(const LatticePair& pair, const Cochain& rho,
                      const Cochain& eta, i64 r0);

// A tower of level <= m passing exactly through the cocycle z over
// M/p^{r1} N at index r1.  Requires r0 >= 2m and r1 >= r0.
CochainSeq seq_through(const LatticePair& pair, const Cochain& z, i64 r0,
                       i64 r1);

// An intermediate lattice L with p L <= N <= L <= M, G-stable, given by its
// basis in M-coordinates.  Carries the pair (M, L), the coordinates of N
// inside L, and the elementary quotient module L/N.
struct IntermediateModule {
  LatticePair ml;          // the pair (M, L)
  MatZ n_in_l;             // C with n_basis = l_basis * C
  TruncModule quotient;    // L/N with induced action (exponent p)
  LatticeQuotient lq;      // coordinate map L -> L/N
  std::vector<i64> live;   // lq coordinates of order > 1, in quotient order
};

IntermediateModule make_intermediate(const LatticePair& mn,
                                     const FiniteGroup& g,
                                     const MatZ& l_basis);

// The tower of multiplication images: c over L/N maps to the tower with
// alpha_r = p^r c-hat mod p^r N, realized as (0, N-coords(p c-hat); r0, 1).
CochainSeq intermediate_image_seq(const LatticePair& mn,
                                  const IntermediateModule& im,
                                  const Cochain& c, i64 r0);

// Reduction of a tower over (M, N) to one over (M, L).
CochainSeq seq_mod_intermediate(const CochainSeq& s,
                                const IntermediateModule& im);

// Result of the change-of-module decomposition
//   alpha_r = p^r c-hat + Delta(kappa + p^{r-omega-m} lambda)  mod p^r N
// with c a cocycle over L/N, kappa over M, lambda over L.
struct ChangeModuleDecomposition {
  Cochain c;      // cocycle over im.quotient, same degree as s
  Cochain kappa;  // over M, one degree lower
  Cochain lambda; // over L (L-coordinates), one degree lower
};

// For a cocycle tower of level <= r0 - m: decomposes as above when the
// reduction mod p^r L is a coboundary tower, verifying the identity at r0
// and r0 + 1; absent when the reduction is not a coboundary tower.
std::optional<ChangeModuleDecomposition> change_module_decompose(
    const CochainSeq& s, const IntermediateModule& im);

// Serialization: a "cochainseq <degree> <r0> <omega>" header followed by
// the cochain formats of rho and sigma.
std::string seq_to_text(const CochainSeq& s);
CochainSeq seq_from_text(const std::string& text, const FiniteGroup& g,
                         const LatticePair& pair);

} // namespace coseq

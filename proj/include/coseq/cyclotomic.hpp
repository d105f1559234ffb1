#pragma once

#include <vector>

#include "coseq/residue.hpp"

namespace coseq {

// Element of a truncated cyclotomic integer ring: coordinates in the power
// basis 1, θ, ..., θ^{φ−1}, each reduced mod p^K.
struct CycInt {
  VecZ c;

  bool operator==(const CycInt& o) const { return c == o.c; }
};

// O = Z_p[θ] with θ a primitive p^ℓ-th root of unity, truncated at p^K.
// The maximal ideal is 𝔭 = (θ−1)O.
class CycRing {
public:
  CycRing(i64 p, int level, int trunc);

  i64 p() const { return p_; }
  int level() const { return ell_; }
  i64 degree() const { return phi_; }
  int trunc() const { return K_; }
  i64 mod() const { return mod_; }
  std::vector<i64> minpoly() const; // coefficients of Φ_{p^ℓ}, constant first

  CycInt zero() const;
  CycInt one() const;
  CycInt theta() const;
  CycInt theta_minus_one() const;
  CycInt from_coords(VecZ coords) const;
  CycInt from_int(i64 n) const;

  CycInt add(const CycInt& a, const CycInt& b) const;
  CycInt sub(const CycInt& a, const CycInt& b) const;
  CycInt neg(const CycInt& a) const;
  CycInt scalar_mul(i64 s, const CycInt& a) const;
  CycInt mul(const CycInt& a, const CycInt& b) const;
  CycInt pow(const CycInt& a, int n) const;

  // σ_r: θ ↦ θ^r, for r coprime to p; negative r is normalized mod p^ℓ.
  CycInt galois(i64 r, const CycInt& x) const;

  // Largest i with x ∈ 𝔭^i (at most K·φ); infinity when x vanishes in the
  // truncation.
  int valuation(const CycInt& x) const;

  // Z_p-basis of 𝔭^i, size φ: the elements (θ−1)^i θ^j.
  std::vector<CycInt> ideal_basis(int i) const;

  // Same basis with exact integer coordinates, as matrix columns.
  MatB ideal_basis_exact(int i) const;

  // γ₀(x ∧ y) = σ₂(x)σ₋₁(y) − σ₋₁(x)σ₂(y).
  CycInt gamma0(const CycInt& x, const CycInt& y) const;

  // Exact integer arithmetic in Z[θ]/Φ for lattice construction.
  VecB mul_exact(const VecB& a, const VecB& b) const;
  VecB galois_exact(i64 r, const VecB& a) const;
  VecB pow_exact(const VecB& a, int n) const;
  VecB gamma0_exact(const VecB& a, const VecB& b) const;
  VecB theta_minus_one_exact() const;

  // Matrix of multiplication by x on the power basis.
  MatZ mul_matrix(const CycInt& x) const;
  MatB mul_matrix_exact(const VecB& x) const;

  VecZ reduce_exact(const VecB& a) const; // exact coords -> truncated coords

private:
  i64 p_;
  int ell_;
  i64 phi_;
  int K_;
  i64 mod_;
  i64 q_; // p^{ℓ−1}
  MatZ alpha_mat_; // multiplication by θ−1, truncated

  void check_elem(const CycInt& x) const;
  VecZ reduce_poly(std::vector<i64> coeffs) const;
  VecB reduce_poly_exact(std::vector<BigInt> coeffs) const;
};

} // namespace coseq

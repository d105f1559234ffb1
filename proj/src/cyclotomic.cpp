#include "coseq/cyclotomic.hpp"

#include <utility>

namespace coseq {

CycRing::CycRing(i64 p, int level, int trunc)
    : p_(p), ell_(level), K_(trunc) {
  COSEQ_REQUIRE(is_prime(p_), "cyclotomic ring: p must be prime");
  COSEQ_REQUIRE(p_ != 2, "cyclotomic ring: p = 2 is not supported");
  COSEQ_REQUIRE(ell_ >= 1, "cyclotomic ring: level must be at least 1");
  COSEQ_REQUIRE(K_ >= 1, "cyclotomic ring: truncation must be at least 1");
  mod_ = pow_checked(p_, K_);
  q_ = pow_checked(p_, ell_ - 1);
  phi_ = (p_ - 1) * q_;

  alpha_mat_ = MatZ::Zero(phi_, phi_);
  const CycInt alpha = theta_minus_one();
  CycInt col = one();
  for (i64 j = 0; j < phi_; ++j) {
    if (j > 0) {
      // Multiply the previous column by θ: shift exponents up by one.
      std::vector<i64> shifted(phi_ + 1, 0);
      for (i64 t = 0; t < phi_; ++t) shifted[t + 1] = col.c[t];
      col.c = reduce_poly(std::move(shifted));
    }
    CycInt prod = mul(alpha, col);
    for (i64 t = 0; t < phi_; ++t) alpha_mat_(t, j) = prod.c[t];
  }
}

std::vector<i64> CycRing::minpoly() const {
  std::vector<i64> coeffs(phi_ + 1, 0);
  for (i64 k = 0; k < p_; ++k) coeffs[k * q_] = 1;
  return coeffs;
}

CycInt CycRing::zero() const { return CycInt{VecZ::Zero(phi_)}; }

CycInt CycRing::one() const {
  VecZ c = VecZ::Zero(phi_);
  c[0] = 1;
  return CycInt{std::move(c)};
}

CycInt CycRing::theta() const {
  VecZ c = VecZ::Zero(phi_);
  c[1] = 1;
  return CycInt{std::move(c)};
}

CycInt CycRing::theta_minus_one() const {
  VecZ c = VecZ::Zero(phi_);
  c[0] = mod_ - 1;
  c[1] = 1;
  return CycInt{std::move(c)};
}

CycInt CycRing::from_coords(VecZ coords) const {
  COSEQ_REQUIRE(coords.size() == phi_,
                "cyclotomic element needs one coordinate per basis power");
  for (i64 t = 0; t < phi_; ++t) coords[t] = mod_norm(coords[t], mod_);
  return CycInt{std::move(coords)};
}

CycInt CycRing::from_int(i64 n) const {
  VecZ c = VecZ::Zero(phi_);
  c[0] = mod_norm(n, mod_);
  return CycInt{std::move(c)};
}

void CycRing::check_elem(const CycInt& x) const {
  COSEQ_REQUIRE(x.c.size() == phi_, "cyclotomic element has wrong dimension");
}

VecZ CycRing::reduce_poly(std::vector<i64> coeffs) const {
  COSEQ_REQUIRE(static_cast<i64>(coeffs.size()) >= phi_,
                "polynomial shorter than ring degree");
  // θ^φ = −(1 + θ^q + ... + θ^{(p−2)q}); distribute top coefficients down.
  for (i64 d = static_cast<i64>(coeffs.size()) - 1; d >= phi_; --d) {
    const i64 c = mod_norm(coeffs[d], mod_);
    coeffs[d] = 0;
    if (c == 0) continue;
    for (i64 k = 0; k + 1 < p_; ++k)
      coeffs[d - phi_ + k * q_] = mod_norm(coeffs[d - phi_ + k * q_] - c, mod_);
  }
  VecZ out(phi_);
  for (i64 t = 0; t < phi_; ++t) out[t] = mod_norm(coeffs[t], mod_);
  return out;
}

VecB CycRing::reduce_poly_exact(std::vector<BigInt> coeffs) const {
  COSEQ_REQUIRE(static_cast<i64>(coeffs.size()) >= phi_,
                "polynomial shorter than ring degree");
  for (i64 d = static_cast<i64>(coeffs.size()) - 1; d >= phi_; --d) {
    const BigInt c = coeffs[d];
    coeffs[d] = 0;
    if (c == 0) continue;
    for (i64 k = 0; k + 1 < p_; ++k) coeffs[d - phi_ + k * q_] -= c;
  }
  VecB out(phi_);
  for (i64 t = 0; t < phi_; ++t) out[t] = coeffs[t];
  return out;
}

CycInt CycRing::add(const CycInt& a, const CycInt& b) const {
  check_elem(a);
  check_elem(b);
  VecZ c(phi_);
  for (i64 t = 0; t < phi_; ++t) c[t] = add_mod(a.c[t], b.c[t], mod_);
  return CycInt{std::move(c)};
}

CycInt CycRing::sub(const CycInt& a, const CycInt& b) const {
  check_elem(a);
  check_elem(b);
  VecZ c(phi_);
  for (i64 t = 0; t < phi_; ++t) c[t] = mod_norm(a.c[t] - b.c[t], mod_);
  return CycInt{std::move(c)};
}

CycInt CycRing::neg(const CycInt& a) const {
  check_elem(a);
  VecZ c(phi_);
  for (i64 t = 0; t < phi_; ++t) c[t] = mod_norm(-a.c[t], mod_);
  return CycInt{std::move(c)};
}

CycInt CycRing::scalar_mul(i64 s, const CycInt& a) const {
  check_elem(a);
  const i64 sn = mod_norm(s, mod_);
  VecZ c(phi_);
  for (i64 t = 0; t < phi_; ++t) c[t] = mul_mod(sn, a.c[t], mod_);
  return CycInt{std::move(c)};
}

CycInt CycRing::mul(const CycInt& a, const CycInt& b) const {
  check_elem(a);
  check_elem(b);
  std::vector<i64> conv(2 * phi_ - 1, 0);
  for (i64 i = 0; i < phi_; ++i) {
    if (a.c[i] == 0) continue;
    for (i64 j = 0; j < phi_; ++j)
      conv[i + j] = add_mod(conv[i + j], mul_mod(a.c[i], b.c[j], mod_), mod_);
  }
  return CycInt{reduce_poly(std::move(conv))};
}

CycInt CycRing::pow(const CycInt& a, int n) const {
  COSEQ_REQUIRE(n >= 0, "cyclotomic pow needs a nonnegative exponent");
  CycInt acc = one();
  CycInt base = a;
  int e = n;
  while (e > 0) {
    if (e & 1) acc = mul(acc, base);
    base = mul(base, base);
    e >>= 1;
  }
  return acc;
}

CycInt CycRing::galois(i64 r, const CycInt& x) const {
  check_elem(x);
  const i64 n = q_ * p_; // θ^n = 1
  const i64 rn = mod_norm(r, n);
  COSEQ_REQUIRE(rn % p_ != 0,
                "galois automorphism subscript must be coprime to p");
  std::vector<i64> coeffs(n, 0);
  for (i64 j = 0; j < phi_; ++j) {
    if (x.c[j] == 0) continue;
    const i64 dst = (j * rn) % n;
    coeffs[dst] = add_mod(coeffs[dst], x.c[j], mod_);
  }
  return CycInt{reduce_poly(std::move(coeffs))};
}

int CycRing::valuation(const CycInt& x) const {
  check_elem(x);
  if ((x.c.array() == 0).all()) return kValInfinity;
  const ResidueRing ring{p_, K_};
  const int cap = K_ * static_cast<int>(phi_);
  VecZ cur = x.c;
  for (int v = 0; v < cap; ++v) {
    SolutionSet sol = howell_solve(alpha_mat_, cur, ring);
    if (!sol.particular) return v;
    cur = *sol.particular;
  }
  return kValInfinity;
}

std::vector<CycInt> CycRing::ideal_basis(int i) const {
  COSEQ_REQUIRE(i >= 0 && i <= K_ * phi_,
                "ideal exponent out of range for this truncation");
  std::vector<CycInt> basis;
  basis.reserve(phi_);
  CycInt cur = pow(theta_minus_one(), i);
  for (i64 j = 0; j < phi_; ++j) {
    basis.push_back(cur);
    if (j + 1 < phi_) {
      std::vector<i64> shifted(phi_ + 1, 0);
      for (i64 t = 0; t < phi_; ++t) shifted[t + 1] = cur.c[t];
      cur.c = reduce_poly(std::move(shifted));
    }
  }
  return basis;
}

MatB CycRing::ideal_basis_exact(int i) const {
  COSEQ_REQUIRE(i >= 0, "ideal exponent must be nonnegative");
  VecB cur = pow_exact(theta_minus_one_exact(), i);
  MatB out(phi_, phi_);
  for (i64 j = 0; j < phi_; ++j) {
    for (i64 t = 0; t < phi_; ++t) out(t, j) = cur[t];
    if (j + 1 < phi_) {
      std::vector<BigInt> shifted(phi_ + 1, BigInt(0));
      for (i64 t = 0; t < phi_; ++t) shifted[t + 1] = cur[t];
      cur = reduce_poly_exact(std::move(shifted));
    }
  }
  return out;
}

CycInt CycRing::gamma0(const CycInt& x, const CycInt& y) const {
  const CycInt s2x = galois(2, x);
  const CycInt s2y = galois(2, y);
  const CycInt smx = galois(-1, x);
  const CycInt smy = galois(-1, y);
  return sub(mul(s2x, smy), mul(smx, s2y));
}

VecB CycRing::theta_minus_one_exact() const {
  VecB v = VecB::Zero(phi_);
  v[0] = -1;
  v[1] = 1;
  return v;
}

VecB CycRing::mul_exact(const VecB& a, const VecB& b) const {
  COSEQ_REQUIRE(a.size() == phi_ && b.size() == phi_,
                "cyclotomic element has wrong dimension");
  std::vector<BigInt> conv(2 * phi_ - 1, BigInt(0));
  for (i64 i = 0; i < phi_; ++i) {
    if (a[i] == 0) continue;
    for (i64 j = 0; j < phi_; ++j) conv[i + j] += a[i] * b[j];
  }
  return reduce_poly_exact(std::move(conv));
}

VecB CycRing::galois_exact(i64 r, const VecB& a) const {
  COSEQ_REQUIRE(a.size() == phi_, "cyclotomic element has wrong dimension");
  const i64 n = q_ * p_;
  const i64 rn = mod_norm(r, n);
  COSEQ_REQUIRE(rn % p_ != 0,
                "galois automorphism subscript must be coprime to p");
  std::vector<BigInt> coeffs(n, BigInt(0));
  for (i64 j = 0; j < phi_; ++j) coeffs[(j * rn) % n] += a[j];
  return reduce_poly_exact(std::move(coeffs));
}

VecB CycRing::pow_exact(const VecB& a, int n) const {
  COSEQ_REQUIRE(n >= 0, "cyclotomic pow needs a nonnegative exponent");
  VecB acc = VecB::Zero(phi_);
  acc[0] = 1;
  VecB base = a;
  int e = n;
  while (e > 0) {
    if (e & 1) acc = mul_exact(acc, base);
    base = mul_exact(base, base);
    e >>= 1;
  }
  return acc;
}

VecB CycRing::gamma0_exact(const VecB& a, const VecB& b) const {
  const VecB s2a = galois_exact(2, a);
  const VecB s2b = galois_exact(2, b);
  const VecB sma = galois_exact(-1, a);
  const VecB smb = galois_exact(-1, b);
  VecB out = VecB::Zero(phi_);
  const VecB lhs = mul_exact(s2a, smb);
  const VecB rhs = mul_exact(sma, s2b);
  for (i64 t = 0; t < phi_; ++t) out[t] = lhs[t] - rhs[t];
  return out;
}

MatZ CycRing::mul_matrix(const CycInt& x) const {
  check_elem(x);
  MatZ out(phi_, phi_);
  CycInt col = x;
  for (i64 j = 0; j < phi_; ++j) {
    for (i64 t = 0; t < phi_; ++t) out(t, j) = col.c[t];
    if (j + 1 < phi_) {
      std::vector<i64> shifted(phi_ + 1, 0);
      for (i64 t = 0; t < phi_; ++t) shifted[t + 1] = col.c[t];
      col.c = reduce_poly(std::move(shifted));
    }
  }
  return out;
}

MatB CycRing::mul_matrix_exact(const VecB& x) const {
  COSEQ_REQUIRE(x.size() == phi_, "cyclotomic element has wrong dimension");
  MatB out(phi_, phi_);
  VecB col = x;
  for (i64 j = 0; j < phi_; ++j) {
    for (i64 t = 0; t < phi_; ++t) out(t, j) = col[t];
    if (j + 1 < phi_) {
      std::vector<BigInt> shifted(phi_ + 1, BigInt(0));
      for (i64 t = 0; t < phi_; ++t) shifted[t + 1] = col[t];
      col = reduce_poly_exact(std::move(shifted));
    }
  }
  return out;
}

VecZ CycRing::reduce_exact(const VecB& a) const {
  COSEQ_REQUIRE(a.size() == phi_, "cyclotomic element has wrong dimension");
  VecZ out(phi_);
  for (i64 t = 0; t < phi_; ++t) {
    BigInt r = a[t] % mod_;
    if (r < 0) r += mod_;
    out[t] = static_cast<i64>(r);
  }
  return out;
}

} // namespace coseq

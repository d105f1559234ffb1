#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Core>

namespace coseq {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using BigInt = boost::multiprecision::cpp_int;

} // namespace coseq

namespace Eigen {
// Storage-only traits: we use Matrix<BigInt> as a container and do row/column
// arithmetic ourselves, so the cost fields are nominal.
template <> struct NumTraits<coseq::BigInt> : GenericNumTraits<coseq::BigInt> {
  using Real = coseq::BigInt;
  using NonInteger = coseq::BigInt;
  using Nested = coseq::BigInt;
  enum {
    IsComplex = 0,
    IsInteger = 1,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 60,
    MulCost = 60,
  };
};
} // namespace Eigen

namespace coseq {

using MatZ = Eigen::Matrix<i64, Eigen::Dynamic, Eigen::Dynamic>;
using VecZ = Eigen::Matrix<i64, Eigen::Dynamic, 1>;
using MatB = Eigen::Matrix<BigInt, Eigen::Dynamic, Eigen::Dynamic>;
using VecB = Eigen::Matrix<BigInt, Eigen::Dynamic, 1>;

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

#define COSEQ_REQUIRE(cond, msg)                                               \
  do {                                                                         \
    if (!(cond)) ::coseq::fail(msg);                                           \
  } while (0)

// Sentinel for "valuation of zero".
inline constexpr int kValInfinity = std::numeric_limits<int>::max() / 2;

inline i64 mod_norm(i64 x, i64 m) {
  i64 r = x % m;
  return r < 0 ? r + m : r;
}

inline i64 add_mod(i64 a, i64 b, i64 m) { return mod_norm(a + b, m); }

// Safe for moduli up to 2^31: operands are normalized first.
inline i64 mul_mod(i64 a, i64 b, i64 m) {
  return mod_norm(mod_norm(a, m) * mod_norm(b, m), m);
}

inline i64 pow_mod(i64 base, i64 exp, i64 m) {
  COSEQ_REQUIRE(exp >= 0, "pow_mod: negative exponent");
  i64 acc = mod_norm(1, m);
  base = mod_norm(base, m);
  while (exp > 0) {
    if (exp & 1) acc = mul_mod(acc, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return acc;
}

// Overflow-checked integer power; used for prime-power moduli and radix work.
inline i64 pow_checked(i64 base, int exp) {
  COSEQ_REQUIRE(base >= 0 && exp >= 0, "pow_checked: negative input");
  i64 acc = 1;
  for (int i = 0; i < exp; ++i) {
    COSEQ_REQUIRE(base == 0 || acc <= std::numeric_limits<i64>::max() / (base == 0 ? 1 : base),
                  "pow_checked: overflow");
    acc *= base;
  }
  return acc;
}

// Extended gcd: returns g = gcd(a,b) and x,y with a*x + b*y = g.
inline i64 ext_gcd(i64 a, i64 b, i64& x, i64& y) {
  if (b == 0) {
    x = (a >= 0) ? 1 : -1;
    y = 0;
    return a >= 0 ? a : -a;
  }
  i64 x1 = 0, y1 = 0;
  i64 g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

inline std::optional<i64> try_inv_mod(i64 a, i64 m) {
  i64 x = 0, y = 0;
  i64 g = ext_gcd(mod_norm(a, m), m, x, y);
  if (g != 1) return std::nullopt;
  return mod_norm(x, m);
}

inline i64 inv_mod(i64 a, i64 m) {
  auto r = try_inv_mod(a, m);
  COSEQ_REQUIRE(r.has_value(), "inv_mod: element is not a unit");
  return *r;
}

// p-adic valuation of x; kValInfinity for x == 0, capped at `cap` if given.
inline int val_p(i64 x, i64 p, int cap = kValInfinity) {
  if (x == 0) return kValInfinity;
  if (x < 0) x = -x;
  int v = 0;
  while (v < cap && x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

inline int val_p(const BigInt& x, i64 p, int cap = kValInfinity) {
  if (x == 0) return kValInfinity;
  BigInt a = x < 0 ? BigInt(-x) : x;
  int v = 0;
  while (v < cap && a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

inline bool is_prime(i64 n) {
  if (n < 2) return false;
  for (i64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// splitmix64-style mixing for hashing id sequences.
inline u64 hash_mix(u64 x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline u64 hash_span(const i64* data, std::size_t n, u64 seed = 0) {
  u64 h = hash_mix(seed ^ (0x12345678ull + n));
  for (std::size_t i = 0; i < n; ++i) h = hash_mix(h ^ static_cast<u64>(data[i]));
  return h;
}

inline u64 hash_ids(const std::vector<i64>& v, u64 seed = 0) {
  return hash_span(v.data(), v.size(), seed);
}

inline std::string join_i64(const std::vector<i64>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

} // namespace coseq

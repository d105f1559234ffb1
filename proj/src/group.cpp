#include "coseq/group.hpp"

#include <algorithm>
#include <optional>
#include <cstdint>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace coseq {

namespace {

// Deterministic generator for spot checks.
struct Rng {
  u64 s;
  explicit Rng(u64 seed) : s(seed) {}
  u64 next() {
    s += 0x9e3779b97f4a7c15ULL;
    return hash_mix(s);
  }
  i64 below(i64 n) { return static_cast<i64>(next() % static_cast<u64>(n)); }
};

i64 det_mod_p(MatZ a, i64 p) {
  const i64 d = a.rows();
  for (i64 i = 0; i < d; ++i)
    for (i64 j = 0; j < d; ++j) a(i, j) = mod_norm(a(i, j), p);
  i64 det = 1;
  for (i64 c = 0; c < d; ++c) {
    i64 piv = -1;
    for (i64 r = c; r < d; ++r)
      if (a(r, c) != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return 0;
    if (piv != c) {
      a.row(piv).swap(a.row(c));
      det = mod_norm(-det, p);
    }
    det = mul_mod(det, a(c, c), p);
    const i64 inv = inv_mod(a(c, c), p);
    for (i64 r = c + 1; r < d; ++r) {
      if (a(r, c) == 0) continue;
      const i64 f = mul_mod(a(r, c), inv, p);
      for (i64 j = c; j < d; ++j)
        a(r, j) = mod_norm(a(r, j) - f * a(c, j), p);
    }
  }
  return det;
}

} // namespace

// ---------------------------------------------------------------------------
// TruncModule

i64 TruncModule::size() const {
  i64 s = 1;
  for (i64 i = 0; i < orders.size(); ++i) {
    COSEQ_REQUIRE(orders[i] >= 1, "module generator order must be positive");
    COSEQ_REQUIRE(s <= (i64{1} << 60) / orders[i], "module too large");
    s *= orders[i];
  }
  return s;
}

i64 TruncModule::size_log_p() const {
  i64 total = 0;
  for (i64 i = 0; i < orders.size(); ++i)
    total += val_p(orders[i], p, 62);
  return total;
}

VecZ TruncModule::reduce(VecZ v) const {
  COSEQ_REQUIRE(v.size() == rank(), "module vector has wrong dimension");
  for (i64 i = 0; i < v.size(); ++i) v[i] = mod_norm(v[i], orders[i]);
  return v;
}

VecZ TruncModule::add(const VecZ& a, const VecZ& b) const {
  COSEQ_REQUIRE(a.size() == rank() && b.size() == rank(),
                "module vector has wrong dimension");
  VecZ c(rank());
  for (i64 i = 0; i < rank(); ++i) c[i] = add_mod(a[i], b[i], orders[i]);
  return c;
}

VecZ TruncModule::sub(const VecZ& a, const VecZ& b) const {
  COSEQ_REQUIRE(a.size() == rank() && b.size() == rank(),
                "module vector has wrong dimension");
  VecZ c(rank());
  for (i64 i = 0; i < rank(); ++i) c[i] = mod_norm(a[i] - b[i], orders[i]);
  return c;
}

VecZ TruncModule::neg(const VecZ& a) const {
  COSEQ_REQUIRE(a.size() == rank(), "module vector has wrong dimension");
  VecZ c(rank());
  for (i64 i = 0; i < rank(); ++i) c[i] = mod_norm(-a[i], orders[i]);
  return c;
}

VecZ TruncModule::scale(i64 s, const VecZ& a) const {
  COSEQ_REQUIRE(a.size() == rank(), "module vector has wrong dimension");
  VecZ c(rank());
  for (i64 i = 0; i < rank(); ++i)
    c[i] = mul_mod(mod_norm(s, orders[i]), mod_norm(a[i], orders[i]),
                   orders[i]);
  return c;
}

VecZ TruncModule::act(i64 g, const VecZ& v) const {
  COSEQ_REQUIRE(v.size() == rank(), "module vector has wrong dimension");
  if (action.empty()) return reduce(v);
  COSEQ_REQUIRE(g >= 0 && g < static_cast<i64>(action.size()),
                "module action: element id out of range");
  const MatZ& A = action[g];
  VecZ out = VecZ::Zero(rank());
  for (i64 r = 0; r < rank(); ++r) {
    i64 acc = 0;
    for (i64 c = 0; c < rank(); ++c)
      acc = add_mod(acc,
                    mul_mod(mod_norm(A(r, c), orders[r]),
                            mod_norm(v[c], orders[r]), orders[r]),
                    orders[r]);
    out[r] = acc;
  }
  return out;
}

i64 TruncModule::index_of(const VecZ& v) const {
  COSEQ_REQUIRE(v.size() == rank(), "module vector has wrong dimension");
  i64 idx = 0;
  i64 weight = 1;
  for (i64 i = 0; i < rank(); ++i) {
    const i64 vi = mod_norm(v[i], orders[i]);
    idx += vi * weight;
    weight *= orders[i];
  }
  return idx;
}

VecZ TruncModule::vector_of(i64 idx) const {
  COSEQ_REQUIRE(idx >= 0 && idx < size(), "module index out of range");
  VecZ v(rank());
  for (i64 i = 0; i < rank(); ++i) {
    v[i] = idx % orders[i];
    idx /= orders[i];
  }
  return v;
}

TruncModule make_trivial_action_module(i64 p, VecZ orders) {
  TruncModule m;
  m.p = p;
  m.orders = std::move(orders);
  COSEQ_REQUIRE(is_prime(p), "module prime must be prime");
  for (i64 i = 0; i < m.orders.size(); ++i) {
    const i64 o = m.orders[i];
    COSEQ_REQUIRE(o >= 1 && pow_checked(p, val_p(o, p, 62)) == o,
                  "module generator orders must be powers of the prime");
  }
  return m;
}

// ---------------------------------------------------------------------------
// FiniteGroup

struct GroupImpl {
  enum class Kind { table, extension, law };
  Kind kind = Kind::table;
  i64 n = 0;
  i64 p = 0;
  i64 k = 0;
  i64 e = 0;
  std::vector<int32_t> table;
  std::vector<int32_t> itable;
  std::shared_ptr<const ExtensionData> ext;
  i64 base_n = 0;
  std::function<i64(i64, i64)> lmul;
  std::function<i64(i64)> linv;

  i64 mul(i64 a, i64 b) const;
  i64 inv(i64 a) const;
};

namespace {

i64 ext_mul(const ExtensionData& d, i64 base_n, i64 a, i64 b) {
  const i64 g1 = a % base_n, g2 = b % base_n;
  const VecZ t1 = d.module.vector_of(a / base_n);
  const VecZ t2 = d.module.vector_of(b / base_n);
  const VecZ t = d.module.add(d.module.add(t1, d.module.act(g1, t2)),
                              d.tau_at(g1, g2));
  return d.module.index_of(t) * base_n + d.base.mul(g1, g2);
}

i64 ext_inv(const ExtensionData& d, i64 base_n, i64 a) {
  const i64 g = a % base_n;
  const VecZ t = d.module.vector_of(a / base_n);
  const i64 gi = d.base.inv(g);
  const VecZ ti =
      d.module.neg(d.module.add(d.module.act(gi, t), d.tau_at(gi, g)));
  return d.module.index_of(ti) * base_n + gi;
}

void deduce_prime_power(i64 n, i64* p, i64* k) {
  if (n == 1) {
    *p = 0;
    *k = 0;
    return;
  }
  i64 q = 2;
  while (q * q <= n && n % q != 0) ++q;
  if (n % q != 0) q = n;
  i64 m = n, e = 0;
  while (m % q == 0) {
    m /= q;
    ++e;
  }
  COSEQ_REQUIRE(m == 1, "group order must be a power of a single prime");
  *p = q;
  *k = e;
}

void verify_law(const GroupImpl& impl) {
  const i64 n = impl.n;
  const i64 e = impl.e;
  // Identity and inverse laws.
  if (n <= 6561) {
    for (i64 x = 0; x < n; ++x) {
      COSEQ_REQUIRE(impl.mul(e, x) == x && impl.mul(x, e) == x,
                    "identity law violated");
      const i64 xi = impl.inv(x);
      COSEQ_REQUIRE(impl.mul(x, xi) == e && impl.mul(xi, x) == e,
                    "inverse law violated");
    }
  } else {
    Rng rng{0x1de11a55ULL};
    for (int t = 0; t < 10000; ++t) {
      const i64 x = rng.below(n);
      COSEQ_REQUIRE(impl.mul(e, x) == x && impl.mul(x, e) == x,
                    "identity law violated");
      const i64 xi = impl.inv(x);
      COSEQ_REQUIRE(impl.mul(x, xi) == e && impl.mul(xi, x) == e,
                    "inverse law violated");
    }
  }
  // Associativity: exhaustive for small orders, randomized above.
  if (n <= 243) {
    for (i64 a = 0; a < n; ++a)
      for (i64 b = 0; b < n; ++b)
        for (i64 c = 0; c < n; ++c)
          if (impl.mul(impl.mul(a, b), c) != impl.mul(a, impl.mul(b, c)))
            fail("multiplication is not associative at triple (" +
                 std::to_string(a) + ", " + std::to_string(b) + ", " +
                 std::to_string(c) + ")");
  } else {
    Rng rng{0xa550c1a7eULL};
    for (int t = 0; t < 100000; ++t) {
      const i64 a = rng.below(n), b = rng.below(n), c = rng.below(n);
      if (impl.mul(impl.mul(a, b), c) != impl.mul(a, impl.mul(b, c)))
        fail("multiplication is not associative at triple (" +
             std::to_string(a) + ", " + std::to_string(b) + ", " +
             std::to_string(c) + ")");
    }
  }
}

} // namespace

i64 GroupImpl::mul(i64 a, i64 b) const {
  COSEQ_REQUIRE(a >= 0 && a < n && b >= 0 && b < n,
                "element id out of range");
  switch (kind) {
    case Kind::table:
      return table[a * n + b];
    case Kind::extension:
      return ext_mul(*ext, base_n, a, b);
    case Kind::law:
      return lmul(a, b);
  }
  fail("corrupt group kind");
}

i64 GroupImpl::inv(i64 a) const {
  COSEQ_REQUIRE(a >= 0 && a < n, "element id out of range");
  switch (kind) {
    case Kind::table:
      return itable[a];
    case Kind::extension:
      return ext_inv(*ext, base_n, a);
    case Kind::law:
      return linv(a);
  }
  fail("corrupt group kind");
}

FiniteGroup FiniteGroup::from_table(const MatZ& table) {
  const i64 n = table.rows();
  COSEQ_REQUIRE(n >= 1 && table.cols() == n,
                "multiplication table must be square");
  COSEQ_REQUIRE(n <= 6561, "dense multiplication tables capped at order 6561");
  for (i64 i = 0; i < n; ++i)
    for (i64 j = 0; j < n; ++j)
      COSEQ_REQUIRE(table(i, j) >= 0 && table(i, j) < n,
                    "multiplication table entry out of range");

  auto impl = std::make_shared<GroupImpl>();
  impl->kind = GroupImpl::Kind::table;
  impl->n = n;
  impl->table.resize(n * n);
  for (i64 i = 0; i < n; ++i)
    for (i64 j = 0; j < n; ++j)
      impl->table[i * n + j] = static_cast<int32_t>(table(i, j));

  i64 e = -1;
  for (i64 cand = 0; cand < n && e < 0; ++cand) {
    bool ok = true;
    for (i64 j = 0; j < n && ok; ++j)
      ok = impl->table[cand * n + j] == j && impl->table[j * n + cand] == j;
    if (ok) e = cand;
  }
  COSEQ_REQUIRE(e >= 0, "multiplication table has no identity element");
  impl->e = e;

  impl->itable.resize(n);
  for (i64 a = 0; a < n; ++a) {
    i64 b = -1;
    for (i64 cand = 0; cand < n; ++cand)
      if (impl->table[a * n + cand] == e) {
        b = cand;
        break;
      }
    COSEQ_REQUIRE(b >= 0 && impl->table[b * n + a] == e,
                  "multiplication table has an element without inverse");
    impl->itable[a] = static_cast<int32_t>(b);
  }

  deduce_prime_power(n, &impl->p, &impl->k);
  verify_law(*impl);
  return FiniteGroup(std::move(impl));
}

FiniteGroup FiniteGroup::from_extension(ExtensionData data) {
  auto ext = std::make_shared<const ExtensionData>(std::move(data));
  auto impl = std::make_shared<GroupImpl>();
  impl->kind = GroupImpl::Kind::extension;
  impl->base_n = ext->base.order();
  const i64 msize = ext->module.size();
  COSEQ_REQUIRE(msize <= (i64{1} << 60) / impl->base_n,
                "extension group too large");
  impl->n = msize * impl->base_n;
  impl->e = ext->base.identity();
  impl->p = ext->module.rank() > 0
                ? ext->module.p
                : (impl->base_n > 1 ? ext->base.prime() : 0);
  if (impl->n == 1) impl->p = 0;
  impl->k = ext->module.size_log_p() +
            (impl->base_n > 1 ? ext->base.log_order() : 0);
  impl->ext = ext;
  verify_law(*impl);
  return FiniteGroup(std::move(impl));
}

FiniteGroup FiniteGroup::from_law(i64 order, i64 p, i64 identity,
                                  std::function<i64(i64, i64)> mul,
                                  std::function<i64(i64)> inv) {
  COSEQ_REQUIRE(order >= 1, "group order must be positive");
  COSEQ_REQUIRE(identity >= 0 && identity < order,
                "identity id out of range");
  auto impl = std::make_shared<GroupImpl>();
  impl->kind = GroupImpl::Kind::law;
  impl->n = order;
  impl->e = identity;
  impl->lmul = std::move(mul);
  impl->linv = std::move(inv);
  if (order == 1) {
    impl->p = 0;
    impl->k = 0;
  } else {
    COSEQ_REQUIRE(is_prime(p), "group prime must be prime");
    i64 m = order, k = 0;
    while (m % p == 0) {
      m /= p;
      ++k;
    }
    COSEQ_REQUIRE(m == 1, "group order must be a power of the given prime");
    impl->p = p;
    impl->k = k;
  }
  verify_law(*impl);
  return FiniteGroup(std::move(impl));
}

i64 FiniteGroup::order() const {
  COSEQ_REQUIRE(impl_, "group is empty");
  return impl_->n;
}

i64 FiniteGroup::prime() const {
  COSEQ_REQUIRE(impl_, "group is empty");
  COSEQ_REQUIRE(impl_->p > 0, "trivial group has no defining prime");
  return impl_->p;
}

i64 FiniteGroup::log_order() const {
  COSEQ_REQUIRE(impl_, "group is empty");
  return impl_->k;
}

i64 FiniteGroup::identity() const {
  COSEQ_REQUIRE(impl_, "group is empty");
  return impl_->e;
}

i64 FiniteGroup::mul(i64 a, i64 b) const {
  COSEQ_REQUIRE(impl_, "group is empty");
  return impl_->mul(a, b);
}

i64 FiniteGroup::inv(i64 a) const {
  COSEQ_REQUIRE(impl_, "group is empty");
  return impl_->inv(a);
}

i64 FiniteGroup::conj(i64 g, i64 x) const {
  return mul(mul(g, x), inv(g));
}

bool FiniteGroup::is_extension() const {
  COSEQ_REQUIRE(impl_, "group is empty");
  return impl_->kind == GroupImpl::Kind::extension;
}

const ExtensionData& FiniteGroup::extension() const {
  COSEQ_REQUIRE(is_extension(), "group is not extension-backed");
  return *impl_->ext;
}

VecZ FiniteGroup::module_part(i64 id) const {
  const ExtensionData& d = extension();
  COSEQ_REQUIRE(id >= 0 && id < order(), "element id out of range");
  return d.module.vector_of(id / impl_->base_n);
}

i64 FiniteGroup::base_part(i64 id) const {
  COSEQ_REQUIRE(is_extension(), "group is not extension-backed");
  COSEQ_REQUIRE(id >= 0 && id < order(), "element id out of range");
  return id % impl_->base_n;
}

i64 FiniteGroup::encode(const VecZ& t, i64 g) const {
  const ExtensionData& d = extension();
  COSEQ_REQUIRE(g >= 0 && g < impl_->base_n, "base element id out of range");
  return d.module.index_of(d.module.reduce(t)) * impl_->base_n + g;
}

FiniteGroup FiniteGroup::materialized() const {
  COSEQ_REQUIRE(impl_, "group is empty");
  COSEQ_REQUIRE(order() <= 6561,
                "group too large for a dense multiplication table");
  MatZ table(order(), order());
  for (i64 a = 0; a < order(); ++a)
    for (i64 b = 0; b < order(); ++b) table(a, b) = mul(a, b);
  return from_table(table);
}

// ---------------------------------------------------------------------------
// ExtensionData

void validate_module_action(const FiniteGroup& G, const TruncModule& M) {
  if (M.action.empty()) return;
  const i64 n = G.order();
  const i64 d = M.rank();
  COSEQ_REQUIRE(static_cast<i64>(M.action.size()) == n,
                "module action must list one matrix per group element");
  for (i64 g = 0; g < n; ++g) {
    const MatZ& A = M.action[g];
    COSEQ_REQUIRE(A.rows() == d && A.cols() == d,
                  "module action matrix has wrong shape");
    // Respect generator orders: o_c·A(r,c) ≡ 0 mod o_r.
    for (i64 r = 0; r < d; ++r)
      for (i64 c = 0; c < d; ++c)
        COSEQ_REQUIRE(
            mul_mod(mod_norm(A(r, c), M.orders[r]),
                    M.orders[c] % M.orders[r], M.orders[r]) == 0,
            "module action does not respect generator orders");
    COSEQ_REQUIRE(d == 0 || det_mod_p(A, M.p) != 0,
                  "module action matrix is not invertible");
  }
  // Identity acts as identity.
  const MatZ& Ae = M.action[G.identity()];
  for (i64 r = 0; r < d; ++r)
    for (i64 c = 0; c < d; ++c)
      COSEQ_REQUIRE(mod_norm(Ae(r, c) - (r == c ? 1 : 0), M.orders[r]) == 0,
                    "identity element must act trivially");
  // Compatibility with the group law.
  auto check_pair = [&](i64 g, i64 h) {
    const i64 gh = G.mul(g, h);
    for (i64 c = 0; c < d; ++c) {
      VecZ ec = VecZ::Zero(d);
      ec[c] = 1;
      const VecZ lhs = M.act(g, M.act(h, ec));
      const VecZ rhs = M.act(gh, ec);
      if (lhs != rhs)
        fail("module action incompatible with the group law at pair (" +
             std::to_string(g) + ", " + std::to_string(h) + ")");
    }
  };
  if (n * n <= 10000) {
    for (i64 g = 0; g < n; ++g)
      for (i64 h = 0; h < n; ++h) check_pair(g, h);
  } else {
    Rng rng{0xac710c4ecULL};
    for (int t = 0; t < 10000; ++t) check_pair(rng.below(n), rng.below(n));
  }
}

ExtensionData::ExtensionData(FiniteGroup base_group, TruncModule mod,
                             std::vector<VecZ> cocycle)
    : base(std::move(base_group)),
      module(std::move(mod)),
      tau(std::move(cocycle)) {
  COSEQ_REQUIRE(base.valid(), "extension needs a base group");
  COSEQ_REQUIRE(!module.free,
                "extension module must be a finite truncation, not free");
  COSEQ_REQUIRE(is_prime(module.p), "module prime must be prime");
  for (i64 i = 0; i < module.orders.size(); ++i) {
    const i64 o = module.orders[i];
    COSEQ_REQUIRE(o >= 1 && pow_checked(module.p, val_p(o, module.p, 62)) == o,
                  "module generator orders must be powers of the prime");
  }
  if (base.order() > 1)
    COSEQ_REQUIRE(base.prime() == module.p,
                  "base group and module must share one prime");
  validate_module_action(base, module);

  const i64 n = base.order();
  const i64 d = module.rank();
  COSEQ_REQUIRE(static_cast<i64>(tau.size()) == n * n,
                "cocycle table must cover all base pairs");
  for (auto& v : tau) {
    COSEQ_REQUIRE(v.size() == d, "cocycle value has wrong dimension");
    v = module.reduce(std::move(v));
  }
  const i64 e = base.identity();
  for (i64 g = 0; g < n; ++g)
    COSEQ_REQUIRE((tau_at(e, g).array() == 0).all() &&
                      (tau_at(g, e).array() == 0).all(),
                  "cocycle must be normalized (zero at the identity)");

  // Cocycle identity on base triples.
  auto check_triple = [&](i64 g1, i64 g2, i64 g3) {
    const VecZ lhs = module.act(g1, tau_at(g2, g3));
    const VecZ mid = module.sub(tau_at(base.mul(g1, g2), g3),
                                tau_at(g1, base.mul(g2, g3)));
    const VecZ rhs = module.sub(lhs, module.add(mid, tau_at(g1, g2)));
    if (!(rhs.array() == 0).all())
      fail("extension cocycle violates the cocycle identity at triple (" +
           std::to_string(g1) + ", " + std::to_string(g2) + ", " +
           std::to_string(g3) + ")");
  };
  if (n * n * n <= 2000000) {
    for (i64 g1 = 0; g1 < n; ++g1)
      for (i64 g2 = 0; g2 < n; ++g2)
        for (i64 g3 = 0; g3 < n; ++g3) check_triple(g1, g2, g3);
  } else {
    Rng rng{0xc0c1de03ULL};
    for (int t = 0; t < 200000; ++t)
      check_triple(rng.below(n), rng.below(n), rng.below(n));
  }
}

// ---------------------------------------------------------------------------
// Subgroup machinery

bool Subgroup::contains(i64 id) const {
  return std::binary_search(elems.begin(), elems.end(), id);
}

bool is_subgroup(const FiniteGroup& G, const std::vector<i64>& sorted_elems) {
  if (sorted_elems.empty()) return false;
  for (size_t i = 0; i + 1 < sorted_elems.size(); ++i)
    if (sorted_elems[i] >= sorted_elems[i + 1]) return false;
  if (!std::binary_search(sorted_elems.begin(), sorted_elems.end(),
                          G.identity()))
    return false;
  for (i64 a : sorted_elems) {
    if (a < 0 || a >= G.order()) return false;
    if (!std::binary_search(sorted_elems.begin(), sorted_elems.end(),
                            G.inv(a)))
      return false;
    for (i64 b : sorted_elems)
      if (!std::binary_search(sorted_elems.begin(), sorted_elems.end(),
                              G.mul(a, b)))
        return false;
  }
  return true;
}

Subgroup make_subgroup(const FiniteGroup& G, std::vector<i64> elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  COSEQ_REQUIRE(is_subgroup(G, elems),
                "element list is not a subgroup of the parent group");
  return Subgroup{G, std::move(elems)};
}

Subgroup subgroup_generate(const FiniteGroup& G, const std::vector<i64>& gens) {
  std::vector<i64> work = gens;
  for (i64 g : gens) {
    COSEQ_REQUIRE(g >= 0 && g < G.order(), "element id out of range");
    work.push_back(G.inv(g));
  }
  std::unordered_set<i64> seen;
  std::vector<i64> queue;
  seen.insert(G.identity());
  queue.push_back(G.identity());
  for (size_t head = 0; head < queue.size(); ++head) {
    const i64 x = queue[head];
    for (i64 g : work) {
      const i64 y = G.mul(x, g);
      if (seen.insert(y).second) queue.push_back(y);
    }
  }
  std::vector<i64> elems(seen.begin(), seen.end());
  std::sort(elems.begin(), elems.end());
  return Subgroup{G, std::move(elems)};
}

Subgroup centralizer(const FiniteGroup& G, const std::vector<i64>& S) {
  std::vector<i64> out;
  for (i64 x = 0; x < G.order(); ++x) {
    bool ok = true;
    for (i64 s : S) {
      COSEQ_REQUIRE(s >= 0 && s < G.order(), "element id out of range");
      if (G.mul(x, s) != G.mul(s, x)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(x);
  }
  return Subgroup{G, std::move(out)};
}

std::vector<i64> centralizer_in(const FiniteGroup& G,
                                const std::vector<i64>& domain,
                                const std::vector<i64>& S) {
  std::vector<i64> out;
  for (i64 x : domain) {
    COSEQ_REQUIRE(x >= 0 && x < G.order(), "element id out of range");
    bool ok = true;
    for (i64 s : S)
      if (G.mul(x, s) != G.mul(s, x)) {
        ok = false;
        break;
      }
    if (ok) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Subgroup normalizer(const FiniteGroup& G, const Subgroup& S) {
  COSEQ_REQUIRE(G.same(S.parent), "subgroup belongs to a different group");
  std::vector<i64> out;
  for (i64 g = 0; g < G.order(); ++g) {
    bool ok = true;
    for (i64 s : S.elems)
      if (!S.contains(G.conj(g, s))) {
        ok = false;
        break;
      }
    if (ok) out.push_back(g);
  }
  return Subgroup{G, std::move(out)};
}

i64 element_order(const FiniteGroup& G, i64 x) {
  COSEQ_REQUIRE(x >= 0 && x < G.order(), "element id out of range");
  i64 y = x;
  i64 ord = 1;
  while (y != G.identity()) {
    y = G.mul(y, x);
    ++ord;
    COSEQ_REQUIRE(ord <= G.order(), "element order exceeds the group order");
  }
  return ord;
}

std::vector<i64> find_generators(const FiniteGroup& G) {
  std::vector<i64> gens;
  Subgroup H = subgroup_generate(G, {});
  while (H.order() < G.order()) {
    i64 next = -1;
    for (i64 x = 0; x < G.order(); ++x)
      if (!H.contains(x)) {
        next = x;
        break;
      }
    COSEQ_REQUIRE(next >= 0, "generator search exhausted the group");
    gens.push_back(next);
    H = subgroup_generate(G, gens);
  }
  return gens;
}

Subgroup lift_subgroup(const FiniteGroup& G, const Subgroup& Q,
                       const std::vector<VecZ>& f_values) {
  const ExtensionData& d = G.extension();
  COSEQ_REQUIRE(Q.parent.same(d.base),
                "lift requires a subgroup of the extension base");
  COSEQ_REQUIRE(is_subgroup(d.base, Q.elems),
                "lift requires a closed base subgroup");
  COSEQ_REQUIRE(f_values.size() == Q.elems.size(),
                "lift cochain needs one value per subgroup element");
  std::unordered_map<i64, i64> pos;
  for (size_t i = 0; i < Q.elems.size(); ++i) {
    COSEQ_REQUIRE(f_values[i].size() == d.module.rank(),
                  "lift cochain value has wrong dimension");
    pos[Q.elems[i]] = static_cast<i64>(i);
  }
  const i64 e = d.base.identity();
  COSEQ_REQUIRE((f_values[pos.at(e)].array() == 0).all(),
                "lift cochain must vanish at the identity");

  auto fval = [&](i64 q) { return d.module.reduce(f_values[pos.at(q)]); };
  for (i64 q1 : Q.elems)
    for (i64 q2 : Q.elems) {
      const i64 q12 = d.base.mul(q1, q2);
      COSEQ_REQUIRE(pos.count(q12), "base subgroup is not closed");
      // Δf(q1,q2) = {}^{q1}f(q2) − f(q1q2) + f(q1)
      const VecZ lhs = d.module.sub(
          d.module.add(d.module.act(q1, fval(q2)), fval(q1)), fval(q12));
      if (lhs != d.tau_at(q1, q2))
        fail("lift obstruction: the cochain coboundary differs from the "
             "extension cocycle at pair (" +
             std::to_string(q1) + ", " + std::to_string(q2) + ")");
    }

  std::vector<i64> elems;
  elems.reserve(Q.elems.size());
  for (i64 q : Q.elems) elems.push_back(G.encode(d.module.neg(fval(q)), q));
  std::sort(elems.begin(), elems.end());
  return Subgroup{G, std::move(elems)};
}

// ---------------------------------------------------------------------------
// Elementary abelian enumeration

namespace {

struct BitSet {
  std::vector<u64> w;
  explicit BitSet(size_t bits = 0) : w((bits + 63) / 64, 0) {}
  void set(size_t i) { w[i >> 6] |= u64{1} << (i & 63); }
  bool test(size_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  bool empty() const {
    for (u64 x : w)
      if (x) return false;
    return true;
  }
  size_t count_and(const BitSet& o) const {
    size_t c = 0;
    for (size_t i = 0; i < w.size(); ++i)
      c += static_cast<size_t>(__builtin_popcountll(w[i] & o.w[i]));
    return c;
  }
  BitSet intersect(const BitSet& o) const {
    BitSet r;
    r.w.resize(w.size());
    for (size_t i = 0; i < w.size(); ++i) r.w[i] = w[i] & o.w[i];
    return r;
  }
  template <typename F>
  void for_each(F f) const {
    for (size_t i = 0; i < w.size(); ++i) {
      u64 x = w[i];
      while (x) {
        const int b = __builtin_ctzll(x);
        f(i * 64 + static_cast<size_t>(b));
        x &= x - 1;
      }
    }
  }
};

// Maximal cliques via pivoted recursion on the commutation graph.
void max_cliques(std::vector<size_t>& R, BitSet P, BitSet X,
                 const std::vector<BitSet>& N,
                 std::vector<std::vector<size_t>>& out) {
  if (P.empty() && X.empty()) {
    out.push_back(R);
    return;
  }
  size_t pivot = SIZE_MAX;
  size_t best = 0;
  auto consider = [&](size_t u) {
    const size_t c = P.count_and(N[u]);
    if (pivot == SIZE_MAX || c > best) {
      pivot = u;
      best = c;
    }
  };
  P.for_each(consider);
  X.for_each(consider);

  std::vector<size_t> branch;
  P.for_each([&](size_t v) {
    if (!N[pivot].test(v)) branch.push_back(v);
  });
  for (size_t v : branch) {
    R.push_back(v);
    max_cliques(R, P.intersect(N[v]), X.intersect(N[v]), N, out);
    R.pop_back();
    P.w[v >> 6] &= ~(u64{1} << (v & 63));
    X.set(v);
  }
}

// A maximal clique of the commutation graph together with a basis of its
// span.  The span of a maximal clique is a maximal elementary abelian
// subgroup, and its non-identity elements are exactly the clique.
struct ElabSpan {
  std::vector<i64> basis;
  std::vector<i64> elems; // sorted, includes the identity
};

std::vector<ElabSpan> maximal_elab_spans(const FiniteGroup& G) {
  const i64 p = G.prime();
  std::vector<i64> E;
  for (i64 x = 0; x < G.order(); ++x)
    if (x != G.identity() && element_order(G, x) == p) E.push_back(x);
  if (E.empty()) return {};
  const size_t ne = E.size();
  COSEQ_REQUIRE(ne <= 20000,
                "elementary abelian enumeration: pairwise commutation table "
                "would exceed memory");

  std::vector<BitSet> N(ne, BitSet(ne));
  for (size_t i = 0; i < ne; ++i)
    for (size_t j = i + 1; j < ne; ++j)
      if (G.mul(E[i], E[j]) == G.mul(E[j], E[i])) {
        N[i].set(j);
        N[j].set(i);
      }

  BitSet P(ne), X(ne);
  for (size_t i = 0; i < ne; ++i) P.set(i);
  std::vector<size_t> R;
  std::vector<std::vector<size_t>> cliques;
  max_cliques(R, std::move(P), std::move(X), N, cliques);

  std::vector<ElabSpan> out;
  out.reserve(cliques.size());
  for (const auto& clique : cliques) {
    // Basis extraction by greedy span growth.
    std::vector<i64> members;
    members.reserve(clique.size());
    for (size_t i : clique) members.push_back(E[i]);
    std::sort(members.begin(), members.end());

    std::unordered_set<i64> span{G.identity()};
    std::vector<i64> basis;
    for (i64 x : members) {
      if (span.count(x)) continue;
      basis.push_back(x);
      std::vector<i64> snapshot(span.begin(), span.end());
      for (i64 s : snapshot) {
        i64 cur = s;
        for (i64 t = 1; t < p; ++t) {
          cur = G.mul(cur, x);
          span.insert(cur);
        }
      }
    }
    COSEQ_REQUIRE(span.size() == members.size() + 1,
                  "clique span mismatch in elementary abelian enumeration");
    members.push_back(G.identity());
    std::sort(members.begin(), members.end());
    out.push_back(ElabSpan{std::move(basis), std::move(members)});
  }
  return out;
}

} // namespace

std::vector<Subgroup> enumerate_elementary_abelians(const FiniteGroup& G,
                                                    bool include_trivial,
                                                    i64 max_order) {
  COSEQ_REQUIRE(G.order() <= max_order,
                "elementary abelian enumeration: group order exceeds the "
                "configured bound");
  std::vector<Subgroup> out;
  if (include_trivial) out.push_back(Subgroup{G, {G.identity()}});
  if (G.order() == 1) return out;

  const i64 p = G.prime();
  const std::vector<ElabSpan> spans = maximal_elab_spans(G);
  if (spans.empty()) return out;

  // Every elementary abelian subgroup is a subspace of a maximal one.
  std::unordered_map<u64, std::vector<size_t>> seen;
  auto try_emit = [&](std::vector<i64> elems) {
    std::sort(elems.begin(), elems.end());
    const u64 h = hash_ids(elems);
    auto& bucket = seen[h];
    for (size_t idx : bucket)
      if (out[idx].elems == elems) return;
    bucket.push_back(out.size());
    out.push_back(Subgroup{G, std::move(elems)});
  };

  for (const ElabSpan& span : spans) {
    const std::vector<i64>& basis = span.basis;
    const i64 k = static_cast<i64>(basis.size());

    // Element id for every coordinate combination, mixed radix base p.
    i64 total = 1;
    for (i64 i = 0; i < k; ++i) total *= p;
    std::vector<i64> combo_id(total);
    combo_id[0] = G.identity();
    std::vector<i64> weight(k, 1);
    for (i64 i = 1; i < k; ++i) weight[i] = weight[i - 1] * p;
    for (i64 c = 1; c < total; ++c) {
      i64 j = 0;
      while ((c / weight[j]) % p == 0) ++j;
      combo_id[c] = G.mul(combo_id[c - weight[j]], basis[j]);
    }

    // All subspaces via reduced echelon bases over F_p.
    for (i64 d = 1; d <= k; ++d) {
      for (u64 mask = 0; mask < (u64{1} << k); ++mask) {
        if (__builtin_popcountll(mask) != d) continue;
        std::vector<i64> pivots;
        for (i64 j = 0; j < k; ++j)
          if (mask & (u64{1} << j)) pivots.push_back(j);
        // Free positions: row i, column j ∉ pivots with j > pivots[i].
        std::vector<std::pair<i64, i64>> free_pos;
        for (i64 i = 0; i < d; ++i)
          for (i64 j = pivots[i] + 1; j < k; ++j)
            if (!(mask & (u64{1} << j))) free_pos.emplace_back(i, j);
        i64 variants = 1;
        for (size_t t = 0; t < free_pos.size(); ++t) variants *= p;
        std::vector<std::vector<i64>> rows(d, std::vector<i64>(k, 0));
        for (i64 i = 0; i < d; ++i) rows[i][pivots[i]] = 1;
        for (i64 var = 0; var < variants; ++var) {
          i64 v = var;
          for (const auto& [ri, cj] : free_pos) {
            rows[ri][cj] = v % p;
            v /= p;
          }
          // Span of the echelon rows, mapped through combo ids.
          std::vector<i64> elems;
          elems.reserve(static_cast<size_t>(weight[d - 1] * p));
          std::vector<i64> coeff(d, 0);
          while (true) {
            i64 combo = 0;
            for (i64 j = 0; j < k; ++j) {
              i64 cj = 0;
              for (i64 i = 0; i < d; ++i) cj += coeff[i] * rows[i][j];
              combo += (cj % p) * weight[j];
            }
            elems.push_back(combo_id[combo]);
            i64 pos = 0;
            while (pos < d && ++coeff[pos] == p) coeff[pos++] = 0;
            if (pos == d) break;
          }
          try_emit(std::move(elems));
        }
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.elems.size() != b.elems.size())
      return a.elems.size() < b.elems.size();
    return a.elems < b.elems;
  });
  return out;
}

std::vector<Subgroup> enumerate_maximal_elementary_abelians(
    const FiniteGroup& G, i64 max_order) {
  COSEQ_REQUIRE(G.order() <= max_order,
                "elementary abelian enumeration: group order exceeds the "
                "configured bound");
  if (G.order() == 1) return {Subgroup{G, {G.identity()}}};

  std::vector<Subgroup> out;
  for (const ElabSpan& span : maximal_elab_spans(G))
    out.push_back(Subgroup{G, span.elems});
  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.elems.size() != b.elems.size())
      return a.elems.size() < b.elems.size();
    return a.elems < b.elems;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Conjugacy classification

std::vector<std::vector<Subgroup>> conjugacy_classes_of_subgroups(
    const FiniteGroup& G, const std::vector<Subgroup>& subs) {
  if (subs.empty()) return {};
  std::unordered_map<u64, std::vector<size_t>> index;
  for (size_t i = 0; i < subs.size(); ++i) {
    COSEQ_REQUIRE(G.same(subs[i].parent),
                  "subgroup belongs to a different group");
    auto& bucket = index[hash_ids(subs[i].elems)];
    for (size_t j : bucket)
      COSEQ_REQUIRE(subs[j].elems != subs[i].elems,
                    "duplicate subgroup in conjugacy input");
    bucket.push_back(i);
  }
  auto locate = [&](const std::vector<i64>& elems) -> size_t {
    auto it = index.find(hash_ids(elems));
    if (it != index.end())
      for (size_t j : it->second)
        if (subs[j].elems == elems) return j;
    fail("subgroup list is not closed under conjugation");
  };

  const std::vector<i64> gens = find_generators(G);
  std::vector<char> visited(subs.size(), 0);
  std::vector<std::vector<Subgroup>> classes;
  for (size_t i = 0; i < subs.size(); ++i) {
    if (visited[i]) continue;
    std::vector<size_t> orbit{i};
    visited[i] = 1;
    for (size_t head = 0; head < orbit.size(); ++head) {
      const std::vector<i64>& cur = subs[orbit[head]].elems;
      for (i64 g : gens) {
        std::vector<i64> img;
        img.reserve(cur.size());
        for (i64 s : cur) img.push_back(G.conj(g, s));
        std::sort(img.begin(), img.end());
        const size_t j = locate(img);
        if (!visited[j]) {
          visited[j] = 1;
          orbit.push_back(j);
        }
      }
    }
    std::vector<Subgroup> cls;
    cls.reserve(orbit.size());
    for (size_t j : orbit) cls.push_back(subs[j]);
    std::sort(cls.begin(), cls.end(), [](const Subgroup& a, const Subgroup& b) {
      return a.elems < b.elems;
    });
    classes.push_back(std::move(cls));
  }
  std::sort(classes.begin(), classes.end(),
            [](const std::vector<Subgroup>& a, const std::vector<Subgroup>& b) {
              return a.front().elems < b.front().elems;
            });
  return classes;
}

// ---------------------------------------------------------------------------
// Text import/export

std::string group_to_text(const FiniteGroup& G) {
  std::ostringstream os;
  if (G.is_extension()) {
    const ExtensionData& d = G.extension();
    const i64 n = d.base.order();
    const i64 dim = d.module.rank();
    os << "group " << G.order() << " " << (G.order() > 1 ? G.prime() : 0)
       << "\n";
    os << "extension\n";
    os << "base " << n << "\n";
    for (i64 a = 0; a < n; ++a) {
      for (i64 b = 0; b < n; ++b) os << (b ? " " : "") << d.base.mul(a, b);
      os << "\n";
    }
    os << "module " << dim << "\n";
    for (i64 i = 0; i < dim; ++i) os << (i ? " " : "") << d.module.orders[i];
    os << "\n";
    os << "action " << (d.module.action.empty() ? 0 : n) << "\n";
    if (!d.module.action.empty()) {
      for (i64 g = 0; g < n; ++g)
        for (i64 r = 0; r < dim; ++r) {
          for (i64 c = 0; c < dim; ++c)
            os << (c ? " " : "") << d.module.action[g](r, c);
          os << "\n";
        }
    }
    i64 nnz = 0;
    for (i64 g1 = 0; g1 < n; ++g1)
      for (i64 g2 = 0; g2 < n; ++g2)
        if (!(d.tau_at(g1, g2).array() == 0).all()) ++nnz;
    os << "cocycle " << nnz << "\n";
    for (i64 g1 = 0; g1 < n; ++g1)
      for (i64 g2 = 0; g2 < n; ++g2) {
        const VecZ& v = d.tau_at(g1, g2);
        if ((v.array() == 0).all()) continue;
        os << g1 << " " << g2;
        for (i64 i = 0; i < dim; ++i) os << " " << v[i];
        os << "\n";
      }
    os << "end\n";
    return os.str();
  }

  const FiniteGroup T = G.order() <= 6561 ? G : FiniteGroup();
  COSEQ_REQUIRE(T.valid(), "group too large for a dense text export");
  const i64 n = T.order();
  os << "group " << n << " " << (n > 1 ? T.prime() : 0) << "\n";
  os << "table\n";
  for (i64 a = 0; a < n; ++a) {
    for (i64 b = 0; b < n; ++b) os << (b ? " " : "") << T.mul(a, b);
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

FiniteGroup group_from_text(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> tok;
  std::string t;
  while (is >> t) tok.push_back(t);
  size_t cur = 0;
  auto next = [&]() -> const std::string& {
    COSEQ_REQUIRE(cur < tok.size(), "group text ended unexpectedly");
    return tok[cur++];
  };
  auto next_num = [&]() -> i64 {
    const std::string& s = next();
    try {
      size_t used = 0;
      const i64 v = std::stoll(s, &used);
      COSEQ_REQUIRE(used == s.size(), "group text: malformed number");
      return v;
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail("group text: malformed number '" + s + "'");
    }
  };
  auto expect = [&](const std::string& want) {
    const std::string& got = next();
    COSEQ_REQUIRE(got == want,
                  "group text: expected '" + want + "', got '" + got + "'");
  };

  expect("group");
  const i64 order = next_num();
  const i64 p = next_num();
  const std::string kind = next();
  if (kind == "table") {
    COSEQ_REQUIRE(order <= 6561, "group text: table too large");
    MatZ table(order, order);
    for (i64 a = 0; a < order; ++a)
      for (i64 b = 0; b < order; ++b) table(a, b) = next_num();
    expect("end");
    FiniteGroup G = FiniteGroup::from_table(table);
    COSEQ_REQUIRE(G.order() == order, "group text: order mismatch");
    COSEQ_REQUIRE(order == 1 || G.prime() == p,
                  "group text: prime mismatch");
    return G;
  }
  COSEQ_REQUIRE(kind == "extension",
                "group text: unknown representation '" + kind + "'");
  expect("base");
  const i64 n = next_num();
  COSEQ_REQUIRE(n >= 1 && n <= 6561, "group text: bad base order");
  MatZ btable(n, n);
  for (i64 a = 0; a < n; ++a)
    for (i64 b = 0; b < n; ++b) btable(a, b) = next_num();
  FiniteGroup base = FiniteGroup::from_table(btable);
  expect("module");
  const i64 dim = next_num();
  COSEQ_REQUIRE(dim >= 0 && dim <= 64, "group text: bad module rank");
  VecZ orders(dim);
  for (i64 i = 0; i < dim; ++i) orders[i] = next_num();
  TruncModule mod;
  mod.p = p;
  mod.orders = std::move(orders);
  expect("action");
  const i64 acount = next_num();
  COSEQ_REQUIRE(acount == 0 || acount == n,
                "group text: action must cover all base elements or none");
  for (i64 g = 0; g < acount; ++g) {
    MatZ A(dim, dim);
    for (i64 r = 0; r < dim; ++r)
      for (i64 c = 0; c < dim; ++c) A(r, c) = next_num();
    mod.action.push_back(std::move(A));
  }
  expect("cocycle");
  const i64 nnz = next_num();
  std::vector<VecZ> tau(n * n, VecZ::Zero(dim));
  for (i64 line = 0; line < nnz; ++line) {
    const i64 g1 = next_num();
    const i64 g2 = next_num();
    COSEQ_REQUIRE(g1 >= 0 && g1 < n && g2 >= 0 && g2 < n,
                  "group text: cocycle pair out of range");
    VecZ v(dim);
    for (i64 i = 0; i < dim; ++i) v[i] = next_num();
    tau[g1 * n + g2] = std::move(v);
  }
  expect("end");
  FiniteGroup G = FiniteGroup::from_extension(
      ExtensionData(std::move(base), std::move(mod), std::move(tau)));
  COSEQ_REQUIRE(G.order() == order, "group text: order mismatch");
  return G;
}

} // namespace coseq

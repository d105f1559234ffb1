#include "coseq/family.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <utility>

namespace coseq {

namespace detail {

// Shared coordinate context for the cyclotomic constructions.  The T-part is
// ideal^{n0} / ideal^{n0+m}; its elements are addressed by mixed-radix
// indices over the invariant factors of that quotient, and all law
// arithmetic runs in T-coordinates modulo a p-power that every invariant
// factor divides.
struct UniserialCtx {
  CycRing ring;
  i64 p = 0;
  i64 phi = 0;  // Z-rank of the ring
  int n0 = 0;   // T = ideal^{n0}
  int m = 0;    // [T : T_m] = p^m
  i64 ordc = 0; // order of the acting cyclic group
  i64 kmod = 0; // p-power modulus for coordinate arithmetic
  i64 tsize = 0;
  MatB tbasis; // columns: exact power-basis coordinates of the T-basis
  LatticeQuotient lq;
  std::vector<i64> orders;
  std::vector<i64> weights;
  std::vector<i64> umat;             // lq.U mod kmod, row-major
  std::vector<i64> uinvmat;          // lq.Uinv mod kmod, row-major
  std::vector<std::vector<i64>> act; // tau^r on T-coordinates, row-major
  std::vector<i64> twist; // (k*phi+l)*phi+i: coords of (1/2)gamma(b_k ^ b_l)

  explicit UniserialCtx(CycRing r) : ring(std::move(r)) {}
};

} // namespace detail

namespace {

using detail::UniserialCtx;

constexpr i64 kMaxRank = 12;

i64 bigmod(const BigInt& x, i64 mod) {
  BigInt r = x % mod;
  if (r < 0) r += mod;
  return static_cast<i64>(r);
}

void t_coords(const UniserialCtx& c, i64 t, i64* out) {
  const i64 d = c.phi;
  i64 s[kMaxRank];
  for (i64 i = 0; i < d; ++i) s[i] = (t / c.weights[i]) % c.orders[i];
  for (i64 r = 0; r < d; ++r) {
    i64 acc = 0;
    const i64* row = c.uinvmat.data() + r * d;
    for (i64 i = 0; i < d; ++i) acc += row[i] * s[i];
    out[r] = acc % c.kmod;
  }
}

i64 t_index(const UniserialCtx& c, const i64* z) {
  const i64 d = c.phi;
  i64 t = 0;
  for (i64 r = 0; r < d; ++r) {
    i64 acc = 0;
    const i64* row = c.umat.data() + r * d;
    for (i64 i = 0; i < d; ++i) acc += row[i] * z[i];
    t += (acc % c.orders[r]) * c.weights[r];
  }
  return t;
}

// T-part product t1 * (tau^{r1} t2), the semidirect twist already applied.
i64 t_law(const UniserialCtx& c, i64 t1, i64 t2, i64 r1) {
  const i64 d = c.phi;
  i64 c1[kMaxRank], c2[kMaxRank], a[kMaxRank], z[kMaxRank];
  t_coords(c, t1, c1);
  t_coords(c, t2, c2);
  const i64* M = c.act[static_cast<size_t>(r1)].data();
  for (i64 r = 0; r < d; ++r) {
    i64 acc = 0;
    for (i64 i = 0; i < d; ++i) acc += M[r * d + i] * c2[i];
    a[r] = acc % c.kmod;
  }
  for (i64 r = 0; r < d; ++r) z[r] = (c1[r] + a[r]) % c.kmod;
  if (!c.twist.empty()) {
    for (i64 k = 0; k < d; ++k) {
      if (c1[k] == 0) continue;
      for (i64 l = 0; l < d; ++l) {
        const i64 f = (c1[k] * a[l]) % c.kmod;
        if (f == 0) continue;
        const i64* tw = c.twist.data() + (k * d + l) * d;
        for (i64 i = 0; i < d; ++i) z[i] = (z[i] + f * tw[i]) % c.kmod;
      }
    }
  }
  return t_index(c, z);
}

i64 t_apply(const UniserialCtx& c, i64 t, i64 r) {
  const i64 d = c.phi;
  i64 cc[kMaxRank], a[kMaxRank];
  t_coords(c, t, cc);
  const i64* M = c.act[static_cast<size_t>(r)].data();
  for (i64 row = 0; row < d; ++row) {
    i64 acc = 0;
    for (i64 i = 0; i < d; ++i) acc += M[row * d + i] * cc[i];
    a[row] = acc % c.kmod;
  }
  return t_index(c, a);
}

std::shared_ptr<const UniserialCtx> build_uniserial(i64 p, int level, int n0,
                                                    int m, i64 ordc,
                                                    const VecB* unit) {
  const i64 phi = (p - 1) * pow_checked(p, level - 1);
  COSEQ_REQUIRE(phi <= kMaxRank,
                "the prime is too large for the coordinate window");
  COSEQ_REQUIRE(m >= 1, "the filtration length must be positive");
  {
    const i64 cap = (i64{1} << 56) / ordc;
    i64 guard = 1;
    for (int i = 0; i < m; ++i) {
      guard *= p;
      COSEQ_REQUIRE(guard < cap,
                    "the filtration quotient is too large to index");
    }
  }
  const int K = static_cast<int>((n0 + m) / phi) + 3;

  auto ctx = std::make_shared<UniserialCtx>(CycRing(p, level, K));
  ctx->p = p;
  ctx->phi = phi;
  ctx->n0 = n0;
  ctx->m = m;
  ctx->ordc = ordc;

  ctx->tbasis = ctx->ring.ideal_basis_exact(n0);
  const MatB deep = ctx->ring.ideal_basis_exact(n0 + m);
  std::optional<MatB> chain = solve_integer_columns(ctx->tbasis, deep);
  COSEQ_REQUIRE(chain.has_value(),
                "internal inconsistency: the filtration chain is not nested");
  ctx->lq = make_lattice_quotient(*chain, p);
  ctx->orders = ctx->lq.orders;
  COSEQ_REQUIRE(ctx->lq.size_log_p() == m,
                "internal inconsistency: unexpected filtration quotient size");

  ctx->weights.assign(ctx->orders.size(), 1);
  ctx->tsize = 1;
  int emax = 1;
  for (size_t i = 0; i < ctx->orders.size(); ++i) {
    ctx->weights[i] = ctx->tsize;
    ctx->tsize *= ctx->orders[i];
    emax = std::max<int>(emax, static_cast<int>(val_p(ctx->orders[i], p)));
  }
  ctx->kmod = pow_checked(p, emax + 1);
  COSEQ_REQUIRE(ctx->kmod < (i64{1} << 28),
                "the coordinate modulus is too large for 64-bit products");

  ctx->umat.resize(phi * phi);
  ctx->uinvmat.resize(phi * phi);
  for (i64 r = 0; r < phi; ++r)
    for (i64 i = 0; i < phi; ++i) {
      ctx->umat[r * phi + i] = bigmod(ctx->lq.U(r, i), ctx->kmod);
      ctx->uinvmat[r * phi + i] = bigmod(ctx->lq.Uinv(r, i), ctx->kmod);
    }

  // Action of the root of unity on T-coordinates, and its powers.
  VecB theta = VecB::Zero(phi);
  theta[1] = 1;
  const MatB theta_mul = ctx->ring.mul_matrix_exact(theta);
  std::optional<MatB> stable =
      solve_integer_columns(ctx->tbasis, big_mat_mul(theta_mul, ctx->tbasis));
  COSEQ_REQUIRE(stable.has_value(),
                "internal inconsistency: the ideal chain is not stable under "
                "the root of unity");
  std::vector<i64> mtheta(phi * phi);
  for (i64 r = 0; r < phi; ++r)
    for (i64 i = 0; i < phi; ++i)
      mtheta[r * phi + i] = bigmod((*stable)(r, i), ctx->kmod);
  ctx->act.assign(static_cast<size_t>(ordc), std::vector<i64>(phi * phi, 0));
  for (i64 i = 0; i < phi; ++i) ctx->act[0][i * phi + i] = 1;
  for (i64 r = 1; r < ordc; ++r)
    for (i64 row = 0; row < phi; ++row)
      for (i64 col = 0; col < phi; ++col) {
        i64 acc = 0;
        for (i64 k = 0; k < phi; ++k)
          acc += ctx->act[r - 1][row * phi + k] * mtheta[k * phi + col];
        ctx->act[r][row * phi + col] = acc % ctx->kmod;
      }

  if (unit != nullptr) {
    const i64 half = (ctx->kmod + 1) / 2;
    ctx->twist.assign(static_cast<size_t>(phi * phi * phi), 0);
    for (i64 k = 0; k < phi; ++k)
      for (i64 l = 0; l < phi; ++l) {
        if (k == l) continue;
        const VecB bk = ctx->tbasis.col(k);
        const VecB bl = ctx->tbasis.col(l);
        const VecB g = ctx->ring.mul_exact(*unit, ctx->ring.gamma0_exact(bk, bl));
        MatB gcol(phi, 1);
        for (i64 i = 0; i < phi; ++i) gcol(i, 0) = g[i];
        std::optional<MatB> coords = solve_integer_columns(ctx->tbasis, gcol);
        COSEQ_REQUIRE(coords.has_value(),
                      "internal inconsistency: the twisting map leaves the "
                      "filtration ideal");
        for (i64 i = 0; i < phi; ++i)
          ctx->twist[(k * phi + l) * phi + i] =
              (half * bigmod((*coords)(i, 0), ctx->kmod)) % ctx->kmod;
      }
  }
  return ctx;
}

FiniteGroup law_group(std::shared_ptr<const UniserialCtx> ctx) {
  const i64 ordc = ctx->ordc;
  const i64 order = ctx->tsize * ordc;
  auto mul = [ctx](i64 x, i64 y) {
    const i64 r1 = x % ctx->ordc;
    const i64 r2 = y % ctx->ordc;
    const i64 t = t_law(*ctx, x / ctx->ordc, y / ctx->ordc, r1);
    return t * ctx->ordc + (r1 + r2) % ctx->ordc;
  };
  auto inv = [ctx](i64 x) {
    const i64 d = ctx->phi;
    const i64 r = x % ctx->ordc;
    const i64 rr = (ctx->ordc - r) % ctx->ordc;
    i64 cc[kMaxRank], a[kMaxRank];
    t_coords(*ctx, x / ctx->ordc, cc);
    const i64* M = ctx->act[static_cast<size_t>(rr)].data();
    for (i64 row = 0; row < d; ++row) {
      i64 acc = 0;
      for (i64 i = 0; i < d; ++i)
        acc += M[row * d + i] * (ctx->kmod - cc[i]);
      a[row] = acc % ctx->kmod;
    }
    return t_index(*ctx, a) * ctx->ordc + rr;
  };
  FiniteGroup g = FiniteGroup::from_law(order, ctx->p, 0, mul, inv);

  // Deterministic spot check of the law: identities, inverses, and
  // associativity on pseudorandom triples.  A failure here indicates a
  // twisting or coordinate bug, not bad input.
  u64 state = 0x9e3779b97f4a7c15ULL ^ static_cast<u64>(order);
  auto next = [&state](i64 bound) {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return static_cast<i64>((state * 0x2545f4914f6cdd1dULL) >> 11) % bound;
  };
  for (int trial = 0; trial < 64; ++trial) {
    const i64 x = next(order), y = next(order), z = next(order);
    COSEQ_REQUIRE(g.mul(g.mul(x, y), z) == g.mul(x, g.mul(y, z)),
                  "internal inconsistency: the constructed law is not "
                  "associative");
    COSEQ_REQUIRE(g.mul(x, g.inv(x)) == 0 && g.mul(g.inv(x), x) == 0,
                  "internal inconsistency: the constructed law has bad "
                  "inverses");
    COSEQ_REQUIRE(g.mul(x, 0) == x && g.mul(0, x) == x,
                  "internal inconsistency: the constructed law has a bad "
                  "identity");
  }
  return g;
}

i64 ctx_element(const UniserialCtx& ctx, const VecB& v, i64 r) {
  COSEQ_REQUIRE(r >= 0 && r < ctx.ordc,
                "the tau exponent must lie in [0, order of tau)");
  COSEQ_REQUIRE(v.size() == ctx.phi,
                "the element needs one coordinate per power-basis vector");
  MatB col(ctx.phi, 1);
  for (i64 i = 0; i < ctx.phi; ++i) col(i, 0) = v[i];
  std::optional<MatB> coords = solve_integer_columns(ctx.tbasis, col);
  COSEQ_REQUIRE(coords.has_value(),
                "the element does not lie in the filtration ideal");
  VecB c(ctx.phi);
  for (i64 i = 0; i < ctx.phi; ++i) c[i] = (*coords)(i, 0);
  const VecZ s = ctx.lq.project(c);
  i64 t = 0;
  for (i64 i = 0; i < ctx.phi; ++i) t += s[i] * ctx.weights[i];
  return t * ctx.ordc + r;
}

VecB ctx_t_part(const UniserialCtx& ctx, i64 id) {
  COSEQ_REQUIRE(id >= 0 && id < ctx.tsize * ctx.ordc,
                "element id out of range");
  const i64 t = id / ctx.ordc;
  VecZ s(ctx.phi);
  for (i64 i = 0; i < ctx.phi; ++i)
    s[i] = (t / ctx.weights[i]) % ctx.orders[i];
  return big_mat_vec(ctx.tbasis, ctx.lq.lift(s));
}

} // namespace

// ---------------------------------------------------------------------------
// Main-line quotients

i64 MainLineGroup::element(const VecB& v, i64 r) const {
  return ctx_element(*ctx, v, r);
}

i64 MainLineGroup::tau_exponent(i64 id) const { return id % ctx->ordc; }

VecB MainLineGroup::t_part(i64 id) const { return ctx_t_part(*ctx, id); }

const CycRing& MainLineGroup::ring() const { return ctx->ring; }

MainLineGroup make_mainline(const MainLineSpec& spec) {
  COSEQ_REQUIRE(spec.p % 2 == 1 && is_prime(spec.p),
                "main-line construction requires an odd prime");
  COSEQ_REQUIRE(spec.s >= 1, "the quotient exponent must be positive");
  MainLineGroup out;
  out.spec = spec;
  auto ctx = build_uniserial(spec.p, 1, 0, spec.s, spec.p, nullptr);
  out.group = law_group(ctx);
  out.ctx = std::move(ctx);
  return out;
}

FiniteGroup mainline_group(const MainLineSpec& spec) {
  return make_mainline(spec).group;
}

// ---------------------------------------------------------------------------
// Twisted filtration quotients

int skeleton_max_m(int j) { return (j % 3 == 0) ? 2 * j : 2 * j - 1; }

i64 SkeletonGroup::element(const VecB& v, i64 r) const {
  return ctx_element(*ctx, v, r);
}

i64 SkeletonGroup::tau_exponent(i64 id) const { return id % ctx->ordc; }

VecB SkeletonGroup::t_part(i64 id) const { return ctx_t_part(*ctx, id); }

const CycRing& SkeletonGroup::ring() const { return ctx->ring; }

SkeletonGroup make_skeleton(const SkeletonSpec& spec) {
  COSEQ_REQUIRE(spec.j >= 7, "the skeleton index must be at least 7");
  COSEQ_REQUIRE(spec.m >= spec.j && spec.m <= skeleton_max_m(spec.j),
                "the skeleton length m must lie between j and its cap");
  COSEQ_REQUIRE(spec.c.c.size() >= 1 && spec.c.c.size() <= 6,
                "the twisting unit needs between one and six coefficients");

  VecB unit = VecB::Zero(6);
  for (i64 i = 0; i < spec.c.c.size(); ++i) unit[i] = spec.c.c[i];

  // Unit check: nonzero residue modulo the maximal ideal.
  {
    CycRing probe(3, 2, 2);
    VecZ reduced(6);
    for (i64 i = 0; i < 6; ++i)
      reduced[i] = mod_norm(spec.c.c.size() > i ? spec.c.c[i] : 0, 3);
    COSEQ_REQUIRE(probe.valuation(probe.from_coords(reduced)) == 0,
                  "the twisting coefficient must be a unit");
  }

  SkeletonGroup out;
  out.spec = spec;
  auto ctx = build_uniserial(3, 2, spec.j - 3, spec.m, 9, &unit);
  out.group = law_group(ctx);
  out.ctx = std::move(ctx);
  return out;
}

FiniteGroup skeleton_group(const SkeletonSpec& spec) {
  return make_skeleton(spec).group;
}

i64 count_orbits_T_mod_T3(i64 j) {
  COSEQ_REQUIRE(j >= 3, "the orbit count needs the filtration offset j >= 3");
  auto ctx = build_uniserial(3, 2, static_cast<int>(j) - 3, 3, 9, nullptr);
  std::vector<char> seen(static_cast<size_t>(ctx->tsize), 0);
  i64 orbits = 0;
  for (i64 t = 0; t < ctx->tsize; ++t) {
    if (seen[static_cast<size_t>(t)]) continue;
    ++orbits;
    i64 cur = t;
    for (i64 r = 0; r < ctx->ordc; ++r) {
      seen[static_cast<size_t>(cur)] = 1;
      cur = t_apply(*ctx, cur, 1);
    }
  }
  return orbits;
}

std::vector<CycInt> orbit_representatives_v(i64 j) {
  COSEQ_REQUIRE(j >= 3, "the orbit count needs the filtration offset j >= 3");
  auto ctx = build_uniserial(3, 2, static_cast<int>(j) - 3, 3, 9, nullptr);
  auto canonical = [&](i64 t) {
    VecZ s(ctx->phi);
    for (i64 i = 0; i < ctx->phi; ++i)
      s[i] = (t / ctx->weights[i]) % ctx->orders[i];
    return ctx->ring.reduce_exact(big_mat_vec(ctx->tbasis, ctx->lq.lift(s)));
  };
  auto lex_less = [](const VecZ& a, const VecZ& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(),
                                        b.data(), b.data() + b.size());
  };
  std::vector<char> seen(static_cast<size_t>(ctx->tsize), 0);
  std::vector<VecZ> reps;
  for (i64 t = 0; t < ctx->tsize; ++t) {
    if (seen[static_cast<size_t>(t)]) continue;
    VecZ best = canonical(t);
    i64 cur = t;
    for (i64 r = 0; r < ctx->ordc; ++r) {
      seen[static_cast<size_t>(cur)] = 1;
      VecZ cand = canonical(cur);
      if (lex_less(cand, best)) best = cand;
      cur = t_apply(*ctx, cur, 1);
    }
    reps.push_back(std::move(best));
  }
  std::sort(reps.begin(), reps.end(), lex_less);
  std::vector<CycInt> out;
  out.reserve(reps.size());
  for (VecZ& r : reps) out.push_back(CycInt{std::move(r)});
  return out;
}

// ---------------------------------------------------------------------------
// Generalized quaternion groups

FiniteGroup quaternion_group(int n) {
  COSEQ_REQUIRE(n >= 3 && n <= 20,
                "quaternion construction needs 3 <= n <= 20");
  MatZ c2(2, 2);
  c2 << 0, 1, 1, 0;
  const FiniteGroup base = FiniteGroup::from_table(c2);

  const i64 half = i64{1} << (n - 1);
  TruncModule cyc;
  cyc.p = 2;
  cyc.orders = VecZ::Constant(1, half);
  cyc.action.resize(2);
  cyc.action[0] = MatZ::Constant(1, 1, 1);
  cyc.action[1] = MatZ::Constant(1, 1, half - 1); // inversion

  std::vector<VecZ> tau(4, VecZ::Zero(1));
  tau[3] = VecZ::Constant(1, half / 2); // tau(b, b) = a^{2^{n-2}}
  return FiniteGroup::from_extension(ExtensionData(base, cyc, std::move(tau)));
}

// ---------------------------------------------------------------------------
// Generic coclass-family members

FiniteGroup family_member(const FamilySpec& spec) {
  COSEQ_REQUIRE(spec.base.valid(), "family gluing needs a base group");
  COSEQ_REQUIRE(spec.rho.group().same(spec.base) &&
                    spec.eta.group().same(spec.base),
                "family data must share one base group");
  COSEQ_REQUIRE(spec.rho.degree() == 2 && spec.eta.degree() == 3,
                "family gluing expects a degree-2 and a degree-3 cocycle");
  COSEQ_REQUIRE(is_cocycle(spec.rho) && is_cocycle(spec.eta),
                "family data must be cocycles");
  const MatZ& nb = spec.module.n_basis;
  COSEQ_REQUIRE(nb.isIdentity(),
                "the family module must use the full lattice as sublattice");
  const i64 m = spec.base.log_order();
  COSEQ_REQUIRE(spec.j >= 3 * m + 1,
                "the member index must be at least 3m + 1");
  COSEQ_REQUIRE(spec.j + m + 1 <= spec.module.work_k,
                "working precision too small for the requested member");

  const CochainSeq tower =
      split_lift(spec.module, spec.rho, spec.eta, 2 * m);
  const Cochain z = seq_eval(tower, spec.j);
  const TruncModule* layer = std::get_if<TruncModule>(&z.coeff());
  COSEQ_REQUIRE(layer != nullptr,
                "internal inconsistency: tower member is not truncated");

  const i64 n = spec.base.order();
  std::vector<VecZ> tau(static_cast<size_t>(n * n));
  for (i64 g1 = 0; g1 < n; ++g1)
    for (i64 g2 = 0; g2 < n; ++g2) {
      const i64 tuple[2] = {g1, g2};
      tau[static_cast<size_t>(g1 * n + g2)] = z.value(tuple);
    }
  return FiniteGroup::from_extension(
      ExtensionData(spec.base, *layer, std::move(tau)));
}

// ---------------------------------------------------------------------------
// Key = value configuration text

namespace {

std::string trimmed(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

i64 parse_int(const std::string& text) {
  size_t used = 0;
  i64 value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    fail("config value is not an integer: '" + text + "'");
  }
  COSEQ_REQUIRE(used == text.size() && !text.empty(),
                "config value is not an integer: '" + text + "'");
  return value;
}

} // namespace

FamilyConfig parse_family_config(const std::string& text) {
  FamilyConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    COSEQ_REQUIRE(eq != std::string::npos,
                  "config line is missing '=': '" + line + "'");
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    if (key == "p" || key == "s" || key == "j" || key == "m") {
      std::optional<i64>& slot = key == "p"   ? cfg.p
                                 : key == "s" ? cfg.s
                                 : key == "j" ? cfg.j
                                              : cfg.m;
      COSEQ_REQUIRE(!slot.has_value(), "duplicate config key: '" + key + "'");
      slot = parse_int(value);
    } else if (key == "c") {
      COSEQ_REQUIRE(!cfg.c.has_value(), "duplicate config key: 'c'");
      std::vector<i64> coeffs;
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ','))
        coeffs.push_back(parse_int(trimmed(item)));
      COSEQ_REQUIRE(!coeffs.empty(), "config key 'c' needs coefficients");
      VecZ c(static_cast<i64>(coeffs.size()));
      for (size_t i = 0; i < coeffs.size(); ++i)
        c[static_cast<i64>(i)] = coeffs[i];
      cfg.c = std::move(c);
    } else {
      fail("unknown config key: '" + key + "'");
    }
  }
  return cfg;
}

} // namespace coseq

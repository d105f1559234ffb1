#include "coseq/cochain.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "delta_rows.hpp"

namespace coseq {

namespace {

using I128 = __int128;

i64 checked_i64(I128 v, const char* what) {
  if (v > I128{1} << 62 || v < -(I128{1} << 62))
    fail(std::string(what) + ": integer overflow");
  return static_cast<i64>(v);
}

// Exact matrix action with overflow guards; A empty means identity.
VecZ act_exact(const MatZ& a, const VecZ& v) {
  if (a.size() == 0) return v;
  VecZ out = VecZ::Zero(a.rows());
  for (i64 r = 0; r < a.rows(); ++r) {
    I128 acc = 0;
    for (i64 c = 0; c < a.cols(); ++c)
      acc += I128{a(r, c)} * I128{v[c]};
    out[r] = checked_i64(acc, "free coefficient action");
  }
  return out;
}

std::string tuple_str(std::span<const i64> t) {
  std::string s = "(";
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(t[i]);
  }
  return s + ")";
}

} // namespace

// ---------------------------------------------------------------- coeff ----

i64 coeff_rank(const CoeffModule& c) {
  if (const auto* t = std::get_if<TruncModule>(&c)) return t->rank();
  return std::get<FreeCoeff>(c).rank;
}

i64 coeff_prime(const CoeffModule& c) {
  return std::holds_alternative<TruncModule>(c) ? std::get<TruncModule>(c).p
                                                : std::get<FreeCoeff>(c).p;
}

bool coeff_is_free(const CoeffModule& c) {
  return std::holds_alternative<FreeCoeff>(c);
}

VecZ coeff_reduce(const CoeffModule& c, const VecZ& v) {
  if (const auto* t = std::get_if<TruncModule>(&c)) return t->reduce(v);
  return v;
}

VecZ coeff_act(const CoeffModule& c, i64 g, const VecZ& v) {
  if (const auto* t = std::get_if<TruncModule>(&c)) return t->act(g, v);
  const auto& f = std::get<FreeCoeff>(c);
  if (f.action.empty()) return v;
  COSEQ_REQUIRE(g >= 0 && g < static_cast<i64>(f.action.size()),
                "free coefficient action: element id out of range");
  return act_exact(f.action[g], v);
}

bool coeff_same_shape(const CoeffModule& a, const CoeffModule& b) {
  if (coeff_is_free(a) != coeff_is_free(b)) return false;
  if (coeff_prime(a) != coeff_prime(b) || coeff_rank(a) != coeff_rank(b))
    return false;
  if (!coeff_is_free(a)) {
    const auto& x = std::get<TruncModule>(a);
    const auto& y = std::get<TruncModule>(b);
    return x.orders == y.orders;
  }
  return true;
}

GroupLogOrder group_log_order(const FiniteGroup& g) {
  return GroupLogOrder{g.log_order(), g.order()};
}

// -------------------------------------------------------------- Cochain ----

Cochain::Cochain(FiniteGroup g, CoeffModule coeff, int degree)
    : group_(std::move(g)), coeff_(std::move(coeff)), degree_(degree) {
  COSEQ_REQUIRE(degree >= 0 && degree <= 4, "cochain degree must be 0..4");
  COSEQ_REQUIRE(group_.valid(), "cochain needs a valid group");
  const i64 nn = group_.order() - 1;
  i64 count = 1;
  for (int i = 0; i < degree; ++i) {
    COSEQ_REQUIRE(count <= (i64{1} << 40) / std::max<i64>(nn, 1),
                  "cochain table would be too large");
    count *= nn;
  }
  VecZ z = VecZ::Zero(coeff_rank(coeff_));
  values_.assign(static_cast<size_t>(count), z);
}

i64 Cochain::tuple_index(std::span<const i64> tuple) const {
  COSEQ_REQUIRE(static_cast<int>(tuple.size()) == degree_,
                "tuple length does not match cochain degree");
  const i64 n = group_.order();
  const i64 e = group_.identity();
  i64 idx = 0;
  for (i64 g : tuple) {
    COSEQ_REQUIRE(g >= 0 && g < n, "tuple entry out of range");
    if (g == e) return -1;
    idx = idx * (n - 1) + (g < e ? g : g - 1);
  }
  return idx;
}

std::vector<i64> Cochain::tuple_of(i64 index) const {
  const i64 n = group_.order();
  const i64 e = group_.identity();
  std::vector<i64> t(degree_);
  for (int k = degree_ - 1; k >= 0; --k) {
    i64 d = index % (n - 1);
    index /= (n - 1);
    t[k] = d < e ? d : d + 1;
  }
  return t;
}

VecZ Cochain::value(std::span<const i64> tuple) const {
  const i64 idx = tuple_index(tuple);
  if (idx < 0) return VecZ::Zero(rank());
  return values_[idx];
}

void Cochain::set_value(std::span<const i64> tuple, const VecZ& v) {
  const i64 idx = tuple_index(tuple);
  COSEQ_REQUIRE(idx >= 0,
                "cochains are normalized: cannot set a value at an "
                "identity-containing tuple");
  set_raw(idx, v);
}

void Cochain::set_raw(i64 index, const VecZ& v) {
  COSEQ_REQUIRE(index >= 0 && index < entries(), "cochain index out of range");
  COSEQ_REQUIRE(v.size() == rank(), "value rank mismatch");
  values_[index] = coeff_reduce(coeff_, v);
}

bool Cochain::is_zero() const {
  for (const VecZ& v : values_)
    if ((v.array() != 0).any()) return false;
  return true;
}

Cochain& Cochain::operator+=(const Cochain& o) {
  COSEQ_REQUIRE(degree_ == o.degree_ && group_.same(o.group_) &&
                    coeff_same_shape(coeff_, o.coeff_),
                "cochain addition needs matching degree, group, and module");
  for (size_t i = 0; i < values_.size(); ++i) {
    if (coeff_is_free(coeff_)) {
      for (i64 c = 0; c < rank(); ++c)
        values_[i][c] = checked_i64(I128{values_[i][c]} + I128{o.values_[i][c]},
                                    "cochain addition");
    } else {
      values_[i] = std::get<TruncModule>(coeff_).add(values_[i], o.values_[i]);
    }
  }
  return *this;
}

Cochain& Cochain::operator-=(const Cochain& o) {
  COSEQ_REQUIRE(degree_ == o.degree_ && group_.same(o.group_) &&
                    coeff_same_shape(coeff_, o.coeff_),
                "cochain subtraction needs matching degree, group, and module");
  for (size_t i = 0; i < values_.size(); ++i) {
    if (coeff_is_free(coeff_)) {
      for (i64 c = 0; c < rank(); ++c)
        values_[i][c] = checked_i64(I128{values_[i][c]} - I128{o.values_[i][c]},
                                    "cochain subtraction");
    } else {
      values_[i] = std::get<TruncModule>(coeff_).sub(values_[i], o.values_[i]);
    }
  }
  return *this;
}

Cochain Cochain::scaled(i64 c) const {
  Cochain out = *this;
  for (VecZ& v : out.values_) {
    if (coeff_is_free(coeff_)) {
      for (i64 i = 0; i < v.size(); ++i)
        v[i] = checked_i64(I128{v[i]} * I128{c}, "cochain scaling");
    } else {
      v = std::get<TruncModule>(coeff_).scale(c, v);
    }
  }
  return out;
}

// ----------------------------------------------------------- coboundary ----

namespace {

// Value of (Delta f) on a non-identity output tuple, computed termwise.
VecZ delta_value(const Cochain& f, std::span<const i64> out) {
  const FiniteGroup& g = f.group();
  const CoeffModule& cm = f.coeff();
  const int n = f.degree();
  const bool fre = coeff_is_free(cm);
  const TruncModule* tm = fre ? nullptr : &std::get<TruncModule>(cm);

  std::vector<i64> t(out.begin() + 1, out.end());
  VecZ acc = coeff_act(cm, out[0], f.value(t));
  if (!fre) acc = tm->reduce(acc);

  i64 sign = 1;
  for (int i = 1; i <= n; ++i) {
    sign = -sign;
    t.assign(out.begin(), out.end());
    t[i - 1] = g.mul(out[i - 1], out[i]);
    t.erase(t.begin() + i);
    VecZ term = f.value(t);
    if (fre) {
      for (i64 c = 0; c < acc.size(); ++c)
        acc[c] = checked_i64(I128{acc[c]} + I128{sign} * I128{term[c]},
                             "coboundary accumulation");
    } else {
      acc = sign > 0 ? tm->add(acc, term) : tm->sub(acc, term);
    }
  }
  sign = -sign;
  t.assign(out.begin(), out.end() - 1);
  VecZ last = f.value(t);
  if (fre) {
    for (i64 c = 0; c < acc.size(); ++c)
      acc[c] = checked_i64(I128{acc[c]} + I128{sign} * I128{last[c]},
                           "coboundary accumulation");
  } else {
    acc = sign > 0 ? tm->add(acc, last) : tm->sub(acc, last);
  }
  return acc;
}

} // namespace

Cochain coboundary(const Cochain& f) {
  Cochain out(f.group(), f.coeff(), f.degree() + 1);
  const i64 total = out.entries();
  for (i64 idx = 0; idx < total; ++idx) {
    const std::vector<i64> t = out.tuple_of(idx);
    out.set_raw(idx, delta_value(f, t));
  }
  return out;
}

bool is_cocycle(const Cochain& f, std::vector<i64>* bad_tuple) {
  Cochain probe(f.group(), f.coeff(), f.degree() + 1);
  const i64 total = probe.entries();
  for (i64 idx = 0; idx < total; ++idx) {
    const std::vector<i64> t = probe.tuple_of(idx);
    const VecZ v = delta_value(f, t);
    if ((v.array() != 0).any()) {
      if (bad_tuple) *bad_tuple = t;
      return false;
    }
  }
  return true;
}

Cochain transfer_contraction(const Cochain& f) {
  COSEQ_REQUIRE(f.degree() >= 1,
                "the transfer contraction needs degree at least 1");
  const FiniteGroup& g = f.group();
  const int n = f.degree() - 1;
  const i64 sign = (n + 1) % 2 == 0 ? 1 : -1;
  Cochain out(g, f.coeff(), n);
  const bool fre = coeff_is_free(f.coeff());
  const TruncModule* tm = fre ? nullptr : &std::get<TruncModule>(f.coeff());
  std::vector<i64> t(n + 1);
  for (i64 idx = 0; idx < out.entries(); ++idx) {
    const std::vector<i64> base = out.tuple_of(idx);
    std::copy(base.begin(), base.end(), t.begin());
    VecZ acc = VecZ::Zero(f.rank());
    for (i64 x = 0; x < g.order(); ++x) {
      t[n] = x;
      const VecZ term = f.value(t);
      if (fre) {
        for (i64 c = 0; c < acc.size(); ++c)
          acc[c] = checked_i64(I128{acc[c]} + I128{sign} * I128{term[c]},
                               "transfer accumulation");
      } else {
        acc = sign > 0 ? tm->add(acc, term) : tm->sub(acc, term);
      }
    }
    out.set_raw(idx, acc);
  }
  return out;
}

// ----------------------------------------------------------- cohomology ----

namespace {

using detail::for_each_delta_row;

std::vector<int> coordinate_exponents(const CoeffModule& cm, i64 tuples) {
  const auto& t = std::get<TruncModule>(cm);
  std::vector<int> exps;
  exps.reserve(static_cast<size_t>(tuples * t.rank()));
  for (i64 i = 0; i < tuples; ++i)
    for (i64 r = 0; r < t.rank(); ++r)
      exps.push_back(static_cast<int>(val_p(t.orders[r], t.p)));
  return exps;
}

VecZ flatten(const Cochain& f) {
  const i64 d = f.rank();
  VecZ v(f.entries() * d);
  for (i64 i = 0; i < f.entries(); ++i) v.segment(i * d, d) = f.raw(i);
  return v;
}

Cochain unflatten(const FiniteGroup& g, const CoeffModule& cm, int degree,
                  const VecZ& v) {
  Cochain f(g, cm, degree);
  const i64 d = f.rank();
  COSEQ_REQUIRE(v.size() == f.entries() * d, "cochain vector length mismatch");
  for (i64 i = 0; i < f.entries(); ++i)
    f.set_raw(i, v.segment(i * d, d));
  return f;
}

// Dense integer coboundary matrix C^n -> C^{n+1} for free coefficients.
MatB delta_matrix_big(const FiniteGroup& g, const CoeffModule& cm, int n) {
  const i64 d = coeff_rank(cm);
  const Cochain domain(g, cm, n);
  Cochain codomain(g, cm, n + 1);
  MatB a = MatB::Zero(codomain.entries() * d, domain.entries() * d);
  for_each_delta_row(g, cm, n, [&](SRow lhs, int, i64 out_global) {
    for (auto [col, v] : lhs.e) a(out_global, col) += v;
  });
  return a;
}

AbelianInvariants normalize_invariants(AbelianInvariants inv) {
  inv.erase(std::remove(inv.begin(), inv.end(), 1), inv.end());
  std::sort(inv.begin(), inv.end(), [](i64 a, i64 b) {
    if ((a == 0) != (b == 0)) return b == 0; // free summands last
    return a < b;
  });
  return inv;
}

// Invariants of (integer span of K's columns) / (integer span of I's
// columns); K must be a basis of a saturated lattice containing the image.
AbelianInvariants free_quotient_invariants(const MatB& k, const MatB& img,
                                           i64 p) {
  if (k.cols() == 0) return {};
  AbelianInvariants inv;
  if (img.cols() == 0) {
    inv.assign(static_cast<size_t>(k.cols()), 0);
    return inv;
  }
  auto x = solve_integer_columns(k, img);
  COSEQ_REQUIRE(x.has_value(),
                "internal inconsistency: coboundary image escapes the "
                "cocycle lattice");
  const std::vector<BigInt> sm = smith_invariants(*x);
  i64 rank = 0;
  for (const BigInt& s : sm)
    if (s != 0) ++rank;
  for (const BigInt& s : sm) {
    if (s == 0) continue;
    BigInt v = s;
    i64 ord = 1;
    while (v % p == 0) {
      v /= p;
      ord *= p;
      COSEQ_REQUIRE(ord <= (i64{1} << 40), "invariant factor overflow");
    }
    COSEQ_REQUIRE(v == 1 || v == -1,
                  "cohomology invariant is not a power of the group prime");
    if (ord > 1) inv.push_back(ord);
  }
  for (i64 i = rank; i < k.cols(); ++i) inv.push_back(0);
  return inv;
}

} // namespace

AbelianInvariants cohomology(const FiniteGroup& g, const CoeffModule& cm,
                             int degree) {
  COSEQ_REQUIRE(degree >= 0 && degree <= 3,
                "cohomology degree must be between 0 and 3");
  const i64 n = g.order();
  if (degree >= 1)
    COSEQ_REQUIRE(n <= 81 && (degree <= 2 || n <= 27),
                  "cohomology bounds: degree <= 2 needs |G| <= 81, degree 3 "
                  "needs |G| <= 27");

  if (coeff_is_free(cm)) {
    const auto& fc = std::get<FreeCoeff>(cm);
    if (degree == 0) {
      // Fixed sublattice: kernel of the stacked (A(s) - 1) over generators.
      if (fc.action.empty()) {
        return AbelianInvariants(static_cast<size_t>(fc.rank), 0);
      }
      const std::vector<i64> gens = find_generators(g);
      MatB stack = MatB::Zero(static_cast<i64>(gens.size()) * fc.rank,
                              fc.rank);
      for (size_t i = 0; i < gens.size(); ++i)
        for (i64 r = 0; r < fc.rank; ++r)
          for (i64 c = 0; c < fc.rank; ++c)
            stack(static_cast<i64>(i) * fc.rank + r, c) =
                BigInt(fc.action[gens[i]](r, c)) - BigInt(r == c ? 1 : 0);
      const MatB kernel = integer_kernel_basis(stack);
      return AbelianInvariants(static_cast<size_t>(kernel.cols()), 0);
    }
    const Cochain codomain_probe(g, cm, degree + 1);
    COSEQ_REQUIRE(codomain_probe.entries() * fc.rank <= 4096,
                  "free-lattice cohomology is limited to coboundary systems "
                  "with at most 4096 coordinates");
    const MatB dn = delta_matrix_big(g, cm, degree);
    const MatB kernel = integer_kernel_basis(dn);
    const MatB dprev = delta_matrix_big(g, cm, degree - 1);
    return normalize_invariants(
        free_quotient_invariants(kernel, dprev, fc.p));
  }

  const auto& tmod = std::get<TruncModule>(cm);
  const i64 p = tmod.p;
  const Cochain domain(g, cm, degree);
  const std::vector<int> col_exp = coordinate_exponents(cm, domain.entries());

  MixedEquationSolver solver(p, col_exp);
  for_each_delta_row(g, cm, degree, [&](SRow lhs, int out_exp, i64) {
    solver.add_equation(lhs, 0, out_exp);
  });
  SolutionSet sol = solver.solve();
  COSEQ_REQUIRE(sol.particular.has_value(),
                "internal inconsistency: homogeneous system unsolvable");

  std::vector<VecZ> b_gens;
  if (degree >= 1) {
    const Cochain prev(g, cm, degree - 1);
    for (i64 i = 0; i < prev.entries(); ++i)
      for (i64 r = 0; r < tmod.rank(); ++r) {
        Cochain basis(g, cm, degree - 1);
        VecZ v = VecZ::Zero(tmod.rank());
        v[r] = 1;
        basis.set_raw(i, v);
        b_gens.push_back(flatten(coboundary(basis)));
      }
  }
  return normalize_invariants(
      quotient_invariants(sol.kernel_basis, b_gens, col_exp, p));
}

std::optional<Cochain> is_coboundary(const Cochain& z) {
  COSEQ_REQUIRE(z.degree() >= 1,
                "coboundary testing needs degree at least 1");
  std::vector<i64> bad;
  if (!is_cocycle(z, &bad))
    fail("input cochain is not a cocycle: coboundary nonzero at tuple " +
         tuple_str(bad));

  const FiniteGroup& g = z.group();
  const int n = z.degree() - 1;

  if (coeff_is_free(z.coeff())) {
    COSEQ_REQUIRE(z.entries() * z.rank() <= 4096,
                  "free-lattice coboundary testing is limited to systems "
                  "with at most 4096 coordinates");
    const MatB a = delta_matrix_big(g, z.coeff(), n);
    MatB b(a.rows(), 1);
    const VecZ flat = flatten(z);
    for (i64 i = 0; i < a.rows(); ++i) b(i, 0) = flat[i];
    auto x = solve_integer_columns(a, b);
    if (!x.has_value()) return std::nullopt;
    VecZ xv(a.cols());
    for (i64 i = 0; i < a.cols(); ++i) {
      COSEQ_REQUIRE((*x)(i, 0) <= (i64{1} << 50) && (*x)(i, 0) >= -(i64{1} << 50),
                    "coboundary witness overflow");
      xv[i] = static_cast<i64>((*x)(i, 0));
    }
    Cochain w = unflatten(g, z.coeff(), n, xv);
    COSEQ_REQUIRE((coboundary(w) - z).is_zero(),
                  "internal inconsistency: witness verification failed");
    return w;
  }

  const auto& tmod = std::get<TruncModule>(z.coeff());
  const Cochain domain(g, z.coeff(), n);
  const std::vector<int> col_exp =
      coordinate_exponents(z.coeff(), domain.entries());
  const VecZ flat = flatten(z);
  MixedEquationSolver solver(tmod.p, col_exp);
  for_each_delta_row(g, z.coeff(), n, [&](SRow lhs, int out_exp, i64 row) {
    solver.add_equation(lhs, flat[row], out_exp);
  });
  SolutionSet sol = solver.solve();
  if (!sol.particular.has_value()) return std::nullopt;
  Cochain w = unflatten(g, z.coeff(), n, *sol.particular);
  COSEQ_REQUIRE((coboundary(w) - z).is_zero(),
                "internal inconsistency: witness verification failed");
  return w;
}

bool class_is_zero(const CohomologyClass& c) {
  if (c.rep.is_zero()) return true;
  return is_coboundary(c.rep).has_value();
}

bool class_equal(const CohomologyClass& a, const CohomologyClass& b) {
  COSEQ_REQUIRE(a.rep.degree() == b.rep.degree() &&
                    a.rep.group().same(b.rep.group()) &&
                    coeff_same_shape(a.rep.coeff(), b.rep.coeff()),
                "class comparison needs matching degree, group, and module");
  return class_is_zero(CohomologyClass{a.rep - b.rep});
}

// ----------------------------------------------------------- restriction ----

FiniteGroup subgroup_as_group(const Subgroup& q) {
  const FiniteGroup& g = q.parent;
  const i64 n = q.order();
  MatZ table(n, n);
  for (i64 i = 0; i < n; ++i)
    for (i64 j = 0; j < n; ++j) {
      const i64 prod = g.mul(q.elems[i], q.elems[j]);
      const auto it =
          std::lower_bound(q.elems.begin(), q.elems.end(), prod);
      COSEQ_REQUIRE(it != q.elems.end() && *it == prod,
                    "subgroup element list is not closed under products");
      table(i, j) = it - q.elems.begin();
    }
  return FiniteGroup::from_table(table);
}

CoeffModule restrict_coeff(const CoeffModule& c, const Subgroup& q) {
  CoeffModule out = c;
  auto remap = [&](std::vector<MatZ>& action) {
    if (action.empty()) return;
    std::vector<MatZ> restricted;
    restricted.reserve(q.elems.size());
    for (i64 id : q.elems) restricted.push_back(action[id]);
    action = std::move(restricted);
  };
  if (auto* t = std::get_if<TruncModule>(&out))
    remap(t->action);
  else
    remap(std::get<FreeCoeff>(out).action);
  return out;
}

Cochain restrict_cochain(const Cochain& f, const Subgroup& q,
                         const FiniteGroup& qgroup) {
  const FiniteGroup& g = f.group();
  COSEQ_REQUIRE(g.same(q.parent), "subgroup belongs to a different group");
  COSEQ_REQUIRE(qgroup.order() == q.order(),
                "subgroup group object does not match the subgroup layout");
  for (i64 i = 0; i < qgroup.order(); ++i)
    for (i64 j = 0; j < qgroup.order(); ++j)
      COSEQ_REQUIRE(q.elems[qgroup.mul(i, j)] == g.mul(q.elems[i], q.elems[j]),
                    "subgroup group object does not match the subgroup layout");

  Cochain out(qgroup, restrict_coeff(f.coeff(), q), f.degree());
  std::vector<i64> parent_tuple(f.degree());
  for (i64 idx = 0; idx < out.entries(); ++idx) {
    const std::vector<i64> pos = out.tuple_of(idx);
    for (int k = 0; k < f.degree(); ++k) parent_tuple[k] = q.elems[pos[k]];
    out.set_raw(idx, f.value(parent_tuple));
  }
  return out;
}

// ----------------------------------------------------------- LatticePair ----

FreeCoeff LatticePair::ambient_coeff() const {
  return FreeCoeff{p, rank, action, work_k};
}

FreeCoeff LatticePair::sub_coeff() const {
  return FreeCoeff{p, rank, n_action, work_k};
}

VecZ LatticePair::n_coordinates(const VecB& v) const {
  // n_basis = U^{-1} D V^{-1}; y = V D^{-1} U v.
  VecB uv = big_mat_vec(n_smith.U, v);
  VecB scaled(rank);
  for (i64 i = 0; i < rank; ++i) {
    COSEQ_REQUIRE(n_smith.D(i, i) != 0, "sublattice basis is singular");
    COSEQ_REQUIRE(uv[i] % n_smith.D(i, i) == 0,
                  "vector is outside the sublattice");
    scaled[i] = uv[i] / n_smith.D(i, i);
  }
  const VecB y = big_mat_vec(n_smith.V, scaled);
  VecZ out(rank);
  for (i64 i = 0; i < rank; ++i) {
    COSEQ_REQUIRE(y[i] <= (i64{1} << 60) && y[i] >= -(i64{1} << 60),
                  "sublattice coordinates overflow");
    out[i] = static_cast<i64>(y[i]);
  }
  return out;
}

LatticePair make_lattice_pair(const FiniteGroup& g, i64 p, MatZ n_basis,
                              std::vector<MatZ> action, int work_k) {
  LatticePair pair;
  pair.p = p;
  pair.rank = n_basis.rows();
  pair.work_k = work_k;
  COSEQ_REQUIRE(is_prime(p), "lattice prime must be prime");
  COSEQ_REQUIRE(n_basis.rows() == n_basis.cols() && n_basis.rows() >= 1,
                "sublattice basis must be square");
  pow_checked(p, work_k); // working modulus must stay in range
  COSEQ_REQUIRE(action.empty() ||
                    static_cast<i64>(action.size()) == g.order(),
                "lattice action needs one matrix per group element");
  for (const MatZ& a : action)
    COSEQ_REQUIRE(a.rows() == pair.rank && a.cols() == pair.rank,
                  "lattice action matrix shape mismatch");

  pair.n_smith = smith_normal_form(n_basis);
  i64 colog = 0;
  for (const BigInt& s : pair.n_smith.invariants) {
    BigInt v = s < 0 ? BigInt(-s) : s;
    COSEQ_REQUIRE(v != 0, "sublattice must have full rank");
    while (v % p == 0) {
      v /= p;
      ++colog;
    }
    COSEQ_REQUIRE(v == 1, "sublattice index must be a power of p");
  }
  pair.n_colog = colog;
  pair.n_basis = std::move(n_basis);
  pair.action = std::move(action);

  // Rewrite the action in N-coordinates; existence proves stability.
  if (!pair.action.empty()) {
    for (const MatZ& a : pair.action) {
      MatB rhs = big_mat_mul(to_big(a), to_big(pair.n_basis));
      MatZ an(pair.rank, pair.rank);
      for (i64 c = 0; c < pair.rank; ++c) {
        VecZ y;
        try {
          y = pair.n_coordinates(rhs.col(c));
        } catch (const Error&) {
          fail("sublattice is not preserved by the group action");
        }
        an.col(c) = y;
      }
      pair.n_action.push_back(std::move(an));
    }
  }
  return pair;
}

VecZ QuotientView::project(const VecZ& m_coords) const {
  return lq.project(m_coords);
}

VecZ QuotientView::lift(const VecZ& q_coords) const {
  const VecB big = lq.lift(q_coords);
  VecZ out(big.size());
  for (i64 i = 0; i < big.size(); ++i) {
    COSEQ_REQUIRE(big[i] <= (i64{1} << 60) && big[i] >= -(i64{1} << 60),
                  "lattice lift overflow");
    out[i] = static_cast<i64>(big[i]);
  }
  return out;
}

QuotientView quotient_view(const LatticePair& pair, const FiniteGroup& g,
                           i64 r) {
  COSEQ_REQUIRE(r >= 0, "quotient level must be non-negative");
  QuotientView view;
  view.r = r;
  MatB scaled = to_big(pair.n_basis);
  BigInt pr = 1;
  for (i64 i = 0; i < r; ++i) pr *= pair.p;
  scaled *= pr;
  view.lq = make_lattice_quotient(scaled, pair.p);

  int max_exp = 0;
  for (i64 o : view.lq.orders)
    max_exp = std::max(max_exp, static_cast<int>(val_p(o, pair.p)));
  COSEQ_REQUIRE(max_exp <= pair.work_k,
                "working precision too small for the requested level");

  TruncModule m;
  m.p = pair.p;
  m.orders = VecZ(pair.rank);
  for (i64 i = 0; i < pair.rank; ++i) m.orders[i] = view.lq.orders[i];
  m.trunc_k = max_exp;
  if (!pair.action.empty()) {
    for (const MatZ& a : pair.action) {
      const MatB au = big_mat_mul(view.lq.U,
                                  big_mat_mul(to_big(a), view.lq.Uinv));
      MatZ red(pair.rank, pair.rank);
      for (i64 rr = 0; rr < pair.rank; ++rr)
        for (i64 cc = 0; cc < pair.rank; ++cc) {
          const BigInt v = au(rr, cc) % m.orders[rr];
          red(rr, cc) = mod_norm(static_cast<i64>(v), m.orders[rr]);
        }
      m.action.push_back(std::move(red));
    }
  }
  view.module = std::move(m);
  validate_module_action(g, view.module);
  return view;
}

Cochain project_cochain(const QuotientView& view, const Cochain& m_valued) {
  COSEQ_REQUIRE(coeff_is_free(m_valued.coeff()),
                "projection expects a free-lattice cochain");
  Cochain out(m_valued.group(), CoeffModule{view.module}, m_valued.degree());
  for (i64 i = 0; i < m_valued.entries(); ++i)
    out.set_raw(i, view.project(m_valued.raw(i)));
  return out;
}

Cochain lift_cochain(const QuotientView& view, const LatticePair& pair,
                     const Cochain& q_valued) {
  COSEQ_REQUIRE(!coeff_is_free(q_valued.coeff()),
                "lifting expects a truncated cochain");
  Cochain out(q_valued.group(), CoeffModule{pair.ambient_coeff()},
              q_valued.degree());
  for (i64 i = 0; i < q_valued.entries(); ++i)
    out.set_raw(i, view.lift(q_valued.raw(i)));
  return out;
}

// ------------------------------------------- connecting / decomposition ----

namespace {

void require_view_match(const Cochain& z, const QuotientView& view) {
  COSEQ_REQUIRE(!coeff_is_free(z.coeff()),
                "expected a cochain over M/p^r N (truncated coefficients)");
  const auto& t = std::get<TruncModule>(z.coeff());
  COSEQ_REQUIRE(t.p == view.module.p && t.orders == view.module.orders,
                "cochain module does not match M/p^r N at this level");
}

// Divide the coboundary of a lifted cochain by p^level into N-coordinates.
Cochain divide_into_sublattice(const Cochain& delta_lift,
                               const LatticePair& pair, i64 level,
                               const char* who) {
  const i64 pl = pow_checked(pair.p, static_cast<int>(level));
  Cochain u(delta_lift.group(), CoeffModule{pair.sub_coeff()},
            delta_lift.degree());
  auto divide_error = [&](i64 i) -> std::string {
    return std::string(who) + ": the lifted coboundary is not divisible by "
                              "p^" +
           std::to_string(level) + " at tuple " +
           tuple_str(delta_lift.tuple_of(i));
  };
  for (i64 i = 0; i < delta_lift.entries(); ++i) {
    VecZ y;
    try {
      y = pair.n_coordinates(to_big(delta_lift.raw(i)));
    } catch (const Error&) {
      fail(divide_error(i));
    }
    for (i64 c = 0; c < y.size(); ++c) {
      if (y[c] % pl != 0) fail(divide_error(i));
      y[c] /= pl;
    }
    u.set_raw(i, y);
  }
  return u;
}

} // namespace

CohomologyClass connecting_hom(const Cochain& z, const LatticePair& pair,
                               i64 r) {
  const QuotientView view = quotient_view(pair, z.group(), r);
  require_view_match(z, view);
  const Cochain lifted = lift_cochain(view, pair, z);
  const Cochain delta = coboundary(lifted);
  Cochain u = divide_into_sublattice(delta, pair, r, "connecting map");
  std::vector<i64> bad;
  COSEQ_REQUIRE(is_cocycle(u, &bad),
                "internal inconsistency: connecting image is not a cocycle");
  return CohomologyClass{std::move(u)};
}

SplitDecomposition split_decompose(const Cochain& z, const LatticePair& pair,
                                   i64 r) {
  const FiniteGroup& g = z.group();
  const i64 m = g.log_order();
  COSEQ_REQUIRE(r >= 2 * m,
                "splitting decomposition requires level at least twice the "
                "group log-order");
  const QuotientView view_r = quotient_view(pair, g, r);
  require_view_match(z, view_r);

  CohomologyClass second = connecting_hom(z, pair, r);

  const i64 r1 = r - m;
  const QuotientView view1 = quotient_view(pair, g, r1);
  Cochain reduced(g, CoeffModule{view1.module}, z.degree());
  for (i64 i = 0; i < z.entries(); ++i)
    reduced.set_raw(i, view1.project(view_r.lift(z.raw(i))));

  const Cochain lifted = lift_cochain(view1, pair, reduced);
  const Cochain delta = coboundary(lifted);
  const Cochain u = [&] {
    try {
      return divide_into_sublattice(delta, pair, r1,
                                    "splitting decomposition");
    } catch (const Error&) {
      fail("internal inconsistency: reduced representative is not a cocycle "
           "over the sublattice");
    }
  }();
  const Cochain nu = transfer_contraction(u); // Delta(nu) = p^m u exactly

  const i64 shift = pow_checked(pair.p, static_cast<int>(r1 - m));
  Cochain rho(g, CoeffModule{pair.ambient_coeff()}, z.degree());
  for (i64 i = 0; i < z.entries(); ++i) {
    const VecZ nuv = nu.raw(i);
    VecZ corr = VecZ::Zero(pair.rank);
    for (i64 rr = 0; rr < pair.rank; ++rr) {
      I128 acc = 0;
      for (i64 cc = 0; cc < pair.rank; ++cc)
        acc += I128{pair.n_basis(rr, cc)} * I128{nuv[cc]};
      corr[rr] = checked_i64(acc * I128{shift}, "splitting correction");
    }
    rho.set_raw(i, lifted.raw(i) - corr);
  }
  std::vector<i64> bad;
  COSEQ_REQUIRE(is_cocycle(rho, &bad),
                "internal inconsistency: corrected representative fails to "
                "be a cocycle");
  return SplitDecomposition{CohomologyClass{std::move(rho)},
                            std::move(second)};
}

// --------------------------------------------------------------- text ----

std::string cochain_to_text(const Cochain& f) {
  std::ostringstream os;
  os << "cochain " << f.degree() << " " << coeff_prime(f.coeff()) << "\n";
  if (coeff_is_free(f.coeff())) {
    os << "module free " << f.rank() << "\n";
  } else {
    const auto& t = std::get<TruncModule>(f.coeff());
    os << "module trunc";
    for (i64 i = 0; i < t.rank(); ++i) os << " " << t.orders[i];
    os << "\n";
  }
  i64 nnz = 0;
  for (i64 i = 0; i < f.entries(); ++i)
    if ((f.raw(i).array() != 0).any()) ++nnz;
  os << "values " << nnz << "\n";
  for (i64 i = 0; i < f.entries(); ++i) {
    if ((f.raw(i).array() == 0).all()) continue;
    for (i64 gidx : f.tuple_of(i)) os << gidx << " ";
    const VecZ& v = f.raw(i);
    for (i64 c = 0; c < v.size(); ++c) os << (c ? " " : "") << v[c];
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

Cochain cochain_from_text(const std::string& text, const FiniteGroup& g,
                          const CoeffModule& coeff) {
  std::istringstream is(text);
  auto next = [&]() -> std::string {
    std::string tok;
    COSEQ_REQUIRE(static_cast<bool>(is >> tok),
                  "cochain text ended unexpectedly");
    return tok;
  };
  auto next_num = [&]() -> i64 {
    const std::string tok = next();
    try {
      return std::stoll(tok);
    } catch (...) {
      fail("cochain text: malformed number '" + tok + "'");
    }
  };
  COSEQ_REQUIRE(next() == "cochain", "cochain text must start with 'cochain'");
  const i64 degree = next_num();
  const i64 p = next_num();
  COSEQ_REQUIRE(p == coeff_prime(coeff), "cochain text prime mismatch");
  COSEQ_REQUIRE(next() == "module", "cochain text: expected 'module'");
  const std::string kind = next();
  if (kind == "free") {
    COSEQ_REQUIRE(coeff_is_free(coeff),
                  "cochain text declares free coefficients but a truncated "
                  "module was supplied");
    COSEQ_REQUIRE(next_num() == coeff_rank(coeff),
                  "cochain text rank mismatch");
  } else {
    COSEQ_REQUIRE(kind == "trunc",
                  "cochain text: unknown module kind '" + kind + "'");
    COSEQ_REQUIRE(!coeff_is_free(coeff),
                  "cochain text declares truncated coefficients but a free "
                  "module was supplied");
    const auto& t = std::get<TruncModule>(coeff);
    for (i64 i = 0; i < t.rank(); ++i)
      COSEQ_REQUIRE(next_num() == t.orders[i],
                    "cochain text order mismatch at coordinate " +
                        std::to_string(i));
  }
  Cochain f(g, coeff, static_cast<int>(degree));
  COSEQ_REQUIRE(next() == "values", "cochain text: expected 'values'");
  const i64 nnz = next_num();
  std::vector<i64> tuple(degree);
  for (i64 k = 0; k < nnz; ++k) {
    for (i64 i = 0; i < degree; ++i) tuple[i] = next_num();
    VecZ v(f.rank());
    for (i64 c = 0; c < f.rank(); ++c) v[c] = next_num();
    f.set_value(tuple, v);
  }
  COSEQ_REQUIRE(next() == "end", "cochain text: expected 'end'");
  return f;
}

} // namespace coseq

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "coseq/group.hpp"

using namespace coseq;
using doctest::Contains;

namespace {

MatZ cyclic_table(i64 n) {
  MatZ t(n, n);
  for (i64 a = 0; a < n; ++a)
    for (i64 b = 0; b < n; ++b) t(a, b) = (a + b) % n;
  return t;
}

VecZ vec1(i64 x) {
  VecZ v(1);
  v[0] = x;
  return v;
}

// Extension with zero cocycle and per-element 1×1 action matrices.
ExtensionData semidirect_rank1(const FiniteGroup& base, i64 p, i64 mod_order,
                               const std::vector<i64>& action_scalars,
                               std::vector<VecZ> tau = {}) {
  TruncModule m;
  m.p = p;
  m.orders = vec1(mod_order);
  if (!action_scalars.empty()) {
    for (i64 s : action_scalars) {
      MatZ A(1, 1);
      A(0, 0) = s;
      m.action.push_back(A);
    }
  }
  if (tau.empty())
    tau.assign(base.order() * base.order(), VecZ::Zero(1));
  return ExtensionData(base, std::move(m), std::move(tau));
}

FiniteGroup dihedral8() {
  const FiniteGroup c2 = FiniteGroup::from_table(cyclic_table(2));
  return FiniteGroup::from_extension(
      semidirect_rank1(c2, 2, 4, {1, 3}));
}

FiniteGroup quaternion8() {
  const FiniteGroup c2 = FiniteGroup::from_table(cyclic_table(2));
  std::vector<VecZ> tau(4, VecZ::Zero(1));
  tau[1 * 2 + 1] = vec1(2); // τ(g,g) = 2
  return FiniteGroup::from_extension(
      semidirect_rank1(c2, 2, 4, {1, 3}, std::move(tau)));
}

// C₉ as an extension of C₃ by Z/3 via the addition-carry cocycle.
FiniteGroup c9_from_carry() {
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  std::vector<VecZ> tau(9, VecZ::Zero(1));
  for (i64 a = 0; a < 3; ++a)
    for (i64 b = 0; b < 3; ++b) tau[a * 3 + b] = vec1(a + b >= 3 ? 1 : 0);
  return FiniteGroup::from_extension(
      semidirect_rank1(c3, 3, 3, {}, std::move(tau)));
}

// Exponent-3 nonabelian group of order 27: base C₃×C₃, centre Z/3, cocycle a
// bilinear form in the base coordinates.
FiniteGroup heisenberg27() {
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  const FiniteGroup base =
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {}))
          .materialized();
  std::vector<VecZ> tau(81, VecZ::Zero(1));
  for (i64 x = 0; x < 9; ++x)
    for (i64 y = 0; y < 9; ++y) tau[x * 9 + y] = vec1(((x / 3) * (y % 3)) % 3);
  return FiniteGroup::from_extension(
      semidirect_rank1(base, 3, 3, {}, std::move(tau)));
}

std::set<std::vector<i64>> naive_all_subgroups(const FiniteGroup& G) {
  std::set<std::vector<i64>> found;
  std::vector<std::vector<i64>> queue;
  std::vector<i64> triv{G.identity()};
  found.insert(triv);
  queue.push_back(triv);
  for (size_t head = 0; head < queue.size(); ++head) {
    const std::vector<i64> cur = queue[head];
    for (i64 x = 0; x < G.order(); ++x) {
      std::vector<i64> gens = cur;
      gens.push_back(x);
      Subgroup K = subgroup_generate(G, gens);
      if (found.insert(K.elems).second) queue.push_back(K.elems);
    }
  }
  return found;
}

std::set<std::vector<i64>> naive_elementary_abelians(const FiniteGroup& G,
                                                     bool include_trivial) {
  const i64 p = G.order() > 1 ? G.prime() : 0;
  std::set<std::vector<i64>> out;
  for (const std::vector<i64>& elems : naive_all_subgroups(G)) {
    if (elems.size() == 1) {
      if (include_trivial) out.insert(elems);
      continue;
    }
    bool ok = true;
    for (i64 a : elems) {
      if (a != G.identity() && element_order(G, a) != p) ok = false;
      for (i64 b : elems)
        if (G.mul(a, b) != G.mul(b, a)) ok = false;
      if (!ok) break;
    }
    if (ok) out.insert(elems);
  }
  return out;
}

std::set<std::vector<i64>> as_set(const std::vector<Subgroup>& subs) {
  std::set<std::vector<i64>> out;
  for (const Subgroup& s : subs) out.insert(s.elems);
  return out;
}

} // namespace

TEST_CASE("dense tables give groups with exact identity and inverses") {
  const FiniteGroup c9 = FiniteGroup::from_table(cyclic_table(9));
  CHECK(c9.order() == 9);
  CHECK(c9.prime() == 3);
  CHECK(c9.log_order() == 2);
  CHECK(c9.identity() == 0);
  CHECK(c9.mul(4, 7) == 2);
  CHECK(c9.inv(4) == 5);
  CHECK(element_order(c9, 3) == 3);
  CHECK(element_order(c9, 1) == 9);

  // Orders that are not prime powers are rejected.
  CHECK_THROWS_WITH_AS(FiniteGroup::from_table(cyclic_table(6)),
                       Contains("power of a single prime"), Error);

  MatZ bad = cyclic_table(3);
  bad(2, 2) = 5;
  CHECK_THROWS_AS(FiniteGroup::from_table(bad), Error);
}

TEST_CASE("module arithmetic uses mixed-radix encodings") {
  TruncModule m = make_trivial_action_module(3, [] {
    VecZ o(2);
    o << 9, 3;
    return o;
  }());
  CHECK(m.size() == 27);
  CHECK(m.size_log_p() == 3);
  for (i64 idx = 0; idx < 27; ++idx)
    CHECK(m.index_of(m.vector_of(idx)) == idx);
  VecZ a(2), b(2);
  a << 7, 2;
  b << 5, 2;
  CHECK(m.add(a, b) == m.reduce([] {
    VecZ v(2);
    v << 12, 4;
    return v;
  }()));
  CHECK(m.index_of(m.sub(a, a)) == 0);
  CHECK_THROWS_WITH_AS(make_trivial_action_module(3, [] {
                         VecZ o(1);
                         o << 6;
                         return o;
                       }()),
                       Contains("powers of the prime"), Error);
}

TEST_CASE("zero-cocycle extensions split as direct or semidirect products") {
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  const FiniteGroup g =
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {}));
  CHECK(g.order() == 9);
  CHECK(g.prime() == 3);
  bool abelian = true;
  for (i64 a = 0; a < 9; ++a)
    for (i64 b = 0; b < 9; ++b)
      if (g.mul(a, b) != g.mul(b, a)) abelian = false;
  CHECK(abelian);
  for (i64 x = 1; x < 9; ++x) CHECK(element_order(g, x) == 3);
}

TEST_CASE("the addition-carry cocycle on C3 builds C9") {
  const FiniteGroup g = c9_from_carry();
  CHECK(g.order() == 9);
  // (0, g) has order 9, so the extension is cyclic.
  CHECK(element_order(g, 1) == 9);
  i64 max_ord = 0;
  for (i64 x = 0; x < 9; ++x) max_ord = std::max(max_ord, element_order(g, x));
  CHECK(max_ord == 9);
}

TEST_CASE("extensions reject non-cocycles with a failing triple") {
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  std::vector<VecZ> tau(9, VecZ::Zero(1));
  tau[1 * 3 + 1] = vec1(1); // lone bump: fails the cocycle identity
  CHECK_THROWS_WITH_AS(
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {}, tau)),
      Contains("cocycle identity at triple"), Error);

  // Non-normalized tables are rejected too.
  std::vector<VecZ> bad(9, VecZ::Zero(1));
  bad[0 * 3 + 1] = vec1(1);
  CHECK_THROWS_WITH_AS(
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {}, bad)),
      Contains("normalized"), Error);

  // The same perturbed law, installed directly, fails associativity.
  auto mul = [](i64 a, i64 b) {
    const i64 g1 = a % 3, g2 = b % 3, t1 = a / 3, t2 = b / 3;
    const i64 carry = (g1 == 1 && g2 == 1) ? 1 : 0;
    return ((t1 + t2 + carry) % 3) * 3 + (g1 + g2) % 3;
  };
  auto inv = [&](i64 a) {
    for (i64 b = 0; b < 9; ++b)
      if (mul(a, b) == 0 && mul(b, a) == 0) return b;
    return i64{0};
  };
  CHECK_THROWS_WITH_AS(FiniteGroup::from_law(9, 3, 0, mul, inv),
                       Contains("not associative at triple"), Error);
}

TEST_CASE("an extension splits exactly when its cocycle is a coboundary") {
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));

  auto is_coboundary_brute = [&](const std::vector<VecZ>& tau) {
    for (i64 f1 = 0; f1 < 3; ++f1)
      for (i64 f2 = 0; f2 < 3; ++f2) {
        const i64 f[3] = {0, f1, f2};
        bool ok = true;
        for (i64 a = 0; a < 3 && ok; ++a)
          for (i64 b = 0; b < 3 && ok; ++b)
            if (mod_norm(f[b] - f[(a + b) % 3] + f[a], 3) != tau[a * 3 + b][0])
              ok = false;
        if (ok) return true;
      }
    return false;
  };
  auto has_complement = [&](const FiniteGroup& g) {
    for (i64 x = 0; x < g.order(); ++x)
      if (g.base_part(x) == 1 && element_order(g, x) == 3) return true;
    return false;
  };

  // Carry cocycle: not a coboundary, extension does not split.
  std::vector<VecZ> carry(9, VecZ::Zero(1));
  for (i64 a = 0; a < 3; ++a)
    for (i64 b = 0; b < 3; ++b) carry[a * 3 + b] = vec1(a + b >= 3 ? 1 : 0);
  CHECK_FALSE(is_coboundary_brute(carry));
  CHECK_FALSE(has_complement(c9_from_carry()));

  // A coboundary cocycle: extension splits.
  std::vector<VecZ> cob(9, VecZ::Zero(1));
  const i64 f[3] = {0, 2, 1};
  for (i64 a = 0; a < 3; ++a)
    for (i64 b = 0; b < 3; ++b)
      cob[a * 3 + b] = vec1(mod_norm(f[b] - f[(a + b) % 3] + f[a], 3));
  CHECK(is_coboundary_brute(cob));
  const FiniteGroup split = FiniteGroup::from_extension(
      semidirect_rank1(c3, 3, 3, {}, cob));
  CHECK(has_complement(split));
}

TEST_CASE("the module embeds as a normal subgroup with base quotient") {
  const FiniteGroup g = quaternion8();
  std::vector<i64> module_ids;
  for (i64 x = 0; x < g.order(); ++x)
    if (g.base_part(x) == g.extension().base.identity())
      module_ids.push_back(x);
  CHECK(static_cast<i64>(module_ids.size()) == 4);
  CHECK(is_subgroup(g, module_ids));
  const Subgroup M{g, module_ids};
  for (i64 x = 0; x < g.order(); ++x)
    for (i64 s : module_ids) CHECK(M.contains(g.conj(x, s)));
  // Projection to the base is a homomorphism.
  for (i64 a = 0; a < g.order(); ++a)
    for (i64 b = 0; b < g.order(); ++b)
      CHECK(g.base_part(g.mul(a, b)) ==
            g.extension().base.mul(g.base_part(a), g.base_part(b)));
}

TEST_CASE("subgroup lifting follows one-cochains") {
  // C₃ acting on Z/9 through multiplication by 4, zero cocycle.
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  const FiniteGroup g = FiniteGroup::from_extension(
      semidirect_rank1(c3, 3, 9, {1, 4, 7}));
  REQUIRE(g.order() == 27);
  const Subgroup base_all = subgroup_generate(g.extension().base, {1});
  REQUIRE(base_all.order() == 3);

  // f = 0 gives the canonical complement {(0, q)}.
  const Subgroup canon =
      lift_subgroup(g, base_all, {VecZ::Zero(1), VecZ::Zero(1), VecZ::Zero(1)});
  CHECK(canon.elems == std::vector<i64>{0, 1, 2});

  // Cocycle condition: f(g) = t forces f(g²) = 5t and 3t ≡ 0 (mod 9).
  for (i64 t : {0, 3, 6}) {
    const Subgroup lift = lift_subgroup(
        g, base_all, {VecZ::Zero(1), vec1(t), vec1(mod_norm(5 * t, 9))});
    CHECK(lift.order() == 3);
    // All lifts here are conjugate by a module element.
    bool conjugate = false;
    for (i64 m = 0; m < 9; ++m) {
      const i64 mid = g.encode(vec1(m), 0);
      std::vector<i64> img;
      for (i64 x : canon.elems) img.push_back(g.conj(mid, x));
      std::sort(img.begin(), img.end());
      if (img == lift.elems) conjugate = true;
    }
    CHECK(conjugate);
  }

  // A cochain that misses the cocycle condition is rejected with a pair.
  CHECK_THROWS_WITH_AS(
      lift_subgroup(g, base_all, {VecZ::Zero(1), vec1(1), vec1(5)}),
      Contains("lift obstruction"), Error);

  // Conjugating a lift by a module element shifts the cochain by the
  // coboundary of that element.
  for (i64 t = 0; t < 9; ++t) {
    const i64 mid = g.encode(vec1(t), 0);
    std::vector<i64> img;
    for (i64 x : canon.elems) img.push_back(g.conj(mid, x));
    std::sort(img.begin(), img.end());
    // Δt(q) = {}^q t − t
    const Subgroup shifted = lift_subgroup(
        g, base_all,
        {VecZ::Zero(1), vec1(mod_norm(4 * t - t, 9)),
         vec1(mod_norm(7 * t - t, 9))});
    CHECK(img == shifted.elems);
  }
}

TEST_CASE("lifts of complements are pairwise non-conjugate when the "
          "derived coboundaries vanish") {
  // Trivial action: B¹ = 0, three distinct homomorphisms give three
  // complements that no module element can merge.
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  const FiniteGroup g =
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {}));
  const Subgroup base_all = subgroup_generate(g.extension().base, {1});
  std::vector<Subgroup> lifts;
  for (i64 t = 0; t < 3; ++t)
    lifts.push_back(lift_subgroup(
        g, base_all, {VecZ::Zero(1), vec1(t), vec1(mod_norm(2 * t, 3))}));
  for (size_t i = 0; i < lifts.size(); ++i)
    for (size_t j = i + 1; j < lifts.size(); ++j) {
      CHECK(lifts[i].elems != lifts[j].elems);
      for (i64 m = 0; m < 3; ++m) {
        const i64 mid = g.encode(vec1(m), 0);
        std::vector<i64> img;
        for (i64 x : lifts[i].elems) img.push_back(g.conj(mid, x));
        std::sort(img.begin(), img.end());
        CHECK(img != lifts[j].elems);
      }
    }
}

TEST_CASE("closure, centralizer, normalizer, and orders behave classically") {
  const FiniteGroup d8 = dihedral8();
  REQUIRE(d8.order() == 8);

  // ⟨(1,0)⟩ is the rotation subgroup Z/4: ids {0,2,4,6}.
  const Subgroup rot = subgroup_generate(d8, {2});
  CHECK(rot.elems == std::vector<i64>{0, 2, 4, 6});
  CHECK(element_order(d8, 2) == 4);
  CHECK(element_order(d8, 1) == 2);  // reflection (0,1)
  CHECK(element_order(d8, 4) == 2);  // half rotation (2,0)

  // Centralizer of the identity is everything.
  CHECK(centralizer(d8, {d8.identity()}).order() == 8);
  // The centre of the dihedral group of order 8 is {e, half-rotation}.
  const Subgroup z = centralizer(d8, {0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(z.elems == std::vector<i64>{0, 4});

  // Reflections have Klein-four centralizers and normalizers.
  const Subgroup refl = subgroup_generate(d8, {1});
  CHECK(refl.elems == std::vector<i64>{0, 1});
  CHECK(centralizer(d8, {1}).order() == 4);
  CHECK(normalizer(d8, refl).order() == 4);
  // The rotation subgroup is normal.
  CHECK(normalizer(d8, rot).order() == 8);

  // Restricted centralizer inside the rotation part.
  CHECK(centralizer_in(d8, rot.elems, {1}) == std::vector<i64>{0, 4});

  CHECK(find_generators(d8).size() == 2);
  CHECK(find_generators(FiniteGroup::from_table(cyclic_table(9))).size() == 1);

  CHECK_THROWS_WITH_AS(element_order(d8, 8), Contains("out of range"), Error);
  CHECK_THROWS_WITH_AS(make_subgroup(d8, {0, 1, 2}),
                       Contains("not a subgroup"), Error);
}

TEST_CASE("elementary abelian enumeration matches hand counts") {
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  const FiniteGroup c3xc3 =
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {}));
  auto subs = enumerate_elementary_abelians(c3xc3, false);
  i64 lines = 0, planes = 0;
  for (const Subgroup& s : subs) {
    if (s.order() == 3) ++lines;
    if (s.order() == 9) ++planes;
  }
  CHECK(lines == 4);
  CHECK(planes == 1);
  CHECK(subs.size() == 5);
  CHECK(enumerate_elementary_abelians(c3xc3, true).size() == 6);

  // C₉ has a single line.
  auto c9subs =
      enumerate_elementary_abelians(FiniteGroup::from_table(cyclic_table(9)),
                                    false);
  REQUIRE(c9subs.size() == 1);
  CHECK(c9subs[0].elems == std::vector<i64>{0, 3, 6});

  // Quaternion group: only the central order-2 subgroup.
  auto q8subs = enumerate_elementary_abelians(quaternion8(), false);
  REQUIRE(q8subs.size() == 1);
  CHECK(q8subs[0].order() == 2);

  CHECK_THROWS_WITH_AS(enumerate_elementary_abelians(c3xc3, false, 8),
                       Contains("exceeds the configured bound"), Error);
}

TEST_CASE("elementary abelian enumeration agrees with the naive oracle") {
  std::vector<FiniteGroup> groups;
  groups.push_back(FiniteGroup::from_table(cyclic_table(9)));
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  groups.push_back(FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {})));
  groups.push_back(dihedral8());
  groups.push_back(quaternion8());
  groups.push_back(c9_from_carry());
  groups.push_back(heisenberg27());
  // C₉ × C₉ at order 81.
  const FiniteGroup c9 = FiniteGroup::from_table(cyclic_table(9));
  groups.push_back(FiniteGroup::from_extension(semidirect_rank1(c9, 3, 9, {})));
  // C₃ acting on Z/9 by multiplication by 4.
  groups.push_back(
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 9, {1, 4, 7})));

  for (const FiniteGroup& g : groups) {
    for (bool flag : {false, true}) {
      CAPTURE(g.order());
      CHECK(as_set(enumerate_elementary_abelians(g, flag)) ==
            naive_elementary_abelians(g, flag));
    }
  }
}

TEST_CASE("maximal elementary abelians are the inclusion-maximal ones") {
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  std::vector<FiniteGroup> groups;
  groups.push_back(FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {})));
  groups.push_back(dihedral8());
  groups.push_back(quaternion8());
  groups.push_back(c9_from_carry());
  groups.push_back(heisenberg27());
  groups.push_back(
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 9, {1, 4, 7})));

  for (const FiniteGroup& g : groups) {
    CAPTURE(g.order());
    const auto all = enumerate_elementary_abelians(g, false);
    // Filter oracle: keep the members not strictly contained in another.
    std::vector<std::vector<i64>> expect;
    for (const Subgroup& s : all) {
      bool maximal = true;
      for (const Subgroup& t : all)
        if (t.order() > s.order() &&
            std::includes(t.elems.begin(), t.elems.end(), s.elems.begin(),
                          s.elems.end()))
          maximal = false;
      if (maximal) expect.push_back(s.elems);
    }
    const auto tops = enumerate_maximal_elementary_abelians(g);
    REQUIRE(tops.size() == expect.size());
    for (size_t i = 0; i < tops.size(); ++i) CHECK(tops[i].elems == expect[i]);
  }

  // Hand counts: the Heisenberg group has four maximal planes, the
  // quaternion group only its center.
  CHECK(enumerate_maximal_elementary_abelians(heisenberg27()).size() == 4);
  const auto q8 = enumerate_maximal_elementary_abelians(quaternion8());
  REQUIRE(q8.size() == 1);
  CHECK(q8[0].order() == 2);
}

TEST_CASE("conjugacy classification partitions subgroup lists") {
  // Abelian group: all classes are singletons.
  const FiniteGroup c3 = FiniteGroup::from_table(cyclic_table(3));
  const FiniteGroup c3xc3 =
      FiniteGroup::from_extension(semidirect_rank1(c3, 3, 3, {}));
  auto abelian_classes = conjugacy_classes_of_subgroups(
      c3xc3, enumerate_elementary_abelians(c3xc3, true));
  CHECK(abelian_classes.size() == 6);
  for (const auto& cls : abelian_classes) CHECK(cls.size() == 1);

  // Dihedral of order 8: centre is a singleton class, the four reflection
  // subgroups fall into two classes of two.
  const FiniteGroup d8 = dihedral8();
  auto subs = enumerate_elementary_abelians(d8, false);
  auto classes = conjugacy_classes_of_subgroups(d8, subs);
  std::multiset<size_t> sizes;
  for (const auto& cls : classes) {
    sizes.insert(cls.size());
    CHECK(8 % cls.size() == 0);
    // Representative is the least element list of its class.
    for (const auto& member : cls) CHECK(!(member.elems < cls.front().elems));
  }
  CHECK(sizes == std::multiset<size_t>{1, 1, 1, 2, 2});

  // Class sizes divide the group order in a nonabelian order-27 case too.
  const FiniteGroup h27 = heisenberg27();
  for (const auto& cls : conjugacy_classes_of_subgroups(
           h27, enumerate_elementary_abelians(h27, false)))
    CHECK(27 % cls.size() == 0);

  // A list missing conjugates is rejected.
  const Subgroup lone = subgroup_generate(d8, {1});
  CHECK_THROWS_WITH_AS(conjugacy_classes_of_subgroups(d8, {lone}),
                       Contains("not closed under conjugation"), Error);
  CHECK_THROWS_WITH_AS(conjugacy_classes_of_subgroups(d8, {lone, lone}),
                       Contains("duplicate subgroup"), Error);
}

TEST_CASE("groups round-trip through the text format") {
  // Dense table form.
  const FiniteGroup d8 = dihedral8().materialized();
  const FiniteGroup d8back = group_from_text(group_to_text(d8));
  REQUIRE(d8back.order() == 8);
  for (i64 a = 0; a < 8; ++a)
    for (i64 b = 0; b < 8; ++b) CHECK(d8back.mul(a, b) == d8.mul(a, b));

  // Extension form preserves the law without materializing.
  const FiniteGroup q8 = quaternion8();
  const std::string text = group_to_text(q8);
  CHECK(text.find("extension") != std::string::npos);
  const FiniteGroup q8back = group_from_text(text);
  REQUIRE(q8back.order() == 8);
  for (i64 a = 0; a < 8; ++a)
    for (i64 b = 0; b < 8; ++b) CHECK(q8back.mul(a, b) == q8.mul(a, b));

  // Law-backed groups export through their table.
  const FiniteGroup c4 = FiniteGroup::from_law(
      4, 2, 0, [](i64 a, i64 b) { return (a + b) % 4; },
      [](i64 a) { return (4 - a) % 4; });
  const FiniteGroup c4back = group_from_text(group_to_text(c4));
  CHECK(c4back.order() == 4);
  CHECK(c4back.mul(3, 2) == 1);

  CHECK_THROWS_WITH_AS(group_from_text("group 3 3\ntable\n0 1 2"),
                       Contains("ended unexpectedly"), Error);
  CHECK_THROWS_WITH_AS(group_from_text("group 2 2\nfancy\nend"),
                       Contains("unknown representation"), Error);
}

TEST_CASE("law-backed groups verify axioms on construction") {
  const FiniteGroup c27 = FiniteGroup::from_law(
      27, 3, 0, [](i64 a, i64 b) { return (a + b) % 27; },
      [](i64 a) { return (27 - a) % 27; });
  CHECK(c27.order() == 27);
  CHECK(element_order(c27, 1) == 27);

  CHECK_THROWS_WITH_AS(
      FiniteGroup::from_law(
          4, 2, 0, [](i64 a, i64 b) { return (a + b) % 4; },
          [](i64 a) { return a; }),
      Contains("inverse law"), Error);
  CHECK_THROWS_WITH_AS(
      FiniteGroup::from_law(
          6, 2, 0, [](i64 a, i64 b) { return (a + b) % 6; },
          [](i64 a) { return (6 - a) % 6; }),
      Contains("power of the given prime"), Error);
}

TEST_CASE("quaternion group facts") {
  const FiniteGroup q8 = quaternion8();
  // Exactly one element of order 2, and it is central.
  std::vector<i64> invol;
  for (i64 x = 0; x < 8; ++x)
    if (element_order(q8, x) == 2) invol.push_back(x);
  REQUIRE(invol.size() == 1);
  CHECK(centralizer(q8, {invol[0]}).order() == 8);
  // Three cyclic subgroups of order 4, all normal.
  std::set<std::vector<i64>> c4s;
  for (i64 x = 0; x < 8; ++x)
    if (element_order(q8, x) == 4) c4s.insert(subgroup_generate(q8, {x}).elems);
  CHECK(c4s.size() == 3);
  for (const auto& elems : c4s)
    CHECK(normalizer(q8, Subgroup{q8, elems}).order() == 8);
}

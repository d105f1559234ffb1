// Categories of elementary abelian p-subgroups with conjugation-induced
// monomorphisms: construction on one group, skeletons, exact isomorphism
// witnesses between two such categories, and the triple parametrization
// (U, f, W) of the elementary abelians of extension-tower members together
// with the obstruction tower attached to a conjugation between two lifts.

#include "coseq/quillen.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"

#include "coseq/cochain.hpp"

namespace coseq {

namespace {

i64 position_in(const std::vector<i64>& sorted_ids, i64 id) {
  auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
  COSEQ_REQUIRE(it != sorted_ids.end() && *it == id,
                "element " + std::to_string(id) + " is not in the subgroup");
  return it - sorted_ids.begin();
}

bool mats_equal(const MatZ& a, const MatZ& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (i64 i = 0; i < a.rows(); ++i)
    for (i64 j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

i64 rank_log_p(i64 order, i64 p) {
  i64 k = 0;
  while (p > 1 && order % p == 0) {
    order /= p;
    ++k;
  }
  return k;
}

// Verifies that `qgroup` is laid out on the positions of q.elems, i.e. that
// it matches subgroup_as_group(q).
void require_position_group(const Subgroup& q, const FiniteGroup& qgroup) {
  const i64 nq = q.order();
  COSEQ_REQUIRE(qgroup.valid() && qgroup.order() == nq,
                "subgroup group has the wrong order");
  const FiniteGroup& G = q.parent;
  for (i64 i = 0; i < nq; ++i)
    for (i64 j = 0; j < nq; ++j) {
      const i64 prod = G.mul(q.elems[i], q.elems[j]);
      COSEQ_REQUIRE(q.elems[qgroup.mul(i, j)] == prod,
                    "subgroup group does not match the subgroup layout");
    }
}

// Greedy generating set of a subgroup given by its (closed) element list:
// scan in id order, keep an element whenever it enlarges the span.
std::vector<i64> greedy_basis(const FiniteGroup& G,
                              const std::vector<i64>& elems) {
  std::vector<i64> basis;
  std::set<i64> span = {G.identity()};
  for (i64 e : elems) {
    if (span.count(e)) continue;
    basis.push_back(e);
    // close the span under the new generator
    std::set<i64> grown = span;
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<i64> cur(grown.begin(), grown.end());
      for (i64 x : cur) {
        const i64 a = G.mul(x, e);
        if (grown.insert(a).second) changed = true;
      }
    }
    span.swap(grown);
  }
  return basis;
}

// Mixed-radix table over a greedy basis of an elementary abelian subgroup:
// combo c with digits (d_0, .., d_{k-1}) corresponds to prod basis[j]^{d_j}.
struct SourceTable {
  std::vector<i64> basis;
  std::vector<i64> weight;                 // p-power weights per digit
  std::unordered_map<i64, i64> combo_of;   // element id -> combo
};

SourceTable source_table(const FiniteGroup& G, const std::vector<i64>& elems) {
  const i64 p = elems.size() > 1 ? G.prime() : 2;
  SourceTable st;
  st.basis = greedy_basis(G, elems);
  const i64 k = static_cast<i64>(st.basis.size());
  st.weight.resize(k);
  i64 w = 1;
  for (i64 j = 0; j < k; ++j) {
    st.weight[j] = w;
    w *= p;
  }
  COSEQ_REQUIRE(w == static_cast<i64>(elems.size()),
                "subgroup is not elementary abelian");
  std::vector<i64> by_combo(w);
  by_combo[0] = G.identity();
  st.combo_of.reserve(w * 2);
  st.combo_of[G.identity()] = 0;
  for (i64 c = 1; c < w; ++c) {
    i64 j = 0;
    while ((c / st.weight[j]) % p == 0) ++j;
    by_combo[c] = G.mul(by_combo[c - st.weight[j]], st.basis[j]);
    const bool fresh = st.combo_of.emplace(by_combo[c], c).second;
    COSEQ_REQUIRE(fresh, "subgroup is not elementary abelian");
  }
  return st;
}

// The image vector (aligned with the sorted element list) of the
// homomorphism sending basis[j] to tuple[j], extended multiplicatively.
std::vector<i64> materialize_map(const FiniteGroup& G, const SourceTable& st,
                                 const std::vector<i64>& elems,
                                 const std::vector<i64>& tuple) {
  const i64 total = static_cast<i64>(elems.size());
  const i64 p = total > 1 ? G.prime() : 2;
  std::vector<i64> img(total);
  img[0] = G.identity();
  for (i64 c = 1; c < total; ++c) {
    i64 j = 0;
    while ((c / st.weight[j]) % p == 0) ++j;
    img[c] = G.mul(img[c - st.weight[j]], tuple[j]);
  }
  std::vector<i64> out(total);
  for (i64 pos = 0; pos < total; ++pos)
    out[pos] = img[st.combo_of.at(elems[pos])];
  return out;
}

// ---------------------------------------------------------------------------
// Isomorphism search machinery.

// Flat morphism indexing of a category plus adjacency and position lookups.
struct CatIndex {
  const QuillenCategory* cat = nullptr;
  i64 n = 0;
  i64 total = 0;
  std::vector<i64> base;      // per pair a*n+b: first global morphism id
  std::vector<i64> pair_of;   // per global id
  std::vector<i64> local_of;  // per global id
  std::vector<std::vector<i64>> into;   // per object x: all w with hom(w,x) nonempty
  std::vector<std::vector<i64>> outof;  // per object y: all z with hom(y,z) nonempty
  std::vector<std::unordered_map<i64, i64>> pos;  // per object: elem -> position
};

CatIndex index_category(const QuillenCategory& c) {
  CatIndex ix;
  ix.cat = &c;
  ix.n = c.object_count();
  const i64 pairs = ix.n * ix.n;
  ix.base.resize(pairs);
  i64 run = 0;
  for (i64 pr = 0; pr < pairs; ++pr) {
    ix.base[pr] = run;
    run += static_cast<i64>(c.hom[pr].size());
  }
  ix.total = run;
  ix.pair_of.resize(run);
  ix.local_of.resize(run);
  for (i64 pr = 0; pr < pairs; ++pr)
    for (i64 k = 0; k < static_cast<i64>(c.hom[pr].size()); ++k) {
      ix.pair_of[ix.base[pr] + k] = pr;
      ix.local_of[ix.base[pr] + k] = k;
    }
  ix.into.resize(ix.n);
  ix.outof.resize(ix.n);
  for (i64 a = 0; a < ix.n; ++a)
    for (i64 b = 0; b < ix.n; ++b)
      if (!c.hom[a * ix.n + b].empty()) {
        ix.outof[a].push_back(b);
        ix.into[b].push_back(a);
      }
  ix.pos.resize(ix.n);
  for (i64 a = 0; a < ix.n; ++a) {
    const auto& elems = c.objects[a].elems;
    ix.pos[a].reserve(elems.size() * 2);
    for (i64 t = 0; t < static_cast<i64>(elems.size()); ++t)
      ix.pos[a][elems[t]] = t;
  }
  return ix;
}

// Index in hom(a, c) of hom(b, c)[j] after hom(a, b)[i], via position lookup.
i64 compose_ix(const CatIndex& ix, i64 a, i64 b, i64 c, i64 i, i64 j) {
  const auto& f = ix.cat->hom[a * ix.n + b][i];
  const auto& g = ix.cat->hom[b * ix.n + c][j];
  const auto& pb = ix.pos[b];
  std::vector<i64> comp(f.size());
  for (std::size_t t = 0; t < f.size(); ++t) comp[t] = g[pb.at(f[t])];
  const auto& target = ix.cat->hom[a * ix.n + c];
  auto it = std::lower_bound(target.begin(), target.end(), comp);
  COSEQ_REQUIRE(it != target.end() && *it == comp,
                "composite map missing from the category");
  return it - target.begin();
}

// Longest chain of proper embeddings below each object.
std::vector<i64> poset_heights(const QuillenCategory& c) {
  const i64 n = c.object_count();
  std::vector<i64> h(n, 0);
  std::vector<int> state(n, 0);
  std::function<i64(i64)> go = [&](i64 x) -> i64 {
    COSEQ_REQUIRE(state[x] != 1, "category has a cycle of proper embeddings");
    if (state[x] == 2) return h[x];
    state[x] = 1;
    i64 best = 0;
    for (i64 w = 0; w < n; ++w)
      if (w != x && !c.hom[w * n + x].empty()) best = std::max(best, go(w) + 1);
    state[x] = 2;
    h[x] = best;
    return best;
  };
  for (i64 x = 0; x < n; ++x) go(x);
  return h;
}

// Iterated structural colors of the objects of both categories, refined
// jointly so that equal colors mean equal invariants across the two.
void refine_colors(const QuillenCategory& a, const QuillenCategory& b,
                   const std::vector<i64>& ha, const std::vector<i64>& hb,
                   std::vector<i64>& ca, std::vector<i64>& cb) {
  const i64 n = a.object_count();
  ca.assign(n, 0);
  cb.assign(n, 0);
  {
    std::map<std::pair<i64, i64>, i64> init;
    auto key_of = [&](const QuillenCategory& c, const std::vector<i64>& h,
                      i64 x) {
      return std::pair<i64, i64>(
          h[x], static_cast<i64>(c.hom[x * n + x].size()));
    };
    for (i64 x = 0; x < n; ++x) init.emplace(key_of(a, ha, x), 0);
    for (i64 x = 0; x < n; ++x) init.emplace(key_of(b, hb, x), 0);
    i64 next = 0;
    for (auto& kv : init) kv.second = next++;
    for (i64 x = 0; x < n; ++x) ca[x] = init[key_of(a, ha, x)];
    for (i64 x = 0; x < n; ++x) cb[x] = init[key_of(b, hb, x)];
  }
  i64 distinct = 0;
  for (i64 round = 0; round <= 2 * n; ++round) {
    auto signature = [&](const QuillenCategory& c, const std::vector<i64>& col,
                         i64 x) {
      std::vector<std::array<i64, 3>> parts;
      for (i64 y = 0; y < n; ++y) {
        if (y == x) continue;
        const i64 f = static_cast<i64>(c.hom[x * n + y].size());
        const i64 g = static_cast<i64>(c.hom[y * n + x].size());
        if (f || g) parts.push_back({col[y], f, g});
      }
      std::sort(parts.begin(), parts.end());
      std::vector<i64> sig = {col[x]};
      for (const auto& t : parts) sig.insert(sig.end(), t.begin(), t.end());
      return sig;
    };
    std::map<std::vector<i64>, i64> tab;
    for (i64 x = 0; x < n; ++x) tab.emplace(signature(a, ca, x), 0);
    for (i64 x = 0; x < n; ++x) tab.emplace(signature(b, cb, x), 0);
    i64 next = 0;
    for (auto& kv : tab) kv.second = next++;
    std::vector<i64> na(n), nb(n);
    for (i64 x = 0; x < n; ++x) na[x] = tab[signature(a, ca, x)];
    for (i64 x = 0; x < n; ++x) nb[x] = tab[signature(b, cb, x)];
    ca.swap(na);
    cb.swap(nb);
    if (next == distinct) break;
    distinct = next;
  }
}

// Extends a fixed object bijection to bijections of every hom set, by
// depth-first assignment with forward propagation of all composites against
// already-assigned morphisms.  Complete: failure means no extension exists.
std::optional<std::vector<std::vector<i64>>> extend_morphisms(
    const CatIndex& ia, const CatIndex& ib, const std::vector<i64>& omap,
    i64& budget) {
  const i64 n = ia.n;
  const i64 ma = ia.total;
  std::vector<i64> fmap(ma, -1);   // A global id -> local index on the B side
  std::vector<char> used_b(ib.total, 0);
  std::vector<i64> trail;
  trail.reserve(ma);
  i64 hint = 0;

  auto bpair_of = [&](i64 apair) {
    return omap[apair / n] * n + omap[apair % n];
  };
  auto rollback = [&](i64 mark) {
    while (static_cast<i64>(trail.size()) > mark) {
      const i64 m = trail.back();
      trail.pop_back();
      used_b[ib.base[bpair_of(ia.pair_of[m])] + fmap[m]] = 0;
      fmap[m] = -1;
      if (m < hint) hint = m;
    }
  };

  std::vector<std::pair<i64, i64>> stk;
  auto assign = [&](i64 gid0, i64 j0) -> bool {
    stk.clear();
    stk.emplace_back(gid0, j0);
    while (!stk.empty()) {
      const auto [m, j] = stk.back();
      stk.pop_back();
      if (fmap[m] != -1) {
        if (fmap[m] != j) return false;
        continue;
      }
      COSEQ_REQUIRE(--budget >= 0,
                    "category isomorphism search exceeded its step budget");
      const i64 apair = ia.pair_of[m];
      const i64 x = apair / n, y = apair % n;
      const i64 i = ia.local_of[m];
      const i64 bgid = ib.base[bpair_of(apair)] + j;
      if (used_b[bgid]) return false;
      fmap[m] = j;
      used_b[bgid] = 1;
      trail.push_back(m);
      for (i64 w : ia.into[x]) {
        const i64 apwx = w * n + x;
        const i64 basewx = ia.base[apwx];
        const i64 sz = static_cast<i64>(ia.cat->hom[apwx].size());
        for (i64 k = 0; k < sz; ++k) {
          if (fmap[basewx + k] == -1) continue;
          const i64 comp_a = compose_ix(ia, w, x, y, k, i);
          const i64 comp_b = compose_ix(ib, omap[w], omap[x], omap[y],
                                        fmap[basewx + k], j);
          stk.emplace_back(ia.base[w * n + y] + comp_a, comp_b);
        }
      }
      for (i64 z : ia.outof[y]) {
        const i64 apyz = y * n + z;
        const i64 baseyz = ia.base[apyz];
        const i64 sz = static_cast<i64>(ia.cat->hom[apyz].size());
        for (i64 l = 0; l < sz; ++l) {
          if (fmap[baseyz + l] == -1) continue;
          const i64 comp_a = compose_ix(ia, x, y, z, i, l);
          const i64 comp_b = compose_ix(ib, omap[x], omap[y], omap[z], j,
                                        fmap[baseyz + l]);
          stk.emplace_back(ia.base[x * n + z] + comp_a, comp_b);
        }
      }
    }
    return true;
  };

  // Identities are forced.
  for (i64 x = 0; x < n; ++x) {
    const i64 gid = ia.base[x * n + x] + ia.cat->identity_index(x);
    if (!assign(gid, ib.cat->identity_index(omap[x]))) {
      rollback(0);
      return std::nullopt;
    }
  }

  auto next_unassigned = [&]() {
    while (hint < ma && fmap[hint] != -1) ++hint;
    return hint;
  };
  auto extract = [&]() {
    std::vector<std::vector<i64>> hom_map(n * n);
    for (i64 pr = 0; pr < n * n; ++pr) {
      const i64 sz = static_cast<i64>(ia.cat->hom[pr].size());
      hom_map[pr].resize(sz);
      for (i64 k = 0; k < sz; ++k) hom_map[pr][k] = fmap[ia.base[pr] + k];
    }
    return hom_map;
  };

  struct Frame {
    i64 gid;
    i64 next_j;
    i64 mark;
  };
  std::vector<Frame> frames;
  {
    const i64 start = next_unassigned();
    if (start == ma) return extract();
    frames.push_back({start, 0, static_cast<i64>(trail.size())});
  }
  while (!frames.empty()) {
    Frame& fr = frames.back();
    rollback(fr.mark);
    const i64 bp = bpair_of(ia.pair_of[fr.gid]);
    const i64 size_b = static_cast<i64>(ib.cat->hom[bp].size());
    bool placed = false;
    for (i64 j = fr.next_j; j < size_b; ++j) {
      if (used_b[ib.base[bp] + j]) continue;
      fr.next_j = j + 1;
      if (assign(fr.gid, j)) {
        placed = true;
        break;
      }
      rollback(fr.mark);
    }
    if (!placed) {
      frames.pop_back();
      continue;
    }
    const i64 nxt = next_unassigned();
    if (nxt == ma) return extract();
    frames.push_back({nxt, 0, static_cast<i64>(trail.size())});
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Tower-family helpers.

// (M/pM, +) as a standalone group: the extension of the trivial group by the
// exponent-p module with trivial action, so ids are mixed-radix encodings of
// the coordinate vectors.
FiniteGroup socle_group_of(i64 p, i64 rank) {
  FiniteGroup triv = FiniteGroup::from_table(MatZ::Zero(1, 1));
  TruncModule mod = make_trivial_action_module(p, VecZ::Constant(rank, p));
  std::vector<VecZ> tau(1, VecZ::Zero(rank));
  return FiniteGroup::from_extension(
      ExtensionData(std::move(triv), std::move(mod), std::move(tau)));
}

ElabTriple trivial_triple(const TowerFamily& fam) {
  Subgroup u = make_subgroup(fam.base, {fam.base.identity()});
  FiniteGroup ug = subgroup_as_group(u);
  LatticePair up = restrict_pair(fam.pair, u, ug);
  Cochain zr(ug, up.ambient_coeff(), 1);
  Cochain zs(ug, up.sub_coeff(), 1);
  CochainSeq f(up, std::move(zr), std::move(zs), fam.tau.r0, 0);
  Subgroup w = make_subgroup(fam.socle, {fam.socle.identity()});
  return ElabTriple{std::move(u), std::move(f), std::move(w)};
}

// The triple reproducing one elementary abelian subgroup of member(r):
// U = base image, W = kernel part divided by p^r, and f interpolated through
// a multiplicative section of E over U.
ElabTriple cover_triple(const TowerFamily& fam, const FiniteGroup& gr,
                        const QuotientView& view, const Subgroup& e, i64 r) {
  const i64 p = fam.pair.p;
  const i64 pr = pow_checked(p, static_cast<int>(r));
  const i64 base_id = fam.base.identity();

  // Base image U.
  std::vector<i64> uel;
  uel.reserve(e.elems.size());
  for (i64 x : e.elems) uel.push_back(gr.base_part(x));
  std::sort(uel.begin(), uel.end());
  uel.erase(std::unique(uel.begin(), uel.end()), uel.end());
  Subgroup u = make_subgroup(fam.base, std::move(uel));
  FiniteGroup ug = subgroup_as_group(u);

  // Kernel part: elements over the identity are p^r-multiples of socle
  // vectors.
  std::vector<i64> wel;
  for (i64 x : e.elems) {
    if (gr.base_part(x) != base_id) continue;
    const VecZ lifted = view.lift(gr.module_part(x));
    VecZ wv(lifted.size());
    for (i64 i = 0; i < lifted.size(); ++i) {
      COSEQ_REQUIRE(lifted[i] % pr == 0,
                    "kernel element of the subgroup is not a socle multiple");
      wv[i] = mod_norm(lifted[i] / pr, p);
    }
    wel.push_back(fam.socle.encode(wv, 0));
  }
  std::sort(wel.begin(), wel.end());
  Subgroup w = make_subgroup(fam.socle, std::move(wel));

  // Multiplicative section of E over U: pick subgroup elements whose base
  // parts are independent, extend multiplicatively.  Because the complement
  // is elementary abelian this is a homomorphism, so the resulting cochain
  // satisfies the coboundary identity on the nose.
  std::vector<i64> sec;
  std::set<i64> uspan = {base_id};
  for (i64 x : e.elems) {
    const i64 b = gr.base_part(x);
    if (uspan.count(b)) continue;
    sec.push_back(x);
    std::vector<i64> pows;
    i64 acc = b;
    for (i64 j = 1; j < p; ++j) {
      pows.push_back(acc);
      acc = fam.base.mul(acc, b);
    }
    std::vector<i64> cur(uspan.begin(), uspan.end());
    for (i64 y : cur)
      for (i64 pw : pows) uspan.insert(fam.base.mul(y, pw));
  }
  COSEQ_REQUIRE(static_cast<i64>(uspan.size()) == u.order(),
                "section basis does not span the base image");

  const i64 total = u.order();
  const i64 k = static_cast<i64>(sec.size());
  std::vector<i64> weight(k);
  {
    i64 wgt = 1;
    for (i64 j = 0; j < k; ++j) {
      weight[j] = wgt;
      wgt *= p;
    }
    COSEQ_REQUIRE(wgt == total, "section basis has the wrong size");
  }
  std::vector<i64> sval(total);
  sval[0] = gr.identity();
  std::unordered_map<i64, i64> sect;
  sect.reserve(total * 2);
  sect[base_id] = gr.identity();
  for (i64 c = 1; c < total; ++c) {
    i64 j = 0;
    while ((c / weight[j]) % p == 0) ++j;
    sval[c] = gr.mul(sval[c - weight[j]], sec[j]);
    sect[gr.base_part(sval[c])] = sval[c];
  }
  COSEQ_REQUIRE(static_cast<i64>(sect.size()) == total,
                "section is not a bijection onto the base image");

  // The section as a cochain phi with coboundary equal to tau_r on U.
  LatticePair up = restrict_pair(fam.pair, u, ug);
  const QuotientView uview = quotient_view(up, ug, r);
  Cochain phi(ug, CoeffModule(uview.module), 1);
  for (i64 pos = 0; pos < total; ++pos) {
    const i64 u_id = u.elems[pos];
    if (u_id == base_id) continue;
    const VecZ lifted = view.lift(gr.module_part(sect.at(u_id)));
    const i64 tup[1] = {pos};
    phi.set_value(tup, uview.project((-lifted).eval()));
  }

  // Tower through phi: a witness tower for tau restricted to U, corrected by
  // a low-level tower passing exactly through the difference at index r.
  CochainSeq rt(up, restrict_cochain(fam.tau.rho, u, ug),
                restrict_cochain(fam.tau.sigma, u, ug), fam.tau.r0,
                fam.tau.omega);
  std::optional<CochainSeq> f0 = is_coboundary_seq(rt);
  COSEQ_REQUIRE(f0.has_value(),
                "family tower does not split over the base image");
  const Cochain diff = phi - seq_eval(*f0, r);
  CochainSeq z = seq_through(up, diff, fam.tau.r0, r);
  CochainSeq f = seq_add(*f0, z);
  return ElabTriple{std::move(u), std::move(f), std::move(w)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Category structure.

const std::vector<std::vector<i64>>& QuillenCategory::hom_of(i64 a,
                                                             i64 b) const {
  const i64 n = object_count();
  COSEQ_REQUIRE(a >= 0 && a < n && b >= 0 && b < n,
                "object index out of range");
  return hom[a * n + b];
}

i64 QuillenCategory::morphism_count() const {
  i64 total = 0;
  for (const auto& cell : hom) total += static_cast<i64>(cell.size());
  return total;
}

i64 QuillenCategory::identity_index(i64 a) const {
  const auto& auts = hom_of(a, a);
  auto it = std::lower_bound(auts.begin(), auts.end(), objects[a].elems);
  COSEQ_REQUIRE(it != auts.end() && *it == objects[a].elems,
                "identity map missing from the category");
  return it - auts.begin();
}

i64 QuillenCategory::compose(i64 a, i64 b, i64 c, i64 i, i64 j) const {
  const auto& f = hom_of(a, b);
  const auto& g = hom_of(b, c);
  COSEQ_REQUIRE(i >= 0 && i < static_cast<i64>(f.size()) && j >= 0 &&
                    j < static_cast<i64>(g.size()),
                "morphism index out of range");
  const auto& mid = objects[b].elems;
  std::vector<i64> comp(f[i].size());
  for (std::size_t t = 0; t < f[i].size(); ++t)
    comp[t] = g[j][position_in(mid, f[i][t])];
  const auto& target = hom_of(a, c);
  auto it = std::lower_bound(target.begin(), target.end(), comp);
  COSEQ_REQUIRE(it != target.end() && *it == comp,
                "composite map missing from the category");
  return it - target.begin();
}

// ---------------------------------------------------------------------------
// Construction.

QuillenCategory build_category_on(const FiniteGroup& g,
                                  std::vector<Subgroup> subs,
                                  const QuillenOptions& opt) {
  COSEQ_REQUIRE(g.valid(), "group is not initialized");
  COSEQ_REQUIRE(g.order() <= opt.max_order,
                "group order exceeds the configured bound");
  QuillenCategory cat;
  cat.group = g;
  if (subs.empty()) return cat;
  {
    std::set<std::vector<i64>> seen;
    for (const Subgroup& s : subs) {
      COSEQ_REQUIRE(s.parent.same(g), "subgroup belongs to a different group");
      COSEQ_REQUIRE(seen.insert(s.elems).second,
                    "duplicate subgroup in the category input");
    }
  }
  std::vector<std::vector<Subgroup>> classes =
      conjugacy_classes_of_subgroups(g, subs);
  COSEQ_REQUIRE(static_cast<i64>(classes.size()) <= opt.max_objects,
                "the category would exceed the configured object budget");
  const i64 n = static_cast<i64>(classes.size());
  for (auto& cls : classes) {
    cat.objects.push_back(cls.front());
    cat.class_sizes.push_back(static_cast<i64>(cls.size()));
  }
  cat.hom.assign(n * n, {});

  // Membership bitmask per group element over the representatives, so each
  // conjugation map can be dispatched to every representative containing its
  // image in one AND-scan.
  const i64 words = (n + 63) / 64;
  std::vector<u64> member_bits(static_cast<std::size_t>(words) * g.order(), 0);
  for (i64 b = 0; b < n; ++b)
    for (i64 id : cat.objects[b].elems)
      member_bits[static_cast<std::size_t>(id) * words + b / 64] |=
          u64{1} << (b % 64);

  const std::vector<i64> gens = find_generators(g);
  std::vector<u64> acc(words);
  for (i64 a = 0; a < n; ++a) {
    const Subgroup& src = cat.objects[a];
    const SourceTable st = source_table(g, src.elems);

    // Orbit of the basis tuple under simultaneous conjugation by G; every
    // conjugation map of src is reached along generator products.
    std::set<std::vector<i64>> seen;
    std::vector<std::vector<i64>> queue;
    seen.insert(st.basis);
    queue.push_back(st.basis);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::vector<i64> cur = queue[head];
      std::vector<i64> nxt(cur.size());
      for (i64 cg : gens) {
        for (std::size_t t = 0; t < cur.size(); ++t)
          nxt[t] = g.conj(cg, cur[t]);
        if (seen.insert(nxt).second) queue.push_back(nxt);
      }
    }

    for (const auto& tuple : queue) {
      std::vector<i64> fvec = materialize_map(g, st, src.elems, tuple);
      for (i64 wd = 0; wd < words; ++wd)
        acc[wd] = member_bits[static_cast<std::size_t>(fvec[0]) * words + wd];
      for (std::size_t t = 1; t < fvec.size(); ++t) {
        const u64* row =
            &member_bits[static_cast<std::size_t>(fvec[t]) * words];
        for (i64 wd = 0; wd < words; ++wd) acc[wd] &= row[wd];
      }
      for (i64 wd = 0; wd < words; ++wd) {
        u64 bits = acc[wd];
        while (bits) {
          const int bit = __builtin_ctzll(bits);
          bits &= bits - 1;
          const i64 b = wd * 64 + bit;
          cat.hom[a * n + b].push_back(fvec);
        }
      }
    }
  }
  for (auto& cell : cat.hom) std::sort(cell.begin(), cell.end());

  // Invariants: identities present, composition closed on the stored sets.
  std::vector<std::unordered_map<i64, i64>> pos(n);
  for (i64 a = 0; a < n; ++a) {
    cat.identity_index(a);
    for (i64 t = 0; t < cat.objects[a].order(); ++t)
      pos[a][cat.objects[a].elems[t]] = t;
  }
  for (i64 a = 0; a < n; ++a)
    for (i64 b = 0; b < n; ++b) {
      const auto& fs = cat.hom[a * n + b];
      if (fs.empty()) continue;
      for (i64 c = 0; c < n; ++c) {
        const auto& gs = cat.hom[b * n + c];
        if (gs.empty()) continue;
        const auto& target = cat.hom[a * n + c];
        std::vector<i64> comp(cat.objects[a].order());
        for (const auto& fv : fs)
          for (const auto& gv : gs) {
            for (std::size_t t = 0; t < fv.size(); ++t)
              comp[t] = gv[pos[b].at(fv[t])];
            auto it = std::lower_bound(target.begin(), target.end(), comp);
            COSEQ_REQUIRE(it != target.end() && *it == comp,
                          "category is not closed under composition");
          }
      }
    }
  return cat;
}

QuillenCategory build_category(const FiniteGroup& g,
                               const QuillenOptions& opt) {
  COSEQ_REQUIRE(g.valid(), "group is not initialized");
  COSEQ_REQUIRE(g.order() <= opt.max_order,
                "group order exceeds the configured bound");
  return build_category_on(
      g, enumerate_elementary_abelians(g, opt.include_trivial, opt.max_order),
      opt);
}

// ---------------------------------------------------------------------------
// Skeletons.

bool is_skeletal(const QuillenCategory& cat) {
  const i64 n = cat.object_count();
  for (i64 a = 0; a < n; ++a)
    for (i64 b = a + 1; b < n; ++b) {
      const auto& ab = cat.hom[a * n + b];
      const auto& ba = cat.hom[b * n + a];
      if (ab.empty() || ba.empty()) continue;
      const i64 ida = cat.identity_index(a);
      const i64 idb = cat.identity_index(b);
      for (i64 i = 0; i < static_cast<i64>(ab.size()); ++i)
        for (i64 j = 0; j < static_cast<i64>(ba.size()); ++j)
          if (cat.compose(a, b, a, i, j) == ida &&
              cat.compose(b, a, b, j, i) == idb)
            return false;
    }
  return true;
}

QuillenCategory skeleton(const QuillenCategory& cat) {
  const i64 n = cat.object_count();
  std::vector<i64> root(n);
  for (i64 a = 0; a < n; ++a) root[a] = a;
  std::function<i64(i64)> find = [&](i64 a) {
    while (root[a] != a) a = root[a] = root[root[a]];
    return a;
  };
  for (i64 a = 0; a < n; ++a)
    for (i64 b = a + 1; b < n; ++b) {
      const auto& ab = cat.hom[a * n + b];
      const auto& ba = cat.hom[b * n + a];
      if (ab.empty() || ba.empty()) continue;
      const i64 ida = cat.identity_index(a);
      const i64 idb = cat.identity_index(b);
      bool iso = false;
      for (i64 i = 0; i < static_cast<i64>(ab.size()) && !iso; ++i)
        for (i64 j = 0; j < static_cast<i64>(ba.size()) && !iso; ++j)
          iso = cat.compose(a, b, a, i, j) == ida &&
                cat.compose(b, a, b, j, i) == idb;
      if (iso) root[find(b)] = find(a);
    }
  std::vector<i64> keep;
  for (i64 a = 0; a < n; ++a)
    if (find(a) == a) keep.push_back(a);
  QuillenCategory out;
  out.group = cat.group;
  const i64 k = static_cast<i64>(keep.size());
  out.hom.assign(k * k, {});
  for (i64 a = 0; a < k; ++a) {
    out.objects.push_back(cat.objects[keep[a]]);
    out.class_sizes.push_back(cat.class_sizes[keep[a]]);
    for (i64 b = 0; b < k; ++b)
      out.hom[a * k + b] = cat.hom[keep[a] * n + keep[b]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Isomorphism witnesses.

bool witness_valid(const QuillenCategory& a, const QuillenCategory& b,
                   const FunctorWitness& w) {
  const i64 n = a.object_count();
  if (b.object_count() != n) return false;
  if (static_cast<i64>(w.object_map.size()) != n) return false;
  if (static_cast<i64>(w.hom_map.size()) != n * n) return false;
  std::vector<char> hit(n, 0);
  for (i64 x = 0; x < n; ++x) {
    const i64 y = w.object_map[x];
    if (y < 0 || y >= n || hit[y]) return false;
    hit[y] = 1;
  }
  for (i64 x = 0; x < n; ++x)
    for (i64 y = 0; y < n; ++y) {
      const auto& fs = a.hom[x * n + y];
      const auto& gs = b.hom[w.object_map[x] * n + w.object_map[y]];
      const auto& hm = w.hom_map[x * n + y];
      if (fs.size() != gs.size()) return false;
      if (hm.size() != fs.size()) return false;
      std::vector<char> used(gs.size(), 0);
      for (i64 idx : hm) {
        if (idx < 0 || idx >= static_cast<i64>(gs.size()) || used[idx])
          return false;
        used[idx] = 1;
      }
    }
  for (i64 x = 0; x < n; ++x)
    if (w.hom_map[x * n + x][a.identity_index(x)] !=
        b.identity_index(w.object_map[x]))
      return false;
  for (i64 x = 0; x < n; ++x)
    for (i64 y = 0; y < n; ++y) {
      const auto& fs = a.hom[x * n + y];
      if (fs.empty()) continue;
      for (i64 z = 0; z < n; ++z) {
        const auto& gs = a.hom[y * n + z];
        if (gs.empty()) continue;
        for (i64 i = 0; i < static_cast<i64>(fs.size()); ++i)
          for (i64 j = 0; j < static_cast<i64>(gs.size()); ++j) {
            const i64 lhs = w.hom_map[x * n + z][a.compose(x, y, z, i, j)];
            const i64 rhs = b.compose(
                w.object_map[x], w.object_map[y], w.object_map[z],
                w.hom_map[x * n + y][i], w.hom_map[y * n + z][j]);
            if (lhs != rhs) return false;
          }
      }
    }
  return true;
}

std::optional<FunctorWitness> categories_isomorphic(const QuillenCategory& a,
                                                    const QuillenCategory& b) {
  COSEQ_REQUIRE(is_skeletal(a), "first category is not skeletal");
  COSEQ_REQUIRE(is_skeletal(b), "second category is not skeletal");
  const i64 n = a.object_count();
  if (n != b.object_count()) return std::nullopt;
  if (n == 0) return FunctorWitness{{}, {}};
  if (a.morphism_count() != b.morphism_count()) return std::nullopt;

  const std::vector<i64> ha = poset_heights(a);
  const std::vector<i64> hb = poset_heights(b);
  std::vector<i64> ca, cb;
  refine_colors(a, b, ha, hb, ca, cb);
  {
    std::map<i64, i64> count_a, count_b;
    for (i64 x = 0; x < n; ++x) ++count_a[ca[x]];
    for (i64 x = 0; x < n; ++x) ++count_b[cb[x]];
    if (count_a != count_b) return std::nullopt;
  }
  std::map<i64, std::vector<i64>> by_color_b;
  for (i64 y = 0; y < n; ++y) by_color_b[cb[y]].push_back(y);
  std::vector<std::vector<i64>> cand(n);
  for (i64 x = 0; x < n; ++x) cand[x] = by_color_b[ca[x]];

  std::vector<i64> order(n);
  for (i64 x = 0; x < n; ++x) order[x] = x;
  std::sort(order.begin(), order.end(), [&](i64 u, i64 v) {
    if (cand[u].size() != cand[v].size())
      return cand[u].size() < cand[v].size();
    return u < v;
  });

  const CatIndex ia = index_category(a);
  const CatIndex ib = index_category(b);
  i64 budget = 100'000'000;
  std::vector<i64> omap(n, -1);
  std::vector<char> used(n, 0);
  std::optional<FunctorWitness> found;

  std::function<bool(i64)> rec = [&](i64 d) -> bool {
    if (d == n) {
      auto hm = extend_morphisms(ia, ib, omap, budget);
      if (!hm) return false;
      FunctorWitness w{omap, std::move(*hm)};
      COSEQ_REQUIRE(witness_valid(a, b, w),
                    "isomorphism witness failed verification");
      found = std::move(w);
      return true;
    }
    const i64 x = order[d];
    for (i64 y : cand[x]) {
      if (used[y]) continue;
      bool ok = true;
      for (i64 e = 0; e < d && ok; ++e) {
        const i64 u = order[e];
        ok = a.hom[x * n + u].size() == b.hom[y * n + omap[u]].size() &&
             a.hom[u * n + x].size() == b.hom[omap[u] * n + y].size();
      }
      if (!ok) continue;
      omap[x] = y;
      used[y] = 1;
      if (rec(d + 1)) return true;
      omap[x] = -1;
      used[y] = 0;
    }
    return false;
  };
  rec(0);
  return found;
}

// ---------------------------------------------------------------------------
// Serialization.

std::string category_to_json(const QuillenCategory& cat) {
  using njson = nlohmann::json;
  const i64 n = cat.object_count();
  const i64 p = cat.group.valid() && cat.group.order() > 1 ? cat.group.prime()
                                                           : 0;
  njson j;
  j["group_order"] = cat.group.valid() ? cat.group.order() : 0;
  j["object_count"] = n;
  j["morphism_count"] = cat.morphism_count();
  njson objs = njson::array();
  for (i64 a = 0; a < n; ++a) {
    njson o;
    o["index"] = a;
    o["order"] = cat.objects[a].order();
    o["rank"] = p > 1 ? rank_log_p(cat.objects[a].order(), p) : 0;
    o["class_size"] = cat.class_sizes[a];
    o["elements"] = cat.objects[a].elems;
    o["generators"] = greedy_basis(cat.group, cat.objects[a].elems);
    objs.push_back(std::move(o));
  }
  j["objects"] = std::move(objs);
  njson homs = njson::array();
  for (i64 a = 0; a < n; ++a)
    for (i64 b = 0; b < n; ++b) {
      const auto& cell = cat.hom[a * n + b];
      if (cell.empty()) continue;
      njson h;
      h["from"] = a;
      h["to"] = b;
      h["maps"] = cell;
      homs.push_back(std::move(h));
    }
  j["hom"] = std::move(homs);
  njson comp = njson::array();
  for (i64 a = 0; a < n; ++a)
    for (i64 b = 0; b < n; ++b) {
      const auto& fs = cat.hom[a * n + b];
      if (fs.empty()) continue;
      for (i64 c = 0; c < n; ++c) {
        const auto& gs = cat.hom[b * n + c];
        if (gs.empty()) continue;
        njson entry;
        entry["from"] = a;
        entry["via"] = b;
        entry["to"] = c;
        std::vector<std::vector<i64>> table(fs.size());
        for (i64 i = 0; i < static_cast<i64>(fs.size()); ++i) {
          table[i].resize(gs.size());
          for (i64 jx = 0; jx < static_cast<i64>(gs.size()); ++jx)
            table[i][jx] = cat.compose(a, b, c, i, jx);
        }
        entry["table"] = std::move(table);
        comp.push_back(std::move(entry));
      }
    }
  j["composition"] = std::move(comp);
  return j.dump(2) + "\n";
}

std::string category_to_dot(const QuillenCategory& cat, bool show_auts) {
  const i64 n = cat.object_count();
  std::ostringstream os;
  os << "digraph quillen {\n  rankdir=BT;\n  node [shape=box];\n";
  for (i64 a = 0; a < n; ++a) {
    os << "  e" << a << " [label=\"order " << cat.objects[a].order();
    if (cat.class_sizes[a] > 1) os << " (x" << cat.class_sizes[a] << ")";
    os << "\"];\n";
  }
  for (i64 a = 0; a < n; ++a)
    for (i64 b = 0; b < n; ++b) {
      const auto& cell = cat.hom[a * n + b];
      if (cell.empty()) continue;
      if (a == b) {
        if (!show_auts) continue;
        const i64 ida = cat.identity_index(a);
        for (i64 i = 0; i < static_cast<i64>(cell.size()); ++i)
          if (i != ida) os << "  e" << a << " -> e" << a << ";\n";
      } else {
        for (std::size_t i = 0; i < cell.size(); ++i)
          os << "  e" << a << " -> e" << b << ";\n";
      }
    }
  os << "}\n";
  return os.str();
}

std::string witness_to_json(const QuillenCategory& a, const QuillenCategory& b,
                            const FunctorWitness& w) {
  using njson = nlohmann::json;
  const i64 n = a.object_count();
  njson j;
  j["object_count"] = n;
  j["object_map"] = w.object_map;
  njson homs = njson::array();
  for (i64 x = 0; x < n; ++x)
    for (i64 y = 0; y < n; ++y) {
      if (a.hom[x * n + y].empty()) continue;
      njson h;
      h["from"] = x;
      h["to"] = y;
      h["map"] = w.hom_map[x * n + y];
      homs.push_back(std::move(h));
    }
  j["hom_maps"] = std::move(homs);
  j["verified"] = witness_valid(a, b, w);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Extension towers.

const FiniteGroup& TowerFamily::member(i64 r) const {
  COSEQ_REQUIRE(cache != nullptr, "family is not initialized");
  if (auto it = cache->find(r); it != cache->end()) return it->second;
  const Cochain layer = seq_eval(tau, r);
  const TruncModule& mod = std::get<TruncModule>(layer.coeff());
  const i64 nb = base.order();
  std::vector<VecZ> table;
  table.reserve(nb * nb);
  for (i64 g1 = 0; g1 < nb; ++g1)
    for (i64 g2 = 0; g2 < nb; ++g2) {
      const i64 tup[2] = {g1, g2};
      table.push_back(layer.value(tup));
    }
  auto res = cache->emplace(
      r, FiniteGroup::from_extension(ExtensionData(base, mod, std::move(table))));
  return res.first->second;
}

TowerFamily make_tower_family(FiniteGroup base, LatticePair pair,
                              CochainSeq tau) {
  COSEQ_REQUIRE(base.valid(), "family base group is not initialized");
  COSEQ_REQUIRE(tau.group().same(base),
                "family tower lives over a different group");
  COSEQ_REQUIRE(tau.degree() == 2, "family tower must have degree 2");
  COSEQ_REQUIRE(base.order() == 1 || base.prime() == pair.p,
                "family pair prime does not match the base group");
  const MatZ expect =
      (MatZ::Identity(pair.rank, pair.rank) * pair.p).eval();
  COSEQ_REQUIRE(mats_equal(pair.n_basis, expect),
                "family pair must have sublattice p times the ambient lattice");
  COSEQ_REQUIRE(mats_equal(tau.pair.n_basis, pair.n_basis) &&
                    tau.pair.p == pair.p && tau.pair.rank == pair.rank &&
                    tau.pair.action.size() == pair.action.size(),
                "the pair attached to the tower differs from the family pair");
  for (std::size_t i = 0; i < pair.action.size(); ++i)
    COSEQ_REQUIRE(mats_equal(tau.pair.action[i], pair.action[i]),
                  "the pair attached to the tower differs from the family pair");
  COSEQ_REQUIRE(seq_is_cocycle(tau), "family tower must be a cocycle tower");
  const i64 m = group_log_order(base).m;
  COSEQ_REQUIRE(seq_level(tau) <= 2 * m,
                "family tower level exceeds twice the base log-order");
  const i64 p = pair.p;
  const i64 rank = pair.rank;
  TowerFamily fam{std::move(base), std::move(pair), std::move(tau),
                  socle_group_of(p, rank),
                  std::make_shared<std::map<i64, FiniteGroup>>()};
  return fam;
}

LatticePair restrict_pair(const LatticePair& pair, const Subgroup& q,
                          const FiniteGroup& qgroup) {
  require_position_group(q, qgroup);
  std::vector<MatZ> action;
  if (!pair.action.empty()) {
    action.reserve(q.elems.size());
    for (i64 id : q.elems) action.push_back(pair.action[id]);
  }
  return make_lattice_pair(qgroup, pair.p, pair.n_basis, std::move(action),
                           pair.work_k);
}

CochainSeq restrict_seq(const CochainSeq& s, const Subgroup& q,
                        const FiniteGroup& qgroup) {
  LatticePair rp = restrict_pair(s.pair, q, qgroup);
  Cochain rho = restrict_cochain(s.rho, q, qgroup);
  Cochain sigma = restrict_cochain(s.sigma, q, qgroup);
  return CochainSeq(std::move(rp), std::move(rho), std::move(sigma), s.r0,
                    s.omega);
}

Subgroup elab_from_triple(const TowerFamily& fam, const ElabTriple& t, i64 r) {
  COSEQ_REQUIRE(fam.cache != nullptr, "family is not initialized");
  COSEQ_REQUIRE(t.u.parent.same(fam.base),
                "triple subgroup lives in a different group");
  COSEQ_REQUIRE(t.w.parent.same(fam.socle),
                "triple socle subgroup lives in a different module");
  COSEQ_REQUIRE(t.f.degree() == 1, "triple tower must have degree 1");
  COSEQ_REQUIRE(t.f.r0 == fam.tau.r0,
                "triple tower must start at the family index");
  COSEQ_REQUIRE(r >= t.f.r0, "requested index below the tower start");
  const i64 m = group_log_order(fam.base).m;
  COSEQ_REQUIRE(seq_level(t.f) <= 2 * m,
                "triple tower level exceeds twice the base log-order");
  const FiniteGroup& ug = t.f.group();
  require_position_group(t.u, ug);
  COSEQ_REQUIRE(seq_equal(seq_delta(t.f), restrict_seq(fam.tau, t.u, ug)),
                "triple tower is not a lift of the family tower on the "
                "subgroup");

  const i64 p = fam.pair.p;
  for (i64 w_id : t.w.elems) {
    const VecZ wv = fam.socle.module_part(w_id);
    if (fam.pair.action.empty()) break;
    for (i64 u_id : t.u.elems) {
      const VecZ av = (fam.pair.action[u_id] * wv).eval();
      for (i64 i = 0; i < wv.size(); ++i)
        COSEQ_REQUIRE(mod_norm(av[i] - wv[i], p) == 0,
                      "socle subgroup is not fixed by the base subgroup");
    }
  }

  const FiniteGroup& gr = fam.member(r);
  const QuotientView view = quotient_view(fam.pair, fam.base, r);
  const QuotientView uview = quotient_view(t.f.pair, ug, r);
  const Cochain fr = seq_eval(t.f, r);
  const i64 pr = pow_checked(p, static_cast<int>(r));

  std::vector<i64> ids;
  ids.reserve(t.w.order() * t.u.order());
  for (i64 pos = 0; pos < t.u.order(); ++pos) {
    const i64 u_id = t.u.elems[pos];
    const i64 tup[1] = {pos};
    const VecZ fm = uview.lift(fr.value(tup));
    for (i64 w_id : t.w.elems) {
      const VecZ wv = fam.socle.module_part(w_id);
      const VecZ mvec = (pr * wv - fm).eval();
      ids.push_back(gr.encode(view.project(mvec), u_id));
    }
  }
  std::sort(ids.begin(), ids.end());
  COSEQ_REQUIRE(std::adjacent_find(ids.begin(), ids.end()) == ids.end(),
                "triple produces repeated elements");
  Subgroup out = make_subgroup(gr, std::move(ids));
  COSEQ_REQUIRE(out.order() == t.w.order() * t.u.order(),
                "triple subgroup has the wrong order");
  const std::vector<i64> basis = greedy_basis(gr, out.elems);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    COSEQ_REQUIRE(element_order(gr, basis[i]) == p,
                  "triple subgroup is not elementary abelian");
    for (std::size_t j = i + 1; j < basis.size(); ++j)
      COSEQ_REQUIRE(gr.mul(basis[i], basis[j]) == gr.mul(basis[j], basis[i]),
                    "triple subgroup is not elementary abelian");
  }
  return out;
}

CoverReport triples_cover(const TowerFamily& fam, i64 r) {
  COSEQ_REQUIRE(fam.cache != nullptr, "family is not initialized");
  const FiniteGroup& gr = fam.member(r);
  const QuotientView view = quotient_view(fam.pair, fam.base, r);
  CoverReport rep;
  rep.r = r;
  rep.elabs = enumerate_elementary_abelians(gr, true);
  const ElabTriple fallback = trivial_triple(fam);
  for (i64 idx = 0; idx < static_cast<i64>(rep.elabs.size()); ++idx) {
    try {
      ElabTriple t = cover_triple(fam, gr, view, rep.elabs[idx], r);
      const Subgroup back = elab_from_triple(fam, t, r);
      COSEQ_REQUIRE(back.elems == rep.elabs[idx].elems,
                    "triple does not reproduce its subgroup");
      rep.triples.push_back(std::move(t));
    } catch (const Error&) {
      rep.triples.push_back(fallback);
      rep.exceptions.push_back(idx);
    }
  }
  return rep;
}

CochainSeq chi_seq(const TowerFamily& fam, i64 g, const ElabTriple& t,
                   const ElabTriple& tprime) {
  COSEQ_REQUIRE(fam.cache != nullptr, "family is not initialized");
  const FiniteGroup& g0 = fam.base;
  COSEQ_REQUIRE(t.u.parent.same(g0) && tprime.u.parent.same(g0),
                "triples live over a different family base");
  COSEQ_REQUIRE(g >= 0 && g < g0.order(), "conjugating element out of range");
  COSEQ_REQUIRE(t.f.degree() == 1 && tprime.f.degree() == 1,
                "lift towers must have degree 1");
  COSEQ_REQUIRE(t.f.r0 == tprime.f.r0, "towers start at different indices");
  COSEQ_REQUIRE(t.f.r0 == fam.tau.r0,
                "towers must start at the family index");
  {
    std::vector<i64> conj_u;
    conj_u.reserve(t.u.elems.size());
    for (i64 u : t.u.elems) conj_u.push_back(g0.conj(g, u));
    std::sort(conj_u.begin(), conj_u.end());
    COSEQ_REQUIRE(conj_u == tprime.u.elems,
                  "the conjugate of the first subgroup is not the second");
  }
  const FiniteGroup& vg = tprime.f.group();
  require_position_group(tprime.u, vg);
  const LatticePair& vp = tprime.f.pair;
  if (fam.pair.action.empty()) {
    COSEQ_REQUIRE(vp.action.empty(),
                  "restricted pair does not match the family pair");
  } else {
    COSEQ_REQUIRE(static_cast<i64>(vp.action.size()) == tprime.u.order(),
                  "restricted pair does not match the family pair");
    for (i64 pos = 0; pos < tprime.u.order(); ++pos)
      COSEQ_REQUIRE(
          mats_equal(vp.action[pos], fam.pair.action[tprime.u.elems[pos]]),
          "restricted pair does not match the family pair on the subgroup");
  }

  const i64 ginv = g0.inv(g);
  Cochain rho1(vg, vp.ambient_coeff(), 1);
  Cochain sig1(vg, vp.sub_coeff(), 1);
  Cochain rho2(vg, vp.ambient_coeff(), 1);
  Cochain sig2(vg, vp.sub_coeff(), 1);
  Cochain rho3(vg, vp.ambient_coeff(), 1);
  Cochain sig3(vg, vp.sub_coeff(), 1);
  for (i64 pos = 0; pos < tprime.u.order(); ++pos) {
    const i64 v_id = tprime.u.elems[pos];
    if (v_id == g0.identity()) continue;
    const i64 v_conj = g0.mul(g0.mul(ginv, v_id), g);
    const i64 pv[1] = {pos};
    // transported lift: g . f(v^g)
    {
      const i64 pu[1] = {position_in(t.u.elems, v_conj)};
      VecZ rv = t.f.rho.value(pu);
      VecZ sv = t.f.sigma.value(pu);
      if (!fam.pair.action.empty()) {
        rv = (fam.pair.action[g] * rv).eval();
        sv = (fam.pair.n_action[g] * sv).eval();
      }
      rho1.set_value(pv, rv);
      sig1.set_value(pv, sv);
    }
    // slices of the family tower at (g, v^g) and (v, g)
    {
      const i64 tl[2] = {g, v_conj};
      rho2.set_value(pv, fam.tau.rho.value(tl));
      sig2.set_value(pv, fam.tau.sigma.value(tl));
      const i64 tr[2] = {v_id, g};
      rho3.set_value(pv, fam.tau.rho.value(tr));
      sig3.set_value(pv, fam.tau.sigma.value(tr));
    }
  }
  CochainSeq t1(vp, std::move(rho1), std::move(sig1), t.f.r0, t.f.omega);
  CochainSeq t2(vp, std::move(rho2), std::move(sig2), fam.tau.r0,
                fam.tau.omega);
  CochainSeq t3(vp, std::move(rho3), std::move(sig3), fam.tau.r0,
                fam.tau.omega);
  const CochainSeq left = seq_add(t1, seq_scale(-1, t2));
  const CochainSeq right = seq_add(t3, seq_scale(-1, tprime.f));
  return seq_add(left, right);
}

}  // namespace coseq

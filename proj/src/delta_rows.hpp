#pragma once

// Internal: sparse symbolic rows of the coboundary matrix, shared by the
// cochain and tower translation units.

#include <map>
#include <utility>
#include <vector>

#include "coseq/cochain.hpp"

namespace coseq {
namespace detail {

// Sparse rows of the coboundary matrix C^n -> C^{n+1} over per-coordinate
// residues.  For each output coordinate, fn(lhs, out_exp, out_global) is
// called with the dependence of that coordinate on the C^n coordinates.
template <typename Fn>
void for_each_delta_row(const FiniteGroup& g, const CoeffModule& cm, int n,
                        Fn&& fn) {
  const i64 d = coeff_rank(cm);
  const Cochain domain(g, cm, n);
  Cochain codomain(g, cm, n + 1);
  const TruncModule* tm =
      coeff_is_free(cm) ? nullptr : &std::get<TruncModule>(cm);

  std::vector<std::map<i64, i64>> coefs(d);
  for (i64 out_idx = 0; out_idx < codomain.entries(); ++out_idx) {
    const std::vector<i64> out = codomain.tuple_of(out_idx);
    for (auto& m : coefs) m.clear();

    // Action term: {}^{g1} f(g2..g_{n+1}).
    {
      std::vector<i64> t(out.begin() + 1, out.end());
      const i64 in_idx = [&] {
        // All entries are non-identity, so the index is direct.
        i64 idx = 0;
        const i64 nn = g.order() - 1, e = g.identity();
        for (i64 x : t) idx = idx * nn + (x < e ? x : x - 1);
        return idx;
      }();
      const MatZ* a = nullptr;
      if (tm && !tm->action.empty()) a = &tm->action[out[0]];
      if (!tm) {
        const auto& fc = std::get<FreeCoeff>(cm);
        if (!fc.action.empty()) a = &fc.action[out[0]];
      }
      for (i64 r = 0; r < d; ++r) {
        if (a) {
          for (i64 c = 0; c < d; ++c)
            if ((*a)(r, c) != 0) coefs[r][in_idx * d + c] += (*a)(r, c);
        } else {
          coefs[r][in_idx * d + r] += 1;
        }
      }
    }
    // Merge terms and the final drop term.
    i64 sign = 1;
    std::vector<i64> t;
    for (int i = 1; i <= n + 1; ++i) {
      sign = -sign;
      if (i <= n) {
        t.assign(out.begin(), out.end());
        t[i - 1] = g.mul(out[i - 1], out[i]);
        t.erase(t.begin() + i);
      } else {
        t.assign(out.begin(), out.end() - 1);
      }
      bool has_e = false;
      for (i64 x : t)
        if (x == g.identity()) has_e = true;
      if (has_e) continue;
      i64 idx = 0;
      const i64 nn = g.order() - 1, e = g.identity();
      for (i64 x : t) idx = idx * nn + (x < e ? x : x - 1);
      for (i64 r = 0; r < d; ++r) coefs[r][idx * d + r] += sign;
    }

    for (i64 r = 0; r < d; ++r) {
      SRow lhs;
      for (auto [col, v] : coefs[r]) lhs.push(col, v);
      const int out_exp =
          tm ? static_cast<int>(val_p(tm->orders[r], tm->p)) : 0;
      fn(std::move(lhs), out_exp, out_idx * d + r);
    }
  }
}

} // namespace detail
} // namespace coseq

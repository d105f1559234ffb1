#include "coseq/sequence.hpp"

#include <sstream>

#include "delta_rows.hpp"

namespace coseq {
namespace {

using I128 = __int128;

i64 checked_i64(I128 v, const char* what) {
  constexpr I128 kBound = I128(1) << 62;
  if (v >= kBound || v <= -kBound)
    fail(std::string(what) + ": integer overflow");
  return static_cast<i64>(v);
}

bool same_action(const std::vector<MatZ>& a, const std::vector<MatZ>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
    if ((a[i] - b[i]).cwiseAbs().sum() != 0) return false;
  }
  return true;
}

void require_free_shape(const Cochain& f, const FreeCoeff& want,
                        const char* role) {
  const FreeCoeff* have = std::get_if<FreeCoeff>(&f.coeff());
  COSEQ_REQUIRE(have != nullptr,
                std::string(role) + " must take values in a free lattice");
  COSEQ_REQUIRE(have->p == want.p && have->rank == want.rank,
                std::string(role) + " has the wrong coefficient shape");
  COSEQ_REQUIRE(same_action(have->action, want.action),
                std::string(role) + " carries a different group action");
}

// B * v with overflow checks.
VecZ mat_apply(const MatZ& b, const VecZ& v, const char* what) {
  VecZ out(b.rows());
  for (i64 r = 0; r < b.rows(); ++r) {
    I128 acc = 0;
    for (i64 c = 0; c < b.cols(); ++c) acc += I128(b(r, c)) * v[c];
    out[r] = checked_i64(acc, what);
  }
  return out;
}

// sigma reduced coordinatewise mod p^omega (an equal tower).
Cochain reduced_sigma(const CochainSeq& s) {
  Cochain out = s.sigma;
  if (s.omega == 0) {
    for (i64 i = 0; i < out.entries(); ++i) out.set_raw(i, out.raw(i) * 0);
    return out;
  }
  const i64 mod = pow_checked(s.pair.p, static_cast<int>(s.omega));
  for (i64 i = 0; i < out.entries(); ++i) {
    VecZ v = out.raw(i);
    for (i64 c = 0; c < v.size(); ++c) v[c] = mod_norm(v[c], mod);
    out.set_raw(i, v);
  }
  return out;
}

// Minimum p-adic valuation over all stored coordinates.
int min_valuation(const Cochain& f, i64 p) {
  int best = kValInfinity;
  for (i64 i = 0; i < f.entries(); ++i) {
    const VecZ& v = f.raw(i);
    for (i64 c = 0; c < v.size(); ++c)
      best = std::min(best, val_p(v[c], p, best));
  }
  return best;
}

Cochain scaled_checked(const Cochain& f, i64 x) {
  Cochain out = f;
  for (i64 i = 0; i < out.entries(); ++i) {
    VecZ v = out.raw(i);
    for (i64 c = 0; c < v.size(); ++c)
      v[c] = checked_i64(I128(v[c]) * x, "cochain scaling");
    out.set_raw(i, v);
  }
  return out;
}

Cochain divided_exact(const Cochain& f, i64 d, const char* what) {
  Cochain out = f;
  for (i64 i = 0; i < out.entries(); ++i) {
    VecZ v = out.raw(i);
    for (i64 c = 0; c < v.size(); ++c) {
      COSEQ_REQUIRE(v[c] % d == 0,
                    std::string(what) + ": value is not divisible as required");
      v[c] /= d;
    }
    out.set_raw(i, v);
  }
  return out;
}

// rho + p^{r-omega} * basis * sigma_red as an M-valued integer cochain.
Cochain member_representative(const CochainSeq& s, i64 r) {
  const Cochain sred = reduced_sigma(s);
  const i64 shift = pow_checked(s.pair.p, static_cast<int>(r - s.omega));
  Cochain out(s.group(), CoeffModule{s.pair.ambient_coeff()},
              static_cast<int>(s.degree()));
  for (i64 i = 0; i < out.entries(); ++i) {
    const VecZ emb = mat_apply(s.pair.n_basis, sred.raw(i), "tower member");
    VecZ v(out.rank());
    for (i64 c = 0; c < v.size(); ++c)
      v[c] = checked_i64(I128(s.rho.raw(i)[c]) + I128(shift) * emb[c],
                         "tower member");
    out.set_raw(i, v);
  }
  return out;
}

i64 group_m(const CochainSeq& s) { return group_log_order(s.group()).m; }

void require_same_family(const CochainSeq& s, const CochainSeq& t) {
  COSEQ_REQUIRE(s.group().same(t.group()),
                "towers are defined over different groups");
  COSEQ_REQUIRE(s.degree() == t.degree(),
                "towers have different degrees");
  COSEQ_REQUIRE(s.r0 == t.r0, "towers have different starting indices");
  COSEQ_REQUIRE(s.pair.p == t.pair.p && s.pair.rank == t.pair.rank &&
                    (s.pair.n_basis - t.pair.n_basis).cwiseAbs().sum() == 0 &&
                    same_action(s.pair.action, t.pair.action),
                "towers live over different lattice pairs");
}

// Core of the coboundary test.  On success returns the preimage tower
// together with the degree-n division witness psi (N-coordinates) and the
// normalized input it refers to.
struct CoboundaryWitness {
  CochainSeq beta;
  Cochain psi;
  CochainSeq normalized;
};

std::optional<CoboundaryWitness> coboundary_witness(const CochainSeq& s_in) {
  COSEQ_REQUIRE(s_in.degree() >= 1,
                "coboundary test requires degree at least 1");
  COSEQ_REQUIRE(seq_is_cocycle(s_in), "tower is not a cocycle tower");
  const i64 m = group_m(s_in);
  const CochainSeq s = seq_normal_form(s_in);
  COSEQ_REQUIRE(s.omega <= s.r0 - m,
                "coboundary test requires level at most r0 - m");

  const i64 r1 = s.r0;
  const QuotientView view = quotient_view(s.pair, s.group(), r1);
  const Cochain z = seq_eval(s, r1);
  std::optional<Cochain> phi_bar = is_coboundary(z);
  if (!phi_bar.has_value()) return std::nullopt;

  const Cochain phi = lift_cochain(view, s.pair, *phi_bar);
  const Cochain rep = member_representative(s, r1);
  const Cochain diff = rep - coboundary(phi); // lies in p^{r1} N pointwise

  // psi with diff = p^{r1} * basis * psi.
  Cochain psi(s.group(), CoeffModule{s.pair.sub_coeff()},
              static_cast<int>(s.degree()));
  const i64 pr1 = pow_checked(s.pair.p, static_cast<int>(r1));
  for (i64 i = 0; i < psi.entries(); ++i) {
    VecB v(diff.rank());
    for (i64 c = 0; c < diff.rank(); ++c) v[c] = BigInt(diff.raw(i)[c]);
    VecZ y = s.pair.n_coordinates(v);
    for (i64 c = 0; c < y.size(); ++c) {
      COSEQ_REQUIRE(y[c] % pr1 == 0,
                    "internal inconsistency: coboundary defect is not "
                    "divisible by the truncation");
      y[c] /= pr1;
    }
    psi.set_raw(i, y);
  }

  // sigma' = sigma - p^omega psi is an exact cocycle over N.
  const i64 pomega = pow_checked(s.pair.p, static_cast<int>(s.omega));
  const Cochain sigma_prime = reduced_sigma(s) - scaled_checked(psi, pomega);
  COSEQ_REQUIRE(is_cocycle(sigma_prime),
                "internal inconsistency: corrected sigma part fails to be "
                "a cocycle");

  // chi with Delta chi = p^m sigma' exactly, via the transfer contraction.
  const Cochain chi = transfer_contraction(sigma_prime);

  // lambda = phi - p^{r1 - omega - m} * basis * chi.
  const i64 shift = pow_checked(s.pair.p, static_cast<int>(r1 - s.omega - m));
  Cochain lambda = phi;
  for (i64 i = 0; i < lambda.entries(); ++i) {
    const VecZ emb = mat_apply(s.pair.n_basis, chi.raw(i), "preimage tower");
    VecZ v(lambda.rank());
    for (i64 c = 0; c < v.size(); ++c)
      v[c] = checked_i64(I128(lambda.raw(i)[c]) - I128(shift) * emb[c],
                         "preimage tower");
    lambda.set_raw(i, v);
  }

  CochainSeq beta(s.pair, lambda, chi, s.r0, s.omega + m);
  COSEQ_REQUIRE(seq_equal(seq_delta(beta), s),
                "internal inconsistency: preimage tower does not map back "
                "to the input");
  return CoboundaryWitness{std::move(beta), std::move(psi), s};
}

} // namespace

CochainSeq::CochainSeq(LatticePair pair_, Cochain rho_, Cochain sigma_,
                       i64 r0_, i64 omega_)
    : pair(std::move(pair_)),
      rho(std::move(rho_)),
      sigma(std::move(sigma_)),
      r0(r0_),
      omega(omega_) {
  COSEQ_REQUIRE(rho.group().same(sigma.group()),
                "rho and sigma are defined over different groups");
  COSEQ_REQUIRE(rho.degree() == sigma.degree(),
                "rho and sigma have different degrees");
  require_free_shape(rho, pair.ambient_coeff(), "rho");
  require_free_shape(sigma, pair.sub_coeff(), "sigma");
  COSEQ_REQUIRE(rho.group().prime() == pair.p,
                "group and lattice pair have different primes");
  COSEQ_REQUIRE(r0 >= 0, "starting index must be non-negative");
  COSEQ_REQUIRE(omega >= 0 && omega <= r0,
                "omega must lie between 0 and r0");
  const i64 m = group_log_order(rho.group()).m;
  COSEQ_REQUIRE(r0 + m + 2 <= pair.work_k,
                "working precision too small for this starting index");
}

Cochain seq_eval(const CochainSeq& s, i64 r) {
  COSEQ_REQUIRE(r >= s.r0, "evaluation index below the starting index");
  COSEQ_REQUIRE(r + group_m(s) + 1 <= s.pair.work_k,
                "working precision too small for the requested index");
  const QuotientView view = quotient_view(s.pair, s.group(), r);
  return project_cochain(view, member_representative(s, r));
}

CochainSeq seq_add(const CochainSeq& s, const CochainSeq& t) {
  require_same_family(s, t);
  const i64 ell = std::max(s.omega, t.omega);
  const i64 fs = pow_checked(s.pair.p, static_cast<int>(ell - s.omega));
  const i64 ft = pow_checked(s.pair.p, static_cast<int>(ell - t.omega));
  return CochainSeq(s.pair, s.rho + t.rho,
                    scaled_checked(s.sigma, fs) + scaled_checked(t.sigma, ft),
                    s.r0, ell);
}

CochainSeq seq_scale(i64 x, const CochainSeq& s) {
  return CochainSeq(s.pair, scaled_checked(s.rho, x),
                    scaled_checked(s.sigma, x), s.r0, s.omega);
}

bool seq_is_zero(const CochainSeq& s) {
  if (!s.rho.is_zero()) return false;
  return min_valuation(s.sigma, s.pair.p) >= s.omega;
}

bool seq_equal(const CochainSeq& s, const CochainSeq& t) {
  return seq_is_zero(seq_add(s, seq_scale(-1, t)));
}

CochainSeq seq_normal_form(const CochainSeq& s) {
  const Cochain sred = reduced_sigma(s);
  const int e = min_valuation(sred, s.pair.p);
  CochainSeq out = [&] {
    if (e >= s.omega) {
      // The sigma part is wholly absorbable: the tower is pro_r(rho).
      Cochain zero_sigma(s.group(), CoeffModule{s.pair.sub_coeff()},
                         static_cast<int>(s.degree()));
      return CochainSeq(s.pair, s.rho, zero_sigma, s.r0, 0);
    }
    const i64 d = pow_checked(s.pair.p, e);
    return CochainSeq(s.pair, s.rho, divided_exact(sred, d, "level"),
                      s.r0, s.omega - e);
  }();
  // The normal form must define the same tower; recheck pointwise.
  for (i64 r : {s.r0, s.r0 + 1})
    COSEQ_REQUIRE((seq_eval(out, r) - seq_eval(s, r)).is_zero(),
                  "internal inconsistency: level normal form changed the "
                  "tower");
  return out;
}

i64 seq_level(const CochainSeq& s) { return seq_normal_form(s).omega; }

CochainSeq seq_delta(const CochainSeq& s) {
  return CochainSeq(s.pair, coboundary(s.rho), coboundary(s.sigma), s.r0,
                    s.omega);
}

bool seq_is_cocycle(const CochainSeq& s) { return seq_is_zero(seq_delta(s)); }

std::optional<CochainSeq> is_coboundary_seq(const CochainSeq& s) {
  std::optional<CoboundaryWitness> w = coboundary_witness(s);
  if (!w.has_value()) return std::nullopt;
  return std::move(w->beta);
}

CochainSeq split_lift(const LatticePair& pair, const Cochain& rho,
                      const Cochain& eta, i64 r0) {
  const FiniteGroup& g = rho.group();
  COSEQ_REQUIRE(g.same(eta.group()),
                "rho and eta are defined over different groups");
  require_free_shape(rho, pair.ambient_coeff(), "rho");
  require_free_shape(eta, pair.sub_coeff(), "eta");
  COSEQ_REQUIRE(eta.degree() == rho.degree() + 1,
                "eta must live one degree above rho");
  COSEQ_REQUIRE(is_cocycle(rho), "rho is not a cocycle");
  COSEQ_REQUIRE(is_cocycle(eta), "eta is not a cocycle");
  const i64 m = group_log_order(g).m;
  COSEQ_REQUIRE(r0 >= 2 * m,
                "splitting lift requires r0 at least twice the group "
                "log-order");

  // Solve Delta sigma = p^m eta over N at working truncation, taking the
  // canonical least non-negative solution.
  const int cap = pair.work_k;
  const i64 mod = pow_checked(pair.p, cap);
  const i64 pm = pow_checked(pair.p, static_cast<int>(m));
  const TruncModule n_trunc = [&] {
    TruncModule t = make_trivial_action_module(
        pair.p, VecZ::Constant(pair.rank, mod));
    for (const MatZ& a : pair.n_action) {
      MatZ am = a;
      for (i64 r = 0; r < am.rows(); ++r)
        for (i64 c = 0; c < am.cols(); ++c) am(r, c) = mod_norm(am(r, c), mod);
      t.action.push_back(am);
    }
    return t;
  }();

  Cochain sigma(g, CoeffModule{pair.sub_coeff()},
                static_cast<int>(rho.degree()));
  if (!eta.is_zero()) {
    const Cochain probe(g, CoeffModule{n_trunc},
                        static_cast<int>(rho.degree()));
    EquationSolver solver(pair.p, cap, probe.entries() * pair.rank);
    detail::for_each_delta_row(
        g, CoeffModule{n_trunc}, static_cast<int>(rho.degree()),
        [&](SRow row, int, i64 out_global) {
          const i64 out_entry = out_global / pair.rank;
          const i64 out_coord = out_global % pair.rank;
          const i64 rhs = mul_mod(
              pm, mod_norm(eta.raw(out_entry)[out_coord], mod), mod);
          solver.add_equation(row, rhs);
        });
    SolutionSet sol = solver.solve();
    COSEQ_REQUIRE(sol.particular.has_value(),
                  "internal inconsistency: the contraction equation has no "
                  "solution at working truncation");
    const VecZ& x = *sol.particular;
    for (i64 i = 0; i < sigma.entries(); ++i) {
      VecZ v(pair.rank);
      for (i64 c = 0; c < pair.rank; ++c) v[c] = x[i * pair.rank + c];
      sigma.set_raw(i, v);
    }
  }
  return CochainSeq(pair, rho, sigma, r0, m);
}

CochainSeq seq_through(const LatticePair& pair, const Cochain& z, i64 r0,
                       i64 r1) {
  const FiniteGroup& g = z.group();
  const i64 m = group_log_order(g).m;
  COSEQ_REQUIRE(r0 >= 2 * m,
                "interpolation requires r0 at least twice the group "
                "log-order");
  COSEQ_REQUIRE(r1 >= r0, "interpolation index below the starting index");
  COSEQ_REQUIRE(r1 + m + 1 <= pair.work_k,
                "working precision too small for the requested index");
  COSEQ_REQUIRE(z.degree() >= 1, "interpolation requires degree at least 1");
  std::vector<i64> bad;
  if (!is_cocycle(z, &bad)) {
    std::string msg = "input cochain is not a cocycle at tuple (";
    for (size_t i = 0; i < bad.size(); ++i)
      msg += (i ? "," : "") + std::to_string(bad[i]);
    fail(msg + ")");
  }

  const QuotientView view = quotient_view(pair, g, r1);
  const TruncModule* zt = std::get_if<TruncModule>(&z.coeff());
  COSEQ_REQUIRE(zt != nullptr &&
                    (zt->orders - view.module.orders).cwiseAbs().sum() == 0,
                "input cochain does not take values in the requested "
                "truncation");
  const Cochain lift = lift_cochain(view, pair, z);
  const Cochain dlift = coboundary(lift); // lies in p^{r1} N pointwise
  const i64 pr1 = pow_checked(pair.p, static_cast<int>(r1));
  Cochain u(g, CoeffModule{pair.sub_coeff()},
            static_cast<int>(z.degree()) + 1);
  for (i64 i = 0; i < u.entries(); ++i) {
    VecB v(dlift.rank());
    for (i64 c = 0; c < dlift.rank(); ++c) v[c] = BigInt(dlift.raw(i)[c]);
    VecZ y = pair.n_coordinates(v);
    for (i64 c = 0; c < y.size(); ++c) {
      COSEQ_REQUIRE(y[c] % pr1 == 0,
                    "internal inconsistency: lifted coboundary is not "
                    "divisible by the truncation");
      y[c] /= pr1;
    }
    u.set_raw(i, y);
  }
  COSEQ_REQUIRE(is_cocycle(u),
                "internal inconsistency: division witness is not a cocycle");

  // nu with Delta nu = p^m u; correct the lift to an exact cocycle.
  const Cochain nu = transfer_contraction(u);
  const i64 shift = pow_checked(pair.p, static_cast<int>(r1 - m));
  Cochain rho_hat = lift;
  for (i64 i = 0; i < rho_hat.entries(); ++i) {
    const VecZ emb = mat_apply(pair.n_basis, nu.raw(i), "interpolation");
    VecZ v(rho_hat.rank());
    for (i64 c = 0; c < v.size(); ++c)
      v[c] = checked_i64(I128(rho_hat.raw(i)[c]) - I128(shift) * emb[c],
                         "interpolation");
    rho_hat.set_raw(i, v);
  }
  COSEQ_REQUIRE(is_cocycle(rho_hat),
                "internal inconsistency: corrected representative fails to "
                "be a cocycle");
  CochainSeq out(pair, rho_hat, nu, r0, m);
  COSEQ_REQUIRE((seq_eval(out, r1) - z).is_zero(),
                "internal inconsistency: interpolated tower misses the "
                "prescribed value");
  return out;
}

IntermediateModule make_intermediate(const LatticePair& mn,
                                     const FiniteGroup& g,
                                     const MatZ& l_basis) {
  IntermediateModule im{make_lattice_pair(g, mn.p, l_basis, mn.action,
                                          mn.work_k),
                        MatZ(), TruncModule{}, LatticeQuotient{}};

  // N <= L: C with n_basis = l_basis * C.
  std::optional<MatB> c_big =
      solve_integer_columns(to_big(l_basis), to_big(mn.n_basis));
  COSEQ_REQUIRE(c_big.has_value(),
                "the sublattice does not lie inside the intermediate "
                "lattice");
  im.n_in_l = MatZ(c_big->rows(), c_big->cols());
  for (i64 r = 0; r < c_big->rows(); ++r)
    for (i64 c = 0; c < c_big->cols(); ++c) {
      const BigInt& v = (*c_big)(r, c);
      COSEQ_REQUIRE(v <= (i64{1} << 60) && v >= -(i64{1} << 60),
                    "intermediate lattice coordinates overflow");
      im.n_in_l(r, c) = static_cast<i64>(v);
    }

  // p L <= N.
  MatZ pl = l_basis * mn.p;
  COSEQ_REQUIRE(
      solve_integer_columns(to_big(mn.n_basis), to_big(pl)).has_value(),
      "p times the intermediate lattice does not lie inside the sublattice");

  // The quotient L/N in Smith coordinates; exponent p by the sandwich.
  im.lq = make_lattice_quotient(to_big(im.n_in_l), mn.p);
  // Unit Smith coordinates contribute nothing to L/N; drop them so the
  // quotient module carries only honest generators.
  for (size_t i = 0; i < im.lq.orders.size(); ++i) {
    COSEQ_REQUIRE(im.lq.orders[i] == 1 || im.lq.orders[i] == mn.p,
                  "internal inconsistency: intermediate quotient is not "
                  "elementary");
    if (im.lq.orders[i] > 1) im.live.push_back(static_cast<i64>(i));
  }
  const i64 k = static_cast<i64>(im.live.size());
  COSEQ_REQUIRE(k > 0, "intermediate lattice equals the sublattice");

  TruncModule q = make_trivial_action_module(mn.p, VecZ::Constant(k, mn.p));
  for (const MatZ& a : im.ml.n_action) {
    MatB big = big_mat_mul(big_mat_mul(im.lq.U, to_big(a)), im.lq.Uinv);
    MatZ red(k, k);
    for (i64 r = 0; r < k; ++r)
      for (i64 c = 0; c < k; ++c) {
        BigInt v = big(im.live[r], im.live[c]) % mn.p;
        if (v < 0) v += mn.p;
        red(r, c) = static_cast<i64>(v);
      }
    q.action.push_back(red);
  }
  im.quotient = q;
  if (!q.action.empty()) validate_module_action(g, q);
  return im;
}

CochainSeq intermediate_image_seq(const LatticePair& mn,
                                  const IntermediateModule& im,
                                  const Cochain& c, i64 r0) {
  const FiniteGroup& g = c.group();
  const TruncModule* have = std::get_if<TruncModule>(&c.coeff());
  COSEQ_REQUIRE(have != nullptr &&
                    (have->orders - im.quotient.orders).cwiseAbs().sum() == 0,
                "cochain does not take values in the intermediate quotient");
  COSEQ_REQUIRE(r0 >= 1, "multiplication towers need r0 at least 1");

  Cochain rho(g, CoeffModule{mn.ambient_coeff()},
              static_cast<int>(c.degree()));
  Cochain sigma(g, CoeffModule{mn.sub_coeff()},
                static_cast<int>(c.degree()));
  const MatZ& l_basis = im.ml.n_basis;
  const i64 full_dim = static_cast<i64>(im.lq.orders.size());
  for (i64 i = 0; i < sigma.entries(); ++i) {
    // Lift to L-coordinates, embed, multiply by p, express in N.
    VecZ full = VecZ::Zero(full_dim);
    for (size_t t = 0; t < im.live.size(); ++t)
      full[im.live[t]] = c.raw(i)[static_cast<i64>(t)];
    const VecB lifted = im.lq.lift(full);
    VecB m_coords = big_mat_vec(to_big(l_basis), lifted) * BigInt(mn.p);
    sigma.set_raw(i, mn.n_coordinates(m_coords));
  }
  return CochainSeq(mn, rho, sigma, r0, 1);
}

CochainSeq seq_mod_intermediate(const CochainSeq& s,
                                const IntermediateModule& im) {
  Cochain sigma_l(s.group(), CoeffModule{im.ml.sub_coeff()},
                  static_cast<int>(s.degree()));
  for (i64 i = 0; i < sigma_l.entries(); ++i)
    sigma_l.set_raw(i, mat_apply(im.n_in_l, s.sigma.raw(i),
                                 "intermediate reduction"));
  return CochainSeq(im.ml, s.rho, sigma_l, s.r0, s.omega);
}

std::optional<ChangeModuleDecomposition> change_module_decompose(
    const CochainSeq& s, const IntermediateModule& im) {
  const i64 m = group_m(s);
  COSEQ_REQUIRE(seq_is_cocycle(s), "tower is not a cocycle tower");
  const CochainSeq sn = seq_normal_form(s);
  COSEQ_REQUIRE(sn.omega <= sn.r0 - m,
                "decomposition requires level at most r0 - m");

  const CochainSeq j = seq_mod_intermediate(sn, im);
  std::optional<CoboundaryWitness> w = coboundary_witness(j);
  if (!w.has_value()) return std::nullopt;

  // The normal form inside the witness reduces sigma_L mod p^omega; the
  // discarded quotient q1 = (sigma_L - sigma_L mod p^omega) / p^omega feeds
  // the multiplication term: alpha_r picks up p^r * l_basis * q1 exactly.
  Cochain q1 = j.sigma;
  const i64 pomega = pow_checked(j.pair.p, static_cast<int>(j.omega));
  for (i64 i = 0; i < q1.entries(); ++i) {
    VecZ v = q1.raw(i);
    for (i64 cc = 0; cc < v.size(); ++cc)
      v[cc] = (v[cc] - mod_norm(v[cc], pomega)) / pomega;
    q1.set_raw(i, v);
  }
  const Cochain psi_hat = w->psi + q1; // an L-coordinate lift of c

  Cochain c(s.group(), CoeffModule{im.quotient},
            static_cast<int>(s.degree()));
  for (i64 i = 0; i < c.entries(); ++i) {
    const VecZ full = im.lq.project(psi_hat.raw(i));
    VecZ v(static_cast<i64>(im.live.size()));
    for (i64 t = 0; t < v.size(); ++t) v[t] = full[im.live[t]];
    c.set_raw(i, v);
  }
  COSEQ_REQUIRE(is_cocycle(c),
                "internal inconsistency: decomposition witness is not a "
                "cocycle");

  const Cochain& kappa = w->beta.rho;    // over M
  const Cochain& lambda = w->beta.sigma; // over L

  // Verify alpha_r = p^r psi-hat + Delta(kappa + p^{r-omega-m} lambda)
  // mod p^r N at r0 and r0 + 1.
  const MatZ& l_basis = im.ml.n_basis;
  for (i64 r : {sn.r0, sn.r0 + 1}) {
    const QuotientView view = quotient_view(sn.pair, sn.group(), r);
    const i64 pr = pow_checked(sn.pair.p, static_cast<int>(r));
    const i64 shift =
        pow_checked(sn.pair.p, static_cast<int>(r - w->normalized.omega - m));

    Cochain inner = kappa;
    for (i64 i = 0; i < inner.entries(); ++i) {
      const VecZ emb = mat_apply(l_basis, lambda.raw(i), "decomposition");
      VecZ v(inner.rank());
      for (i64 cc = 0; cc < v.size(); ++cc)
        v[cc] = checked_i64(I128(inner.raw(i)[cc]) + I128(shift) * emb[cc],
                            "decomposition");
      inner.set_raw(i, v);
    }
    Cochain rhs = coboundary(inner);
    for (i64 i = 0; i < rhs.entries(); ++i) {
      const VecZ emb = mat_apply(l_basis, psi_hat.raw(i), "decomposition");
      VecZ v(rhs.rank());
      for (i64 cc = 0; cc < v.size(); ++cc)
        v[cc] = checked_i64(I128(rhs.raw(i)[cc]) + I128(pr) * emb[cc],
                            "decomposition");
      rhs.set_raw(i, v);
    }
    COSEQ_REQUIRE(
        (seq_eval(sn, r) - project_cochain(view, rhs)).is_zero(),
        "internal inconsistency: decomposition identity fails pointwise");
  }
  return ChangeModuleDecomposition{std::move(c), kappa, lambda};
}

std::string seq_to_text(const CochainSeq& s) {
  std::ostringstream out;
  out << "cochainseq " << s.degree() << ' ' << s.r0 << ' ' << s.omega << '\n';
  out << cochain_to_text(s.rho);
  out << cochain_to_text(s.sigma);
  return out.str();
}

CochainSeq seq_from_text(const std::string& text, const FiniteGroup& g,
                         const LatticePair& pair) {
  std::istringstream in(text);
  std::string word;
  COSEQ_REQUIRE(bool(in >> word) && word == "cochainseq",
                "tower text must begin with 'cochainseq'");
  i64 degree = 0, r0 = 0, omega = 0;
  COSEQ_REQUIRE(bool(in >> degree >> r0 >> omega),
                "tower text ended unexpectedly");
  std::string line;
  std::getline(in, line); // finish the header line

  // Split the remainder into the two embedded cochain blocks, each of which
  // is terminated by an "end" line.
  std::vector<std::string> blocks;
  std::string current;
  while (std::getline(in, line)) {
    current += line;
    current += '\n';
    std::istringstream probe(line);
    std::string first;
    if (probe >> first && first == "end") {
      blocks.push_back(current);
      current.clear();
    }
  }
  COSEQ_REQUIRE(current.find_first_not_of(" \t\r\n") == std::string::npos,
                "tower text has trailing content");
  COSEQ_REQUIRE(blocks.size() == 2,
                "tower text must contain exactly two cochain blocks");

  Cochain rho =
      cochain_from_text(blocks[0], g, CoeffModule{pair.ambient_coeff()});
  Cochain sigma =
      cochain_from_text(blocks[1], g, CoeffModule{pair.sub_coeff()});
  COSEQ_REQUIRE(rho.degree() == degree && sigma.degree() == degree,
                "tower text degree does not match its cochains");
  return CochainSeq(pair, std::move(rho), std::move(sigma), r0, omega);
}

} // namespace coseq

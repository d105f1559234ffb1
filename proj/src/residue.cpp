#include "coseq/residue.hpp"

#include <algorithm>
#include <unordered_set>

namespace coseq {

namespace {

// a - f*b over Z/mod, both rows sorted; result sorted with zeros dropped.
SRow srow_sub_mul(const SRow& a, i64 f, const SRow& b, i64 mod) {
  SRow out;
  out.e.reserve(a.e.size() + b.e.size());
  std::size_t i = 0, j = 0;
  f = mod_norm(f, mod);
  while (i < a.e.size() || j < b.e.size()) {
    if (j >= b.e.size() || (i < a.e.size() && a.e[i].first < b.e[j].first)) {
      out.push(a.e[i].first, a.e[i].second);
      ++i;
    } else if (i >= a.e.size() || b.e[j].first < a.e[i].first) {
      out.push(b.e[j].first, mod_norm(-mul_mod(f, b.e[j].second, mod), mod));
      ++j;
    } else {
      out.push(a.e[i].first, mod_norm(a.e[i].second - mul_mod(f, b.e[j].second, mod), mod));
      ++i;
      ++j;
    }
  }
  return out;
}

SRow srow_scale(const SRow& a, i64 f, i64 mod) {
  SRow out;
  out.e.reserve(a.e.size());
  f = mod_norm(f, mod);
  for (auto& [c, v] : a.e) out.push(c, mul_mod(f, v, mod));
  return out;
}

i64 srow_get(const SRow& a, i64 col) {
  auto it = std::lower_bound(a.e.begin(), a.e.end(), col,
                             [](const std::pair<i64, i64>& e, i64 c) { return e.first < c; });
  return (it != a.e.end() && it->first == col) ? it->second : 0;
}

BigInt big_nearest_quot(const BigInt& a, const BigInt& b) {
  BigInt q = a / b; // truncated
  BigInt r = a - q * b;
  if (r != 0) {
    BigInt babs = b < 0 ? BigInt(-b) : b;
    BigInt rabs = r < 0 ? BigInt(-r) : r;
    if (2 * rabs > babs) q += (r > 0) == (b > 0) ? 1 : -1;
  }
  return q;
}

// Shared integer elimination: row/column gcd reduction to Smith form, with
// optional row-op carry (rhs), row transform U and column transform V.
void int_elim(MatB& A, MatB* rhs, MatB* U, MatB* V) {
  const i64 r = A.rows(), c = A.cols();
  if (U) *U = big_identity(r);
  if (V) *V = big_identity(c);

  auto row_swap = [&](i64 i, i64 j) {
    if (i == j) return;
    A.row(i).swap(A.row(j));
    if (rhs) rhs->row(i).swap(rhs->row(j));
    if (U) U->row(i).swap(U->row(j));
  };
  auto col_swap = [&](i64 i, i64 j) {
    if (i == j) return;
    A.col(i).swap(A.col(j));
    if (V) V->col(i).swap(V->col(j));
  };
  auto row_axpy = [&](i64 dst, i64 src, const BigInt& f) { // row_dst -= f * row_src
    if (f == 0) return;
    for (i64 j = 0; j < c; ++j)
      if (A(src, j) != 0) A(dst, j) -= f * A(src, j);
    if (rhs)
      for (i64 j = 0; j < rhs->cols(); ++j) (*rhs)(dst, j) -= f * (*rhs)(src, j);
    if (U)
      for (i64 j = 0; j < r; ++j)
        if ((*U)(src, j) != 0) (*U)(dst, j) -= f * (*U)(src, j);
  };
  auto col_axpy = [&](i64 dst, i64 src, const BigInt& f) { // col_dst -= f * col_src
    if (f == 0) return;
    for (i64 i = 0; i < r; ++i)
      if (A(i, src) != 0) A(i, dst) -= f * A(i, src);
    if (V)
      for (i64 i = 0; i < c; ++i)
        if ((*V)(i, src) != 0) (*V)(i, dst) -= f * (*V)(i, src);
  };

  const i64 steps = std::min(r, c);
  for (i64 k = 0; k < steps; ++k) {
    while (true) {
      // Smallest nonzero entry of the trailing submatrix becomes the pivot.
      i64 pi = -1, pj = -1;
      BigInt best = 0;
      for (i64 i = k; i < r; ++i)
        for (i64 j = k; j < c; ++j) {
          if (A(i, j) == 0) continue;
          BigInt a = A(i, j) < 0 ? BigInt(-A(i, j)) : A(i, j);
          if (pi < 0 || a < best) {
            best = a;
            pi = i;
            pj = j;
          }
        }
      if (pi < 0) { k = steps; break; } // submatrix zero: done entirely
      row_swap(k, pi);
      col_swap(k, pj);

      bool exact = true;
      for (i64 i = k + 1; i < r && exact; ++i)
        if (A(i, k) % A(k, k) != 0) exact = false;
      for (i64 j = k + 1; j < c && exact; ++j)
        if (A(k, j) % A(k, k) != 0) exact = false;

      if (!exact) {
        for (i64 i = k + 1; i < r; ++i)
          if (A(i, k) != 0) row_axpy(i, k, big_nearest_quot(A(i, k), A(k, k)));
        for (i64 j = k + 1; j < c; ++j)
          if (A(k, j) != 0) col_axpy(j, k, big_nearest_quot(A(k, j), A(k, k)));
        continue; // pivot magnitude strictly decreased; reselect
      }

      for (i64 i = k + 1; i < r; ++i)
        if (A(i, k) != 0) row_axpy(i, k, A(i, k) / A(k, k));
      for (i64 j = k + 1; j < c; ++j)
        if (A(k, j) != 0) col_axpy(j, k, A(k, j) / A(k, k));

      // Enforce the divisibility chain: pivot must divide the rest.
      bool chained = true;
      for (i64 i = k + 1; i < r && chained; ++i)
        for (i64 j = k + 1; j < c; ++j)
          if (A(i, j) % A(k, k) != 0) {
            row_axpy(k, i, BigInt(-1)); // mix the offending row in and redo
            chained = false;
            break;
          }
      if (chained) break;
    }
    if (k >= steps) break;
    if (A(k, k) < 0) {
      for (i64 j = k; j < c; ++j) A(k, j) = -A(k, j);
      if (rhs)
        for (i64 j = 0; j < rhs->cols(); ++j) (*rhs)(k, j) = -(*rhs)(k, j);
      if (U)
        for (i64 j = 0; j < r; ++j) (*U)(k, j) = -(*U)(k, j);
    }
  }
}

} // namespace

ResidueRing::ResidueRing(i64 p_, int k_) : p(p_), k(k_) {
  COSEQ_REQUIRE(is_prime(p), "ResidueRing: modulus base must be prime, got " + std::to_string(p));
  COSEQ_REQUIRE(k >= 1, "ResidueRing: exponent must be >= 1");
  mod = pow_checked(p, k);
  COSEQ_REQUIRE(mod <= (i64(1) << 31), "ResidueRing: p^k exceeds the 2^31 residue bound");
}

MatZ SparseTriplets::dense() const {
  MatZ m = MatZ::Zero(rows, cols);
  for (auto& t : entries) {
    COSEQ_REQUIRE(t.r >= 0 && t.r < rows && t.c >= 0 && t.c < cols,
                  "SparseTriplets: entry out of bounds");
    m(t.r, t.c) += t.v;
  }
  return m;
}

SRow srow_from_dense(const VecZ& v, i64 mod, i64 col_offset) {
  SRow r;
  for (i64 j = 0; j < v.size(); ++j) {
    i64 x = mod_norm(v[j], mod);
    if (x != 0) r.push(col_offset + j, x);
  }
  return r;
}

HowellBuilder::HowellBuilder(i64 p, int E, i64 width, i64 pivot_limit)
    : p_(p), E_(E), width_(width), pivot_limit_(pivot_limit < 0 ? width : pivot_limit) {
  COSEQ_REQUIRE(E_ >= 1 && is_prime(p_), "HowellBuilder: bad ring parameters");
  mod_ = pow_checked(p_, E_);
  COSEQ_REQUIRE(mod_ <= (i64(1) << 31), "HowellBuilder: p^E exceeds the 2^31 residue bound");
  row_of_col_.assign(static_cast<std::size_t>(width_), -1);
}

void HowellBuilder::reduce_insert(SRow row, std::vector<SRow>& queue) {
  while (true) {
    if (row.empty()) return;
    i64 c = row.e.front().first;
    i64 a = row.e.front().second;
    if (c >= pivot_limit_) {
      overflow_.push_back(std::move(row));
      return;
    }
    int va = val_p(a, p_, E_);
    int it = row_of_col_[static_cast<std::size_t>(c)];
    if (it < 0) {
      i64 unit = a / pow_checked(p_, va);
      row = srow_scale(row, inv_mod(unit, mod_), mod_);
      int idx = static_cast<int>(rows_.size());
      rows_.push_back(row);
      pivot_col_.push_back(c);
      pivot_exp_.push_back(va);
      row_of_col_[static_cast<std::size_t>(c)] = idx;
      if (va > 0) queue.push_back(srow_scale(row, pow_checked(p_, E_ - va), mod_));
      return;
    }
    int vp = pivot_exp_[it];
    if (va >= vp) {
      i64 f = a / pow_checked(p_, vp);
      row = srow_sub_mul(row, f, rows_[it], mod_);
      continue;
    }
    // New row has a shallower pivot: it takes over; old pivot row re-reduces.
    i64 unit = a / pow_checked(p_, va);
    SRow norm = srow_scale(row, inv_mod(unit, mod_), mod_);
    SRow old = std::move(rows_[it]);
    rows_[it] = std::move(norm);
    pivot_exp_[it] = va;
    queue.push_back(srow_scale(rows_[it], pow_checked(p_, E_ - va), mod_));
    row = std::move(old);
  }
}

void HowellBuilder::insert(SRow row) {
  COSEQ_REQUIRE(!finished_, "HowellBuilder: insert after finish");
  std::vector<SRow> queue;
  queue.push_back(std::move(row));
  while (!queue.empty()) {
    SRow r = std::move(queue.back());
    queue.pop_back();
    reduce_insert(std::move(r), queue);
  }
}

void HowellBuilder::finish() {
  if (finished_) return;
  finished_ = true;
  std::vector<int> order(rows_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pivot_col_[a] < pivot_col_[b]; });
  std::vector<SRow> rows2;
  std::vector<int> exp2;
  std::vector<i64> col2;
  rows2.reserve(rows_.size());
  for (int idx : order) {
    rows2.push_back(std::move(rows_[idx]));
    exp2.push_back(pivot_exp_[idx]);
    col2.push_back(pivot_col_[idx]);
  }
  rows_ = std::move(rows2);
  pivot_exp_ = std::move(exp2);
  pivot_col_ = std::move(col2);
  std::fill(row_of_col_.begin(), row_of_col_.end(), -1);
  for (std::size_t i = 0; i < rows_.size(); ++i)
    row_of_col_[static_cast<std::size_t>(pivot_col_[i])] = static_cast<int>(i);

  // Canonical form: entries above each pivot reduced into [0, p^v).
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    i64 pk = pow_checked(p_, pivot_exp_[k]);
    for (std::size_t j = 0; j < k; ++j) {
      i64 a = srow_get(rows_[j], pivot_col_[k]);
      i64 q = a / pk;
      if (q != 0) rows_[j] = srow_sub_mul(rows_[j], q, rows_[k], mod_);
    }
  }
}

bool HowellBuilder::express(SRow target, i64 clear_limit, SRow* combo_out) const {
  COSEQ_REQUIRE(finished_, "HowellBuilder: express before finish");
  i64 limit = std::min(clear_limit, pivot_limit_);
  SRow acc = std::move(target);
  while (!acc.e.empty() && acc.e.front().first < limit) {
    i64 c = acc.e.front().first;
    i64 a = acc.e.front().second;
    int it = row_of_col_[static_cast<std::size_t>(c)];
    if (it < 0) return false;
    int va = val_p(a, p_, E_);
    if (va < pivot_exp_[it]) return false;
    acc = srow_sub_mul(acc, a / pow_checked(p_, pivot_exp_[it]), rows_[it], mod_);
  }
  if (combo_out) *combo_out = std::move(acc);
  return true;
}

EquationSolver::EquationSolver(i64 p, int E, i64 num_unknowns)
    : p_(p), E_(E), cols_(num_unknowns), stage1_(p, E, num_unknowns + 1, num_unknowns) {
  mod_ = pow_checked(p, E);
}

void EquationSolver::add_equation(SRow lhs, i64 rhs) {
  for (auto& [c, v] : lhs.e) {
    COSEQ_REQUIRE(c >= 0 && c < cols_, "EquationSolver: column out of range");
    v = mod_norm(v, mod_);
  }
  SRow row;
  row.e.reserve(lhs.e.size() + 1);
  for (auto& [c, v] : lhs.e)
    if (v != 0) row.push(c, v);
  i64 b = mod_norm(rhs, mod_);
  if (b != 0) row.push(cols_, b);
  if (!row.empty()) stage1_.insert(std::move(row));
}

SolutionSet EquationSolver::solve() {
  stage1_.finish();
  bool inconsistent = false;
  for (auto& r : stage1_.overflow_rows())
    if (!r.empty()) inconsistent = true;

  const auto& H = stage1_.pivot_rows();
  const i64 h = static_cast<i64>(H.size());

  // Transpose view: rows of M are (column j of H | e_j); Howell of M yields
  // kernel generators (rows with zero left block) and drives the solve.
  std::vector<SRow> mrows(static_cast<std::size_t>(cols_));
  for (i64 i = 0; i < h; ++i)
    for (auto& [c, v] : H[static_cast<std::size_t>(i)].e)
      if (c < cols_) mrows[static_cast<std::size_t>(c)].push(i, v);
  HowellBuilder stage2(p_, E_, h + cols_);
  for (i64 j = 0; j < cols_; ++j) {
    mrows[static_cast<std::size_t>(j)].push(h + j, 1);
    stage2.insert(std::move(mrows[static_cast<std::size_t>(j)]));
  }
  stage2.finish();

  SolutionSet out;
  for (auto& row : stage2.pivot_rows()) {
    if (row.empty() || row.e.front().first < h) continue;
    VecZ k = VecZ::Zero(cols_);
    for (auto& [c, v] : row.e) k[c - h] = v;
    out.kernel_basis.push_back(std::move(k));
  }

  if (!inconsistent) {
    SRow target;
    for (i64 i = 0; i < h; ++i) {
      i64 b = srow_get(H[static_cast<std::size_t>(i)], cols_);
      if (b != 0) target.push(i, b);
    }
    SRow combo;
    if (stage2.express(std::move(target), h, &combo)) {
      VecZ x = VecZ::Zero(cols_);
      for (auto& [c, v] : combo.e)
        if (c >= h) x[c - h] = mod_norm(-v, mod_);
      out.particular = std::move(x);
    }
  }
  return out;
}

MixedEquationSolver::MixedEquationSolver(i64 p, std::vector<int> col_exp)
    : p_(p), col_exp_(std::move(col_exp)),
      inner_(p,
             [&] {
               int e = 1;
               for (int x : col_exp_) e = std::max(e, x);
               return e;
             }(),
             static_cast<i64>(col_exp_.size())) {
  E_ = inner_.E();
}

void MixedEquationSolver::add_equation(const SRow& lhs, i64 rhs, int row_exp) {
  COSEQ_REQUIRE(row_exp >= 0 && row_exp <= E_,
                "MixedEquationSolver: row modulus exceeds working precision p^" +
                    std::to_string(E_));
  if (row_exp == 0) return; // equation mod 1 carries no content
  i64 scale = pow_checked(p_, E_ - row_exp);
  SRow s;
  s.e.reserve(lhs.e.size());
  i64 mod = pow_checked(p_, E_);
  for (auto& [c, v] : lhs.e) s.push(c, mul_mod(v, scale, mod));
  inner_.add_equation(std::move(s), mul_mod(mod_norm(rhs, mod), scale, mod));
}

SolutionSet MixedEquationSolver::solve() {
  SolutionSet raw = inner_.solve();
  SolutionSet out;
  auto project = [&](const VecZ& v) {
    VecZ w = v;
    for (i64 j = 0; j < w.size(); ++j)
      w[j] = mod_norm(w[j], pow_checked(p_, col_exp_[static_cast<std::size_t>(j)]));
    return w;
  };
  if (raw.particular) out.particular = project(*raw.particular);
  std::unordered_set<u64> seen;
  for (auto& k : raw.kernel_basis) {
    VecZ w = project(k);
    if (w.isZero()) continue;
    std::vector<i64> key(w.data(), w.data() + w.size());
    if (seen.insert(hash_ids(key)).second) out.kernel_basis.push_back(std::move(w));
  }
  return out;
}

SolutionSet howell_solve(const MatZ& A, const VecZ& b, const ResidueRing& R) {
  COSEQ_REQUIRE(A.rows() == b.size(), "howell_solve: dimension mismatch");
  EquationSolver solver(R.p, R.k, A.cols());
  for (i64 i = 0; i < A.rows(); ++i)
    solver.add_equation(srow_from_dense(A.row(i).transpose(), R.mod), b[i]);
  return solver.solve();
}

SolutionSet howell_solve(const SparseTriplets& A, const VecZ& b, const ResidueRing& R) {
  COSEQ_REQUIRE(A.rows == b.size(), "howell_solve: dimension mismatch");
  return howell_solve(A.dense(), b, R);
}

SolutionSet solve_mixed(const MatZ& A, const VecZ& b, const std::vector<int>& row_exp,
                        const std::vector<int>& col_exp, i64 p) {
  COSEQ_REQUIRE(A.rows() == static_cast<i64>(row_exp.size()) && A.rows() == b.size() &&
                    A.cols() == static_cast<i64>(col_exp.size()),
                "solve_mixed: dimension mismatch");
  MixedEquationSolver solver(p, col_exp);
  i64 mod = pow_checked(p, solver.E());
  for (i64 i = 0; i < A.rows(); ++i)
    solver.add_equation(srow_from_dense(A.row(i).transpose(), mod), b[i], row_exp[i]);
  return solver.solve();
}

MatB to_big(const MatZ& a) {
  MatB m(a.rows(), a.cols());
  for (i64 i = 0; i < a.rows(); ++i)
    for (i64 j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

VecB to_big(const VecZ& a) {
  VecB v(a.size());
  for (i64 i = 0; i < a.size(); ++i) v[i] = a[i];
  return v;
}

MatB big_identity(i64 n) {
  MatB m = MatB::Constant(n, n, BigInt(0));
  for (i64 i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

MatB big_mat_mul(const MatB& a, const MatB& b) {
  COSEQ_REQUIRE(a.cols() == b.rows(), "big_mat_mul: dimension mismatch");
  MatB out = MatB::Constant(a.rows(), b.cols(), BigInt(0));
  for (i64 i = 0; i < a.rows(); ++i)
    for (i64 k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (i64 j = 0; j < b.cols(); ++j)
        if (b(k, j) != 0) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

VecB big_mat_vec(const MatB& a, const VecB& x) {
  COSEQ_REQUIRE(a.cols() == x.size(), "big_mat_vec: dimension mismatch");
  VecB out = VecB::Constant(a.rows(), BigInt(0));
  for (i64 i = 0; i < a.rows(); ++i)
    for (i64 j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0 && x[j] != 0) out[i] += a(i, j) * x[j];
  return out;
}

VecZ reduce_vec(const VecB& v, i64 mod) {
  VecZ out(v.size());
  for (i64 i = 0; i < v.size(); ++i) {
    BigInt r = v[i] % mod;
    if (r < 0) r += mod;
    out[i] = static_cast<i64>(r);
  }
  return out;
}

SmithForm smith_normal_form(MatB A) {
  SmithForm f;
  int_elim(A, nullptr, &f.U, &f.V);
  f.D = A;
  for (i64 i = 0; i < std::min(A.rows(), A.cols()); ++i)
    if (A(i, i) != 0) {
      f.invariants.push_back(A(i, i));
      ++f.rank;
    }
  return f;
}

SmithForm smith_normal_form(const MatZ& A) { return smith_normal_form(to_big(A)); }

std::vector<BigInt> smith_invariants(MatB A) {
  int_elim(A, nullptr, nullptr, nullptr);
  std::vector<BigInt> inv;
  for (i64 i = 0; i < std::min(A.rows(), A.cols()); ++i)
    if (A(i, i) != 0) inv.push_back(A(i, i));
  return inv;
}

MatB integer_kernel_basis(const MatB& A) {
  MatB W = A;
  MatB V;
  int_elim(W, nullptr, nullptr, &V);
  std::vector<i64> free_cols;
  for (i64 j = 0; j < W.cols(); ++j)
    if (j >= std::min(W.rows(), W.cols()) || W(j, j) == 0) free_cols.push_back(j);
  MatB K(A.cols(), static_cast<i64>(free_cols.size()));
  for (i64 t = 0; t < K.cols(); ++t)
    for (i64 i = 0; i < A.cols(); ++i) K(i, t) = V(i, free_cols[static_cast<std::size_t>(t)]);
  return K;
}

std::optional<VecZ> solve_over_Zp(const MatB& A, const VecB& b, i64 p, int prec) {
  COSEQ_REQUIRE(A.rows() == b.size(), "solve_over_Zp: dimension mismatch");
  COSEQ_REQUIRE(prec >= 1, "solve_over_Zp: precision must be >= 1");
  MatB W = A;
  MatB rhs(b.size(), 1);
  for (i64 i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
  MatB V;
  int_elim(W, &rhs, nullptr, &V);
  i64 mod = pow_checked(p, prec);
  VecB y = VecB::Constant(A.cols(), BigInt(0));
  for (i64 i = 0; i < A.rows(); ++i) {
    BigInt d = (i < A.cols()) ? W(i, i) : BigInt(0);
    const BigInt& ci = rhs(i, 0);
    if (d == 0) {
      if (ci != 0) return std::nullopt;
      continue;
    }
    if (ci == 0) continue;
    int vd = val_p(d, p);
    if (val_p(ci, p) < vd) return std::nullopt;
    BigInt pv = 1;
    for (int t = 0; t < vd; ++t) pv *= p;
    BigInt num = ci / pv;
    BigInt den = d / pv;
    i64 den_mod = static_cast<i64>(((den % mod) + mod) % mod);
    BigInt yi = (num % mod) * inv_mod(den_mod, mod);
    y[i] = yi;
  }
  return reduce_vec(big_mat_vec(V, y), mod);
}

std::optional<MatB> solve_integer_columns(const MatB& A, const MatB& B) {
  COSEQ_REQUIRE(A.rows() == B.rows(), "solve_integer_columns: dimension mismatch");
  MatB W = A;
  MatB rhs = B;
  MatB V;
  int_elim(W, &rhs, nullptr, &V);
  MatB Y = MatB::Constant(A.cols(), B.cols(), BigInt(0));
  for (i64 i = 0; i < A.rows(); ++i) {
    BigInt d = (i < A.cols()) ? W(i, i) : BigInt(0);
    for (i64 j = 0; j < B.cols(); ++j) {
      const BigInt& ci = rhs(i, j);
      if (d == 0) {
        if (ci != 0) return std::nullopt;
        continue;
      }
      if (ci % d != 0) return std::nullopt;
      Y(i, j) = ci / d;
    }
  }
  return big_mat_mul(V, Y);
}

MatB unimodular_inverse(const MatB& u) {
  COSEQ_REQUIRE(u.rows() == u.cols(), "unimodular_inverse: square matrix required");
  auto inv = solve_integer_columns(u, big_identity(u.rows()));
  COSEQ_REQUIRE(inv.has_value(), "unimodular_inverse: matrix is not unimodular");
  return *inv;
}

std::vector<int> padic_cokernel_exponents(std::vector<VecZ> rows, i64 num_cols, i64 p, int E) {
  COSEQ_REQUIRE(E >= 1, "padic_cokernel_exponents: E must be >= 1");
  i64 mod = pow_checked(p, E);
  COSEQ_REQUIRE(mod <= (i64(1) << 31), "padic_cokernel_exponents: p^E exceeds bound");
  for (auto& r : rows) {
    COSEQ_REQUIRE(r.size() == num_cols, "padic_cokernel_exponents: row width mismatch");
    for (i64 j = 0; j < r.size(); ++j) r[j] = mod_norm(r[j], mod);
  }
  const i64 nr = static_cast<i64>(rows.size());
  std::vector<int> exps;
  std::vector<i64> colperm(num_cols);
  for (i64 j = 0; j < num_cols; ++j) colperm[j] = j;

  i64 k = 0;
  for (; k < num_cols; ++k) {
    int best_v = E;
    i64 pi = -1, pj = -1;
    for (i64 i = k; i < nr; ++i)
      for (i64 j = k; j < num_cols; ++j) {
        i64 a = rows[static_cast<std::size_t>(i)][j];
        if (a == 0) continue;
        int v = val_p(a, p, E);
        if (v < best_v || pi < 0) {
          best_v = v;
          pi = i;
          pj = j;
          if (v == 0) goto found;
        }
      }
  found:
    if (pi < 0) break; // remaining generators only carry the implicit p^E relation
    if (pi != k) std::swap(rows[static_cast<std::size_t>(pi)], rows[static_cast<std::size_t>(k)]);
    if (pj != k)
      for (i64 i = 0; i < nr; ++i)
        std::swap(rows[static_cast<std::size_t>(i)][pj], rows[static_cast<std::size_t>(i)][k]);
    auto& prow = rows[static_cast<std::size_t>(k)];
    i64 pv = pow_checked(p, best_v);
    i64 unit = prow[k] / pv;
    i64 uinv = inv_mod(unit, mod);
    for (i64 j = k; j < num_cols; ++j) prow[j] = mul_mod(prow[j], uinv, mod);
    for (i64 i = k + 1; i < nr; ++i) {
      i64 a = rows[static_cast<std::size_t>(i)][k];
      if (a == 0) continue;
      i64 f = a / pv;
      auto& ri = rows[static_cast<std::size_t>(i)];
      for (i64 j = k; j < num_cols; ++j)
        ri[j] = mod_norm(ri[j] - mul_mod(f, prow[j], mod), mod);
    }
    // Column k is zero off the pivot, so clearing the pivot row's tail is a
    // pure column operation that touches nothing else.
    for (i64 j = k + 1; j < num_cols; ++j) prow[j] = 0;
    exps.push_back(best_v);
  }
  while (static_cast<i64>(exps.size()) < num_cols) exps.push_back(E);
  return exps;
}

AbelianInvariants quotient_invariants(const std::vector<VecZ>& z_gens,
                                      const std::vector<VecZ>& b_gens,
                                      const std::vector<int>& ambient_exp, i64 p) {
  const i64 d = static_cast<i64>(ambient_exp.size());
  const i64 s = static_cast<i64>(z_gens.size());
  const i64 t = static_cast<i64>(b_gens.size());
  for (auto& z : z_gens)
    COSEQ_REQUIRE(z.size() == d, "quotient_invariants: generator dimension mismatch");
  for (auto& b : b_gens)
    COSEQ_REQUIRE(b.size() == d, "quotient_invariants: generator dimension mismatch");
  if (d == 0 || s == 0) {
    // span(Z) trivial: every B generator must be zero in the ambient group.
    for (std::size_t j = 0; j < b_gens.size(); ++j)
      for (i64 r = 0; r < d; ++r)
        COSEQ_REQUIRE(mod_norm(b_gens[j][r], pow_checked(p, ambient_exp[static_cast<std::size_t>(r)])) == 0,
                      "quotient_invariants: containment violation, witness B_gens[" +
                          std::to_string(j) + "]");
    return {};
  }
  int E = 1;
  for (int e : ambient_exp) E = std::max(E, e);

  // Containment: each B generator must be an integer combination of Z gens.
  for (std::size_t j = 0; j < b_gens.size(); ++j) {
    MixedEquationSolver solver(p, std::vector<int>(static_cast<std::size_t>(s), E));
    i64 mod = pow_checked(p, solver.E());
    for (i64 r = 0; r < d; ++r) {
      SRow lhs;
      for (i64 i = 0; i < s; ++i) lhs.push(i, mod_norm(z_gens[static_cast<std::size_t>(i)][r], mod));
      solver.add_equation(lhs, b_gens[j][r], ambient_exp[static_cast<std::size_t>(r)]);
    }
    auto sol = solver.solve();
    if (!sol.particular) {
      std::string w = "(";
      for (i64 r = 0; r < d; ++r) w += (r ? "," : "") + std::to_string(b_gens[j][r]);
      w += ")";
      fail("quotient_invariants: containment violation, witness B_gens[" + std::to_string(j) +
           "] = " + w);
    }
  }

  // Relations among the Z generators modulo span(B).
  MixedEquationSolver solver(p, std::vector<int>(static_cast<std::size_t>(s + t), E));
  i64 mod = pow_checked(p, solver.E());
  for (i64 r = 0; r < d; ++r) {
    SRow lhs;
    for (i64 i = 0; i < s; ++i) lhs.push(i, mod_norm(z_gens[static_cast<std::size_t>(i)][r], mod));
    for (i64 j = 0; j < t; ++j)
      lhs.push(s + j, mod_norm(b_gens[static_cast<std::size_t>(j)][r], mod));
    solver.add_equation(lhs, 0, ambient_exp[static_cast<std::size_t>(r)]);
  }
  auto sol = solver.solve();
  std::vector<VecZ> rel;
  rel.reserve(sol.kernel_basis.size());
  for (auto& k : sol.kernel_basis) rel.push_back(k.head(s));

  auto exps = padic_cokernel_exponents(std::move(rel), s, p, E);
  AbelianInvariants inv;
  for (int v : exps)
    if (v >= 1) inv.push_back(pow_checked(p, v));
  std::sort(inv.begin(), inv.end(), std::greater<i64>());
  return inv;
}

VecZ LatticeQuotient::project(const VecB& x_ambient) const {
  COSEQ_REQUIRE(x_ambient.size() == dim, "LatticeQuotient: dimension mismatch");
  VecB y = big_mat_vec(U, x_ambient);
  VecZ out(dim);
  for (i64 i = 0; i < dim; ++i) {
    BigInt r = y[i] % orders[static_cast<std::size_t>(i)];
    if (r < 0) r += orders[static_cast<std::size_t>(i)];
    out[i] = static_cast<i64>(r);
  }
  return out;
}

VecZ LatticeQuotient::project(const VecZ& x_ambient) const { return project(to_big(x_ambient)); }

VecB LatticeQuotient::lift(const VecZ& y) const {
  COSEQ_REQUIRE(y.size() == dim, "LatticeQuotient: dimension mismatch");
  return big_mat_vec(Uinv, to_big(y));
}

i64 LatticeQuotient::size_log_p() const {
  i64 s = 0;
  for (i64 o : orders) s += val_p(o, p);
  return s;
}

LatticeQuotient make_lattice_quotient(const MatB& sublattice_cols, i64 p) {
  COSEQ_REQUIRE(sublattice_cols.rows() == sublattice_cols.cols(),
                "make_lattice_quotient: square basis matrix required");
  LatticeQuotient q;
  q.p = p;
  q.dim = sublattice_cols.rows();
  SmithForm f = smith_normal_form(sublattice_cols);
  COSEQ_REQUIRE(f.rank == q.dim, "make_lattice_quotient: sublattice is not finite index");
  q.U = f.U;
  q.Uinv = unimodular_inverse(f.U);
  for (auto& d : f.invariants) {
    COSEQ_REQUIRE(d > 0, "make_lattice_quotient: nonpositive invariant");
    BigInt r = d;
    while (r % p == 0) r /= p;
    COSEQ_REQUIRE(r == 1, "make_lattice_quotient: index is not a p-power");
    COSEQ_REQUIRE(d <= BigInt(std::numeric_limits<i64>::max()),
                  "make_lattice_quotient: order exceeds 64-bit range");
    q.orders.push_back(static_cast<i64>(d));
  }
  return q;
}

} // namespace coseq

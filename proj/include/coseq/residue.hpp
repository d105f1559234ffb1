#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "coseq/common.hpp"

namespace coseq {

// Arithmetic context for Z/p^k, the coefficient ring of all truncated solving.
struct ResidueRing {
  i64 p = 0;
  int k = 0;
  i64 mod = 0; // p^k

  ResidueRing(i64 p_, int k_);
};

// Multiset of prime-power orders describing a finite abelian p-group,
// sorted descending.
using AbelianInvariants = std::vector<i64>;

struct SolutionSet {
  std::optional<VecZ> particular;
  std::vector<VecZ> kernel_basis;
};

// Sparse triplet input for the large, very sparse coboundary systems.
struct SparseTriplets {
  i64 rows = 0;
  i64 cols = 0;
  struct Entry {
    i64 r, c, v;
  };
  std::vector<Entry> entries;

  MatZ dense() const; // accumulates duplicates; no reduction
};

// Sparse row: sorted (column, value) pairs, values nonzero.
struct SRow {
  std::vector<std::pair<i64, i64>> e;

  bool empty() const { return e.empty(); }
  void clear() { e.clear(); }
  void push(i64 col, i64 val) {
    if (val != 0) e.emplace_back(col, val);
  }
};

SRow srow_from_dense(const VecZ& v, i64 mod, i64 col_offset = 0);

// Incremental Howell-form builder over Z/p^E.  Rows inserted in any order;
// the row span is maintained exactly, pivot leading coefficients are powers
// of p, and annihilator rows are added so the span description is complete.
// Columns at or beyond `pivot_limit` (if >= 0) are never used as pivots; rows
// whose leading entry lands there are collected separately.
class HowellBuilder {
public:
  HowellBuilder(i64 p, int E, i64 width, i64 pivot_limit = -1);

  void insert(SRow row);
  void finish(); // canonicalize; builder becomes read-only

  i64 width() const { return width_; }
  i64 modulus() const { return mod_; }
  const std::vector<SRow>& pivot_rows() const { return rows_; } // sorted after finish
  const std::vector<SRow>& overflow_rows() const { return overflow_; }

  // Reduce target against pivot rows until its support lies at or beyond
  // clear_limit; returns false if some column < clear_limit cannot be
  // cleared.  combo_out receives the remainder row.  Valid after finish().
  bool express(SRow target, i64 clear_limit, SRow* combo_out) const;

private:
  i64 p_;
  int E_;
  i64 mod_;
  i64 width_;
  i64 pivot_limit_;
  bool finished_ = false;
  std::vector<SRow> rows_;
  std::vector<int> pivot_exp_;  // valuation of pivot entry, per row
  std::vector<i64> pivot_col_;  // per row
  std::vector<int> row_of_col_; // col -> row index or -1
  std::vector<SRow> overflow_;

  void reduce_insert(SRow row, std::vector<SRow>& queue);
};

// Streaming equation solver over Z/p^E: equations are compressed into an
// echelon as they arrive, so memory stays O(unknowns^2) even for the very
// tall coboundary systems.
class EquationSolver {
public:
  EquationSolver(i64 p, int E, i64 num_unknowns);

  void add_equation(SRow lhs, i64 rhs);
  SolutionSet solve(); // consumes the solver

  i64 p() const { return p_; }
  int E() const { return E_; }

private:
  i64 p_;
  int E_;
  i64 mod_;
  i64 cols_;
  HowellBuilder stage1_;
};

// Equations with per-row moduli p^row_exp over unknowns that are coordinates
// of orders p^col_exp: everything is lifted to Z/p^max and scaled, then
// results are projected back.
class MixedEquationSolver {
public:
  MixedEquationSolver(i64 p, std::vector<int> col_exp);

  void add_equation(const SRow& lhs, i64 rhs, int row_exp);
  SolutionSet solve();

  int E() const { return E_; }

private:
  i64 p_;
  int E_;
  std::vector<int> col_exp_;
  EquationSolver inner_;
};

SolutionSet howell_solve(const MatZ& A, const VecZ& b, const ResidueRing& R);
SolutionSet howell_solve(const SparseTriplets& A, const VecZ& b, const ResidueRing& R);

SolutionSet solve_mixed(const MatZ& A, const VecZ& b, const std::vector<int>& row_exp,
                        const std::vector<int>& col_exp, i64 p);

// Integer Smith normal form with transform witnesses: U*A*V = D diagonal,
// U and V unimodular, diagonal entries nonnegative with d1 | d2 | ...
struct SmithForm {
  MatB U, V, D;
  std::vector<BigInt> invariants; // nonzero diagonal entries
  int rank = 0;
};

SmithForm smith_normal_form(MatB A);
SmithForm smith_normal_form(const MatZ& A);

// Invariant factors only (no transforms); cheaper on large inputs.
std::vector<BigInt> smith_invariants(MatB A);

// Columns form a Z-basis of {x : A x = 0}; the lattice is saturated.
MatB integer_kernel_basis(const MatB& A);

// Solve A x = b over the p-adic integers; returns x mod p^prec when solvable.
std::optional<VecZ> solve_over_Zp(const MatB& A, const VecB& b, i64 p, int prec);

// Solve A X = B exactly over the integers (A need not be square; every
// column of B must be an integer combination of A's columns).
std::optional<MatB> solve_integer_columns(const MatB& A, const MatB& B);

// Invariants of span(Z_gens)/span(B_gens) inside the product of Z/p^{e_i};
// throws with a witness if some B generator is outside span(Z_gens).
AbelianInvariants quotient_invariants(const std::vector<VecZ>& z_gens,
                                      const std::vector<VecZ>& b_gens,
                                      const std::vector<int>& ambient_exp, i64 p);

// Elementary-divisor exponents (capped at E) of the cokernel presented by
// `rows` as relations on `num_cols` generators, working modulo p^E.  The
// relation list is implicitly extended by p^E times each generator.
std::vector<int> padic_cokernel_exponents(std::vector<VecZ> rows, i64 num_cols, i64 p, int E);

// Finite quotient Z^d / C·Z^d of p-power index presented in Smith
// coordinates: x maps to (U·x mod orders).
struct LatticeQuotient {
  i64 p = 0;
  i64 dim = 0;
  MatB U, Uinv;            // unimodular, U * C * V = D
  std::vector<i64> orders; // Smith diagonal, ascending divisibility, > 0

  VecZ project(const VecB& x_ambient) const;
  VecZ project(const VecZ& x_ambient) const;
  // A preimage of quotient coordinates, exact over Z.
  VecB lift(const VecZ& y) const;
  i64 size_log_p() const; // sum of exponents
};

LatticeQuotient make_lattice_quotient(const MatB& sublattice_cols, i64 p);

MatB to_big(const MatZ& a);
VecB to_big(const VecZ& a);
MatB big_identity(i64 n);
MatB big_mat_mul(const MatB& a, const MatB& b);
VecB big_mat_vec(const MatB& a, const VecB& x);
MatB unimodular_inverse(const MatB& u);
VecZ reduce_vec(const VecB& v, i64 mod);

} // namespace coseq

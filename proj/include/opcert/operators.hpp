#pragma once

#include <functional>
#include <optional>
#include <string>

#include "opcert/funcspace.hpp"

namespace opcert {

enum class OpKind { first_order, schrodinger, multiplication, block, custom };

// Structured record of the continuum operator a matrix truncates; enough to
// re-realize the same operator on a finer or wider grid.
struct SymOp;

struct OpDescriptor {
  OpKind kind = OpKind::custom;
  std::string label;
  std::function<double(double)> potential;  // may be empty
  std::string truncation = "dirichlet";
  // composite operators (doublings) re-realize through this hook
  std::function<SymOp(const Grid&)> rebuild;
};

// Multiplication operator data: a sampled function acting pointwise, with an
// optional compact support radius. On doubled spaces it acts block-diagonally.
struct AlgebraElement {
  GridFunction fn;
  std::optional<double> compact_support_radius;

  SpMat as_matrix(int multiplicity = 1) const;
  AlgebraElement realize_on(const Grid& g) const;  // requires a sampler
  std::function<double(double)> sampler;           // continuum description, optional
};

AlgebraElement bump(const Grid& g, double radius, double amplitude = 1.0);

// A finite Hermitian truncation of a symmetric operator. The matrix equals
// its conjugate transpose exactly; constructors enforce this bit for bit.
struct SymOp {
  Grid grid;
  int multiplicity = 1;  // matrix dimension = multiplicity * grid.n_points
  SpMat matrix;
  bool graded = false;
  RVector gamma;                 // +-1 entries when graded
  std::optional<SpMat> clifford;  // involution e, commuting with the algebra
  OpDescriptor descriptor;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Central-difference discretization of i d/dx + M_f (Dirichlet truncation):
// (i/2h)(psi_{j+1} - psi_{j-1}) + f(x_j) psi_j. Hermitian by construction.
SymOp first_order(const Grid& g, const GridFunction& f);
SymOp first_order(const Grid& g, const std::function<double(double)>& f);

// 3-point Laplacian (1/h^2)(-psi_{j+1} + 2 psi_j - psi_{j-1}) + diag(V).
SymOp schrodinger(const Grid& g, const GridFunction& V);
SymOp schrodinger(const Grid& g, const std::function<double(double)>& V);

SymOp multiplication(const AlgebraElement& a);
SymOp zero_op(const Grid& g);

// Doubling of an ungraded operator:
//   [[0, -iD], [iD, 0]]  with  gamma = diag(1, -1),  e = [[0, 1], [1, 0]].
// The result is gamma-odd and anti-commutes with e exactly.
SymOp double_odd(const SymOp& d);

// Graded operator [[0, Dminus], [Dplus, 0]] with Dminus = Dplus^* enforced
// (mismatch beyond 1e-12 rejected; the stored matrix uses Dplus^* exactly).
SymOp assemble_even(const Grid& g, const SpMat& dplus, const SpMat& dminus);

// Inverse of assemble_even: D = -(i/2)(Dplus - Dminus), M = (1/2)(Dplus + Dminus),
// both Hermitian, with Dplus = iD + M and Dminus = -iD + M.
struct EvenSplit {
  SymOp d;
  SymOp m;
};
EvenSplit split_even(const SymOp& til_d);

// Graded tensor product doubling D (x) 1 + M (x) e on E (+) E, with the sign
// of the M block resolved by the grading of D (Koszul rule), so that the two
// terms anti-commute whenever [D, M] = 0.
//
// Worked 4x4 example (n = 2, gamma0 = diag(1,-1), D gamma0-odd, M = m*I):
//   D (x) 1 = [[D, 0], [0, D]],   M (x) e = [[0, M g0], [g0 M, 0]]
//   {D (x) 1, M (x) e} = [[0, (DM - MD) g0], [g0 (MD - DM), 0]] = [D, M] (x) e.
SymOp graded_tensor_double(const SymOp& d, const SymOp& m);

// Largest singular value by power iteration on T^* T; tolerance 1e-10,
// at most 10000 iterations, non-convergence reported with final residual.
double op_norm(const SpMat& t, double tol = 1e-10, int max_iter = 10000);
double op_norm(const SymOp& t, double tol = 1e-10, int max_iter = 10000);

// T a - a T and T a + a T with a acting diagonally (block-diagonal on doubled
// spaces). Computed entrywise as T_ij (a_j -+ a_i): the diagonal of T drops
// out of the commutator exactly, in floating point too.
SpMat commutator(const SymOp& t, const AlgebraElement& a);
SpMat anticommutator(const SymOp& t, const AlgebraElement& a);

SpMat commutator(const SpMat& s, const SpMat& t);
SpMat anticommutator(const SpMat& s, const SpMat& t);

bool is_hermitian(const SpMat& a, double tol = 0.0);

// Re-realize an operator from its descriptor on another grid.
SymOp realize_descriptor(const OpDescriptor& dsc, const Grid& g);
SymOp realize_on(const SymOp& proto, const Grid& g);

CMatrix dense(const SpMat& a);

}  // namespace opcert

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opcert/common.hpp"

namespace opcert {

// B = (+)_i M_{d_i}(C). Every irreducible representation is one of the
// blocks, which turns "for all irreducible representations" into an
// enumerable check. Elements are block-diagonal complex matrices.
struct FiniteAlgebra {
  std::vector<int> block_dims;

  int dim() const;  // sum d_i^2, the complex dimension of B
  int block_offset(int i) const;
};

// E = B^rank with <u|v> = sum_j u_j^* v_j in B. Module vectors and module
// operators are flattened over the coordinates (slot, block, col-major entry),
// so a module operator is an N x N complex matrix that may or may not be
// right-B-linear; B-linearity is validated, never assumed.
struct FiniteModule {
  FiniteAlgebra algebra;
  int rank = 0;

  int flat_dim() const { return rank * algebra.dim(); }
  int local_dim(int block) const { return rank * algebra.block_dims.at(block); }
};

FiniteModule make_module(std::vector<int> block_dims, int rank);

// Element of B as blocks.
struct AlgebraMat {
  std::vector<CMatrix> blocks;
};

AlgebraMat random_algebra_element(const FiniteAlgebra& b, std::uint64_t seed, bool hermitian = false);
CVector random_module_vector(const FiniteModule& e, std::uint64_t seed);
CMatrix random_b_linear_operator(const FiniteModule& e, std::uint64_t seed, bool hermitian = false);

// Right action u.b and the B-valued inner product.
CVector right_mult(const FiniteModule& e, const CVector& u, const AlgebraMat& b);
AlgebraMat module_inner(const FiniteModule& e, const CVector& u, const CVector& v);

bool is_b_linear(const FiniteModule& e, const CMatrix& t, double tol = kExactTol);

// Module adjoint: <Tu|v> = <u|T*v> exactly; rejects non-B-linear input.
CMatrix adjoint(const FiniteModule& e, const CMatrix& t);

// Induced matrix of T on the localization E (x)_B C^{d_i}.
CMatrix localize(const FiniteModule& e, const CMatrix& t, int block);

struct LocalGlobalVerdict {
  bool verdict = false;              // all localizations Hermitian
  bool perturbed_check_failed = false;  // the deliberately broken copy fails
  std::vector<double> hermiticity_defects;
};

// Checks T = T* through every irreducible localization, and confirms on a
// randomly perturbed non-symmetric copy that the check can fail.
LocalGlobalVerdict check_local_global(const FiniteModule& e, const CMatrix& t,
                                      std::uint64_t seed = 1);

struct BatteryReport {
  int instances = 0;
  int failures = 0;
  std::string first_failure_json;  // serialized counterexample, empty if none
  double max_defect = 0.0;
};

// 100 random instances per identity:
//   [M, phi] = M phi - (M phi)^*   for Hermitian module operators,
//   (S + T)^pi = S^pi + T^pi,  (S T)^pi = S^pi T^pi,  (T^*)^pi = (T^pi)^*,
//   <u|u> >= 0 blockwise, and the local-global equivalence both ways.
// Equality gates at 1e-12; any failure aborts with the counterexample
// serialized into the report.
BatteryReport check_lemma_battery(std::uint64_t seed);

}  // namespace opcert

#pragma once

#include <map>

#include "opcert/operators.hpp"

namespace opcert {

// Desk-scale proxy for compactness: singular-value profile (top 64) with a
// decay gate and a two-resolution stability gate. Raw decay at one resolution
// is meaningless for truncations; the refinement protocol is the guard
// against false positives.
struct CompactnessProfile {
  std::vector<double> singular_values;  // descending, top 64 (or fewer)
  double ratio = 0.0;                   // sigma_64 / sigma_1
  double refined_ratio = 0.0;
  bool decay_verdict = false;       // ratio <= 1e-2 at both resolutions
  bool refinement_stable = false;   // relative drift of ratio <= 20%
  bool exact_zero = false;
  double decay_threshold = 1e-2;
  double stability_tol = 0.2;
};

struct KasparovCertificate {
  std::map<std::string, double> commutator_norms;
  std::map<std::string, CompactnessProfile> local_compactness;  // per generator, worse of the two resolvent signs
  bool grading_ok = false;
  bool overall = false;
};

// Checks the two module conditions at desk scale: bounded commutators
// [D, a], and decay of the singular values of a (D +- i)^{-1}. Generators
// must be compactly supported strictly inside the grid; supports touching
// the boundary would only measure truncation artifacts.
KasparovCertificate certify_module(const SymOp& d, const std::vector<AlgebraElement>& generators);

// F = D (1 + D^2)^{-1/2}. Dense eigendecomposition for dim <= 2001;
// Chebyshev approximation (error <= 1e-8, budgeted separately) above, which
// requires tridiagonal structure.
CMatrix bounded_transform(const SymOp& d);

// Singular-value profile of a (F_{D+M} - F_D): the bounded-picture evidence
// that D + M represents the same class as D. M = 0 yields the exact zero
// profile. Requires D tridiagonal and M diagonal (shared real gauge).
CompactnessProfile perturbation_class_check(const SymOp& d, const SymOp& m, const AlgebraElement& a);

// Norm of [[0, [D,a] + M a], [[D,a*] - a* M, 0]]: a finite value witnesses
// the first of the three product-representation conditions; the other two
// are trivial in this setting and deliberately not implemented.
double kucerovsky_condition1(const SymOp& d, const SymOp& m, const AlgebraElement& a);

struct EvenToOddReduction {
  SymOp til_d_prime;  // (1/2)(T - eTe), anti-commutes with e
  SymOp til_m;        // (1/2)(T + eTe), commutes with e
  double anticommutation_residual = 0.0;
};

// Exact idempotent decomposition T = T' + M with {T', e} = 0 and [M, e] = 0.
EvenToOddReduction reduce_even_to_odd(const SymOp& til_d);

}  // namespace opcert

#pragma once

#include "opcert/approxid.hpp"

namespace opcert {

// Witnessed bounds for one selected subsequence: strict 4^{-k} bounds on the
// cutoff commutators and on the cutoff-difference products against the
// totals. Every stored bound is re-verified independently after selection.
struct SelectionCertificate {
  std::vector<int> selected;                    // raw indices K(1..N)
  std::vector<double> comm_norms;               // ||[D, phi_k]||, bound 4^{-k}
  std::vector<std::vector<double>> prod_norms;  // per k: ||(phi_{k+1}-phi_k) a_j||, j < k, bound 4^{-k}
  bool all_bounds_strict = false;
};

struct CutoffSelection {
  CutoffFamily family;  // the relabeled subsequence phi_1, ..., phi_N
  SelectionCertificate certificate;
};

// Greedy smallest-index subsequence selection. Slot k >= 2 additionally
// requires the candidate plateau to cover the supports of a_j (j < k), so
// the later difference-product bounds are achievable by disjoint supports.
CutoffSelection select_subsequence(const CutoffFamily& raw,
                                   const std::vector<AlgebraElement>& totals, const SymOp& d,
                                   int slots);

// Truncations m_n = sum_{k<=n} 2^k (phi_{k+1} - phi_k); non-negative and
// pointwise non-decreasing in n for plateau cutoffs.
struct MultiplierSeries {
  CutoffSelection selection;
  int depth = 0;
  std::vector<AlgebraElement> truncations;  // m_1 ... m_depth
  GridFunction growth_profile;              // = deepest truncation

  const AlgebraElement& deepest() const { return truncations.back(); }
  AlgebraElement deepest_on(const Grid& g) const;
};

MultiplierSeries build_multiplier(const CutoffSelection& sel, int n_trunc);

// Tail sups of |(m_n +- i)^{-1}| beyond the annulus radii R_k (the on-grid
// 1/2-level sets of phi_k), against the bound 2^{-k+1}.
struct ResolventTailReport {
  std::vector<int> ks;
  std::vector<double> radii;
  std::vector<double> tail_sups;
  std::vector<double> bounds;
  bool verdict = false;
  double level = 0.5;
};

ResolventTailReport resolvent_in_A(const MultiplierSeries& series);

struct CompactResolventOptions {
  double lambda_max = 32.0;       // counting thresholds 1, 2, 4, ..., lambda_max
  double growth_factor = 1.25;    // nested domain enlargement
  double boundary_fraction = 0.05;
  double boundary_mass_tol = 1e-6;
  double eig_tol = 1e-9;
  int jobs = 1;
};

// Desk-scale surrogate for compact resolvent: the eigenvalue counting
// function of the doubled perturbed truncation must be finite and identical
// across two nested domains for every threshold below the growth frontier,
// with counted eigenvectors carrying no mass near the domain boundary.
struct CompactResolventReport {
  std::vector<double> lambdas;
  std::vector<long> counts_base;
  std::vector<long> counts_grown;
  bool counting_stable = false;
  double smallest_escaping = 0.0;  // first differing threshold, else boundary frontier
  double max_boundary_mass = 0.0;
  double outside_level_set_mass = 0.0;  // diagnostic only
  bool verdict = false;
};

// Doubled odd operator [[0, -iD + M], [iD + M, 0]] with M = multiplication by
// the deepest truncation. D must have purely imaginary tridiagonal entries
// (iD real), so the doubled spectrum reduces to singular values of a real
// tridiagonal block.
CompactResolventReport compact_resolvent_certify(const SymOp& d, const MultiplierSeries& series,
                                                 const CompactResolventOptions& opt = {});

// As above with an explicitly given multiplier sample (synthetic stand-ins).
CompactResolventReport compact_resolvent_certify(const SymOp& d, const AlgebraElement& m,
                                                 const CompactResolventOptions& opt = {});

// Even variant: D graded, doubled as D (x) 1 + M (x) e.
CompactResolventReport even_variant_certify(const SymOp& d_graded, const MultiplierSeries& series,
                                            const CompactResolventOptions& opt = {});
CompactResolventReport even_variant_certify(const SymOp& d_graded, const AlgebraElement& m,
                                            const CompactResolventOptions& opt = {});

// The 2x2 matrix-multiplier family  m~ = [[0, i m], [-i m, 0]],
// phi~_k = [[1, 1/k], [1/k, 1]] phi_k  has  [m~, phi~_k] = (2i/k) diag(m, -m) phi_k,
// so the commutator norms are (2/k) sup |m phi_k|: bounded m decays, while
// e.g. m = exp(x^2) diverges. Both the matrix-computed and the closed-form
// norms are returned; they agree to rounding.
struct CounterexampleReport {
  std::vector<int> ks;
  std::vector<double> matrix_norms;
  std::vector<double> closed_form;
};

CounterexampleReport counterexample_commutator(const std::function<double(double)>& m,
                                               const CutoffFamily& family);

}  // namespace opcert

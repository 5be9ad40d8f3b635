#pragma once

#include <cstdint>
#include <vector>

#include "opcert/common.hpp"

namespace opcert {

// Real symmetric banded matrix in lower band storage:
// band(d, j) = A(j + d, j) for 0 <= d <= bw, j + d < n.
class SymBand {
 public:
  SymBand() : n_(0), bw_(0) {}
  SymBand(int n, int bw) : n_(n), bw_(bw), band_(RMatrix::Zero(bw + 1, n)) {}

  static SymBand from_sparse(const SpMatR& a);

  int size() const { return n_; }
  int bandwidth() const { return bw_; }

  double& at(int d, int j) { return band_(d, j); }
  double at(int d, int j) const { return band_(d, j); }

  // A(i, j) for any index pair (zero outside the band).
  double entry(int i, int j) const;

  RVector apply(const RVector& v) const;

 private:
  int n_, bw_;
  RMatrix band_;
};

struct Tridiag {
  RVector diag;
  RVector sub;  // size n-1
};

// Orthogonal (Givens bulge-chasing) reduction of a symmetric banded matrix to
// tridiagonal form. Preserves the spectrum to rounding; O(n^2 * bw) flops.
Tridiag tridiagonalize(const SymBand& a);

// Number of eigenvalues strictly below tau (Sturm / LDL^T sign count).
int sturm_count(const Tridiag& t, double tau);

// Gershgorin enclosure of the spectrum.
void gershgorin(const Tridiag& t, double& lo, double& hi);

// All eigenvalues in [lo, hi], ascending, by bisection to absolute tol.
std::vector<double> eigenvalues_in(const Tridiag& t, double lo, double hi, double tol);

// k-th smallest eigenvalue, 0-based.
double kth_eigenvalue(const Tridiag& t, int k, double tol);

// Banded LU with partial pivoting for (not necessarily symmetric) matrices
// with kl = ku = bw. Used for shifted solves in inverse iteration.
class BandLU {
 public:
  // Factor A - shift*I where A is symmetric banded.
  BandLU(const SymBand& a, double shift);
  RVector solve(const RVector& b) const;
  bool nearly_singular() const { return nearly_singular_; }

 private:
  int n_, kl_, ku_;
  RMatrix ab_;  // LAPACK-style working storage, (2*kl + ku + 1) x n
  std::vector<int> piv_;
  bool nearly_singular_ = false;
};

// Eigenvector at (approximately) eigenvalue lambda via inverse iteration.
RVector inverse_iteration(const SymBand& a, double lambda, std::uint64_t seed);

}  // namespace opcert

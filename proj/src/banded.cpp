#include "opcert/banded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace opcert {

SymBand SymBand::from_sparse(const SpMatR& a) {
  if (a.rows() != a.cols()) throw PreconditionError("SymBand: matrix not square");
  const int n = static_cast<int>(a.rows());
  int bw = 0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMatR::InnerIterator it(a, k); it; ++it)
      if (it.value() != 0.0) bw = std::max<int>(bw, std::abs(static_cast<int>(it.row()) - static_cast<int>(it.col())));
  SymBand b(n, bw);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMatR::InnerIterator it(a, k); it; ++it) {
      int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      if (i >= j) b.at(i - j, j) = it.value();
    }
  return b;
}

double SymBand::entry(int i, int j) const {
  int d = std::abs(i - j);
  if (d > bw_) return 0.0;
  return band_(d, std::min(i, j));
}

RVector SymBand::apply(const RVector& v) const {
  RVector r = RVector::Zero(n_);
  for (int j = 0; j < n_; ++j) {
    r[j] += band_(0, j) * v[j];
    for (int d = 1; d <= bw_ && j + d < n_; ++d) {
      r[j + d] += band_(d, j) * v[j];
      r[j] += band_(d, j) * v[j + d];
    }
  }
  return r;
}

namespace {

// Working copy of a symmetric band with one spare diagonal for the bulge.
class WorkBand {
 public:
  WorkBand(const SymBand& a, int spare)
      : n_(a.size()), w_(a.bandwidth() + spare), band_(RMatrix::Zero(w_ + 1, a.size())) {
    for (int j = 0; j < n_; ++j)
      for (int d = 0; d <= a.bandwidth() && j + d < n_; ++d) band_(d, j) = a.at(d, j);
  }

  double get(int i, int j) const {
    int d = std::abs(i - j);
    if (d > w_) return 0.0;
    return band_(d, std::min(i, j));
  }
  void set(int i, int j, double v) { band_(std::abs(i - j), std::min(i, j)) = v; }

  int size() const { return n_; }

  // Two-sided Givens rotation in the (p, p+1) plane:
  //   row_p    <- c*row_p - s*row_{p+1}
  //   row_{p+1}<- s*row_p + c*row_{p+1}
  // and the same on columns.
  void rotate(int p, double c, double s) {
    const int q = p + 1;
    const double app = get(p, p), apq = get(p, q), aqq = get(q, q);
    // off-block entries
    const int lo = std::max(0, p - w_), hi = std::min(n_ - 1, q + w_);
    for (int i = lo; i <= hi; ++i) {
      if (i == p || i == q) continue;
      const double aip = get(i, p), aiq = get(i, q);
      if (aip == 0.0 && aiq == 0.0) continue;
      set(i, p, c * aip - s * aiq);
      set(i, q, s * aip + c * aiq);
    }
    // 2x2 diagonal block
    set(p, p, c * c * app - 2.0 * c * s * apq + s * s * aqq);
    set(q, q, s * s * app + 2.0 * c * s * apq + c * c * aqq);
    set(p, q, c * s * (app - aqq) + (c * c - s * s) * apq);
  }

 private:
  int n_, w_;
  RMatrix band_;
};

// Rotation (c, s) with  s*a + c*b = 0  and  c*a - s*b = hypot(a, b).
inline void make_rot(double a, double b, double& c, double& s) {
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  const double r = std::hypot(a, b);
  c = a / r;
  s = -b / r;
}

}  // namespace

Tridiag tridiagonalize(const SymBand& a) {
  const int n = a.size();
  Tridiag t;
  t.diag.resize(n);
  t.sub = RVector::Zero(std::max(0, n - 1));
  if (a.bandwidth() <= 1) {
    for (int j = 0; j < n; ++j) t.diag[j] = a.at(0, j);
    for (int j = 0; j + 1 < n; ++j) t.sub[j] = a.bandwidth() >= 1 ? a.at(1, j) : 0.0;
    return t;
  }

  WorkBand w(a, 1);
  for (int b = a.bandwidth(); b >= 2; --b) {
    // Eliminate the b-th diagonal column by column; each kill leaves a bulge
    // at distance b+1 which is chased off the bottom before moving on.
    for (int j = 0; j + b < n; ++j) {
      // target (j + b, j), anchor (j + b - 1, j)
      int r = j + b, cidx = j;
      while (r < n) {
        const double tgt = w.get(r, cidx);
        if (tgt != 0.0) {
          double c, s;
          make_rot(w.get(r - 1, cidx), tgt, c, s);
          w.rotate(r - 1, c, s);
          w.set(r, cidx, 0.0);
        }
        // bulge created at (r + b, r - 1), distance b + 1
        cidx = r - 1;
        r = r + b;
      }
    }
  }
  for (int j = 0; j < n; ++j) t.diag[j] = w.get(j, j);
  for (int j = 0; j + 1 < n; ++j) t.sub[j] = w.get(j + 1, j);
  return t;
}

int sturm_count(const Tridiag& t, double tau) {
  const int n = static_cast<int>(t.diag.size());
  // pivmin guards against exact breakdown of the LDL^T recurrence
  double emax = 0.0;
  for (int i = 0; i + 1 < n; ++i) emax = std::max(emax, std::abs(t.sub[i]));
  const double pivmin = std::max(std::numeric_limits<double>::min(),
                                 emax * emax * std::numeric_limits<double>::min() * 4.0 + std::numeric_limits<double>::min());
  int count = 0;
  double d = t.diag[0] - tau;
  if (std::abs(d) < pivmin) d = -pivmin;
  if (d < 0.0) ++count;
  for (int i = 1; i < n; ++i) {
    d = (t.diag[i] - tau) - t.sub[i - 1] * (t.sub[i - 1] / d);
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

void gershgorin(const Tridiag& t, double& lo, double& hi) {
  const int n = static_cast<int>(t.diag.size());
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(t.sub[i - 1]);
    if (i + 1 < n) r += std::abs(t.sub[i]);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
}

namespace {

double bisect_index(const Tridiag& t, int k, double lo, double hi, double tol) {
  // smallest tau with sturm_count(tau) >= k + 1, i.e. the (k+1)-th eigenvalue
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (sturm_count(t, mid) >= k + 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> eigenvalues_in(const Tridiag& t, double lo, double hi, double tol) {
  double glo, ghi;
  gershgorin(t, glo, ghi);
  lo = std::max(lo, glo - tol);
  hi = std::min(hi, ghi + tol);
  std::vector<double> out;
  if (lo >= hi) return out;
  const int c_lo = sturm_count(t, lo);
  const int c_hi = sturm_count(t, hi);
  out.reserve(c_hi - c_lo);
  for (int k = c_lo; k < c_hi; ++k) out.push_back(bisect_index(t, k, lo, hi, tol));
  return out;
}

double kth_eigenvalue(const Tridiag& t, int k, double tol) {
  double glo, ghi;
  gershgorin(t, glo, ghi);
  return bisect_index(t, k, glo - tol, ghi + tol, tol);
}

BandLU::BandLU(const SymBand& a, double shift) : n_(a.size()), kl_(a.bandwidth()), ku_(a.bandwidth()) {
  const int rows = 2 * kl_ + ku_ + 1;
  ab_ = RMatrix::Zero(rows, n_);
  piv_.assign(n_, 0);
  // column j of A sits in ab(kl + ku + i - j, j); extra kl rows on top hold fill
  auto idx = [&](int i, int j) -> double& { return ab_(kl_ + ku_ + i - j, j); };
  for (int j = 0; j < n_; ++j) {
    for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i) idx(i, j) = a.entry(i, j);
    idx(j, j) -= shift;
  }
  // factorization with partial pivoting (row swaps within the band reach)
  double scale = 0.0;
  for (int j = 0; j < n_; ++j) scale = std::max(scale, std::abs(idx(j, j)));
  for (int k = 0; k < n_; ++k) {
    const int imax_reach = std::min(n_ - 1, k + kl_);
    int p = k;
    double best = std::abs(idx(k, k));
    for (int i = k + 1; i <= imax_reach; ++i) {
      const double v = std::abs(idx(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    piv_[k] = p;
    if (best == 0.0) {
      // exactly singular pivot: perturb, mark
      idx(k, k) = std::numeric_limits<double>::epsilon() * (scale > 0 ? scale : 1.0);
      nearly_singular_ = true;
      p = k;
      piv_[k] = k;
    }
    if (p != k) {
      const int jhi = std::min(n_ - 1, k + kl_ + ku_);
      for (int j = k; j <= jhi; ++j) std::swap(idx(k, j), idx(p, j));
    }
    const double pivot = idx(k, k);
    if (std::abs(pivot) < 1e-14 * (scale > 0 ? scale : 1.0)) nearly_singular_ = true;
    for (int i = k + 1; i <= imax_reach; ++i) {
      const double m = idx(i, k) / pivot;
      idx(i, k) = m;
      const int jhi = std::min(n_ - 1, k + kl_ + ku_);
      for (int j = k + 1; j <= jhi; ++j) idx(i, j) -= m * idx(k, j);
    }
  }
}

RVector BandLU::solve(const RVector& b) const {
  auto idx = [&](int i, int j) -> double { return ab_(kl_ + ku_ + i - j, j); };
  RVector x = b;
  for (int k = 0; k < n_; ++k) {
    if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
    const int ihi = std::min(n_ - 1, k + kl_);
    for (int i = k + 1; i <= ihi; ++i) x[i] -= idx(i, k) * x[k];
  }
  for (int k = n_ - 1; k >= 0; --k) {
    const int jhi = std::min(n_ - 1, k + kl_ + ku_);
    for (int j = k + 1; j <= jhi; ++j) x[k] -= idx(k, j) * x[j];
    x[k] /= idx(k, k);
  }
  return x;
}

RVector inverse_iteration(const SymBand& a, double lambda, std::uint64_t seed) {
  const int n = a.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RVector v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  v.normalize();

  double norm_a = 0.0;
  for (int j = 0; j < n; ++j)
    for (int d = 0; d <= a.bandwidth() && j + d < n; ++d) norm_a = std::max(norm_a, std::abs(a.at(d, j)));
  const double scale = std::max(norm_a, std::abs(lambda));

  BandLU lu(a, lambda);
  for (int it = 0; it < 8; ++it) {
    RVector y = lu.solve(v);
    const double ny = y.norm();
    if (!std::isfinite(ny) || ny == 0.0) break;
    v = y / ny;
    RVector r = a.apply(v) - lambda * v;
    if (r.norm() <= 1e-10 * std::max(1.0, scale)) return v;
  }
  RVector r = a.apply(v) - lambda * v;
  if (r.norm() > 1e-6 * std::max(1.0, scale))
    throw NonConvergenceError("inverse_iteration: residual did not converge", r.norm());
  return v;
}

}  // namespace opcert

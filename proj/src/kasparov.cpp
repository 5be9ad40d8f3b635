#include "opcert/kasparov.hpp"

#include <algorithm>
#include <cmath>

#include <future>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace opcert {

namespace {

// ---- tridiagonal real gauge -------------------------------------------------
//
// Any Hermitian tridiagonal matrix is unitarily equivalent, by a diagonal
// phase matrix, to the real symmetric tridiagonal with |off-diagonals|.
// Diagonal multiplication operators commute with the gauge, so products like
// a f(D) are computed entirely in the gauged real picture.

struct TridiagGauge {
  RVector diag;
  RVector off;          // |t_j|, size n-1
  CVector phases;       // u_j, |u_j| = 1; A = U T U^* with U = diag(u)
};

bool extract_tridiag(const SpMat& a, CVector& diag, CVector& off) {
  const int n = static_cast<int>(a.rows());
  diag = CVector::Zero(n);
  off = CVector::Zero(std::max(0, n - 1));
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      if (i == j)
        diag[i] = it.value();
      else if (i == j + 1)
        off[j] = it.value();  // lower entry; upper is its conjugate
      else if (j == i + 1)
        continue;
      else if (it.value() != Complex(0, 0))
        return false;
    }
  return true;
}

TridiagGauge real_gauge(const SpMat& a, const char* who) {
  CVector d, t;
  if (!extract_tridiag(a, d, t))
    throw PreconditionError(std::string(who) + ": operator is not tridiagonal");
  const int n = static_cast<int>(d.size());
  TridiagGauge g;
  g.diag.resize(n);
  g.off.resize(std::max(0, n - 1));
  g.phases.resize(n);
  g.phases[0] = Complex(1, 0);
  for (int i = 0; i < n; ++i) {
    if (std::abs(d[i].imag()) > 0)
      throw PreconditionError(std::string(who) + ": non-real diagonal");
    g.diag[i] = d[i].real();
  }
  for (int j = 0; j + 1 < n; ++j) {
    const double r = std::abs(t[j]);
    g.off[j] = r;
    // want conj(u_{j+1}) * t_j * u_j real >= 0, i.e. u_{j+1} = t_j u_j / |t_j|
    g.phases[j + 1] = (r == 0.0) ? g.phases[j] : g.phases[j] * (t[j] / r);
  }
  return g;
}

// ---- Chebyshev approximation of t / sqrt(1 + t^2) ----------------------------

struct ChebOp {
  std::vector<double> coeff;
  double scale;       // spectrum mapped from [-scale, scale] to [-1, 1]
  double max_error;
};

double bt_fn(double t) { return t / std::sqrt(1.0 + t * t); }

ChebOp chebyshev_bounded_transform(double scale, double target_err = 1e-8) {
  int deg = static_cast<int>(64 + 24.0 * scale);
  for (int attempt = 0; attempt < 8; ++attempt) {
    const int m = deg + 1;
    std::vector<double> fvals(m);
    for (int j = 0; j < m; ++j) {
      const double theta = M_PI * (j + 0.5) / m;
      fvals[j] = bt_fn(scale * std::cos(theta));
    }
    std::vector<double> c(m);
    for (int k = 0; k < m; ++k) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += fvals[j] * std::cos(M_PI * k * (j + 0.5) / m);
      c[k] = 2.0 * s / m;
    }
    c[0] *= 0.5;
    // sampled error check on a fine grid
    double err = 0.0;
    for (int j = 0; j <= 2000; ++j) {
      const double s = -1.0 + 2.0 * j / 2000.0;
      double tkm1 = 1.0, tk = s, acc = c[0] + (deg >= 1 ? c[1] * s : 0.0);
      for (int k = 2; k <= deg; ++k) {
        const double tkp1 = 2.0 * s * tk - tkm1;
        acc += c[k] * tkp1;
        tkm1 = tk;
        tk = tkp1;
      }
      err = std::max(err, std::abs(acc - bt_fn(scale * s)));
    }
    if (err <= target_err) return ChebOp{std::move(c), scale, err};
    deg = static_cast<int>(deg * 1.5) + 32;
  }
  throw NumericalError("chebyshev_bounded_transform: degree budget exhausted");
}

// y = T_cheb(A) x for the scaled tridiagonal A (block of columns at once).
RMatrix cheb_apply(const ChebOp& op, const RVector& diag, const RVector& off, const RMatrix& x) {
  const int n = static_cast<int>(diag.size());
  const double inv = 1.0 / op.scale;
  auto mv = [&](const RMatrix& v) {
    RMatrix r = diag.asDiagonal() * v;
    for (int j = 0; j + 1 < n; ++j) {
      if (off[j] == 0.0) continue;
      r.row(j) += off[j] * v.row(j + 1);
      r.row(j + 1) += off[j] * v.row(j);
    }
    return RMatrix(inv * r);
  };
  RMatrix tkm1 = x;
  RMatrix tk = mv(x);
  RMatrix acc = op.coeff[0] * tkm1;
  if (op.coeff.size() > 1) acc += op.coeff[1] * tk;
  for (size_t k = 2; k < op.coeff.size(); ++k) {
    RMatrix tkp1 = 2.0 * mv(tk) - tkm1;
    acc += op.coeff[k] * tkp1;
    tkm1.swap(tk);
    tk.swap(tkp1);
  }
  return acc;
}

double tridiag_sup_bound(const RVector& diag, const RVector& off) {
  double b = 0.0;
  const int n = static_cast<int>(diag.size());
  for (int i = 0; i < n; ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    b = std::max(b, r);
  }
  return b;
}

// F = f(T) on selected columns of the gauged real tridiagonal T.
RMatrix bt_columns(const RVector& diag, const RVector& off, const std::vector<int>& cols) {
  const int n = static_cast<int>(diag.size());
  const int m = static_cast<int>(cols.size());
  if (n <= 2001) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es;
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    RVector f = es.eigenvalues();
    for (int i = 0; i < n; ++i) f[i] = bt_fn(f[i]);
    RMatrix sel(n, m);
    for (int c = 0; c < m; ++c) sel.col(c) = es.eigenvectors().row(cols[c]).transpose();
    return es.eigenvectors() * (f.asDiagonal() * sel);
  }
  ChebOp cheb = chebyshev_bounded_transform(tridiag_sup_bound(diag, off) * 1.01);
  RMatrix x = RMatrix::Zero(n, m);
  for (int c = 0; c < m; ++c) x(cols[c], c) = 1.0;
  return cheb_apply(cheb, diag, off, x);
}

// top singular values of a dense (real) matrix via the Gram matrix
std::vector<double> top_singular(const RMatrix& r, int count) {
  const RMatrix g = r * r.transpose();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(g, Eigen::EigenvaluesOnly);
  std::vector<double> s;
  const int m = static_cast<int>(g.rows());
  for (int i = m - 1; i >= 0 && static_cast<int>(s.size()) < count; --i)
    s.push_back(std::sqrt(std::max(es.eigenvalues()[i], 0.0)));
  return s;
}

std::vector<double> top_singular(const CMatrix& r, int count) {
  const CMatrix g = r * r.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
  std::vector<double> s;
  const int m = static_cast<int>(g.rows());
  for (int i = m - 1; i >= 0 && static_cast<int>(s.size()) < count; --i)
    s.push_back(std::sqrt(std::max(es.eigenvalues()[i], 0.0)));
  return s;
}

std::vector<int> support_indices(const AlgebraElement& a) {
  std::vector<int> idx;
  for (int j = 0; j < a.fn.grid.n_points; ++j)
    if (a.fn.values[j] != Complex(0, 0)) idx.push_back(j);
  return idx;
}

void require_interior_support(const AlgebraElement& a, const char* who) {
  if (!a.compact_support_radius)
    throw PreconditionError(std::string(who) + ": generator is not compactly supported");
  const double margin = 2.0 * a.fn.grid.spacing;
  if (*a.compact_support_radius + margin >= a.fn.grid.half_width)
    throw PreconditionError(std::string(who) + ": generator support touches the boundary");
}

// sigma-profile of a (D + s*i)^{-1} restricted to the support rows of a.
std::vector<double> resolvent_profile(const SymOp& d, const AlgebraElement& a, int sign) {
  const int n = d.dim();
  SpMat shifted = d.matrix;
  SpMat eye(n, n);
  eye.setIdentity();
  shifted = shifted + Complex(0, static_cast<double>(sign)) * eye;
  // columns of the adjoint resolvent: R^* = (D - s i)^{-1} a
  SpMat adj = SpMat(shifted.adjoint());
  adj.makeCompressed();
  Eigen::SparseLU<SpMat> lu(adj);
  if (lu.info() != Eigen::Success) throw NumericalError("resolvent solve failed");
  const std::vector<int> idx = support_indices(a);
  CMatrix rh(n, idx.size());
  for (size_t c = 0; c < idx.size(); ++c) {
    CVector e = CVector::Zero(n);
    e[idx[c]] = a.fn.values[idx[c]];
    rh.col(c) = lu.solve(e);
  }
  return top_singular(rh, 64);
}

CompactnessProfile judge_profile(std::vector<double> base, std::vector<double> refined) {
  CompactnessProfile p;
  p.singular_values = base;
  if (base.empty() || base[0] == 0.0) {
    p.exact_zero = true;
    p.decay_verdict = true;
    p.refinement_stable = true;
    return p;
  }
  auto ratio_of = [](const std::vector<double>& s) {
    if (s.empty() || s[0] == 0.0) return 0.0;
    const double tail = (s.size() >= 64) ? s[63] : s.back();
    return tail / s[0];
  };
  p.ratio = ratio_of(base);
  p.refined_ratio = ratio_of(refined);
  p.decay_verdict = (p.ratio <= p.decay_threshold) && (p.refined_ratio <= p.decay_threshold);
  const double drift = std::abs(p.refined_ratio - p.ratio) / std::max(p.ratio, 1e-300);
  p.refinement_stable = drift <= p.stability_tol;
  return p;
}

}  // namespace

KasparovCertificate certify_module(const SymOp& d, const std::vector<AlgebraElement>& generators) {
  KasparovCertificate cert;
  const Grid fine = refine(d.grid);
  const SymOp d_fine = realize_on(d, fine);
  for (const auto& a : generators) {
    require_interior_support(a, "certify_module");
    const std::string name = "a(r=" + std::to_string(a.compact_support_radius.value_or(0.0)) + ")";
    cert.commutator_norms[name] = op_norm(commutator(d, a));
    CompactnessProfile worst;
    bool first = true;
    for (int sign : {+1, -1}) {
      std::vector<double> base = resolvent_profile(d, a, sign);
      std::vector<double> fine_profile = resolvent_profile(d_fine, a.realize_on(fine), sign);
      CompactnessProfile p = judge_profile(base, fine_profile);
      if (first || p.ratio > worst.ratio) worst = p;
      first = false;
    }
    cert.local_compactness[name] = worst;
  }
  cert.grading_ok = true;
  if (d.graded) {
    // gamma-oddness of the operator and [e, algebra] = 0 are construction
    // invariants; re-check them here.
    for (int k = 0; k < d.matrix.outerSize() && cert.grading_ok; ++k)
      for (SpMat::InnerIterator it(d.matrix, k); it; ++it)
        if (d.gamma[it.row()] == d.gamma[it.col()] && it.value() != Complex(0, 0)) {
          cert.grading_ok = false;
          break;
        }
  }
  cert.overall = cert.grading_ok;
  for (const auto& [name, norm] : cert.commutator_norms)
    if (!std::isfinite(norm)) cert.overall = false;
  for (const auto& [name, p] : cert.local_compactness)
    if (!(p.decay_verdict && p.refinement_stable)) cert.overall = false;
  return cert;
}

CMatrix bounded_transform(const SymOp& d) {
  const int n = d.dim();
  CVector diag, off;
  if (extract_tridiag(d.matrix, diag, off)) {
    TridiagGauge g = real_gauge(d.matrix, "bounded_transform");
    std::vector<int> cols(n);
    for (int i = 0; i < n; ++i) cols[i] = i;
    if (n > 4001)
      throw PreconditionError("bounded_transform: full matrix return limited to dim <= 4001");
    RMatrix f = bt_columns(g.diag, g.off, cols);
    CMatrix out(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = g.phases[i] * f(i, j) * std::conj(g.phases[j]);
    return out;
  }
  if (n > 2001)
    throw PreconditionError("bounded_transform: non-tridiagonal operators limited to dim <= 2001");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(dense(d.matrix));
  CVector f(n);
  for (int i = 0; i < n; ++i) f[i] = bt_fn(es.eigenvalues()[i]);
  return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint();
}

CompactnessProfile perturbation_class_check(const SymOp& d, const SymOp& m, const AlgebraElement& a) {
  require_interior_support(a, "perturbation_class_check");
  auto profile_at = [&](const SymOp& dd, const SymOp& mm, const AlgebraElement& aa) {
    // shared gauge: D tridiagonal, M diagonal (checked by the extraction)
    SpMat sum = dd.matrix + mm.matrix;
    TridiagGauge g1 = real_gauge(sum, "perturbation_class_check");
    TridiagGauge g0 = real_gauge(dd.matrix, "perturbation_class_check");
    // M must not change the off-diagonal phases, else the gauges differ
    for (int j = 0; j + 1 < static_cast<int>(g0.phases.size()); ++j)
      if (std::abs(g1.phases[j + 1] / g1.phases[j] - g0.phases[j + 1] / g0.phases[j]) > 1e-14)
        throw PreconditionError("perturbation_class_check: M must be diagonal (gauge mismatch)");
    const std::vector<int> idx = support_indices(aa);
    RMatrix f1 = bt_columns(g1.diag, g1.off, idx);
    RMatrix f0 = bt_columns(g0.diag, g0.off, idx);
    RMatrix rows(static_cast<int>(idx.size()), dd.dim());
    // columns of F1 - F0 at the support indices = rows by symmetry of F
    RMatrix diffcols = f1 - f0;
    for (size_t c = 0; c < idx.size(); ++c)
      rows.row(static_cast<int>(c)) = aa.fn.values[idx[c]].real() * diffcols.col(c).transpose();
    return top_singular(rows, 64);
  };
  std::vector<double> base = profile_at(d, m, a);
  const Grid fine = refine(d.grid);
  std::vector<double> refined = profile_at(realize_on(d, fine), realize_on(m, fine), a.realize_on(fine));
  return judge_profile(std::move(base), std::move(refined));
}

double kucerovsky_condition1(const SymOp& d, const SymOp& m, const AlgebraElement& a) {
  const int n = d.dim();
  if (m.dim() != n || !(a.fn.grid == d.grid))
    throw PreconditionError("kucerovsky_condition1: shape mismatch");
  const SpMat amat = a.as_matrix(d.multiplicity);
  SpMat astar = SpMat(amat.adjoint());
  const SpMat upper = SpMat((commutator(d, a) + m.matrix * amat).pruned());
  const SpMat lower = SpMat((commutator(d.matrix, astar) - astar * m.matrix).pruned());
  std::vector<Eigen::Triplet<Complex>> ts;
  ts.reserve(upper.nonZeros() + lower.nonZeros());
  for (int k = 0; k < upper.outerSize(); ++k)
    for (SpMat::InnerIterator it(upper, k); it; ++it)
      ts.emplace_back(static_cast<int>(it.row()), n + static_cast<int>(it.col()), it.value());
  for (int k = 0; k < lower.outerSize(); ++k)
    for (SpMat::InnerIterator it(lower, k); it; ++it)
      ts.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  SpMat block(2 * n, 2 * n);
  block.setFromTriplets(ts.begin(), ts.end());
  return op_norm(block);
}

EvenToOddReduction reduce_even_to_odd(const SymOp& til_d) {
  if (!til_d.clifford) throw PreconditionError("reduce_even_to_odd: missing Clifford action");
  const SpMat& e = *til_d.clifford;
  const SpMat ete = SpMat((e * til_d.matrix * e).pruned());
  EvenToOddReduction out;
  out.til_d_prime = til_d;
  out.til_d_prime.matrix = SpMat((0.5 * (til_d.matrix - ete)).pruned());
  out.til_d_prime.matrix.makeCompressed();
  out.til_d_prime.descriptor.label = "reduced(" + til_d.descriptor.label + ")";
  out.til_m = til_d;
  out.til_m.matrix = SpMat((0.5 * (til_d.matrix + ete)).pruned());
  out.til_m.matrix.makeCompressed();
  out.til_m.descriptor.label = "commuting part(" + til_d.descriptor.label + ")";
  out.anticommutation_residual = op_norm(anticommutator(out.til_d_prime.matrix, e));
  return out;
}

}  // namespace opcert

#include "opcert/operators.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace opcert {

namespace {

using Trip = Eigen::Triplet<Complex>;

SpMat from_triplets(int n, std::vector<Trip>& ts) {
  SpMat a(n, n);
  a.setFromTriplets(ts.begin(), ts.end());
  a.makeCompressed();
  return a;
}

RVector require_real(const GridFunction& f, const char* who) {
  if (!f.is_real()) throw PreconditionError(std::string(who) + ": complex-valued potential rejected");
  return f.real_values();
}

}  // namespace

SpMat AlgebraElement::as_matrix(int multiplicity) const {
  const int n = fn.grid.n_points;
  std::vector<Trip> ts;
  ts.reserve(static_cast<size_t>(n) * multiplicity);
  for (int b = 0; b < multiplicity; ++b)
    for (int j = 0; j < n; ++j) ts.emplace_back(b * n + j, b * n + j, fn.values[j]);
  return from_triplets(n * multiplicity, ts);
}

AlgebraElement AlgebraElement::realize_on(const Grid& g) const {
  if (!sampler) throw PreconditionError("AlgebraElement: no continuum sampler to re-realize from");
  AlgebraElement out;
  out.fn = sample_real(sampler, g);
  out.compact_support_radius = compact_support_radius;
  out.sampler = sampler;
  return out;
}

AlgebraElement bump(const Grid& g, double radius, double amplitude) {
  auto f = [radius, amplitude](double x) {
    const double t = x / radius;
    if (std::abs(t) >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
  };
  AlgebraElement a;
  a.fn = sample_real(f, g);
  a.compact_support_radius = radius;
  a.sampler = f;
  return a;
}

SymOp first_order(const Grid& g, const GridFunction& f) {
  if (!(f.grid == g)) throw PreconditionError("first_order: potential grid mismatch");
  const RVector fv = require_real(f, "first_order");
  const int n = g.n_points;
  const Complex t(0.0, 1.0 / (2.0 * g.spacing));
  std::vector<Trip> ts;
  ts.reserve(3 * n);
  for (int j = 0; j < n; ++j) {
    if (fv[j] != 0.0) ts.emplace_back(j, j, Complex(fv[j], 0.0));
    if (j + 1 < n) {
      ts.emplace_back(j, j + 1, t);
      ts.emplace_back(j + 1, j, std::conj(t));
    }
  }
  SymOp op;
  op.grid = g;
  op.matrix = from_triplets(n, ts);
  op.descriptor.kind = OpKind::first_order;
  op.descriptor.label = "i d/dx + f";
  return op;
}

SymOp first_order(const Grid& g, const std::function<double(double)>& f) {
  SymOp op = first_order(g, sample_real(f, g));
  op.descriptor.potential = f;
  return op;
}

SymOp schrodinger(const Grid& g, const GridFunction& V) {
  if (!(V.grid == g)) throw PreconditionError("schrodinger: potential grid mismatch");
  const RVector v = require_real(V, "schrodinger");
  const int n = g.n_points;
  const double ih2 = 1.0 / (g.spacing * g.spacing);
  std::vector<Trip> ts;
  ts.reserve(3 * n);
  for (int j = 0; j < n; ++j) {
    ts.emplace_back(j, j, Complex(2.0 * ih2 + v[j], 0.0));
    if (j + 1 < n) {
      ts.emplace_back(j, j + 1, Complex(-ih2, 0.0));
      ts.emplace_back(j + 1, j, Complex(-ih2, 0.0));
    }
  }
  SymOp op;
  op.grid = g;
  op.matrix = from_triplets(n, ts);
  op.descriptor.kind = OpKind::schrodinger;
  op.descriptor.label = "-d2/dx2 + V";
  return op;
}

SymOp schrodinger(const Grid& g, const std::function<double(double)>& V) {
  SymOp op = schrodinger(g, sample_real(V, g));
  op.descriptor.potential = V;
  return op;
}

SymOp multiplication(const AlgebraElement& a) {
  if (!a.fn.is_real()) throw PreconditionError("multiplication: complex symbol rejected for symmetric operators");
  SymOp op;
  op.grid = a.fn.grid;
  op.matrix = a.as_matrix(1);
  op.descriptor.kind = OpKind::multiplication;
  op.descriptor.label = "M_f";
  op.descriptor.potential = a.sampler;
  return op;
}

SymOp zero_op(const Grid& g) {
  SymOp op;
  op.grid = g;
  op.matrix = SpMat(g.n_points, g.n_points);
  op.matrix.makeCompressed();
  op.descriptor.kind = OpKind::multiplication;
  op.descriptor.label = "0";
  op.descriptor.potential = [](double) { return 0.0; };
  return op;
}

SymOp double_odd(const SymOp& d) {
  if (d.graded) throw PreconditionError("double_odd: input already graded");
  const int n = d.dim();
  std::vector<Trip> ts;
  ts.reserve(2 * d.matrix.nonZeros() + 2 * n);
  const Complex mi(0.0, -1.0);
  for (int k = 0; k < d.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(d.matrix, k); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      ts.emplace_back(i, n + j, mi * it.value());          // -iD block
      ts.emplace_back(n + i, j, Complex(0, 1) * it.value());  // +iD block
    }
  SymOp out;
  out.grid = d.grid;
  out.multiplicity = 2 * d.multiplicity;
  out.matrix = from_triplets(2 * n, ts);
  out.graded = true;
  out.gamma.resize(2 * n);
  out.gamma.head(n).setConstant(1.0);
  out.gamma.tail(n).setConstant(-1.0);
  std::vector<Trip> es;
  es.reserve(2 * n);
  for (int j = 0; j < n; ++j) {
    es.emplace_back(j, n + j, Complex(1, 0));
    es.emplace_back(n + j, j, Complex(1, 0));
  }
  out.clifford = from_triplets(2 * n, es);
  out.descriptor.kind = OpKind::block;
  out.descriptor.label = "doubled(" + d.descriptor.label + ")";
  OpDescriptor base = d.descriptor;
  out.descriptor.rebuild = [base](const Grid& gg) { return double_odd(realize_descriptor(base, gg)); };
  return out;
}

SymOp assemble_even(const Grid& g, const SpMat& dplus, const SpMat& dminus) {
  const int n = static_cast<int>(dplus.rows());
  if (dplus.rows() != dplus.cols() || dminus.rows() != dminus.cols() || dminus.rows() != n)
    throw PreconditionError("assemble_even: block shape mismatch");
  SpMat adj = SpMat(dplus.adjoint());
  double mismatch = 0.0;
  {
    SpMat diff = adj - dminus;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (SpMat::InnerIterator it(diff, k); it; ++it) mismatch = std::max(mismatch, std::abs(it.value()));
  }
  if (mismatch > kExactTol)
    throw PreconditionError("assemble_even: Dminus != Dplus^* (max deviation " + std::to_string(mismatch) + ")");
  std::vector<Trip> ts;
  ts.reserve(2 * dplus.nonZeros());
  for (int k = 0; k < dplus.outerSize(); ++k)
    for (SpMat::InnerIterator it(dplus, k); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      ts.emplace_back(n + i, j, it.value());               // Dplus, lower-left
      ts.emplace_back(j, n + i, std::conj(it.value()));    // Dplus^*, upper-right
    }
  SymOp out;
  out.grid = g;
  out.multiplicity = 2;
  out.matrix = from_triplets(2 * n, ts);
  out.graded = true;
  out.gamma.resize(2 * n);
  out.gamma.head(n).setConstant(1.0);
  out.gamma.tail(n).setConstant(-1.0);
  std::vector<Trip> es;
  for (int j = 0; j < n; ++j) {
    es.emplace_back(j, n + j, Complex(1, 0));
    es.emplace_back(n + j, j, Complex(1, 0));
  }
  out.clifford = from_triplets(2 * n, es);
  out.descriptor.kind = OpKind::block;
  out.descriptor.label = "even([[0, D-], [D+, 0]])";
  return out;
}

EvenSplit split_even(const SymOp& til_d) {
  if (!til_d.graded) throw PreconditionError("split_even: ungraded input");
  const int nn = til_d.dim();
  if (nn % 2 != 0) throw PreconditionError("split_even: odd dimension");
  const int n = nn / 2;
  // on-diagonal blocks must vanish for the off-diagonal block form
  for (int k = 0; k < til_d.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(til_d.matrix, k); it; ++it) {
      const bool ri = it.row() >= n, ci = it.col() >= n;
      if (ri == ci && it.value() != Complex(0, 0))
        throw PreconditionError("split_even: input has diagonal blocks, not of the expected graded form");
    }
  // Dplus = lower-left block
  CMatrix a = CMatrix::Zero(n, n);
  for (int k = 0; k < til_d.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(til_d.matrix, k); it; ++it)
      if (it.row() >= n && it.col() < n) a(it.row() - n, it.col()) = it.value();

  std::vector<Trip> td, tm;
  const Complex mihalf(0.0, -0.5);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Complex e = a(i, j) - std::conj(a(j, i));  // anti-Hermitian part, exact
      const Complex s = a(i, j) + std::conj(a(j, i));  // Hermitian part, exact
      if (e != Complex(0, 0)) td.emplace_back(i, j, mihalf * e);
      if (s != Complex(0, 0)) tm.emplace_back(i, j, 0.5 * s);
    }
  EvenSplit out;
  out.d.grid = til_d.grid;
  out.d.multiplicity = til_d.multiplicity / 2;
  out.d.matrix = from_triplets(n, td);
  out.d.descriptor.kind = OpKind::custom;
  out.d.descriptor.label = "split D";
  out.m.grid = til_d.grid;
  out.m.multiplicity = til_d.multiplicity / 2;
  out.m.matrix = from_triplets(n, tm);
  out.m.descriptor.kind = OpKind::custom;
  out.m.descriptor.label = "split M";
  return out;
}

SymOp graded_tensor_double(const SymOp& d, const SymOp& m) {
  if (!(d.grid == m.grid)) throw PreconditionError("graded_tensor_double: grid mismatch");
  if (!d.graded) throw PreconditionError("graded_tensor_double: D must carry a grading");
  const int n = d.dim();
  if (m.dim() != n) throw PreconditionError("graded_tensor_double: dimension mismatch");
  // M must be even w.r.t. gamma0 for M (x) e to be well-defined Hermitian
  for (int k = 0; k < m.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(m.matrix, k); it; ++it)
      if (d.gamma[it.row()] != d.gamma[it.col()] && it.value() != Complex(0, 0))
        throw PreconditionError("graded_tensor_double: M is not even w.r.t. the grading of D");

  std::vector<Trip> ts;
  ts.reserve(2 * d.matrix.nonZeros() + 2 * m.matrix.nonZeros());
  for (int k = 0; k < d.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(d.matrix, k); it; ++it) {
      ts.emplace_back(it.row(), it.col(), it.value());
      ts.emplace_back(n + it.row(), n + it.col(), it.value());
    }
  for (int k = 0; k < m.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(m.matrix, k); it; ++it) {
      const Complex v = it.value() * d.gamma[it.col()];  // (M gamma0)_{ij}; equals (gamma0 M)_{ij} for even M
      ts.emplace_back(it.row(), n + it.col(), v);
      ts.emplace_back(n + it.row(), it.col(), v);
    }
  SymOp out;
  out.grid = d.grid;
  out.multiplicity = 2 * d.multiplicity;
  out.matrix = from_triplets(2 * n, ts);
  out.graded = true;
  out.gamma.resize(2 * n);
  out.gamma.head(n) = d.gamma;
  out.gamma.tail(n) = -d.gamma;
  std::vector<Trip> es;
  for (int j = 0; j < n; ++j) {
    es.emplace_back(j, n + j, Complex(d.gamma[j], 0));
    es.emplace_back(n + j, j, Complex(d.gamma[j], 0));
  }
  out.clifford = from_triplets(2 * n, es);
  out.descriptor.kind = OpKind::block;
  out.descriptor.label = "D (x) 1 + M (x) e";
  return out;
}

double op_norm(const SpMat& t, double tol, int max_iter) {
  const int n = static_cast<int>(t.cols());
  if (n == 0) return 0.0;
  double fro = 0.0;
  bool diagonal = (t.rows() == t.cols());
  double diag_max = 0.0;
  for (int k = 0; k < t.outerSize(); ++k)
    for (SpMat::InnerIterator it(t, k); it; ++it) {
      fro += std::norm(it.value());
      if (it.row() != it.col() && it.value() != Complex(0, 0)) diagonal = false;
      else diag_max = std::max(diag_max, std::abs(it.value()));
    }
  if (fro == 0.0) return 0.0;
  if (diagonal) return diag_max;  // exact for multiplication operators

  // Power iteration on T^* T, accelerated by Rayleigh-Ritz extraction over a
  // short Krylov basis per sweep (restarted Lanczos). Plain single-vector
  // iteration stalls on the clustered top singular values that commutators of
  // mirror-symmetric cutoffs produce; the Krylov sweep restores convergence
  // within the same matvec budget.
  const SpMat th = SpMat(t.adjoint());
  auto apply = [&](const CVector& v) { return CVector(th * (t * v).eval()); };

  std::mt19937_64 rng(mix_seed(0x5ca1ab1eULL, static_cast<std::uint64_t>(n)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(gauss(rng), gauss(rng));
  v.normalize();

  const int m = std::min(n, 24);  // Krylov dimension per sweep
  Eigen::MatrixXcd basis(n, m);
  RMatrix proj = RMatrix::Zero(m, m);
  double theta = 0.0;
  double resid = std::numeric_limits<double>::infinity();
  int matvecs = 0;
  double prev_theta = -1.0;
  int stable_sweeps = 0;

  while (matvecs < max_iter) {
    // Lanczos with full reorthogonalization inside the sweep; proj collects
    // the projected matrix V^* (T^* T) V entry by entry
    proj.setZero();
    basis.col(0) = v;
    int built = 1;
    CVector w;
    for (int j = 0; j < m && matvecs < max_iter; ++j) {
      w = apply(basis.col(j));
      ++matvecs;
      for (int i = 0; i < built; ++i) {
        const Complex c = basis.col(i).dot(w);
        w -= c * basis.col(i);
        proj(i, j) = std::real(c);
        proj(j, i) = std::real(c);
      }
      for (int i = 0; i < built; ++i) w -= basis.col(i).dot(w) * basis.col(i);
      if (j + 1 < m) {
        const double beta = w.norm();
        if (beta <= 1e-14 * std::sqrt(fro)) break;
        proj(j + 1, j) = proj(j, j + 1) = beta;
        basis.col(j + 1) = w / beta;
        built = j + 2;
      }
    }
    const RMatrix small = proj.topLeftCorner(built, built);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(small);
    theta = es.eigenvalues()[built - 1];
    v = (basis.leftCols(built) * es.eigenvectors().col(built - 1).cast<Complex>()).normalized();
    const CVector av = apply(v);
    ++matvecs;
    resid = (av - theta * v).norm();
    // a small residual certifies the Ritz value directly; for quasi-continuous
    // top spectra the Ritz value stagnates long before the residual resolves
    // individual eigenvalues, which is just as good for the norm estimate
    stable_sweeps = (std::abs(theta - prev_theta) <= tol * std::max(theta, 1e-300))
                        ? stable_sweeps + 1
                        : 0;
    if (resid <= tol * std::max(theta, 1e-300) || stable_sweeps >= 3)
      return std::sqrt(std::max(theta, 0.0));
    prev_theta = theta;
  }
  throw NonConvergenceError("op_norm: power iteration did not converge within budget", resid);
}

double op_norm(const SymOp& t, double tol, int max_iter) { return op_norm(t.matrix, tol, max_iter); }

namespace {

SpMat mult_bracket(const SymOp& t, const AlgebraElement& a, double sign) {
  const int n = a.fn.grid.n_points;
  if (t.dim() % n != 0 || !(t.grid == a.fn.grid))
    throw PreconditionError("commutator: size mismatch between operator and algebra element");
  std::vector<Trip> ts;
  ts.reserve(t.matrix.nonZeros());
  for (int k = 0; k < t.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(t.matrix, k); it; ++it) {
      const Complex ai = a.fn.values[it.row() % n];
      const Complex aj = a.fn.values[it.col() % n];
      const Complex w = it.value() * (aj + sign * ai);
      if (w != Complex(0, 0)) ts.emplace_back(it.row(), it.col(), w);
    }
  return from_triplets(t.dim(), ts);
}

}  // namespace

SpMat commutator(const SymOp& t, const AlgebraElement& a) { return mult_bracket(t, a, -1.0); }
SpMat anticommutator(const SymOp& t, const AlgebraElement& a) { return mult_bracket(t, a, +1.0); }

SpMat commutator(const SpMat& s, const SpMat& t) {
  SpMat r = (s * t - t * s).pruned();
  r.makeCompressed();
  return r;
}

SpMat anticommutator(const SpMat& s, const SpMat& t) {
  SpMat r = (s * t + t * s).pruned();
  r.makeCompressed();
  return r;
}

bool is_hermitian(const SpMat& a, double tol) {
  SpMat d = a - SpMat(a.adjoint());
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it)
      if (std::abs(it.value()) > tol) return false;
  return true;
}

SymOp realize_descriptor(const OpDescriptor& dsc, const Grid& g) {
  if (dsc.rebuild) return dsc.rebuild(g);
  switch (dsc.kind) {
    case OpKind::first_order:
      if (dsc.potential) return first_order(g, dsc.potential);
      return first_order(g, [](double) { return 0.0; });
    case OpKind::schrodinger:
      if (dsc.potential) return schrodinger(g, dsc.potential);
      return schrodinger(g, [](double) { return 0.0; });
    case OpKind::multiplication: {
      if (!dsc.potential)
        throw PreconditionError("realize_on: multiplication operator lacks a continuum description");
      AlgebraElement a;
      a.fn = sample_real(dsc.potential, g);
      a.sampler = dsc.potential;
      return multiplication(a);
    }
    default:
      throw PreconditionError("realize_on: operator kind cannot be re-realized");
  }
}

SymOp realize_on(const SymOp& proto, const Grid& g) { return realize_descriptor(proto.descriptor, g); }

CMatrix dense(const SpMat& a) { return CMatrix(a); }

}  // namespace opcert

#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "opcert/kasparov.hpp"

using namespace opcert;

namespace {

SpMat sp_from_dense(const CMatrix& m) {
  SpMat s(m.rows(), m.cols());
  std::vector<Eigen::Triplet<Complex>> ts;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != Complex(0, 0)) ts.emplace_back(i, j, m(i, j));
  s.setFromTriplets(ts.begin(), ts.end());
  return s;
}

// sup |a'| for the standard bump of the given radius, by fine sampling of the
// analytic derivative (independent of the grid machinery)
double bump_slope_sup(double radius, double amplitude) {
  double sup = 0.0;
  for (int i = 1; i < 20000; ++i) {
    const double t = -1.0 + 2.0 * i / 20000.0;
    const double g = std::exp(1.0 - 1.0 / (1.0 - t * t));
    const double dg = g * (-2.0 * t) / ((1.0 - t * t) * (1.0 - t * t));
    sup = std::max(sup, std::abs(dg) * amplitude / radius);
  }
  return sup;
}

}  // namespace

TEST_CASE("bounded transform on diagonal operators") {
  const Grid g = make_grid(1.0, 3);
  AlgebraElement a;
  a.fn = sample_real([](double x) { return x; }, g);  // diag(-1, 0, 1)
  const CMatrix f = bounded_transform(multiplication(a));
  CHECK(f(0, 0).real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(f(1, 1).real() == doctest::Approx(0.0));
  CHECK(f(2, 2).real() == doctest::Approx(1.0 / std::sqrt(2.0)));

  const CMatrix z = bounded_transform(zero_op(g));
  CHECK(z.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("bounded transform functional-calculus identity") {
  const Grid g = make_grid(10.0, 401);
  const SymOp d = double_odd(first_order(g, [](double x) { return x; }));
  const CMatrix f = bounded_transform(d);

  // ||F|| <= 1
  Eigen::BDCSVD<CMatrix> svd(f);
  CHECK(svd.singularValues()[0] <= 1.0 + 1e-10);

  // F^2 + (1 + D^2)^{-1} = 1 on a random vector battery
  const int n = d.dim();
  SpMat eye(n, n);
  eye.setIdentity();
  SpMat reg = SpMat(eye + d.matrix * d.matrix);
  reg.makeCompressed();
  Eigen::SparseLU<SpMat> lu(reg);
  REQUIRE(lu.info() == Eigen::Success);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> dn(0, 1);
  for (int t = 0; t < 5; ++t) {
    CVector v(n);
    for (int i = 0; i < n; ++i) v[i] = Complex(dn(rng), dn(rng));
    v.normalize();
    const CVector lhs = f * (f * v).eval() + lu.solve(v);
    CHECK((lhs - v).norm() <= 1e-8);
  }

  // F (1 + D^2)^{1/2} = D on the same battery, checked through the resolvent:
  // F v = D (1 + D^2)^{-1/2} v, so D^{-...} route: compare F (1+D^2) F = D^2 action
  for (int t = 0; t < 3; ++t) {
    CVector v(n);
    for (int i = 0; i < n; ++i) v[i] = Complex(dn(rng), dn(rng));
    const CVector lhs = f * (reg * (f * v).eval()).eval();
    const CVector rhs = d.matrix * (d.matrix * v).eval();
    CHECK((lhs - rhs).norm() <= 1e-7 * rhs.norm());
  }
}

TEST_CASE("perturbation proxy: zero perturbation gives the exact zero profile") {
  const Grid g = make_grid(20.0, 801);
  const SymOp d = first_order(g, [](double) { return 0.0; });
  const SymOp zero = zero_op(g);
  const AlgebraElement a = bump(g, 5.0);
  const CompactnessProfile p = perturbation_class_check(d, zero, a);
  CHECK(p.exact_zero);
  CHECK(p.decay_verdict);
  CHECK(p.refinement_stable);
  for (double s : p.singular_values) CHECK(s == 0.0);
}

TEST_CASE("perturbation proxy decays for multiplication perturbations") {
  const Grid g = make_grid(20.0, 1001);
  const SymOp d = first_order(g, [](double) { return 0.0; });
  const AlgebraElement a = bump(g, 5.0);

  AlgebraElement x;
  x.fn = sample_real([](double t) { return t; }, g);
  x.sampler = [](double t) { return t; };
  const CompactnessProfile px = perturbation_class_check(d, multiplication(x), a);
  CHECK(px.ratio <= 1e-2);
  CHECK(px.decay_verdict);
  CHECK(px.refinement_stable);

  AlgebraElement s;
  s.fn = sample_real([](double t) { return std::sin(t); }, g);
  s.sampler = [](double t) { return std::sin(t); };
  const CompactnessProfile ps = perturbation_class_check(d, multiplication(s), a);
  CHECK(ps.decay_verdict);
}

TEST_CASE("kucerovsky condition-1 witness") {
  const Grid g = make_grid(20.0, 1001);
  const SymOp d = first_order(g, [](double) { return 0.0; });
  const AlgebraElement a = bump(g, 5.0);
  const SymOp zero = zero_op(g);

  const double base = kucerovsky_condition1(d, zero, a);
  const double comm = op_norm(commutator(d, a));
  CHECK(base == doctest::Approx(comm).epsilon(1e-6));

  AlgebraElement nil;
  nil.fn = sample_real([](double) { return 0.0; }, g);
  nil.compact_support_radius = 0.0;
  CHECK(kucerovsky_condition1(d, zero, nil) == 0.0);

  AlgebraElement x;
  x.fn = sample_real([](double t) { return t; }, g);
  const SymOp m = multiplication(x);
  const double value = kucerovsky_condition1(d, m, a);
  const SpMat ma = SpMat(m.matrix * a.as_matrix());
  const double bound = comm + 2.0 * op_norm(ma);
  CHECK(value <= bound + 1e-9);
  CHECK(op_norm(ma) <= 5.0 + 0.1);  // support-radius oracle for ||x a||
  CHECK(std::isfinite(value));
}

TEST_CASE("reduction of even modules to anti-commuting form") {
  const Grid g = make_grid(10.0, 201);
  const SymOp d0 = first_order(g, [](double) { return 0.0; });
  const SymOp dbl = double_odd(d0);

  // already anti-commuting: reduction is the identity, residual exactly zero
  const EvenToOddReduction r = reduce_even_to_odd(dbl);
  CHECK(r.anticommutation_residual == 0.0);
  CHECK((dense(r.til_d_prime.matrix) - dense(dbl.matrix)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.til_m.matrix.nonZeros() == 0);

  // pure Clifford block: everything is commuting part
  SymOp eop = dbl;
  eop.matrix = *dbl.clifford;
  const EvenToOddReduction re = reduce_even_to_odd(eop);
  CHECK(re.til_d_prime.matrix.nonZeros() == 0);
  CHECK((dense(re.til_m.matrix) - dense(*dbl.clifford)).cwiseAbs().maxCoeff() == 0.0);

  // assembled d/dx + x block: reduction splits derivative from potential,
  // cross-checked against split_even
  const int n = g.n_points;
  std::vector<Eigen::Triplet<Complex>> ts;
  const double ih = 1.0 / (2.0 * g.spacing);
  for (int j = 0; j < n; ++j) {
    ts.emplace_back(j, j, Complex(g.node(j), 0));
    if (j + 1 < n) {
      ts.emplace_back(j, j + 1, Complex(ih, 0));
      ts.emplace_back(j + 1, j, Complex(-ih, 0));
    }
  }
  SpMat dplus(n, n);
  dplus.setFromTriplets(ts.begin(), ts.end());
  const SymOp til = assemble_even(g, dplus, SpMat(dplus.adjoint()));
  const EvenToOddReduction ra = reduce_even_to_odd(til);
  CHECK(ra.anticommutation_residual <= 1e-12);

  const EvenSplit sp = split_even(til);
  const SymOp expected_prime = double_odd(sp.d);
  CHECK((dense(ra.til_d_prime.matrix) - dense(expected_prime.matrix)).cwiseAbs().maxCoeff() <= 1e-13);
  const CMatrix tm = dense(ra.til_m.matrix);
  for (int j = 0; j < n; ++j) CHECK(tm(j, n + j) == Complex(g.node(j), 0));

  // exact decomposition and idempotence
  CHECK((dense(ra.til_d_prime.matrix) + dense(ra.til_m.matrix) - dense(til.matrix))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  const EvenToOddReduction r2 = reduce_even_to_odd(ra.til_d_prime);
  CHECK(r2.til_m.matrix.nonZeros() == 0);
  CHECK(r2.anticommutation_residual == 0.0);

  SymOp no_cliff = zero_op(g);
  CHECK_THROWS_AS(reduce_even_to_odd(no_cliff), PreconditionError);
}

TEST_CASE("module certification: commutator oracle and honest decay verdicts") {
  const Grid g = make_grid(20.0, 2001);
  const SymOp d = first_order(g, [](double) { return 0.0; });

  // an order-2 resolvent decays fast enough for the sigma_64/sigma_1 gate
  const KasparovCertificate cert_sl = certify_module(schrodinger(g, [](double) { return 0.0; }),
                                                     {bump(g, 5.0)});
  CHECK(cert_sl.grading_ok);
  CHECK(cert_sl.overall);
  for (const auto& [name, p] : cert_sl.local_compactness) {
    CHECK(p.ratio <= 1e-2);
    CHECK(p.refinement_stable);
  }

  // an order-1 resolvent decays like 1/j, which puts sigma_64/sigma_1 at a
  // refinement-stable 2-7e-2 for any O(1) generator support: above the 1e-2
  // gate, so the verdict is honestly negative for this operator class
  const AlgebraElement wide = bump(g, 5.0);
  const KasparovCertificate cert_wide = certify_module(d, {wide});
  CHECK(cert_wide.grading_ok);
  for (const auto& [name, norm] : cert_wide.commutator_norms)
    CHECK(norm == doctest::Approx(bump_slope_sup(5.0, 1.0)).epsilon(5e-3));
  for (const auto& [name, p] : cert_wide.local_compactness) {
    CHECK(p.refinement_stable);
    CHECK(p.ratio > 1e-2);
    CHECK(p.ratio < 0.2);
    CHECK_FALSE(p.decay_verdict);
  }
  CHECK_FALSE(cert_wide.overall);

  // constant 1 is not compactly supported
  AlgebraElement one;
  one.fn = sample_real([](double) { return 1.0; }, g);
  CHECK_THROWS_AS(certify_module(d, {one}), PreconditionError);

  // support touching the boundary rejected
  AlgebraElement edge = bump(g, 19.99);
  CHECK_THROWS_AS(certify_module(d, {edge}), PreconditionError);
}

TEST_CASE("commutator norms are invariant under the reflection symmetry") {
  // x -> -x is an exact grid symmetry; an asymmetric generator and its mirror
  // image give unitarily equivalent commutators
  const Grid g = make_grid(20.0, 801);
  const SymOp d = first_order(g, [](double) { return 0.0; });
  auto shifted = [](double x) {
    const double t = (x - 1.0) / 3.0;
    return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
  };
  auto mirrored = [&shifted](double x) { return shifted(-x); };
  AlgebraElement a1, a2;
  a1.fn = sample_real(shifted, g);
  a2.fn = sample_real(mirrored, g);
  CHECK(op_norm(commutator(d, a1)) == doctest::Approx(op_norm(commutator(d, a2))).epsilon(1e-10));
}

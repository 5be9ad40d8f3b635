#include <doctest.h>

#include "opcert/finmod.hpp"

using namespace opcert;

TEST_CASE("module construction and localization dimensions") {
  const FiniteModule trivial = make_module({1}, 1);
  CHECK(trivial.flat_dim() == 1);
  CHECK(trivial.local_dim(0) == 1);

  const FiniteModule m2 = make_module({2}, 3);
  CHECK(m2.local_dim(0) == 6);

  const FiniteModule mixed = make_module({1, 2}, 2);
  CHECK(mixed.local_dim(0) == 2);
  CHECK(mixed.local_dim(1) == 4);

  CHECK_THROWS_AS(make_module({}, 1), PreconditionError);
  CHECK_THROWS_AS(make_module({0}, 1), PreconditionError);
  CHECK_THROWS_AS(make_module({2}, 0), PreconditionError);
}

TEST_CASE("localization is a *-homomorphism") {
  const FiniteModule e = make_module({2, 3}, 2);
  const CMatrix id = CMatrix::Identity(e.flat_dim(), e.flat_dim());
  for (int b = 0; b < 2; ++b) {
    const CMatrix loc = localize(e, id, b);
    CHECK((loc - CMatrix::Identity(e.local_dim(b), e.local_dim(b))).cwiseAbs().maxCoeff() == 0.0);
  }

  const CMatrix s = random_b_linear_operator(e, 101);
  const CMatrix t = random_b_linear_operator(e, 102);
  for (int b = 0; b < 2; ++b) {
    CHECK((localize(e, CMatrix(s + t), b) - (localize(e, s, b) + localize(e, t, b)))
              .cwiseAbs()
              .maxCoeff() <= kExactTol);
    CHECK((localize(e, CMatrix(s * t), b) - localize(e, s, b) * localize(e, t, b))
              .cwiseAbs()
              .maxCoeff() <= kExactTol);
    CHECK((localize(e, CMatrix(s.adjoint()), b) - localize(e, s, b).adjoint())
              .cwiseAbs()
              .maxCoeff() <= kExactTol);
  }
}

TEST_CASE("module adjoint satisfies the inner-product identity") {
  const FiniteModule e = make_module({2, 3}, 2);
  const CMatrix t = random_b_linear_operator(e, 7);
  const CMatrix tstar = adjoint(e, t);
  for (int trial = 0; trial < 8; ++trial) {
    const CVector u = random_module_vector(e, 200 + trial);
    const CVector v = random_module_vector(e, 300 + trial);
    const AlgebraMat lhs = module_inner(e, CVector(t * u), v);
    const AlgebraMat rhs = module_inner(e, u, CVector(tstar * v));
    for (size_t b = 0; b < lhs.blocks.size(); ++b)
      CHECK((lhs.blocks[b] - rhs.blocks[b]).cwiseAbs().maxCoeff() <= 1e-11);
  }

  // a generic dense matrix is not right-B-linear
  CMatrix generic = CMatrix::Zero(e.flat_dim(), e.flat_dim());
  generic(0, 1) = Complex(1, 0);
  CHECK_FALSE(is_b_linear(e, generic));
  CHECK_THROWS_AS(adjoint(e, generic), PreconditionError);
  CHECK_THROWS_AS(localize(e, generic, 0), PreconditionError);
}

TEST_CASE("local-global verdicts") {
  const FiniteModule e = make_module({2, 3}, 2);
  const CMatrix h = random_b_linear_operator(e, 55, /*hermitian=*/true);
  const LocalGlobalVerdict ok = check_local_global(e, h);
  CHECK(ok.verdict);
  CHECK(ok.perturbed_check_failed);

  // nilpotent upper block breaks it
  CMatrix broken = h;
  const CMatrix nil = random_b_linear_operator(e, 56);
  broken += nil - CMatrix(nil.adjoint()) + nil;  // non-symmetric B-linear part
  const LocalGlobalVerdict bad = check_local_global(e, broken);
  CHECK_FALSE(bad.verdict);

  const CMatrix zero = CMatrix::Zero(e.flat_dim(), e.flat_dim());
  CHECK(check_local_global(e, zero).verdict);
}

TEST_CASE("positivity of the module inner product") {
  const FiniteModule e = make_module({2, 3}, 2);
  for (int trial = 0; trial < 16; ++trial) {
    const CVector u = random_module_vector(e, 400 + trial);
    const AlgebraMat gram = module_inner(e, u, u);
    for (const CMatrix& blk : gram.blocks) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(blk, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -kExactTol);
    }
  }
}

TEST_CASE("lemma battery passes on seeded instances") {
  const BatteryReport rep = check_lemma_battery(2024);
  CHECK(rep.instances == 100);
  CHECK(rep.failures == 0);
  CHECK(rep.first_failure_json.empty());
  CHECK(rep.max_defect <= kExactTol);

  // determinism: same seed, same defects
  const BatteryReport again = check_lemma_battery(2024);
  CHECK(again.max_defect == rep.max_defect);
}

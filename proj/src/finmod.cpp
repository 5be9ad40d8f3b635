#include "opcert/finmod.hpp"

#include <random>
#include <sstream>

#include <json.hpp>

namespace opcert {

int FiniteAlgebra::dim() const {
  int d = 0;
  for (int b : block_dims) d += b * b;
  return d;
}

int FiniteAlgebra::block_offset(int i) const {
  int off = 0;
  for (int k = 0; k < i; ++k) off += block_dims[k] * block_dims[k];
  return off;
}

FiniteModule make_module(std::vector<int> block_dims, int rank) {
  if (block_dims.empty()) throw PreconditionError("make_module: empty block list");
  for (int d : block_dims)
    if (d < 1) throw PreconditionError("make_module: block dimensions must be >= 1");
  if (rank < 1) throw PreconditionError("make_module: rank must be >= 1");
  return FiniteModule{FiniteAlgebra{std::move(block_dims)}, rank};
}

namespace {

CMatrix random_complex(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

// coordinate of (slot j, block i, entry (r, c)) in the flattened module
int flat_index(const FiniteModule& e, int slot, int block, int r, int c) {
  const int db = e.algebra.block_dims[block];
  return slot * e.algebra.dim() + e.algebra.block_offset(block) + c * db + r;
}

}  // namespace

AlgebraMat random_algebra_element(const FiniteAlgebra& b, std::uint64_t seed, bool hermitian) {
  std::mt19937_64 rng(seed);
  AlgebraMat a;
  for (int d : b.block_dims) {
    CMatrix m = random_complex(d, d, rng);
    if (hermitian) m = CMatrix(0.5 * (m + m.adjoint()));
    a.blocks.push_back(std::move(m));
  }
  return a;
}

CVector random_module_vector(const FiniteModule& e, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(e.flat_dim());
  for (int i = 0; i < v.size(); ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

CMatrix random_b_linear_operator(const FiniteModule& e, std::uint64_t seed, bool hermitian) {
  // element of M_rank(B) assembled into flat coordinates: left multiplication
  // by t_{j'j} on each slot; right-B-linearity is automatic for this form
  std::mt19937_64 rng(seed);
  const int nb = static_cast<int>(e.algebra.block_dims.size());
  CMatrix t = CMatrix::Zero(e.flat_dim(), e.flat_dim());
  for (int i = 0; i < nb; ++i) {
    const int d = e.algebra.block_dims[i];
    for (int jr = 0; jr < e.rank; ++jr)
      for (int jc = 0; jc < e.rank; ++jc) {
        CMatrix blk = random_complex(d, d, rng);
        // act by left multiplication on the (col-major) block coordinates:
        // vec(blk * X) = (I (x) blk) vec(X)
        for (int c = 0; c < d; ++c)
          for (int r = 0; r < d; ++r)
            for (int r2 = 0; r2 < d; ++r2)
              t(flat_index(e, jr, i, r, c), flat_index(e, jc, i, r2, c)) += blk(r, r2);
      }
  }
  if (hermitian) t = CMatrix(0.5 * (t + t.adjoint()));
  return t;
}

CVector right_mult(const FiniteModule& e, const CVector& u, const AlgebraMat& b) {
  CVector out = CVector::Zero(e.flat_dim());
  const int nb = static_cast<int>(e.algebra.block_dims.size());
  for (int j = 0; j < e.rank; ++j)
    for (int i = 0; i < nb; ++i) {
      const int d = e.algebra.block_dims[i];
      CMatrix x(d, d);
      for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) x(r, c) = u[flat_index(e, j, i, r, c)];
      CMatrix y = x * b.blocks[i];
      for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) out[flat_index(e, j, i, r, c)] = y(r, c);
    }
  return out;
}

AlgebraMat module_inner(const FiniteModule& e, const CVector& u, const CVector& v) {
  AlgebraMat out;
  const int nb = static_cast<int>(e.algebra.block_dims.size());
  for (int i = 0; i < nb; ++i) {
    const int d = e.algebra.block_dims[i];
    CMatrix acc = CMatrix::Zero(d, d);
    for (int j = 0; j < e.rank; ++j) {
      CMatrix xu(d, d), xv(d, d);
      for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) {
          xu(r, c) = u[flat_index(e, j, i, r, c)];
          xv(r, c) = v[flat_index(e, j, i, r, c)];
        }
      acc += xu.adjoint() * xv;
    }
    out.blocks.push_back(std::move(acc));
  }
  return out;
}

bool is_b_linear(const FiniteModule& e, const CMatrix& t, double tol) {
  const int nb = static_cast<int>(e.algebra.block_dims.size());
  // check T(u b) = (T u) b on flat basis vectors u and matrix units b
  for (int col = 0; col < e.flat_dim(); ++col) {
    CVector u = CVector::Zero(e.flat_dim());
    u[col] = Complex(1, 0);
    const CVector tu = t * u;
    for (int i = 0; i < nb; ++i) {
      const int d = e.algebra.block_dims[i];
      for (int a = 0; a < d; ++a)
        for (int bb = 0; bb < d; ++bb) {
          AlgebraMat unit;
          for (int k = 0; k < nb; ++k)
            unit.blocks.push_back(CMatrix::Zero(e.algebra.block_dims[k], e.algebra.block_dims[k]));
          unit.blocks[i](a, bb) = Complex(1, 0);
          const CVector lhs = t * right_mult(e, u, unit);
          const CVector rhs = right_mult(e, tu, unit);
          if ((lhs - rhs).cwiseAbs().maxCoeff() > tol) return false;
        }
    }
  }
  return true;
}

CMatrix adjoint(const FiniteModule& e, const CMatrix& t) {
  if (!is_b_linear(e, t)) throw PreconditionError("adjoint: operator is not right-B-linear");
  // the flat Hermitian adjoint implements the module adjoint: taking the
  // trace of <Tu|v> = <u|T*v> reduces to the flat inner product
  return t.adjoint();
}

CMatrix localize(const FiniteModule& e, const CMatrix& t, int block) {
  if (block < 0 || block >= static_cast<int>(e.algebra.block_dims.size()))
    throw PreconditionError("localize: block index out of range");
  if (!is_b_linear(e, t)) throw PreconditionError("localize: operator is not right-B-linear");
  const int d = e.algebra.block_dims[block];
  const int nd = e.rank * d;
  // basis of E (x)_B C^d: (slot j, e_{alpha 0} (x) e_0); the induced matrix
  // reads off column 0 of the image blocks
  CMatrix loc(nd, nd);
  for (int j = 0; j < e.rank; ++j)
    for (int alpha = 0; alpha < d; ++alpha) {
      CVector u = CVector::Zero(e.flat_dim());
      u[flat_index(e, j, block, alpha, 0)] = Complex(1, 0);
      const CVector tu = t * u;
      for (int j2 = 0; j2 < e.rank; ++j2)
        for (int a2 = 0; a2 < d; ++a2)
          loc(j2 * d + a2, j * d + alpha) = tu[flat_index(e, j2, block, a2, 0)];
    }
  return loc;
}

LocalGlobalVerdict check_local_global(const FiniteModule& e, const CMatrix& t, std::uint64_t seed) {
  LocalGlobalVerdict out;
  out.verdict = true;
  for (int i = 0; i < static_cast<int>(e.algebra.block_dims.size()); ++i) {
    const CMatrix loc = localize(e, t, i);
    const double defect = (loc - loc.adjoint()).cwiseAbs().maxCoeff();
    out.hermiticity_defects.push_back(defect);
    if (defect > kExactTol) out.verdict = false;
  }
  // deliberately broken copy: add a nilpotent upper-triangular B-linear part
  CMatrix pert = random_b_linear_operator(e, mix_seed(seed, 0x70b5), false);
  CMatrix broken = t + pert - pert.adjoint() + CMatrix::Identity(t.rows(), t.cols()) * Complex(0, 1e-3);
  bool broken_fails = false;
  for (int i = 0; i < static_cast<int>(e.algebra.block_dims.size()); ++i) {
    const CMatrix loc = localize(e, broken, i);
    if ((loc - loc.adjoint()).cwiseAbs().maxCoeff() > kExactTol) broken_fails = true;
  }
  out.perturbed_check_failed = broken_fails;
  return out;
}

namespace {

nlohmann::ordered_json matrix_json(const CMatrix& m) {
  nlohmann::ordered_json re = nlohmann::ordered_json::array();
  nlohmann::ordered_json im = nlohmann::ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json rr = nlohmann::ordered_json::array();
    nlohmann::ordered_json ri = nlohmann::ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return nlohmann::ordered_json{{"re", re}, {"im", im}};
}

}  // namespace

BatteryReport check_lemma_battery(std::uint64_t seed) {
  BatteryReport rep;
  const FiniteModule e = make_module({2, 3}, 2);
  auto fail = [&](const std::string& identity, int inst, const CMatrix& a, const CMatrix& b,
                  double defect) {
    ++rep.failures;
    if (rep.first_failure_json.empty()) {
      nlohmann::ordered_json j;
      j["identity"] = identity;
      j["instance"] = inst;
      j["defect"] = defect;
      j["lhs"] = matrix_json(a);
      j["rhs"] = matrix_json(b);
      rep.first_failure_json = j.dump();
    }
  };

  for (int inst = 0; inst < 100; ++inst) {
    const std::uint64_t s = mix_seed(seed, inst);
    ++rep.instances;

    // [M, phi] = M phi - (M phi)^* for Hermitian M, phi
    const CMatrix m = random_b_linear_operator(e, mix_seed(s, 1), true);
    const CMatrix phi = random_b_linear_operator(e, mix_seed(s, 2), true);
    {
      const CMatrix lhs = m * phi - phi * m;
      const CMatrix mphi = m * phi;
      const CMatrix rhs = mphi - mphi.adjoint();
      const double defect = (lhs - rhs).cwiseAbs().maxCoeff();
      rep.max_defect = std::max(rep.max_defect, defect);
      if (defect > kExactTol) fail("[M,phi] = Mphi - (Mphi)^*", inst, lhs, rhs, defect);
    }

    // localization is a *-homomorphism
    const CMatrix sop = random_b_linear_operator(e, mix_seed(s, 3), false);
    const CMatrix top = random_b_linear_operator(e, mix_seed(s, 4), false);
    for (int blk = 0; blk < 2; ++blk) {
      const CMatrix ls = localize(e, sop, blk), lt = localize(e, top, blk);
      {
        const CMatrix lhs = localize(e, CMatrix(sop + top), blk);
        const CMatrix rhs = ls + lt;
        const double defect = (lhs - rhs).cwiseAbs().maxCoeff();
        rep.max_defect = std::max(rep.max_defect, defect);
        if (defect > kExactTol) fail("(S+T)^pi = S^pi + T^pi", inst, lhs, rhs, defect);
      }
      {
        const CMatrix lhs = localize(e, CMatrix(sop * top), blk);
        const CMatrix rhs = ls * lt;
        const double defect = (lhs - rhs).cwiseAbs().maxCoeff();
        rep.max_defect = std::max(rep.max_defect, defect);
        if (defect > kExactTol) fail("(ST)^pi = S^pi T^pi", inst, lhs, rhs, defect);
      }
      {
        const CMatrix lhs = localize(e, CMatrix(sop.adjoint()), blk);
        const CMatrix rhs = ls.adjoint();
        const double defect = (lhs - rhs).cwiseAbs().maxCoeff();
        rep.max_defect = std::max(rep.max_defect, defect);
        if (defect > kExactTol) fail("(T^*)^pi = (T^pi)^*", inst, lhs, rhs, defect);
      }
    }

    // positivity of <u|u>
    const CVector u = random_module_vector(e, mix_seed(s, 5));
    const AlgebraMat gram = module_inner(e, u, u);
    for (const CMatrix& blk : gram.blocks) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(blk, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      if (lo < -kExactTol) fail("<u|u> >= 0", inst, blk, blk, -lo);
    }

    // local-global equivalence in both directions
    const CMatrix h = random_b_linear_operator(e, mix_seed(s, 6), true);
    const LocalGlobalVerdict lg = check_local_global(e, h, mix_seed(s, 7));
    if (!lg.verdict) fail("local-global: Hermitian passes", inst, h, h, 1.0);
    if (!lg.perturbed_check_failed) fail("local-global: perturbed fails", inst, h, h, 1.0);
  }
  return rep;
}

}  // namespace opcert
